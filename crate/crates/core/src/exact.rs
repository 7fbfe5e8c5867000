//! Characteristic polynomial and full adjugate of `sI + L̄` in exact integer
//! arithmetic.
//!
//! Every finite `f64` is a dyadic rational, so `2^e·L̄` is an integer matrix
//! for a suitable `e`. The Faddeev–LeVerrier recurrence then runs over big
//! integers with exact divisions, and only the final coefficients are
//! rounded back to `f64`. This keeps exact zeros exact, which is what makes
//! numerator degrees (and hence relative degrees) trustworthy at n = 50.

use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `Q(s) = det(sI + L̄)` and every `P_(i,a)(s) = e_iᵀ adj(sI + L̄) e_a`.
#[derive(Debug, Clone)]
pub struct ResolventPolynomials {
    /// Ascending coefficients of `Q`, monic of degree n.
    pub charpoly: Vec<f64>,
    /// Ascending coefficients of `P_(i,a)`, indexed `i * n + a`, trimmed.
    pub numerators: Vec<Vec<f64>>,
}

/// Splits a finite double into `m · 2^k` with `m` odd (or zero).
fn dyadic(x: f64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut k) = if exp == 0 { (frac as i64, -1074) } else { ((frac | (1u64 << 52)) as i64, exp - 1075) };
    while m & 1 == 0 {
        m >>= 1;
        k += 1;
    }
    (sign * m, k)
}

/// `v · 2^pow2` rounded to the nearest double (up to one ulp).
pub fn big_to_f64(v: &BigInt, pow2: i64) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let mag = v.magnitude();
    let bits = mag.bits() as i64;
    let shift = (bits - 64).max(0);
    let top = (mag >> shift as usize).to_u64().expect("fits in 64 bits") as f64;
    let value = ldexp(top, shift + pow2);
    if v.sign() == Sign::Minus {
        -value
    } else {
        value
    }
}

fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

/// Runs Faddeev–LeVerrier on `A = −2^e·L̄`.
///
/// With `det(tI − A) = Σ c_k t^k` and `adj(tI − A) = Σ_k M_k t^{n−k}`,
/// substituting `t = 2^e s` gives `Q_k = c_k 2^{e(k−n)}` and the coefficient
/// of `s^j` in `adj(sI + L̄)` as `M_{n−j} 2^{e(j−n+1)}`.
pub fn resolvent_polynomials(lbar: &DMatrix<f64>) -> Result<ResolventPolynomials> {
    let n = lbar.nrows();
    if n == 0 || lbar.ncols() != n {
        return Err(Error::Numerical("matrix must be square and nonempty".into()));
    }
    let mut parts = Vec::with_capacity(n * n);
    let mut e: i64 = 0;
    for i in 0..n {
        for j in 0..n {
            let x = lbar[(i, j)];
            if !x.is_finite() {
                return Err(Error::Numerical("non-finite matrix entry".into()));
            }
            let (m, k) = dyadic(x);
            if m != 0 {
                e = e.max(-k);
            }
            parts.push((m, k));
        }
    }
    // sparse rows of A = −2^e·L̄
    let rows: Vec<Vec<(usize, BigInt)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let (m, k) = parts[i * n + j];
                    (m != 0).then(|| (j, -(BigInt::from(m) << (k + e) as usize)))
                })
                .collect()
        })
        .collect();

    let mut c: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::from(1);
    let mut numerators = vec![vec![0.0; n]; n * n];
    let mut m_prev: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];

    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1} I
        let ck = c[n - k + 1].clone();
        let m_k: Vec<Vec<BigInt>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![BigInt::zero(); n];
                for (j, aij) in &rows[i] {
                    let src = &m_prev[*j];
                    for l in 0..n {
                        if !src[l].is_zero() {
                            row[l] += aij * &src[l];
                        }
                    }
                }
                row[i] += &ck;
                row
            })
            .collect();
        // tr(A·M_k)
        let trace: BigInt = (0..n)
            .into_par_iter()
            .map(|i| rows[i].iter().fold(BigInt::zero(), |acc, (j, aij)| acc + aij * &m_k[*j][i]))
            .reduce(BigInt::zero, |a, b| a + b);
        let (quot, rem) = (&trace / BigInt::from(k), &trace % BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::Numerical("inexact division in Faddeev–LeVerrier".into()));
        }
        c[n - k] = -quot;

        let j = (n - k) as i64;
        let pow2 = e * (j - n as i64 + 1);
        numerators.par_chunks_mut(n).enumerate().for_each(|(i, chunk)| {
            for (a, poly) in chunk.iter_mut().enumerate() {
                poly[j as usize] = big_to_f64(&m_k[i][a], pow2);
            }
        });
        m_prev = m_k;
    }

    let charpoly = (0..=n).map(|k| big_to_f64(&c[k], e * (k as i64 - n as i64))).collect();
    for p in &mut numerators {
        crate::poly::trim(p);
    }
    Ok(ResolventPolynomials { charpoly, numerators })
}
