//! Closed-loop consensus dynamics `ẋ = −L̄x + e_a ζ`, `L̄ = L + Θ`, and the
//! scalar channels `G_(i,a)(s) = P_(i,a)(s) / Q(s)` between attack vertex `a`
//! and output vertex `i`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Schur};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::resolvent_polynomials;
use crate::graph::{distance, laplacian, Network};
use crate::poly::{self, C64};

/// Points in each cached frequency table.
pub const TABLE_POINTS: usize = 2048;

/// `ln |P_(i,a)(jω)|` for every output `i` on a shared log-spaced grid in `x = ω²`.
#[derive(Debug, Clone)]
pub struct LogGainTable {
    pub x: Vec<f64>,
    /// `ln_abs[i][k]` for output vertex `i` at grid point `k`.
    pub ln_abs: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct ClosedLoopSystem {
    net: Network,
    lbar: DMatrix<f64>,
    charpoly: Vec<f64>,
    numerators: Vec<Vec<f64>>,
    lambda_min: f64,
    lambda_max: f64,
    tables: Vec<OnceLock<LogGainTable>>,
}

impl ClosedLoopSystem {
    pub fn build(net: &Network) -> Result<Self> {
        let n = net.n();
        let mut lbar = laplacian(net);
        for i in 0..n {
            lbar[(i, i)] += net.theta()[i];
        }
        let eig = lbar.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if !(lambda_min > 1e-12 * lambda_max.max(1.0)) {
            return Err(Error::Numerical(format!("closed-loop matrix not positive definite (λ_min = {lambda_min:e})")));
        }
        let polys = resolvent_polynomials(&lbar)?;
        Ok(ClosedLoopSystem {
            net: net.clone(),
            lbar,
            charpoly: polys.charpoly,
            numerators: polys.numerators,
            lambda_min,
            lambda_max,
            tables: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn lbar(&self) -> &DMatrix<f64> {
        &self.lbar
    }

    /// Ascending coefficients of `Q(s) = det(sI + L̄)`.
    pub fn charpoly(&self) -> &[f64] {
        &self.charpoly
    }

    /// Ascending coefficients of `P_(out,a)(s)`.
    pub fn numerator(&self, out: usize, a: usize) -> &[f64] {
        &self.numerators[out * self.n() + a]
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// First `r` with a nonzero Markov parameter `e_outᵀ(−L̄)^{r−1}e_a`.
    pub fn relative_degree(&self, out: usize, a: usize) -> usize {
        let n = self.n();
        let norm = (0..n).map(|i| self.lbar.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut v: DVector<f64> = DVector::zeros(n);
        v[a] = 1.0;
        let mut scale = 1.0;
        let mut r = n;
        for k in 0..n {
            if v[out].abs() > 1e-9 * scale {
                r = k + 1;
                break;
            }
            v = -(&self.lbar * v);
            scale *= norm;
        }
        let hops = distance(&self.net, out, a) + 1;
        if hops != r {
            log::warn!("relative degree {r} for pair ({}, {}) disagrees with distance + 1 = {hops}", a + 1, out + 1);
        }
        r
    }

    /// `n − deg P_(out,a)`, read off the exact numerator.
    pub fn degree_gap(&self, out: usize, a: usize) -> usize {
        self.n() - poly::degree(self.numerator(out, a)).unwrap_or(0)
    }

    /// `e_outᵀ (sI + L̄)⁻¹ e_a` by a direct complex solve.
    pub fn resolvent_entry(&self, out: usize, a: usize, s: C64) -> C64 {
        let n = self.n();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let v = C64::new(self.lbar[(i, j)], 0.0);
            if i == j {
                v + s
            } else {
                v
            }
        });
        let mut rhs = DVector::from_element(n, C64::new(0.0, 0.0));
        rhs[a] = C64::new(1.0, 0.0);
        let z = m.lu().solve(&rhs).expect("s is off the spectrum");
        z[out]
    }

    /// `P(s)/Q(s)` from the cached polynomials.
    pub fn transfer(&self, out: usize, a: usize, s: C64) -> C64 {
        poly::eval_complex(self.numerator(out, a), s) / poly::eval_complex(&self.charpoly, s)
    }

    /// Finite invariant zeros of the channel, as eigenvalues of the zero
    /// dynamics `A − e_a (c A^{r−1} e_a)⁻¹ c A^r` on `ker [c; cA; …; cA^{r−1}]`,
    /// with `A = −L̄` and `c = e_outᵀ`.
    pub fn invariant_zeros(&self, out: usize, a: usize) -> Result<Vec<C64>> {
        let n = self.n();
        let r = self.degree_gap(out, a);
        if r >= n {
            return Ok(Vec::new());
        }
        let a_mat = -&self.lbar;
        // orthonormal rows spanning c, cA, …, cA^{r−1}
        let mut rows: Vec<DVector<f64>> = Vec::with_capacity(r);
        let mut v = DVector::zeros(n);
        v[out] = 1.0;
        let mut last = v.clone();
        for k in 0..r {
            if k > 0 {
                last = a_mat.tr_mul(&last);
                last /= last.norm();
                v = last.clone();
            }
            for _ in 0..2 {
                for u in &rows {
                    let d = u.dot(&v);
                    v.axpy(-d, u, 1.0);
                }
            }
            let norm = v.norm();
            if !(norm > 1e-12) {
                return Err(Error::Numerical(format!("output rows of pair ({}, {}) are dependent", a + 1, out + 1)));
            }
            rows.push(v.clone() / norm);
        }
        let gain = last[a];
        if gain.abs() <= 1e-12 {
            return Err(Error::Numerical(format!("vanishing Markov parameter for pair ({}, {})", a + 1, out + 1)));
        }
        let next = a_mat.tr_mul(&last);
        let mut a_z = a_mat.clone();
        for j in 0..n {
            a_z[(a, j)] -= next[j] / gain;
        }
        let mut proj = DMatrix::zeros(n, n);
        for u in &rows {
            proj += u * u.transpose();
        }
        let eig = proj.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let basis = DMatrix::from_columns(&order[..n - r].iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
        let z = basis.transpose() * a_z * &basis;
        let schur = Schur::try_new(z, 1e-15, 10_000).ok_or_else(|| Error::RootSolve("Schur iteration did not converge".into()))?;
        let mut zeros: Vec<C64> = schur.complex_eigenvalues().iter().cloned().collect();
        for z in &mut zeros {
            if z.im.abs() <= 1e-12 * z.norm().max(1e-300) {
                z.im = 0.0;
            }
        }
        zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(zeros)
    }

    /// Zeros of every listed `(attack, output)` pair.
    pub fn zero_report(&self, pairs: &[(usize, usize)]) -> Result<ZeroReport> {
        let entries = pairs
            .par_iter()
            .map(|&(a, out)| {
                Ok(ZeroEntry {
                    attack: a,
                    output: out,
                    relative_degree: self.degree_gap(out, a),
                    zeros: self.invariant_zeros(out, a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let max_real_part = entries
            .iter()
            .flat_map(|e| e.zeros.iter().map(|z| z.re))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(ZeroReport { entries, max_real_part })
    }

    /// Report over all pairs with `a ≤ out` (`P` is symmetric in its indices).
    pub fn full_zero_report(&self) -> Result<ZeroReport> {
        let n = self.n();
        let pairs: Vec<_> = (0..n).flat_map(|a| (a..n).map(move |m| (a, m))).collect();
        self.zero_report(&pairs)
    }

    /// Frequency grid for attack vertex `a`, computed once and shared.
    pub fn log_gain_table(&self, a: usize) -> &LogGainTable {
        self.tables[a].get_or_init(|| {
            let x = poly::logspace(1e-6 * self.lambda_min.powi(2), 1e6 * self.lambda_max.powi(2), TABLE_POINTS);
            let ln_abs = (0..self.n())
                .map(|i| {
                    let p = self.numerator(i, a);
                    x.iter().map(|&xk| poly::ln_abs_at(p, C64::new(0.0, xk.sqrt()))).collect()
                })
                .collect();
            LogGainTable { x, ln_abs }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ZeroEntry {
    pub attack: usize,
    pub output: usize,
    pub relative_degree: usize,
    pub zeros: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct ZeroReport {
    pub entries: Vec<ZeroEntry>,
    pub max_real_part: f64,
}

impl ZeroReport {
    /// One `{"pair":[a,out],"relative_degree":r,"zeros":[[re,im],...]}` object per entry, 1-based.
    pub fn to_json(&self) -> String {
        let items: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                let zeros: Vec<[f64; 2]> =
                    e.zeros.iter().map(|z| [crate::report::sig9(z.re), crate::report::sig9(z.im)]).collect();
                serde_json::json!({
                    "pair": [e.attack + 1, e.output + 1],
                    "relative_degree": e.relative_degree,
                    "zeros": zeros,
                })
            })
            .collect();
        serde_json::to_string(&items).expect("report serializes") + "\n"
    }
}

const ROOT_RESIDUAL_TOL: f64 = 1e-7;

/// Roots of a real polynomial from the eigenvalues of its companion matrix,
/// with the variable rescaled to unit geometric root modulus and each root
/// polished by Newton steps.
pub fn polynomial_roots(c: &[f64]) -> Result<Vec<C64>> {
    let d = match poly::degree(c) {
        Some(d) => d,
        None => return Err(Error::RootSolve("zero polynomial".into())),
    };
    let zero_roots = c.iter().position(|&x| x != 0.0).unwrap();
    let core = &c[zero_roots..=d];
    let dc = core.len() - 1;
    let mut roots = vec![C64::new(0.0, 0.0); zero_roots];
    if dc == 0 {
        return Ok(roots);
    }
    let scale = (core[0] / core[dc]).abs().powf(1.0 / dc as f64);
    let monic: Vec<f64> =
        core.iter().enumerate().map(|(k, &x)| x / core[dc] * scale.powi(k as i32 - dc as i32)).collect();
    let mut comp = DMatrix::zeros(dc, dc);
    for i in 1..dc {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..dc {
        comp[(i, dc - 1)] = -monic[i];
    }
    let schur = Schur::try_new(comp, 1e-15, 10_000).ok_or_else(|| Error::RootSolve("Schur iteration did not converge".into()))?;
    let deriv = poly::derivative(c);
    for z in schur.complex_eigenvalues().iter() {
        let mut z = z * scale;
        let mut res = backward_residual(c, z);
        for _ in 0..5 {
            let dz = poly::eval_complex(c, z) / poly::eval_complex(&deriv, z);
            if !dz.re.is_finite() || !dz.im.is_finite() {
                break;
            }
            let cand = z - dz;
            let cres = backward_residual(c, cand);
            if cres < res {
                z = cand;
                res = cres;
            } else {
                break;
            }
        }
        // unbalanced companion matrices of high-degree numerators with
        // clustered zeros lose a few digits; anything worse is a failed solve
        if !(res <= ROOT_RESIDUAL_TOL) {
            return Err(Error::RootSolve(format!("residual {res:e} at root {z}")));
        }
        roots.push(z);
    }
    // real polynomials: snap conjugate-pair noise on real roots
    for z in &mut roots {
        if z.im.abs() <= 1e-12 * z.norm().max(1e-300) {
            z.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// `|p(z)| / Σ |c_k| |z|^k`.
fn backward_residual(c: &[f64], z: C64) -> f64 {
    let r = z.norm();
    if r > 1.0 {
        // compare in 1/z to stay in range
        let w = z.inv();
        let num = c.iter().fold(C64::new(0.0, 0.0), |acc, &k| acc * w + k).norm();
        let den = c.iter().fold(0.0, |acc, &k| acc * w.norm() + k.abs());
        num / den
    } else {
        poly::eval_complex(c, z).norm() / poly::eval(&c.iter().map(|x| x.abs()).collect::<Vec<_>>(), r)
    }
}

/// Uniformly raises all self-loop gains so every finite invariant zero of
/// every channel has real part at most `−margin`.
pub fn tune_self_loops(net: &Network, margin: f64) -> Result<Network> {
    Ok(tune_self_loops_report(net, margin)?.0)
}

/// Like [`tune_self_loops`], also returning the offset applied (0 if none).
pub fn tune_self_loops_report(net: &Network, margin: f64) -> Result<(Network, f64)> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidScenario(format!("tuning margin must be positive, got {margin}")));
    }
    let sys = ClosedLoopSystem::build(net)?;
    let mu = sys.full_zero_report()?.max_real_part;
    if mu > -margin {
        let offset = mu + margin;
        let theta = net.theta().iter().map(|t| t + offset).collect();
        Ok((net.with_theta(theta)?, offset))
    } else {
        Ok((net.clone(), 0.0))
    }
}
