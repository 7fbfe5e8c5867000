//! Dense real polynomials stored in ascending coefficient order, plus the
//! small amount of univariate root isolation and line search the impact
//! computations need.

use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Drops trailing zero coefficients (an empty vector is the zero polynomial).
pub fn trim(c: &mut Vec<f64>) {
    while c.last() == Some(&0.0) {
        c.pop();
    }
}

pub fn degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|&x| x != 0.0)
}

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

pub fn eval_complex(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &k| acc * z + k)
}

/// `ln |p(z)|` without overflow: Horner in `z` inside the unit disk and in
/// `1/z` outside it.
pub fn ln_abs_at(c: &[f64], z: C64) -> f64 {
    let d = match degree(c) {
        Some(d) => d,
        None => return f64::NEG_INFINITY,
    };
    let r = z.norm();
    if r <= 1.0 {
        eval_complex(&c[..=d], z).norm().ln()
    } else {
        let w = z.inv();
        let rev = c[..=d].iter().fold(C64::new(0.0, 0.0), |acc, &k| acc * w + k);
        d as f64 * r.ln() + rev.norm().ln()
    }
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &x)| k as f64 * x).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a + s·b`.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[i] += s * x;
    }
    trim(&mut out);
    out
}

/// Upper bound on the moduli of all roots (Fujiwara).
pub fn root_bound(c: &[f64]) -> f64 {
    let d = match degree(c) {
        Some(d) if d > 0 => d,
        _ => return 0.0,
    };
    let lead = c[d].abs();
    let mut bound: f64 = 0.0;
    for k in 1..=d {
        let coef = c[d - k].abs() / lead;
        let term = if k == d { (coef / 2.0).powf(1.0 / k as f64) } else { coef.powf(1.0 / k as f64) };
        bound = bound.max(term);
    }
    2.0 * bound
}

fn normalize(mut c: Vec<f64>) -> Vec<f64> {
    let m = c.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m > 0.0 {
        for x in &mut c {
            *x /= m;
        }
    }
    // remainders carry rounding noise in their top coefficients
    while let Some(&last) = c.last() {
        if last.abs() <= 1e-13 {
            c.pop();
        } else {
            break;
        }
    }
    c
}

/// Remainder of `a` divided by `b`.
fn rem(a: &[f64], b: &[f64]) -> Vec<f64> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let factor = r[r.len() - 1] / b[db];
        for (i, &x) in b.iter().enumerate() {
            r[shift + i] -= factor * x;
        }
        r.pop();
    }
    r
}

fn sturm_chain(c: &[f64]) -> Vec<Vec<f64>> {
    let p0 = normalize(c.to_vec());
    let p1 = normalize(derivative(&p0));
    let mut chain = vec![p0, p1];
    loop {
        let k = chain.len();
        if chain[k - 1].len() <= 1 {
            break;
        }
        let r: Vec<f64> = rem(&chain[k - 2], &chain[k - 1]).into_iter().map(|x| -x).collect();
        let r = normalize(r);
        if r.is_empty() {
            break;
        }
        chain.push(r);
    }
    chain
}

fn sign_changes(chain: &[Vec<f64>], x: f64) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for p in chain {
        let v = eval(p, x);
        if v != 0.0 {
            if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

/// Distinct real roots of `c` in `[lo, hi]`, isolated with a Sturm sequence
/// and refined by bisection to relative width `1e-12`.
///
/// Intended for modest degrees; the chain is built in floating point.
pub fn real_roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    trim(&mut c);
    if degree(&c).is_none_or(|d| d == 0) {
        return Vec::new();
    }
    // work in u = x / scale so the search interval is O(1)
    let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    let scaled: Vec<f64> = {
        let mut s = 1.0;
        c.iter()
            .map(|&k| {
                let v = k * s;
                s *= scale;
                v
            })
            .collect()
    };
    let chain = sturm_chain(&scaled);
    let (ulo, uhi) = (lo / scale, hi / scale);
    let mut roots = Vec::new();
    let mut stack = vec![(ulo, uhi, sign_changes(&chain, ulo), sign_changes(&chain, uhi))];
    while let Some((a, b, va, vb)) = stack.pop() {
        let count = va.saturating_sub(vb);
        if count == 0 {
            continue;
        }
        if b - a <= 1e-12 * b.abs().max(1e-300) {
            roots.push(0.5 * (a + b));
            continue;
        }
        if count == 1 {
            roots.push(bisect_root(&chain, a, b, va));
            continue;
        }
        let m = 0.5 * (a + b);
        let vm = sign_changes(&chain, m);
        stack.push((a, m, va, vm));
        stack.push((m, b, vm, vb));
    }
    roots.sort_by(f64::total_cmp);
    if eval(&chain[0], ulo) == 0.0 && roots.first().is_none_or(|r| *r > ulo) {
        roots.insert(0, ulo);
    }
    roots.into_iter().map(|u| u * scale).collect()
}

fn bisect_root(chain: &[Vec<f64>], mut a: f64, mut b: f64, va: usize) -> f64 {
    let p = &chain[0];
    let (fa, fb) = (eval(p, a), eval(p, b));
    let use_sign = fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0);
    for _ in 0..200 {
        if b - a <= 1e-12 * b.abs().max(1e-300) {
            break;
        }
        let m = 0.5 * (a + b);
        let go_left = if use_sign {
            let fm = eval(p, m);
            if fm == 0.0 {
                return m;
            }
            (fm > 0.0) != (fa > 0.0)
        } else {
            sign_changes(chain, m) < va
        };
        if go_left {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `n` points spaced evenly in log scale over `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}
