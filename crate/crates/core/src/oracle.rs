//! Slow, independent checks of the fast paths: a literal domination test, a
//! dense frequency sweep using linear solves, and a finite-dimensional attack
//! problem solved as a generalized symmetric eigenproblem.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::ClosedLoopSystem;
use crate::error::{Error, Result};
use crate::graph::{MonitorSet, Network};
use crate::poly::{self, C64};

/// Every vertex is a member or has a member neighbor, checked edge by edge.
pub fn dominating_oracle(net: &Network, m_set: &MonitorSet) -> bool {
    (0..net.n()).all(|u| {
        m_set.contains(u)
            || net.edges().iter().any(|e| (e.u == u && m_set.contains(e.v)) || (e.v == u && m_set.contains(e.u)))
    })
}

/// Solves `(jωI + L̄) z = e_a` by Gaussian elimination with partial pivoting.
fn resolvent_column(lbar: &DMatrix<f64>, a: usize, omega: f64) -> Vec<C64> {
    let n = lbar.nrows();
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row: Vec<C64> = (0..n).map(|j| C64::new(lbar[(i, j)], 0.0)).collect();
            row[i] += C64::new(0.0, omega);
            row.push(C64::new(if i == a { 1.0 } else { 0.0 }, 0.0));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / p;
            if f != C64::new(0.0, 0.0) {
                let (upper, lower) = m.split_at_mut(r);
                for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *dst -= f * src;
                }
            }
        }
    }
    let mut z = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * z[j];
        }
        z[i] = s / m[i][i];
    }
    z
}

fn sweep_ratio(lbar: &DMatrix<f64>, a: usize, rho: usize, m: usize, omega: f64) -> f64 {
    let z = resolvent_column(lbar, a, omega);
    z[rho].norm_sqr() / z[m].norm_sqr()
}

/// `δ_m · max_ω |G_ρ(jω)|² / |G_m(jω)|²` over a log grid on `[1e-6, 1e6]`,
/// refined by golden section around the best grid point.
pub fn sweep_ratio_oracle(sys: &ClosedLoopSystem, a: usize, rho: usize, m: usize, delta_m: f64, grid_size: usize) -> f64 {
    if m == rho {
        return delta_m;
    }
    let lbar = sys.lbar();
    let omegas = poly::logspace(1e-6, 1e6, grid_size.max(2));
    let chunk = omegas.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    // per-chunk argmax, merged in index order so ties resolve to the lowest index
    let best = omegas
        .par_chunks(chunk)
        .enumerate()
        .map(|(c, part)| {
            let mut best = (c * chunk, f64::NEG_INFINITY);
            for (k, &w) in part.iter().enumerate() {
                let v = sweep_ratio(lbar, a, rho, m, w);
                if v > best.1 {
                    best = (c * chunk + k, v);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let k = best.0;
    let lo = omegas[k.saturating_sub(1)].ln();
    let hi = omegas[(k + 1).min(omegas.len() - 1)].ln();
    let (_, neg) = poly::golden_min(|t| -sweep_ratio(lbar, a, rho, m, t.exp()), lo, hi, 1e-12, 200);
    delta_m * best.1.max(-neg)
}

/// Matrix exponential by scaling and squaring with a degree-6 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const P: usize = 6;
    let n = a.nrows();
    let norm = (0..n).map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let mut num = id.clone();
    let mut den = id.clone();
    let mut power = id;
    let mut c = 1.0;
    for k in 1..=P {
        c *= (P - k + 1) as f64 / (k * (2 * P - k + 1)) as f64;
        power = &power * &scaled;
        num += &power * c;
        den += &power * if k % 2 == 0 { c } else { -c };
    }
    let mut r = den.lu().solve(&num).expect("Padé denominator is nonsingular for ‖A‖ ≤ 1/2");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Finite-horizon attack problem: piecewise-constant attack samples `u_0..u_{K−1}`
/// with step `h`, and for each output the energy form `E` with
/// `uᵀ E u = h Σ_k y_k²` over the sampled response (tail included).
#[derive(Debug, Clone)]
pub struct DiscretizedAttackProblem {
    pub step: f64,
    pub horizon: usize,
    pub attack: usize,
    /// Target first, then monitors.
    pub outputs: Vec<usize>,
    energy: Vec<Mat<f64>>,
}

impl DiscretizedAttackProblem {
    /// Step `0.1/λ_max` and horizon `max(2000, ⌈50/(λ_min h)⌉)`.
    pub fn new(sys: &ClosedLoopSystem, a: usize, rho: usize, monitors: &[usize]) -> Result<Self> {
        let h = 0.1 / sys.lambda_max();
        let k = ((50.0 / (sys.lambda_min() * h)).ceil() as usize).max(2000);
        Self::with_grid(sys, a, rho, monitors, h, k)
    }

    pub fn with_grid(sys: &ClosedLoopSystem, a: usize, rho: usize, monitors: &[usize], step: f64, horizon: usize) -> Result<Self> {
        if monitors.is_empty() || monitors.len() > 2 {
            return Err(Error::Scope(format!("{} monitors; the discretized oracle handles one or two", monitors.len())));
        }
        if step * sys.lambda_max() > 0.1 * (1.0 + 1e-12) {
            return Err(Error::InvalidScenario("step too large for the closed-loop spectrum".into()));
        }
        if horizon as f64 * step < 50.0 / sys.lambda_min() * (1.0 - 1e-12) {
            return Err(Error::InvalidScenario("horizon too short for the slowest mode".into()));
        }
        let n = sys.n();
        // Van Loan: exp([[−L̄, e_a], [0, 0]] h) = [[Φ, Γ], [0, 1]]
        let mut aug = DMatrix::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(-sys.lbar() * step));
        aug[(a, n)] = step;
        let e = expm(&aug);
        let phi = e.view((0, 0), (n, n)).into_owned();
        let gamma: DVector<f64> = e.view((0, n), (n, 1)).column(0).into_owned();

        let mut outputs = vec![rho];
        outputs.extend_from_slice(monitors);
        let energy = outputs
            .iter()
            .map(|&i| {
                let c = pulse_correlation(&phi, &gamma, i, horizon, step);
                Mat::from_fn(horizon, horizon, |r, s| c[r.abs_diff(s)])
            })
            .collect();
        Ok(DiscretizedAttackProblem { step, horizon, attack: a, outputs, energy })
    }

    pub fn energy_form(&self, k: usize) -> &Mat<f64> {
        &self.energy[k]
    }
}

/// `c(d) = h Σ_{k≥0} p_k p_{k+d}` for the pulse response `p_k = e_iᵀ Φ^k Γ`.
fn pulse_correlation(phi: &DMatrix<f64>, gamma: &DVector<f64>, i: usize, horizon: usize, h: f64) -> Vec<f64> {
    let n = phi.nrows();
    // W = Σ_k Φ^k e_i e_iᵀ Φ^k by doubling (Φ is symmetric)
    let mut w = DMatrix::zeros(n, n);
    w[(i, i)] = 1.0;
    let mut a = phi.clone();
    for _ in 0..64 {
        w += &a * &w * &a;
        a = &a * &a;
        if a.amax() < 1e-300_f64.sqrt() {
            break;
        }
    }
    let wg = &w * gamma;
    let mut v = gamma.clone();
    let mut c = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        c.push(h * wg.dot(&v));
        v = phi * v;
    }
    c
}

/// Largest `λ` with `A u = λ B u`, via Cholesky of `B` and Lanczos on `L⁻¹ A L⁻ᵀ`.
/// Returns `None` if `B` is not numerically positive definite.
pub fn generalized_max_eigenvalue(a: &Mat<f64>, b: &Mat<f64>) -> Option<f64> {
    let k = a.nrows();
    let llt = b.llt(Side::Lower).ok()?;
    let l = llt.L();
    let apply = |v: &Mat<f64>| -> Mat<f64> {
        let mut x = v.clone();
        solve_upper_triangular_in_place(l.transpose(), x.as_mut(), Par::Seq);
        let mut y = a * &x;
        solve_lower_triangular_in_place(l, y.as_mut(), Par::Seq);
        y
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = Mat::from_fn(k, 1, |_, _| 1.0 + 0.1 * rng.random::<f64>());
    let norm = q.norm_l2();
    q *= faer::Scale(1.0 / norm);
    let mut basis: Vec<Mat<f64>> = vec![q];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut prev = f64::NEG_INFINITY;
    let max_iter = k.min(120);
    for it in 0..max_iter {
        let mut w = apply(&basis[it]);
        let al = (basis[it].transpose() * &w)[(0, 0)];
        alpha.push(al);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for qj in &basis {
                let coef = (qj.transpose() * &w)[(0, 0)];
                w -= qj * faer::Scale(coef);
            }
        }
        let ritz = tridiagonal_max(&alpha, &beta);
        let bnorm = w.norm_l2();
        if (ritz - prev).abs() <= 1e-12 * ritz.abs() || bnorm <= 1e-14 * ritz.abs() || it + 1 == max_iter {
            return Some(ritz);
        }
        prev = ritz;
        beta.push(bnorm);
        basis.push(w * faer::Scale(1.0 / bnorm));
    }
    Some(prev)
}

fn tridiagonal_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues().max()
}

/// Largest target energy over attack sequences keeping each monitor's energy
/// within its threshold. `delta` lists thresholds in monitor order.
pub fn discretized_impact_oracle(problem: &DiscretizedAttackProblem, delta: &[f64]) -> Result<f64> {
    let monitors = problem.outputs.len() - 1;
    if monitors > 2 {
        return Err(Error::Scope("more than two monitors".into()));
    }
    if delta.len() != monitors || delta.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidScenario("one positive threshold per monitor is required".into()));
    }
    let target = &problem.energy[0];
    if monitors == 1 {
        let lam = generalized_max_eigenvalue(target, &problem.energy[1])
            .ok_or_else(|| Error::Numerical("monitor energy form is not positive definite".into()))?;
        return Ok(lam * delta[0]);
    }
    let (e1, e2) = (&problem.energy[1], &problem.energy[2]);
    let eval = |t: f64| -> f64 {
        let b = Mat::from_fn(problem.horizon, problem.horizon, |i, j| t * e1[(i, j)] / delta[0] + (1.0 - t) * e2[(i, j)] / delta[1]);
        generalized_max_eigenvalue(target, &b).unwrap_or(f64::INFINITY)
    };
    let (_, v) = poly::golden_min(eval, 0.0, 1.0, 5e-3, 30);
    if !v.is_finite() {
        return Err(Error::Numerical("no multiplier direction gave a positive definite form".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_network;

    fn p3_sys() -> ClosedLoopSystem {
        ClosedLoopSystem::build(&parse_network(r#"{"n":3,"edges":[[1,2],[2,3]]}"#).unwrap()).unwrap()
    }

    #[test]
    fn domination_by_definition() {
        let p3 = parse_network(r#"{"n":3,"edges":[[1,2],[2,3]]}"#).unwrap();
        assert!(dominating_oracle(&p3, &MonitorSet::exact(vec![1], 3).unwrap()));
        assert!(!dominating_oracle(&p3, &MonitorSet::exact(vec![0], 3).unwrap()));
        let star = Network::star(6).unwrap();
        assert!(dominating_oracle(&star, &MonitorSet::exact(vec![0], 6).unwrap()));
    }

    #[test]
    fn sweep_matches_analytic_values() {
        let sys = p3_sys();
        assert!((sweep_ratio_oracle(&sys, 0, 2, 1, 1.0, 100_000) - 4.0 / 9.0).abs() < 1e-6);
        assert!((sweep_ratio_oracle(&sys, 0, 2, 0, 1.0, 100_000) - 1.0 / 7.5625).abs() < 1e-6);
        assert_eq!(sweep_ratio_oracle(&sys, 0, 2, 2, 0.7, 1000), 0.7);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 2.0, 0.0]));
        let e = expm(&d);
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-13);
        assert!((e[(1, 1)] - 2f64.exp()).abs() < 1e-12);
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&n);
        assert!((e[(0, 1)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_eigenvalue_small() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [1.0, 4.0, 2.0][i] } else { 0.0 });
        let b = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.0 });
        assert!((generalized_max_eigenvalue(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        let singular = Mat::<f64>::zeros(3, 3);
        assert!(generalized_max_eigenvalue(&a, &singular).is_none());
    }

    #[test]
    fn scope_and_scaling() {
        let sys = p3_sys();
        assert!(matches!(DiscretizedAttackProblem::new(&sys, 0, 2, &[0, 1, 2]), Err(Error::Scope(_))));
        let problem = DiscretizedAttackProblem::with_grid(&sys, 0, 2, &[1], 0.1 / sys.lambda_max(), 400).unwrap_err();
        assert!(matches!(problem, Error::InvalidScenario(_)));
    }

    #[test]
    fn discretized_single_monitor_near_sweep() {
        let sys = p3_sys();
        let problem = DiscretizedAttackProblem::new(&sys, 0, 2, &[1]).unwrap();
        let one = discretized_impact_oracle(&problem, &[1.0]).unwrap();
        let two = discretized_impact_oracle(&problem, &[2.0]).unwrap();
        assert!((two - 2.0 * one).abs() <= 1e-9 * one);
        assert!(((one - 4.0 / 9.0) / (4.0 / 9.0)).abs() < 0.05, "{one}");
        assert!(one <= 4.0 / 9.0 * (1.0 + 1e-3));
    }
}
