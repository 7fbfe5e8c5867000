//! Worst-case impact of a stealthy attack on a target vertex, given a set of
//! monitors with alarm thresholds, together with the expected impact and
//! defense cost built on it.
//!
//! The worst case is the value of
//!
//! ```text
//! min Σ γ_m δ_m   s.t.  Σ γ_m R_m(x) ≥ R_ρ(x)  for all x ≥ 0,   γ_m ≥ ε_γ
//! ```
//!
//! where `R_i(x) = |P_(i,a)(jω)|²` at `x = ω²`. It is solved by cutting
//! planes over `x`: a small LP on the current cut set, then a global search
//! for the most violated `x`. Constraints are evaluated as ratios
//! `h_m = R_m / R_ρ` in log space, so high-degree densities never overflow.

use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::dynamics::ClosedLoopSystem;
use crate::error::{Error, Result};
use crate::graph::MonitorSet;
use crate::poly::{self, C64};

/// Tolerances and limits of the cutting-plane solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactSettings {
    /// Lower bound on every multiplier.
    pub eps_gamma: f64,
    /// Accepted relative violation `Σ γ_m h_m(x) − 1 ≥ −eps_cert`.
    pub eps_cert: f64,
    pub max_cuts: usize,
    /// Points in the initial log grid over `x ∈ [1e-6, 1e6]`.
    pub initial_grid: usize,
    /// Stationary points come from Sturm root isolation up to this degree.
    pub sturm_max_degree: usize,
    /// Multipliers beyond this are treated as an infeasible program.
    pub gamma_cap: f64,
}

impl Default for ImpactSettings {
    fn default() -> Self {
        ImpactSettings {
            eps_gamma: 1e-9,
            eps_cert: 1e-9,
            max_cuts: 200,
            initial_grid: 64,
            sturm_max_degree: 16,
            gamma_cap: 1e12,
        }
    }
}

/// A finite value or unboundedness; never a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(*v),
            Bound::Unbounded => None,
        }
    }

    /// Total order with `Unbounded` above every finite value.
    pub fn exceeds(&self, other: &Bound, tol: f64) -> bool {
        match (self, other) {
            (Bound::Unbounded, Bound::Unbounded) => false,
            (Bound::Unbounded, _) => true,
            (_, Bound::Unbounded) => false,
            (Bound::Finite(a), Bound::Finite(b)) => *a > b + tol * b.abs().max(1.0),
        }
    }

    pub fn add(&self, c: f64) -> Bound {
        match self {
            Bound::Finite(v) => Bound::Finite(v + c),
            Bound::Unbounded => Bound::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Bounded,
    Unbounded,
}

/// Nonnegativity certificate `p_γ(x) = Σ γ_m R_m(x) − R_ρ(x)` on `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Ascending coefficients of `p_γ` in `x`.
    pub poly: Vec<f64>,
    /// `min_x p_γ(x) / R_ρ(x)` over `x ≥ 0` including the limit `x → ∞`.
    pub min_ratio: f64,
    /// Where the minimum is attained; `None` for the limit at infinity.
    pub argmin_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactResult {
    pub status: Status,
    pub value: Option<f64>,
    /// Multiplier per monitor vertex (0-based).
    pub gamma: Option<Vec<(usize, f64)>>,
    pub certificate: Option<Certificate>,
    /// `ω* = √x*` at the active constraint.
    pub worst_frequency: Option<f64>,
    /// Number of LP solves used.
    pub iterations: usize,
}

#[derive(Serialize)]
struct ImpactJson {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<BTreeMap<usize, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_min: Option<f64>,
}

impl ImpactResult {
    pub fn unbounded() -> Self {
        ImpactResult {
            status: Status::Unbounded,
            value: None,
            gamma: None,
            certificate: None,
            worst_frequency: None,
            iterations: 0,
        }
    }

    pub fn bound(&self) -> Bound {
        match self.value {
            Some(v) if self.status == Status::Bounded => Bound::Finite(v),
            _ => Bound::Unbounded,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.status == Status::Bounded
    }

    /// `{"status", "value"?, "gamma"?, "worst_frequency"?, "certificate_min"?}` with 1-based keys.
    pub fn to_json(&self) -> String {
        use crate::report::sig9;
        let doc = ImpactJson {
            status: if self.is_bounded() { "bounded" } else { "unbounded" },
            value: self.value.map(sig9),
            gamma: self.gamma.as_ref().map(|g| g.iter().map(|&(v, x)| (v + 1, sig9(x))).collect()),
            worst_frequency: self.worst_frequency.map(sig9),
            certificate_min: self.certificate.as_ref().map(|c| sig9(c.min_ratio)),
        };
        crate::report::to_json_line(&doc)
    }
}

/// `R(x)` with `R(ω²) = |P(jω)|²`, from `P(s) = E(s²) + s·O(s²)`.
pub fn density_from_numerator(p: &[f64]) -> Vec<f64> {
    let even: Vec<f64> = p.iter().step_by(2).enumerate().map(|(k, &c)| if k % 2 == 0 { c } else { -c }).collect();
    let odd: Vec<f64> = p.iter().skip(1).step_by(2).enumerate().map(|(k, &c)| if k % 2 == 0 { c } else { -c }).collect();
    let mut out = poly::mul(&even, &even);
    let odd_sq = poly::mul(&odd, &odd);
    if out.len() < odd_sq.len() + 1 {
        out.resize(odd_sq.len() + 1, 0.0);
    }
    for (k, c) in odd_sq.iter().enumerate() {
        out[k + 1] += c;
    }
    poly::trim(&mut out);
    out
}

/// Spectral density of channel `(out, a)` as ascending coefficients in `x = ω²`.
pub fn spectral_density(sys: &ClosedLoopSystem, out: usize, a: usize) -> Vec<f64> {
    density_from_numerator(sys.numerator(out, a))
}

fn check_pair(sys: &ClosedLoopSystem, a: usize, rho: usize) -> Result<()> {
    let n = sys.n();
    if a >= n || rho >= n {
        return Err(Error::InvalidScenario(format!("vertex out of range 1..={n}")));
    }
    if a == rho {
        return Err(Error::InvalidScenario(format!("target {} equals the attack vertex", rho + 1)));
    }
    Ok(())
}

fn check_monitors(sys: &ClosedLoopSystem, m_set: &MonitorSet) -> Result<()> {
    if m_set.is_empty() {
        return Err(Error::InvalidScenario("monitor set is empty".into()));
    }
    if m_set.vertices().iter().any(|&m| m >= sys.n()) {
        return Err(Error::InvalidScenario("monitor vertex out of range".into()));
    }
    Ok(())
}

/// Bounded iff some monitor's relative degree from `a` is at most the target's.
pub fn boundedness(sys: &ClosedLoopSystem, a: usize, rho: usize, m_set: &MonitorSet) -> Result<Status> {
    check_pair(sys, a, rho)?;
    check_monitors(sys, m_set)?;
    let r_rho = sys.relative_degree(rho, a);
    let r_min = m_set.vertices().iter().map(|&m| sys.relative_degree(m, a)).min().unwrap();
    Ok(if r_min <= r_rho { Status::Bounded } else { Status::Unbounded })
}

/// Ratios `h_m(x) = R_m(x) / R_ρ(x)` for one attack vertex, target and monitor list.
struct Ratios<'s> {
    sys: &'s ClosedLoopSystem,
    a: usize,
    rho: usize,
    monitors: Vec<usize>,
    /// `d_m − d_ρ`: growth exponent of `h_m` in `x` at infinity.
    excess: Vec<i64>,
    /// `ln` of the leading-coefficient ratio `(lead_m / lead_ρ)²`.
    lead_ln: Vec<f64>,
    /// Stationary-point numerators `R_m' R_ρ − R_m R_ρ'`, when of modest degree.
    stationary: Option<Vec<Vec<f64>>>,
}

impl<'s> Ratios<'s> {
    fn new(sys: &'s ClosedLoopSystem, a: usize, rho: usize, monitors: &[usize], settings: &ImpactSettings) -> Self {
        let p_rho = sys.numerator(rho, a);
        let d_rho = poly::degree(p_rho).unwrap();
        let mut excess = Vec::new();
        let mut lead_ln = Vec::new();
        for &m in monitors {
            let p = sys.numerator(m, a);
            let d = poly::degree(p).unwrap();
            excess.push(d as i64 - d_rho as i64);
            lead_ln.push(2.0 * (p[d].abs().ln() - p_rho[d_rho].abs().ln()));
        }
        let r_rho = density_from_numerator(p_rho);
        let dr_rho = poly::derivative(&r_rho);
        let stationary: Vec<Vec<f64>> = monitors
            .iter()
            .map(|&m| {
                let r_m = density_from_numerator(sys.numerator(m, a));
                poly::axpy(&poly::mul(&poly::derivative(&r_m), &r_rho), -1.0, &poly::mul(&r_m, &dr_rho))
            })
            .collect();
        let small = stationary.iter().all(|w| poly::degree(w).is_none_or(|d| d <= settings.sturm_max_degree))
            && stationary.iter().flatten().all(|c| c.is_finite());
        Ratios {
            sys,
            a,
            rho,
            monitors: monitors.to_vec(),
            excess,
            lead_ln,
            stationary: small.then_some(stationary),
        }
    }

    fn ln_gain(&self, i: usize, x: f64) -> f64 {
        poly::ln_abs_at(self.sys.numerator(i, self.a), C64::new(0.0, x.sqrt()))
    }

    /// `ln h_k(x)` for each monitor `k`.
    fn ln_h(&self, x: f64) -> Vec<f64> {
        let base = self.ln_gain(self.rho, x);
        self.monitors.iter().map(|&m| if m == self.rho { 0.0 } else { 2.0 * (self.ln_gain(m, x) - base) }).collect()
    }

    fn h(&self, x: f64) -> Vec<f64> {
        self.ln_h(x).into_iter().map(f64::exp).collect()
    }

    /// Coefficients of the limiting constraint as `x → ∞`, or `None` if it is
    /// vacuous (some ratio grows without bound).
    fn h_infinity(&self) -> Option<Vec<f64>> {
        if self.excess.iter().any(|&e| e > 0) {
            return None;
        }
        Some(self.excess.iter().zip(&self.lead_ln).map(|(&e, &l)| if e == 0 { l.exp() } else { 0.0 }).collect())
    }

    fn phi_from(gamma: &[f64], h: &[f64]) -> f64 {
        gamma.iter().zip(h).map(|(g, v)| g * v).sum::<f64>() - 1.0
    }

    fn phi(&self, gamma: &[f64], x: f64) -> f64 {
        Self::phi_from(gamma, &self.h(x))
    }

    fn phi_infinity(&self, gamma: &[f64]) -> f64 {
        match self.h_infinity() {
            Some(h) => Self::phi_from(gamma, &h),
            None => f64::INFINITY,
        }
    }

    /// Global minimum of `φ(x) = Σ γ_k h_k(x) − 1` over `x ∈ [0, ∞]`, plus
    /// every refined local minimum found along the way.
    fn minimize(&self, gamma: &[f64]) -> Scan {
        let table = self.sys.log_gain_table(self.a);
        let base = &table.ln_abs[self.rho];
        let xs = &table.x;
        let phi_grid: Vec<f64> = (0..xs.len())
            .map(|k| {
                let mut s = 0.0;
                for (j, &m) in self.monitors.iter().enumerate() {
                    let l = if m == self.rho { 0.0 } else { 2.0 * (table.ln_abs[m][k] - base[k]) };
                    s += gamma[j] * l.exp();
                }
                s - 1.0
            })
            .collect();

        let mut points: Vec<(f64, f64)> = vec![(0.0, self.phi(gamma, 0.0))];
        let last = xs.len() - 1;
        let mut minima: Vec<usize> = (0..=last)
            .filter(|&k| {
                let left = if k == 0 { f64::INFINITY } else { phi_grid[k - 1] };
                let right = if k == last { f64::INFINITY } else { phi_grid[k + 1] };
                phi_grid[k] < left && phi_grid[k] <= right
            })
            .collect();
        // every violated basin, plus the lowest few
        minima.sort_by(|&i, &j| phi_grid[i].total_cmp(&phi_grid[j]));
        let keep = minima.iter().take_while(|&&k| phi_grid[k] < 0.0).count().max(REFINED_MINIMA.min(minima.len()));
        for &k in &minima[..keep] {
            let lo = xs[k.saturating_sub(1)].ln();
            let hi = xs[(k + 1).min(last)].ln();
            let (t, v) = poly::golden_min(|t| self.phi(gamma, t.exp()), lo, hi, 1e-12 * hi.abs().max(1.0), 200);
            if v <= phi_grid[k] {
                points.push((t.exp(), v));
            } else {
                points.push((xs[k], phi_grid[k]));
            }
        }
        if let Some(ws) = &self.stationary {
            let mut d: Vec<f64> = Vec::new();
            for (g, w) in gamma.iter().zip(ws) {
                d = poly::axpy(&d, *g, w);
            }
            let hi = poly::root_bound(&d).min(xs[last]);
            if hi > 0.0 {
                for x in poly::real_roots_in(&d, 0.0, hi) {
                    if x > 0.0 {
                        points.push((x, self.phi(gamma, x)));
                    }
                }
            }
        }
        let at_infinity = self.phi_infinity(gamma);
        let (mut best_x, mut best) = (None, at_infinity);
        for &(x, v) in &points {
            if v < best || (v == best && best_x.is_none()) {
                best = v;
                best_x = Some(x);
            }
        }
        Scan { min: best, argmin: best_x, points, at_infinity }
    }
}

/// Non-violated local minima refined per scan.
const REFINED_MINIMA: usize = 8;

struct Scan {
    min: f64,
    argmin: Option<f64>,
    points: Vec<(f64, f64)>,
    at_infinity: f64,
}

/// Solves `min Σ δ_k γ_k` over the current cuts; `None` if infeasible under the caps.
fn solve_lp(rows: &[Vec<f64>], delta: &[f64], settings: &ImpactSettings) -> Result<Option<(Vec<f64>, f64)>> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = delta.iter().map(|&d| problem.add_var(d, (settings.eps_gamma, settings.gamma_cap))).collect();
    for row in rows {
        let scale = row.iter().cloned().fold(0.0, f64::max);
        if !(scale > 0.0) || !scale.is_finite() {
            if scale.is_infinite() {
                continue;
            }
            // no monitor sees this frequency
            return Ok(None);
        }
        let terms: Vec<_> = vars.iter().zip(row).map(|(&v, &c)| (v, c / scale)).collect();
        problem.add_constraint(&terms[..], ComparisonOp::Ge, 1.0 / scale);
    }
    match problem.solve() {
        Ok(sol) => {
            let gamma: Vec<f64> = vars.iter().map(|&v| sol[v].max(settings.eps_gamma)).collect();
            let value = gamma.iter().zip(delta).map(|(g, d)| g * d).sum();
            Ok(Some((gamma, value)))
        }
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::Numerical(format!("LP solver: {e}"))),
    }
}

fn close_to_any(x: f64, cuts: &[f64]) -> bool {
    cuts.iter().any(|&c| (c - x).abs() <= 1e-9 * c.abs().max(x.abs()).max(1e-300))
}

pub fn worst_case_impact(sys: &ClosedLoopSystem, a: usize, rho: usize, m_set: &MonitorSet) -> Result<ImpactResult> {
    worst_case_impact_with(sys, a, rho, m_set, &ImpactSettings::default())
}

/// Cutting-plane solution of the impact program with explicit settings.
pub fn worst_case_impact_with(
    sys: &ClosedLoopSystem,
    a: usize,
    rho: usize,
    m_set: &MonitorSet,
    settings: &ImpactSettings,
) -> Result<ImpactResult> {
    check_pair(sys, a, rho)?;
    check_monitors(sys, m_set)?;
    let monitors = m_set.vertices();
    // boundedness from exact numerator degrees
    let gap_rho = sys.degree_gap(rho, a);
    if monitors.iter().map(|&m| sys.degree_gap(m, a)).min().unwrap() > gap_rho {
        return Ok(ImpactResult::unbounded());
    }
    let delta: Vec<f64> = monitors.iter().map(|&m| sys.net().delta()[m]).collect();
    let ratios = Ratios::new(sys, a, rho, monitors, settings);

    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(poly::logspace(1e-6, 1e6, settings.initial_grid));
    let mut rows: Vec<Vec<f64>> = cuts.iter().map(|&x| ratios.h(x)).collect();
    // stationary points of each single ratio
    for k in 0..monitors.len() {
        let mut unit = vec![0.0; monitors.len()];
        unit[k] = 1.0;
        let scan = ratios.minimize(&unit);
        for &(x, _) in &scan.points {
            if !close_to_any(x, &cuts) {
                cuts.push(x);
                rows.push(ratios.h(x));
            }
        }
    }
    let mut has_infinity_row = false;
    if let Some(h) = ratios.h_infinity() {
        if ratios.excess.iter().all(|&e| e <= 0) && ratios.excess.contains(&0) {
            rows.push(h);
            has_infinity_row = true;
        }
    }

    for iteration in 1..=settings.max_cuts {
        let (gamma, _) = match solve_lp(&rows, &delta, settings)? {
            Some(sol) => sol,
            None => return Ok(ImpactResult::unbounded()),
        };
        if gamma.iter().any(|&g| g >= 0.999 * settings.gamma_cap) {
            return Ok(ImpactResult::unbounded());
        }
        let scan = ratios.minimize(&gamma);
        let mut added = false;
        if scan.min < -settings.eps_cert {
            for &(x, v) in &scan.points {
                if v < -settings.eps_cert && !close_to_any(x, &cuts) {
                    cuts.push(x);
                    rows.push(ratios.h(x));
                    added = true;
                }
            }
            if scan.at_infinity < -settings.eps_cert && !has_infinity_row {
                if let Some(h) = ratios.h_infinity() {
                    rows.push(h);
                    has_infinity_row = true;
                    added = true;
                }
            }
        }
        if scan.min >= -settings.eps_cert || !added {
            if !(scan.min > -1.0) {
                return Err(Error::Numerical("certificate search diverged".into()));
            }
            // scaling by 1/(1 + φ_min) makes the certificate exactly feasible
            let factor = if scan.min < 0.0 { 1.0 / (1.0 + scan.min) } else { 1.0 };
            let gamma: Vec<f64> = gamma.iter().map(|g| g * factor).collect();
            let min_ratio = (scan.min + 1.0) * factor - 1.0;
            return Ok(finish(&ratios, &gamma, &delta, min_ratio, scan.argmin, iteration));
        }
    }
    Err(Error::IterationLimit { cuts: settings.max_cuts })
}

fn finish(ratios: &Ratios, gamma: &[f64], delta: &[f64], min_ratio: f64, argmin: Option<f64>, iterations: usize) -> ImpactResult {
    let sys = ratios.sys;
    let mut p = density_from_numerator(sys.numerator(ratios.rho, ratios.a)).iter().map(|c| -c).collect::<Vec<_>>();
    for (&m, &g) in ratios.monitors.iter().zip(gamma) {
        p = poly::axpy(&p, g, &density_from_numerator(sys.numerator(m, ratios.a)));
    }
    ImpactResult {
        status: Status::Bounded,
        value: Some(gamma.iter().zip(delta).map(|(g, d)| g * d).sum()),
        gamma: Some(ratios.monitors.iter().cloned().zip(gamma.iter().cloned()).collect()),
        certificate: Some(Certificate { poly: p, min_ratio, argmin_x: argmin }),
        worst_frequency: argmin.map(f64::sqrt),
        iterations,
    }
}

/// `δ_m · sup_x R_ρ(x)/R_m(x)` for a single monitor `m`.
pub fn single_monitor_bound(sys: &ClosedLoopSystem, a: usize, rho: usize, m: usize, delta_m: f64) -> Result<ImpactResult> {
    check_pair(sys, a, rho)?;
    if m >= sys.n() {
        return Err(Error::InvalidScenario("monitor vertex out of range".into()));
    }
    if !(delta_m > 0.0) {
        return Err(Error::InvalidScenario("threshold must be positive".into()));
    }
    if sys.relative_degree(m, a) > sys.relative_degree(rho, a) {
        return Ok(ImpactResult::unbounded());
    }
    let settings = ImpactSettings::default();
    let ratios = Ratios::new(sys, a, rho, &[m], &settings);
    let scan = ratios.minimize(&[1.0]);
    // φ = h − 1, so the smallest ratio is 1 + min φ
    let h_min = scan.min + 1.0;
    if !(h_min > 0.0) {
        return Ok(ImpactResult::unbounded());
    }
    let gamma = 1.0 / h_min;
    Ok(finish(&ratios, &[gamma], &[delta_m], 0.0, scan.argmin, 0))
}

/// Defender's belief over targets given the attack vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Uniform,
    /// `table[a][ρ] = π_a(ρ)`, with `table[a][a] = 0`.
    Table(Vec<Vec<f64>>),
}

impl Belief {
    pub fn weight(&self, n: usize, a: usize, rho: usize) -> f64 {
        if a == rho {
            return 0.0;
        }
        match self {
            Belief::Uniform => 1.0 / (n - 1) as f64,
            Belief::Table(t) => t[a][rho],
        }
    }

    /// Checks positivity off the diagonal and unit row sums.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidScenario("a belief needs at least two vertices".into()));
        }
        if let Belief::Table(t) = self {
            if t.len() != n {
                return Err(Error::InvalidScenario(format!("belief table has {} rows, expected {n}", t.len())));
            }
            for (a, row) in t.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::InvalidScenario(format!("belief row {} has wrong length", a + 1)));
                }
                let mut sum = 0.0;
                for (rho, &p) in row.iter().enumerate() {
                    if rho == a {
                        if p != 0.0 {
                            return Err(Error::InvalidScenario(format!("belief π_{}({}) must be zero", a + 1, a + 1)));
                        }
                    } else if !(p > 0.0 && p.is_finite()) {
                        return Err(Error::InvalidScenario(format!("belief π_{}({}) must be positive", a + 1, rho + 1)));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidScenario(format!("belief row {} sums to {sum}", a + 1)));
                }
            }
        }
        Ok(())
    }

    /// Parses `{"<a>": {"<ρ>": p, ...}, ...}` with 1-based keys; absent entries are zero.
    pub fn parse_table(document: &str, n: usize) -> Result<Belief> {
        let raw: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_str(document).map_err(|e| Error::Schema(format!("belief table: {e}")))?;
        let index = |key: &str| -> Result<usize> {
            match key.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                _ => Err(Error::Schema(format!("belief key {key:?} is not a vertex in 1..={n}"))),
            }
        };
        let mut table = vec![vec![0.0; n]; n];
        for (a_key, row) in raw {
            let a = index(&a_key)?;
            for (r_key, p) in row {
                table[a][index(&r_key)?] = p;
            }
        }
        let belief = Belief::Table(table);
        belief.validate(n)?;
        Ok(belief)
    }
}

/// Linear sensor cost `κ·|M|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub kappa: f64,
}

impl CostModel {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidScenario(format!("sensor cost must be nonnegative, got {kappa}")));
        }
        Ok(CostModel { kappa })
    }

    pub fn cost(&self, size: usize) -> f64 {
        self.kappa * size as f64
    }
}

pub fn expected_impact(sys: &ClosedLoopSystem, a: usize, m_set: &MonitorSet, belief: &Belief) -> Result<Bound> {
    expected_impact_with(sys, a, m_set, belief, &ImpactSettings::default())
}

/// `Σ_{ρ≠a} π_a(ρ) J_ρ(a, M)`, stopping at the first unbounded term.
pub fn expected_impact_with(
    sys: &ClosedLoopSystem,
    a: usize,
    m_set: &MonitorSet,
    belief: &Belief,
    settings: &ImpactSettings,
) -> Result<Bound> {
    let n = sys.n();
    belief.validate(n)?;
    if a >= n {
        return Err(Error::InvalidScenario(format!("attack vertex out of range 1..={n}")));
    }
    let mut total = 0.0;
    for rho in (0..n).filter(|&r| r != a) {
        let w = belief.weight(n, a, rho);
        match worst_case_impact_with(sys, a, rho, m_set, settings)?.bound() {
            Bound::Finite(v) => total += w * v,
            Bound::Unbounded => return Ok(Bound::Unbounded),
        }
    }
    Ok(Bound::Finite(total))
}

pub fn defense_cost(sys: &ClosedLoopSystem, a: usize, m_set: &MonitorSet, belief: &Belief, cost: &CostModel) -> Result<Bound> {
    Ok(expected_impact(sys, a, m_set, belief)?.add(cost.cost(m_set.len())))
}
