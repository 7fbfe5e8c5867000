//! Desk-scale studies: dominating-set counts on random graphs, the 50-vertex
//! placement run, and time-domain simulation of a calibrated attack.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{tune_self_loops_report, ClosedLoopSystem};
use crate::error::{Error, Result};
use crate::game::{solve_stackelberg, GameSetup, GameSolution};
use crate::graph::{enumerate_dominating_sets, generate_erdos_renyi_with, subset_count, GenerationConfig, MonitorSet, Network};
use crate::impact::{Belief, ImpactResult};
use crate::poly::C64;
use crate::report::{cell, sig9};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub q: f64,
    pub samples: usize,
    pub n_s: usize,
    pub seed: u64,
    pub kappa: f64,
    pub theta_default: f64,
    pub delta_default: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_list: vec![10, 15, 20, 25],
            q: 0.5,
            samples: 100,
            n_s: 3,
            seed: 1,
            kappa: 5.0,
            theta_default: 0.5,
            delta_default: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidScenario("samples must be at least 1".into()));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::InvalidScenario("graph sizes must be at least 2".into()));
        }
        if self.n_s == 0 {
            return Err(Error::InvalidScenario("sensor budget must be at least 1".into()));
        }
        Ok(())
    }

    fn generation(&self) -> GenerationConfig {
        GenerationConfig { theta: self.theta_default, delta: self.delta_default, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub n: usize,
    pub samples: usize,
    pub mean_dom_count: f64,
    pub subset_count: u128,
}

/// Mean number of dominating sets within budget over seeded random graphs,
/// next to the number of candidate subsets. Sample `i` uses seed `seed + i`.
pub fn count_dominating_trend(cfg: &ExperimentConfig) -> Result<Vec<TrendRow>> {
    cfg.validate()?;
    let gen = cfg.generation();
    cfg.n_list
        .iter()
        .map(|&n| {
            let counts = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let net = generate_erdos_renyi_with(n, cfg.q, cfg.seed + i as u64, &gen)?;
                    match enumerate_dominating_sets(&net, cfg.n_s.min(n)) {
                        Ok(d) => Ok(d.len()),
                        Err(Error::EmptyCollection { .. }) => Ok(0),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<usize>>>()?;
            let total: usize = counts.iter().sum();
            Ok(TrendRow {
                n,
                samples: cfg.samples,
                mean_dom_count: total as f64 / cfg.samples as f64,
                subset_count: subset_count(n, cfg.n_s.min(n)),
            })
        })
        .collect()
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("n,samples,mean_dom_count,subset_count\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.samples, cell(r.mean_dom_count), r.subset_count));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub n: usize,
    pub q: f64,
    pub n_s: usize,
    pub kappa: f64,
    pub margin: f64,
    pub seed: u64,
    pub workers: usize,
    /// Consecutive seeds tried when a sample has no dominating set within budget.
    pub max_seed_attempts: usize,
}

impl DemoConfig {
    /// 50 vertices, `q = 0.5`, three sensors, `κ = 5`, unit thresholds, gains 0.5.
    pub fn fifty_vertex(seed: u64, workers: usize) -> Self {
        DemoConfig { n: 50, q: 0.5, n_s: 3, kappa: 5.0, margin: 0.1, seed, workers, max_seed_attempts: 100 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoSummary {
    pub seed_requested: u64,
    pub seed_used: u64,
    pub n: usize,
    pub q: f64,
    pub budget: usize,
    pub kappa: f64,
    pub theta_offset: f64,
    pub dominating_count: usize,
    pub subset_count: u128,
    pub m_star: Vec<usize>,
    pub a_star: usize,
    pub r_star: f64,
    pub q_star: f64,
    pub max_r: f64,
    pub max_q: f64,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub network: Network,
    pub solution: GameSolution,
    pub summary: DemoSummary,
}

impl DemoSummary {
    pub fn to_json(&self) -> String {
        let mut s = self.clone();
        for v in [&mut s.q, &mut s.kappa, &mut s.theta_offset, &mut s.r_star, &mut s.q_star, &mut s.max_r, &mut s.max_q] {
            *v = sig9(*v);
        }
        crate::report::to_json_pretty(&s)
    }
}

pub fn run_fifty_vertex_demo(seed: u64, workers: usize) -> Result<DemoOutcome> {
    run_demo(&DemoConfig::fifty_vertex(seed, workers))
}

/// Generate, tune, enumerate and solve; a sample without a dominating set
/// within budget moves on to the next seed.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome> {
    let gen = GenerationConfig::default();
    let mut last_err = None;
    for attempt in 0..cfg.max_seed_attempts.max(1) {
        let seed = cfg.seed + attempt as u64;
        let raw = generate_erdos_renyi_with(cfg.n, cfg.q, seed, &gen)?;
        let collection = match enumerate_dominating_sets(&raw, cfg.n_s) {
            Ok(c) => c,
            Err(e @ Error::EmptyCollection { .. }) => {
                log::info!("seed {seed}: no dominating set within budget {}, trying next seed", cfg.n_s);
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let (net, offset) = tune_self_loops_report(&raw, cfg.margin)?;
        let sys = ClosedLoopSystem::build(&net)?;
        let setup = GameSetup::new(Belief::Uniform, cfg.kappa)?.with_workers(cfg.workers);
        let solution = solve_stackelberg(&sys, &collection, &setup)?;
        let finite = |f: fn(&crate::game::TableRow) -> Option<f64>| {
            solution.table.iter().filter_map(f).fold(f64::NEG_INFINITY, f64::max)
        };
        let summary = DemoSummary {
            seed_requested: cfg.seed,
            seed_used: seed,
            n: cfg.n,
            q: cfg.q,
            budget: cfg.n_s,
            kappa: cfg.kappa,
            theta_offset: offset,
            dominating_count: collection.len(),
            subset_count: subset_count(cfg.n, cfg.n_s),
            m_star: solution.best_monitor_set.one_based(),
            a_star: solution.best_attack + 1,
            r_star: solution.r_star,
            q_star: solution.q_star,
            max_r: finite(|r| r.r.finite()),
            max_q: finite(|r| r.q.finite()),
        };
        return Ok(DemoOutcome { network: net, solution, summary });
    }
    Err(last_err.unwrap_or(Error::EmptyCollection { budget: cfg.n_s }))
}

/// Attack signal `ζ(t) = α sin(ωt)`, or the constant `α` when `ω = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSignal {
    pub alpha: f64,
    pub omega: f64,
}

impl AttackSignal {
    pub fn at(&self, t: f64) -> f64 {
        if self.omega == 0.0 {
            self.alpha
        } else {
            self.alpha * (self.omega * t).sin()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub attack: usize,
    pub target: usize,
    pub monitors: Vec<usize>,
    pub signal: AttackSignal,
    pub impact: Option<f64>,
    pub step: f64,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y_rho: Vec<f64>,
    pub y_m: Vec<Vec<f64>>,
    /// Running power `(1/t) ∫_0^t y² dt`.
    pub p_rho: Vec<f64>,
    pub p_m: Vec<Vec<f64>>,
}

/// Frequencies below this fraction of `λ_min` are simulated as a constant input.
const DC_FRACTION: f64 = 1e-6;

/// Sinusoidal attack at the certificate's worst frequency, scaled so the
/// binding monitor's steady-state power sits just below its threshold.
pub fn simulate_attack(
    sys: &ClosedLoopSystem,
    a: usize,
    rho: usize,
    m_set: &MonitorSet,
    impact: &ImpactResult,
    duration: f64,
) -> Result<Trace> {
    let value = impact
        .value
        .filter(|_| impact.is_bounded())
        .ok_or_else(|| Error::InvalidScenario("cannot simulate an unbounded attack".into()))?;
    let omega = impact
        .worst_frequency
        .ok_or_else(|| Error::InvalidScenario("worst case sits at infinite frequency".into()))?;
    let omega = if omega < DC_FRACTION * sys.lambda_min() { 0.0 } else { omega };
    let s = C64::new(0.0, omega);
    // steady-state power per unit α²
    let gain = |i: usize| {
        let g = sys.transfer(i, a, s).norm_sqr();
        if omega == 0.0 {
            g
        } else {
            g / 2.0
        }
    };
    let alpha_sq = m_set
        .vertices()
        .iter()
        .map(|&m| (1.0 - 1e-3) * sys.net().delta()[m] / gain(m))
        .fold(f64::INFINITY, f64::min);
    let signal = AttackSignal { alpha: alpha_sq.sqrt(), omega };
    let mut trace = simulate(sys, a, rho, m_set.vertices(), signal, duration)?;
    trace.impact = Some(value);
    Ok(trace)
}

/// Fixed-step RK4 from `x(0) = 0`, with step at most `0.1/λ_max` and at
/// least 40 steps per period. Sinusoidal runs are rounded to whole periods.
pub fn simulate(sys: &ClosedLoopSystem, a: usize, rho: usize, monitors: &[usize], signal: AttackSignal, duration: f64) -> Result<Trace> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidScenario("duration must be positive".into()));
    }
    let n = sys.n();
    if a >= n || rho >= n || monitors.iter().any(|&m| m >= n) {
        return Err(Error::InvalidScenario("vertex out of range".into()));
    }
    let mut h = 0.1 / sys.lambda_max();
    let mut duration = duration;
    if signal.omega > 0.0 {
        let period = 2.0 * std::f64::consts::PI / signal.omega;
        h = h.min(period / 40.0);
        duration = (duration / period).ceil().max(1.0) * period;
    }
    let steps = (duration / h).ceil() as usize;
    let h = duration / steps as f64;
    let lbar = sys.lbar();
    let deriv = |x: &[f64], t: f64| -> Vec<f64> {
        let mut dx: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| lbar[(i, j)] * x[j]).sum::<f64>()).collect();
        dx[a] += signal.at(t);
        dx
    };
    let mut x = vec![0.0; n];
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = deriv(&x, t);
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(v, d)| v + 0.5 * h * d).collect();
        let k2 = deriv(&x2, t + 0.5 * h);
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(v, d)| v + 0.5 * h * d).collect();
        let k3 = deriv(&x3, t + 0.5 * h);
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(v, d)| v + h * d).collect();
        let k4 = deriv(&x4, t + h);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        states.push(x.clone());
    }
    let t: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    let y_rho: Vec<f64> = states.iter().map(|s| s[rho]).collect();
    let y_m: Vec<Vec<f64>> = monitors.iter().map(|&m| states.iter().map(|s| s[m]).collect()).collect();
    Ok(Trace {
        attack: a,
        target: rho,
        monitors: monitors.to_vec(),
        signal,
        impact: None,
        step: h,
        p_rho: running_power(&y_rho, h),
        p_m: y_m.iter().map(|y| running_power(y, h)).collect(),
        t,
        x: states,
        y_rho,
        y_m,
    })
}

fn running_power(y: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut integral = 0.0;
    out.push(0.0);
    for k in 1..y.len() {
        integral += 0.5 * h * (y[k - 1] * y[k - 1] + y[k] * y[k]);
        out.push(integral / (k as f64 * h));
    }
    out
}

impl Trace {
    /// Rows `t, x_1..x_n, y_rho, y_m<v>..., p_rho, p_m<v>...`, every `stride`-th sample plus the last.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let n = self.x.first().map_or(0, Vec::len);
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.push("y_rho".into());
        header.extend(self.monitors.iter().map(|m| format!("y_m{}", m + 1)));
        header.push("p_rho".into());
        header.extend(self.monitors.iter().map(|m| format!("p_m{}", m + 1)));
        let mut out = header.join(",") + "\n";
        let last = self.t.len() - 1;
        for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
            let mut row = vec![cell(self.t[k])];
            row.extend(self.x[k].iter().map(|v| cell(*v)));
            row.push(cell(self.y_rho[k]));
            row.extend(self.y_m.iter().map(|y| cell(y[k])));
            row.push(cell(self.p_rho[k]));
            row.extend(self.p_m.iter().map(|p| cell(p[k])));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Eight-line JSON sidecar describing the run.
    pub fn sidecar_json(&self) -> String {
        let monitors: Vec<String> = self.monitors.iter().map(|m| (m + 1).to_string()).collect();
        let impact = self.impact.map_or("null".to_string(), |v| format!("{}", sig9(v)));
        format!(
            "{{\n  \"attack\": {},\n  \"target\": {},\n  \"monitors\": [{}],\n  \"omega\": {},\n  \"alpha\": {},\n  \"impact\": {}\n}}\n",
            self.attack + 1,
            self.target + 1,
            monitors.join(", "),
            sig9(self.signal.omega),
            sig9(self.signal.alpha),
            impact
        )
    }

    pub fn final_target_power(&self) -> f64 {
        *self.p_rho.last().unwrap()
    }

    /// Largest running power of each monitor over the whole trace.
    pub fn peak_monitor_power(&self) -> Vec<f64> {
        self.p_m.iter().map(|p| p.iter().cloned().fold(0.0, f64::max)).collect()
    }
}

/// Default simulation length: many slow time constants.
pub fn default_duration(sys: &ClosedLoopSystem) -> f64 {
    200.0 / sys.lambda_min()
}

/// Sample stride keeping CSV output to roughly `rows` lines.
pub fn stride_for(trace: &Trace, rows: usize) -> usize {
    trace.t.len().div_ceil(rows.max(1)).max(1)
}
