//! Leader–follower game between the defender, who announces a monitor set,
//! and the adversary, who then picks the attack vertex maximizing expected
//! impact.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::ClosedLoopSystem;
use crate::error::{Error, Result};
use crate::graph::{DominatingCollection, MonitorSet};
use crate::impact::{expected_impact_with, Belief, Bound, CostModel, ImpactSettings};
use crate::report::sig9;

/// Relative tolerance for ties and for verification.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GameSetup {
    pub belief: Belief,
    pub cost: CostModel,
    pub settings: ImpactSettings,
    pub workers: usize,
}

impl GameSetup {
    pub fn new(belief: Belief, kappa: f64) -> Result<Self> {
        Ok(GameSetup { belief, cost: CostModel::new(kappa)?, settings: ImpactSettings::default(), workers: 1 })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub m: MonitorSet,
    pub a_best: usize,
    pub q: Bound,
    pub r: Bound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub best_monitor_set: MonitorSet,
    pub best_attack: usize,
    pub r_star: f64,
    pub q_star: f64,
    pub table: Vec<TableRow>,
}

#[derive(Serialize)]
struct RowJson {
    m: Vec<usize>,
    a_best: usize,
    r: Option<f64>,
    q: Option<f64>,
}

#[derive(Serialize)]
struct SolutionJson {
    m_star: Vec<usize>,
    a_star: usize,
    r_star: f64,
    q_star: f64,
    table: Vec<RowJson>,
}

impl GameSolution {
    /// 1-based JSON; unbounded table entries are `null`.
    pub fn to_json(&self) -> String {
        let doc = SolutionJson {
            m_star: self.best_monitor_set.one_based(),
            a_star: self.best_attack + 1,
            r_star: sig9(self.r_star),
            q_star: sig9(self.q_star),
            table: self
                .table
                .iter()
                .map(|row| RowJson {
                    m: row.m.one_based(),
                    a_best: row.a_best + 1,
                    r: row.r.finite().map(sig9),
                    q: row.q.finite().map(sig9),
                })
                .collect(),
        };
        crate::report::to_json_line(&doc)
    }
}

/// Attack vertex maximizing `Q(a, M)`; the smallest index wins ties and an
/// unbounded vertex wins immediately.
pub fn best_response(sys: &ClosedLoopSystem, m_set: &MonitorSet, belief: &Belief, settings: &ImpactSettings) -> Result<(usize, Bound)> {
    let mut best: Option<(usize, Bound)> = None;
    for a in 0..sys.n() {
        let q = expected_impact_with(sys, a, m_set, belief, settings)?;
        if q == Bound::Unbounded {
            return Ok((a, q));
        }
        match &best {
            Some((_, b)) if !q.exceeds(b, TIE_TOL) => {}
            _ => best = Some((a, q)),
        }
    }
    Ok(best.expect("network has at least one vertex"))
}

fn evaluate_row(sys: &ClosedLoopSystem, m: &MonitorSet, setup: &GameSetup) -> Result<TableRow> {
    let (a_best, q) = best_response(sys, m, &setup.belief, &setup.settings)?;
    Ok(TableRow { m: m.clone(), a_best, q, r: q.add(setup.cost.cost(m.len())) })
}

/// Rows for arbitrary monitor sets, evaluated over `workers` contiguous partitions.
pub fn evaluate_table(sys: &ClosedLoopSystem, sets: &[MonitorSet], setup: &GameSetup) -> Result<Vec<TableRow>> {
    let workers = setup.workers.max(1);
    let chunk = sets.len().div_ceil(workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let parts: Vec<Result<Vec<TableRow>>> = pool.install(|| {
        sets.par_chunks(chunk)
            .map(|part| part.iter().map(|m| evaluate_row(sys, m, setup)).collect())
            .collect()
    });
    let mut table = Vec::with_capacity(sets.len());
    for part in parts {
        table.extend(part?);
    }
    Ok(table)
}

/// Whether `(r, m)` beats the incumbent `(best_r, best_m)`: smaller cost,
/// then fewer sensors, then lexicographically smaller set.
fn defender_prefers(r: f64, m: &MonitorSet, best_r: f64, best_m: &MonitorSet) -> bool {
    let tol = TIE_TOL * best_r.abs().max(1.0);
    if r < best_r - tol {
        return true;
    }
    if r > best_r + tol {
        return false;
    }
    (m.len(), m.vertices()) < (best_m.len(), best_m.vertices())
}

/// Defender's optimum over a precomputed table; rows with unbounded cost are skipped.
pub fn select_optimum(table: Vec<TableRow>) -> Result<GameSolution> {
    let mut best: Option<usize> = None;
    for (i, row) in table.iter().enumerate() {
        let Some(r) = row.r.finite() else { continue };
        match best {
            Some(b) if !defender_prefers(r, &row.m, table[b].r.finite().unwrap(), &table[b].m) => {}
            _ => best = Some(i),
        }
    }
    let b = best.ok_or_else(|| Error::InvalidScenario("every monitor set leaves some attack unbounded".into()))?;
    Ok(GameSolution {
        best_monitor_set: table[b].m.clone(),
        best_attack: table[b].a_best,
        r_star: table[b].r.finite().unwrap(),
        q_star: table[b].q.finite().unwrap(),
        table,
    })
}

pub fn solve_stackelberg(sys: &ClosedLoopSystem, collection: &DominatingCollection, setup: &GameSetup) -> Result<GameSolution> {
    if collection.is_empty() {
        return Err(Error::EmptyCollection { budget: collection.budget() });
    }
    let table = evaluate_table(sys, collection.sets(), setup)?;
    select_optimum(table)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Rechecks both equilibrium conditions on every row.
pub fn verify_stackelberg(solution: &GameSolution, sys: &ClosedLoopSystem, setup: &GameSetup) -> bool {
    let cost = &setup.cost;
    let mut star_row_seen = false;
    for row in &solution.table {
        let mut q_best = Bound::Finite(f64::NEG_INFINITY);
        let mut q_row = None;
        for a in 0..sys.n() {
            let q = match expected_impact_with(sys, a, &row.m, &setup.belief, &setup.settings) {
                Ok(q) => q,
                Err(_) => return false,
            };
            if q.exceeds(&q_best, 0.0) {
                q_best = q;
            }
            if a == row.a_best {
                q_row = Some(q);
            }
        }
        let Some(q_row) = q_row else { return false };
        // a_best must attain the maximum and match the recorded value
        if q_best.exceeds(&q_row, TIE_TOL) {
            return false;
        }
        match (q_row, row.q, row.r) {
            (Bound::Finite(q), Bound::Finite(rq), Bound::Finite(rr)) => {
                if !close(q, rq) || !close(rr, cost.cost(row.m.len()) + rq) {
                    return false;
                }
                if solution.r_star > rr + TIE_TOL * rr.abs().max(1.0) {
                    return false;
                }
            }
            (Bound::Unbounded, Bound::Unbounded, Bound::Unbounded) => {}
            _ => return false,
        }
        if row.m == solution.best_monitor_set {
            star_row_seen = row.a_best == solution.best_attack
                && row.q.finite().is_some_and(|q| close(q, solution.q_star))
                && row.r.finite().is_some_and(|r| close(r, solution.r_star));
        }
    }
    star_row_seen && close(solution.r_star, cost.cost(solution.best_monitor_set.len()) + solution.q_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_dominating_sets, parse_network, Network};

    fn p3_sys() -> ClosedLoopSystem {
        ClosedLoopSystem::build(&parse_network(r#"{"n":3,"edges":[[1,2],[2,3]]}"#).unwrap()).unwrap()
    }

    #[test]
    fn best_response_on_path() {
        let sys = p3_sys();
        let m = MonitorSet::from_one_based(&[2], 1, 3).unwrap();
        let (a, q) = best_response(&sys, &m, &Belief::Uniform, &ImpactSettings::default()).unwrap();
        assert_eq!(a, 0);
        assert!((q.finite().unwrap() - 13.0 / 18.0).abs() < 1e-6);
    }

    #[test]
    fn best_response_symmetric_complete_graph() {
        let sys = ClosedLoopSystem::build(&Network::complete(4).unwrap()).unwrap();
        let m = MonitorSet::from_one_based(&[3], 1, 4).unwrap();
        let (a, _) = best_response(&sys, &m, &Belief::Uniform, &ImpactSettings::default()).unwrap();
        assert_eq!(a, 0);
    }

    #[test]
    fn all_monitored_is_at_most_one() {
        let sys = p3_sys();
        let m = MonitorSet::from_one_based(&[1, 2, 3], 3, 3).unwrap();
        for a in 0..3 {
            let q = expected_impact_with(&sys, a, &m, &Belief::Uniform, &ImpactSettings::default()).unwrap();
            assert!(q.finite().unwrap() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn stackelberg_on_path() {
        let sys = p3_sys();
        let setup = GameSetup::new(Belief::Uniform, 5.0).unwrap();
        let d1 = enumerate_dominating_sets(sys.net(), 1).unwrap();
        let sol = solve_stackelberg(&sys, &d1, &setup).unwrap();
        assert_eq!(sol.best_monitor_set.one_based(), vec![2]);
        assert_eq!(sol.best_attack, 0);
        assert!((sol.r_star - (5.0 + 13.0 / 18.0)).abs() < 1e-6);
        assert!(verify_stackelberg(&sol, &sys, &setup));
        assert_eq!(
            sol.to_json(),
            "{\"m_star\":[2],\"a_star\":1,\"r_star\":5.72222222,\"q_star\":0.722222222,\"table\":[{\"m\":[2],\"a_best\":1,\"r\":5.72222222,\"q\":0.722222222}]}\n"
        );

        let d2 = enumerate_dominating_sets(sys.net(), 2).unwrap();
        let sol2 = solve_stackelberg(&sys, &d2, &setup).unwrap();
        assert_eq!(sol2.best_monitor_set.one_based(), vec![2]);
        assert_eq!(sol2.table.len(), 4);
        assert!(verify_stackelberg(&sol2, &sys, &setup));
    }

    #[test]
    fn verification_catches_tampering() {
        let sys = p3_sys();
        let setup = GameSetup::new(Belief::Uniform, 5.0).unwrap();
        let d = enumerate_dominating_sets(sys.net(), 1).unwrap();
        let sol = solve_stackelberg(&sys, &d, &setup).unwrap();
        let mut bad = sol.clone();
        bad.table[0].a_best = 1;
        bad.best_attack = 1;
        assert!(!verify_stackelberg(&bad, &sys, &setup));
        let mut bad = sol.clone();
        bad.r_star += 1.0;
        assert!(!verify_stackelberg(&bad, &sys, &setup));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let sys = ClosedLoopSystem::build(&Network::star(5).unwrap()).unwrap();
        let d = enumerate_dominating_sets(sys.net(), 2).unwrap();
        let one = solve_stackelberg(&sys, &d, &GameSetup::new(Belief::Uniform, 1.0).unwrap()).unwrap();
        let many = solve_stackelberg(&sys, &d, &GameSetup::new(Belief::Uniform, 1.0).unwrap().with_workers(8)).unwrap();
        assert_eq!(one.to_json(), many.to_json());
    }

    #[test]
    fn zero_cost_prefers_smaller_sets_on_ties() {
        let a = MonitorSet::exact(vec![1], 3).unwrap();
        let b = MonitorSet::exact(vec![0, 1], 3).unwrap();
        assert!(defender_prefers(1.0, &a, 1.0, &b));
        assert!(!defender_prefers(1.0, &b, 1.0, &a));
        assert!(defender_prefers(0.5, &b, 1.0, &a));
    }
}
