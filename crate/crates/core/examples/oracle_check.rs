//! Cross-check certified impacts against the frequency sweep and the
//! finite-horizon attack problem.

use secalloc::dynamics::ClosedLoopSystem;
use secalloc::graph::{MonitorSet, Network};
use secalloc::impact::worst_case_impact;
use secalloc::oracle::{discretized_impact_oracle, sweep_ratio_oracle, DiscretizedAttackProblem};

fn main() -> secalloc::Result<()> {
    let net = Network::path(3)?.with_theta(vec![2.0; 3])?;
    let sys = ClosedLoopSystem::build(&net)?;
    for monitors in [vec![1], vec![0], vec![0, 1]] {
        let m = MonitorSet::exact(monitors.clone(), 3)?;
        let certified = worst_case_impact(&sys, 0, 2, &m)?.value.unwrap();
        let problem = DiscretizedAttackProblem::new(&sys, 0, 2, &monitors)?;
        let discretized = discretized_impact_oracle(&problem, &vec![1.0; monitors.len()])?;
        print!("M = {:?}: certified {certified:.6}, discretized {discretized:.6}", m.one_based());
        if let [v] = monitors[..] {
            print!(", sweep {:.6}", sweep_ratio_oracle(&sys, 0, 2, v, 1.0, 4096));
        }
        println!();
    }
    Ok(())
}
