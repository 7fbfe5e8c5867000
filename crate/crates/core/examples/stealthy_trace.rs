//! Simulate the calibrated worst-case attack on the path graph and show that
//! the monitor stays below its threshold while the target absorbs the impact.

use secalloc::dynamics::ClosedLoopSystem;
use secalloc::experiments::{default_duration, simulate_attack};
use secalloc::graph::{MonitorSet, Network};
use secalloc::impact::worst_case_impact;

fn main() -> secalloc::Result<()> {
    let sys = ClosedLoopSystem::build(&Network::path(3)?)?;
    let m = MonitorSet::exact(vec![1], 3)?;
    let impact = worst_case_impact(&sys, 0, 2, &m)?;
    let trace = simulate_attack(&sys, 0, 2, &m, &impact, default_duration(&sys))?;
    println!("alpha = {:.6}, omega = {}", trace.signal.alpha, trace.signal.omega);
    println!("peak monitor power {:.6} (threshold 1)", trace.peak_monitor_power()[0]);
    println!("final target power {:.6} (worst case {:.6})", trace.final_target_power(), impact.value.unwrap());
    Ok(())
}
