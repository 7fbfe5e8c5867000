//! Raise self-loop gains until every invariant zero is at least `margin`
//! into the left half plane.

use secalloc::dynamics::{tune_self_loops_report, ClosedLoopSystem};
use secalloc::graph::generate_erdos_renyi;

fn main() -> secalloc::Result<()> {
    let net = generate_erdos_renyi(10, 0.3, 11)?;
    let before = ClosedLoopSystem::build(&net)?.full_zero_report()?.max_real_part;
    println!("largest zero real part before: {before:.6}");
    for margin in [0.1, 1.0, 3.0] {
        let (tuned, offset) = tune_self_loops_report(&net, margin)?;
        let after = ClosedLoopSystem::build(&tuned)?.full_zero_report()?.max_real_part;
        println!("margin {margin}: offset {offset:.6}, largest real part {after:.6}");
    }
    Ok(())
}
