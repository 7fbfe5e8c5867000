//! Worst-case impact on the three-vertex path with gains 0.5: the attack sits
//! at vertex 1 and targets vertex 3.

use secalloc::dynamics::ClosedLoopSystem;
use secalloc::graph::{MonitorSet, Network};
use secalloc::impact::worst_case_impact;

fn main() -> secalloc::Result<()> {
    let sys = ClosedLoopSystem::build(&Network::path(3)?)?;
    for monitors in [vec![1], vec![0], vec![0, 1], vec![2]] {
        let m = MonitorSet::exact(monitors, 3)?;
        let result = worst_case_impact(&sys, 0, 2, &m)?;
        print!("M = {:?}: {}", m.one_based(), result.to_json());
    }
    // a monitor farther from the attack than the target cannot bound it
    let far = MonitorSet::exact(vec![2], 3)?;
    println!("target 2, M = {{3}}: {:?}", worst_case_impact(&sys, 0, 1, &far)?.status);
    Ok(())
}
