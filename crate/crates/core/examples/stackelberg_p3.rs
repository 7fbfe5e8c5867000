//! Solve the defender/attacker game on small graphs and check optimality.

use secalloc::dynamics::ClosedLoopSystem;
use secalloc::game::{solve_stackelberg, verify_stackelberg, GameSetup};
use secalloc::graph::{enumerate_dominating_sets, Network};
use secalloc::impact::Belief;

fn main() -> secalloc::Result<()> {
    for (name, net, budget) in [("P3", Network::path(3)?, 1), ("P3", Network::path(3)?, 2), ("star", Network::star(5)?, 2)] {
        let sys = ClosedLoopSystem::build(&net)?;
        let collection = enumerate_dominating_sets(&net, budget)?;
        let setup = GameSetup::new(Belief::Uniform, 5.0)?;
        let solution = solve_stackelberg(&sys, &collection, &setup)?;
        println!("{name}, budget {budget}: verified = {}", verify_stackelberg(&solution, &sys, &setup));
        print!("  {}", solution.to_json());
    }
    Ok(())
}
