//! Enumerate dominating sets of a small random network and compare the
//! count with the number of candidate subsets.

use secalloc::graph::{enumerate_dominating_sets, generate_erdos_renyi, subset_count};

fn main() -> secalloc::Result<()> {
    let net = generate_erdos_renyi(12, 0.4, 7)?;
    let budget = 3;
    let collection = enumerate_dominating_sets(&net, budget)?;
    println!("{} edges, {} dominating sets of size <= {budget}", net.edges().len(), collection.len());
    println!("candidate subsets: {}", subset_count(net.n(), budget));
    for m in collection.sets().iter().take(5) {
        println!("  {:?}", m.one_based());
    }
    Ok(())
}
