//! The 50-vertex placement run: generate, tune, enumerate, solve.
//! Takes a seed as the first argument.

use secalloc::experiments::run_fifty_vertex_demo;

fn main() -> secalloc::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcome = run_fifty_vertex_demo(seed, workers)?;
    print!("{}", outcome.summary.to_json());
    Ok(())
}
