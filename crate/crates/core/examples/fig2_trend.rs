//! Mean number of dominating sets on random graphs as the size grows, with
//! the sensor budget fixed. Pass a sample count as the first argument.

use secalloc::experiments::{count_dominating_trend, trend_csv, ExperimentConfig};

fn main() -> secalloc::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = ExperimentConfig { samples, ..Default::default() };
    print!("{}", trend_csv(&count_dominating_trend(&cfg)?));
    Ok(())
}
