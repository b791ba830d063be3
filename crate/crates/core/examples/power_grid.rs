//! A small power study: beta e-values against the two-sided KS test along
//! the bias and dispersion axes. Prints the CSV to standard output.
//!
//! `cargo run --release --example power_grid -- 200` sets the replication count.

use seqcal::config::{RunConfig, TestKind};
use seqcal::sim::{grid_axis, run_power_grid, PowerStudy, DEFAULT_SEED};

fn main() -> anyhow::Result<()> {
    let reps = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50);
    let tests = ["beta", "kernel", "ks"]
        .iter()
        .map(|m| RunConfig::new(m.parse::<TestKind>()?, None))
        .collect::<seqcal::Result<Vec<_>>>()?;
    let mut cells: Vec<(f64, f64)> = grid_axis().into_iter().map(|e| (e, 0.0)).collect();
    cells.extend(grid_axis().into_iter().filter(|&d| d != 0.0).map(|d| (0.0, d)));

    let grid = run_power_grid(&PowerStudy { tests, cells, n: 360, reps, seed: DEFAULT_SEED })?;
    grid.write_csv(std::io::stdout().lock())?;
    for line in grid.summary() {
        eprintln!("{line}");
    }
    Ok(())
}
