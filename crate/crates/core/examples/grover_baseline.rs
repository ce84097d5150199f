//! Dürr–Høyer maximum finding on the marking circuit, for comparison.

use meosim::graph::{brute_force_meo, Graph};
use meosim::protocol::{grover_baseline, RunConfig};

fn main() -> meosim::error::Result<()> {
    let g1 = Graph::path(4);
    let g2 = Graph::cycle(4);
    let meo = brute_force_meo(&g1, &g2)?.meo;
    let cfg = RunConfig { trials: 100, seed: 3, ..RunConfig::default() };
    let reports = grover_baseline(&g1, &g2, &cfg)?;
    let hits = reports.iter().filter(|r| r.e_returned == meo).count();
    let rotations: u64 = reports.iter().map(|r| r.grover_rotations).sum();
    println!("meo {meo}: {hits}/100 correct, mean rotations {:.1}, budget {:.1}",
        rotations as f64 / 100.0, reports[0].budget);
    Ok(())
}
