//! Integrates the nonlinear qubit dynamics along one arc and prints the
//! orientation calibration table.

use meosim::bloch::{calibrate, candidate_state, default_calibration_grid, evolution_time, run_arc, EvolutionParams};

fn main() -> meosim::error::Result<()> {
    let nfact = 120;
    let params = EvolutionParams::new(1.0);
    for s in [120, 60, 30, 15, 7, 3, 1] {
        let q = candidate_state(s / 2, nfact)?;
        let out = run_arc(&q, s, nfact, &params, None)?;
        println!(
            "s = {s:3}: T = {:7.3}, endpoint overlap {:.2e}, P(|1>) of the middle candidate {:.4}",
            evolution_time(s, nfact, 1.0)?,
            out.endpoints[0].overlap(&out.endpoints[1]),
            out.qubit.p1()
        );
    }
    let report = calibrate(&default_calibration_grid(), 1.0)?;
    for e in &report.entries {
        println!("gamma = {:.4}, sign = {:+}: worst residual {:.2e}", e.gamma, e.sign, e.max_residual);
    }
    Ok(())
}
