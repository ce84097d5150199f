//! Full threshold search on random 5-vertex pairs, Monte Carlo and exact.

use meosim::graph::{brute_force_meo, Graph};
use meosim::protocol::{algorithm2, algorithm2_analytic, trial_rng, Mode, RunConfig};

fn main() -> meosim::error::Result<()> {
    let mut rng = trial_rng(7, 0);
    for pair in 0..3 {
        let g1 = Graph::random(5, 0.5, &mut rng);
        let g2 = Graph::random(5, 0.5, &mut rng);
        let cfg = RunConfig { trials: 20, seed: pair, ..RunConfig::default() };
        let meo = brute_force_meo(&g1, &g2)?.meo;
        let reports = algorithm2(&g1, &g2, &cfg)?;
        let hits = reports.iter().filter(|r| r.e_returned == meo).count();
        let exact = algorithm2_analytic(&g1, &g2, &RunConfig { mode: Mode::Analytic, ..cfg })?;
        println!(
            "pair {pair}: meo {meo}, {hits}/20 trials correct, exact success {:.4}, mean nonlinear time {:.1}",
            exact.success_probability,
            reports.iter().map(|r| r.nonlinear_time_total).sum::<f64>() / 20.0
        );
    }
    Ok(())
}
