//! One zooming predicate evaluation at a few thresholds, with the ensemble
//! statistics of each round.

use meosim::graph::{brute_force_meo, Graph};
use meosim::protocol::{procedure_a, PreparedInstance, RunConfig, Verdict};

fn main() -> meosim::error::Result<()> {
    let g1 = Graph::path(5);
    let g2 = Graph::cycle(5);
    let cfg = RunConfig::default();
    let inst = PreparedInstance::new(&g1, &g2, &cfg)?;
    println!("meo = {}", brute_force_meo(&g1, &g2)?.meo);
    for e in 0..=inst.e_max() {
        let mut positive = 0;
        for stream in 0..200 {
            if procedure_a(&inst, e, &cfg, stream)? == Verdict::Positive {
                positive += 1;
            }
        }
        println!("E = {e}: m = {:3}, positive verdicts {positive}/200", inst.summary(e).m_marked);
    }
    Ok(())
}
