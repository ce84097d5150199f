//! Runs the marking circuit for every threshold and compares the
//! postselected candidate qubit with the classical count.

use meosim::circuit::{Backend, MarkingCircuit};
use meosim::graph::{count_exceeding, max_edge_overlap_bound, Graph};

fn main() -> meosim::error::Result<()> {
    let g1 = Graph::path(4);
    let g2 = Graph::star(4);
    println!("E,m_circuit,m_classical,a0,a1,postselect_prob,peak_support");
    for e in 0..=max_edge_overlap_bound(&g1, &g2) {
        let run = MarkingCircuit::new(&g1, &g2, e)?.run(Backend::Structured)?;
        let s = &run.summary;
        println!(
            "{e},{},{},{:.6},{:.6},{:.4},{}",
            s.m_marked,
            count_exceeding(&g1, &g2, e)?,
            s.candidate.a0,
            s.candidate.a1,
            s.postselect_prob,
            run.peak_support
        );
    }
    Ok(())
}
