//! Exact maximum edge overlap of two small graphs by enumerating all n!
//! vertex maps, plus the full overlap histogram.

use meosim::graph::{brute_force_meo, eo_distribution, similarity, Graph};

fn main() -> meosim::error::Result<()> {
    let path = Graph::path(5);
    let star = Graph::star(5);
    let best = brute_force_meo(&path, &star)?;
    println!("path(5) vs star(5): meo = {}, attained by {} of 120 maps", best.meo, best.optimal_count);
    println!("similarity = {:.3}", similarity(&path, &star)?);

    let k4 = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?;
    let hist = eo_distribution(&Graph::cycle(6), &k4)?;
    print!("{}", hist.to_csv());
    Ok(())
}
