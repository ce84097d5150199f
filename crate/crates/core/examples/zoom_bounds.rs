//! Numerical checks of the zoom overlap bound and the time cost.

use meosim::analysis::{epsilon_n, time_budget, verify_zoomok};
use meosim::perm::factorial;

fn main() -> meosim::error::Result<()> {
    for n in 5..=8 {
        let report = verify_zoomok(n)?;
        println!("n = {n}: epsilon = {:.8}, {} values checked, passed = {}", epsilon_n(n)?, report.rows.len(), report.passed());
    }
    for n in 2..=7 {
        let worst = (1..=factorial(n))
            .map(|s| time_budget(n, s, 1.0).map(|b| b.total / b.bound))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("n = {n}: worst total/bound ratio {worst:.3}");
    }
    Ok(())
}
