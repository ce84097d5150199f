//! Numerical checks of the zooming bounds, the halfway property and the
//! time budget, plus the `ε_n` correction and the CSV data series.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::evolution_time;
use crate::error::{Error, Result};
use crate::graph::{eo_distribution, Graph};
use crate::perm::factorial;
use crate::protocol::{omega_heuristic_raw, success_probability_estimate};

/// Tolerance applied to every bound comparison in this module.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// Largest `n` for the zoom-bound sweep.
pub const ZOOM_SWEEP_LIMIT: usize = 8;

/// Largest `n` covered by the small-`n` suitability table.
pub const SUITABILITY_LIMIT: usize = 5;

pub fn sqrt_two_thirds() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

/// `cos(θ(T)/2)` for the candidate at (real) index `k_s` of an `s`-arc.
///
/// `θ` is the angle between that candidate and the 0th one after the
/// evolution for `T(s/n!)`. The candidate is tracked through the symmetric
/// pair that straddles the arc midpoint: they start `μ0 = α0 − 2θ0` apart
/// and separate under the same law as the endpoints.
pub fn zoom_overlap_at(nfact: f64, s: f64, k_s: f64) -> f64 {
    let y = s / nfact;
    let ky = k_s / nfact;
    let half_alpha = y.atan2(1.0 - y);
    let half_theta = ky.atan2(1.0 - ky);
    let c_alpha = half_alpha.cos();
    let c_mu0 = (half_alpha - 2.0 * half_theta).cos();
    let c_mu_t = (c_mu0 - c_alpha) / (1.0 - c_mu0 * c_alpha);
    0.5 * ((1.0 + c_mu_t).max(0.0).sqrt() + (1.0 - c_mu_t).max(0.0).sqrt())
}

/// `cos(θ(T(s/n!))/2)` for the `⌊s/2⌋`-th candidate.
pub fn zoom_overlap(n: usize, s: u64) -> Result<f64> {
    let nfact = factorial(n);
    check_s(s, nfact)?;
    Ok(zoom_overlap_at(nfact as f64, s as f64, (s / 2) as f64))
}

/// Upper envelope: `⌊s/2⌋` replaced by `(s − 1)/2`.
pub fn zoom_upper(n: usize, s: f64) -> f64 {
    zoom_overlap_at(factorial(n) as f64, s, (s - 1.0) / 2.0)
}

/// Lower envelope: `⌊s/2⌋` replaced by `s/2`.
pub fn zoom_lower(n: usize, s: f64) -> f64 {
    zoom_overlap_at(factorial(n) as f64, s, s / 2.0)
}

fn check_s(s: u64, nfact: u64) -> Result<()> {
    if s == 0 || s > nfact {
        return Err(Error::InvalidArgument(format!("s = {s} outside [1, {nfact}]")));
    }
    Ok(())
}

/// Excess of the odd-`s` maximum over `√(2/3)`, from the closed-form
/// evaluation at `s = n!/2 − 2`.
///
/// Every other use of this quantity goes through here.
pub fn epsilon_n(n: usize) -> Result<f64> {
    if !(5..=20).contains(&n) {
        return Err(Error::Guard { what: "epsilon_n (defined for 5 <= n <= 20)", n, max: 20 });
    }
    let nf = factorial(n) as f64;
    let r = (32.0 / (nf * nf) + 2.0).sqrt();
    let n2 = nf * nf;
    let n3 = n2 * nf;
    let n4 = n3 * nf;
    let num1 = (2.0 * r + 3.0) * n4 - 4.0 * (4.0 * r + 5.0) * n3 + 12.0 * (2.0 * r + 5.0) * n2 - 192.0 * nf + 576.0;
    let num2 = (3.0 - 2.0 * r) * n4 + 4.0 * (4.0 * r - 5.0) * n3 + 12.0 * (5.0 - 2.0 * r) * n2 - 192.0 * nf + 576.0;
    let den = nf * (nf * (nf * (3.0 * nf - 20.0) + 60.0) - 192.0) + 576.0;
    let value = 0.5 * ((num1 / den).sqrt() + (num2 / den).sqrt());
    Ok(value - sqrt_two_thirds())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomRow {
    pub s: u64,
    pub value: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub s: u64,
    pub value: f64,
    pub bound: f64,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomBoundReport {
    pub n: usize,
    pub rows: Vec<ZoomRow>,
    pub violations: Vec<Violation>,
    /// `ε_5` when the odd-`s` bound applies (`n >= 5`).
    pub epsilon: Option<f64>,
}

impl ZoomBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Upper bound asserted for the `⌊s/2⌋` candidate of an `s`-arc, if any.
pub fn zoom_upper_bound(n: usize, s: u64) -> Option<(f64, &'static str)> {
    let eps5 = epsilon_n(5).expect("n = 5 in range");
    match s {
        0 | 1 => None,
        s if s % 2 == 0 => Some((sqrt_two_thirds(), "even s: <= sqrt(2/3)")),
        3 => Some((2.0 * 2f64.sqrt() / 3.0, "s = 3: <= 2 sqrt(2)/3")),
        5 => Some((18.0 * 2f64.sqrt() / 29.0, "s = 5: <= 18 sqrt(2)/29")),
        _ if n >= 5 => Some((sqrt_two_thirds() + eps5, "odd s >= 7: <= sqrt(2/3) + eps_5")),
        _ => None,
    }
}

/// Sweeps every `s ∈ [1, n!]` against the zooming bounds.
pub fn verify_zoomok(n: usize) -> Result<ZoomBoundReport> {
    if !(3..=ZOOM_SWEEP_LIMIT).contains(&n) {
        return Err(Error::Guard { what: "the zoom sweep (3 <= n <= 8)", n, max: ZOOM_SWEEP_LIMIT });
    }
    let nfact = factorial(n);
    let rows: Vec<ZoomRow> = (1..=nfact)
        .into_par_iter()
        .map(|s| ZoomRow {
            s,
            value: zoom_overlap_at(nfact as f64, s as f64, (s / 2) as f64),
            upper: zoom_upper(n, s as f64),
            lower: zoom_lower(n, s as f64),
        })
        .collect();
    let lower_bound = std::f64::consts::FRAC_1_SQRT_2;
    let mut violations = Vec::new();
    for row in &rows {
        if row.s >= 2 && row.value < lower_bound - BOUND_TOLERANCE {
            violations.push(Violation { s: row.s, value: row.value, bound: lower_bound, kind: "below 1/sqrt(2)".into() });
        }
        if let Some((bound, kind)) = zoom_upper_bound(n, row.s) {
            if row.value > bound + BOUND_TOLERANCE {
                violations.push(Violation { s: row.s, value: row.value, bound, kind: kind.into() });
            }
        }
    }
    let epsilon = (n >= 5).then(|| epsilon_n(5).expect("n = 5 in range"));
    Ok(ZoomBoundReport { n, rows, violations, epsilon })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfwayCheck {
    /// Real candidate index at exactly half the Hilbert angle of the `s`-th.
    pub s_prime: f64,
    pub ok: bool,
}

/// `s′ = n!·y / (1 + sqrt(1 − 2y + 2y²))` with `y = s/n!`; checks
/// `s′ >= s/2` and that the `⌊s/2⌋`-th candidate lies within a quarter of
/// the Bloch angle `α0` of the 0th.
pub fn verify_halfway(n: usize, s: u64) -> Result<HalfwayCheck> {
    let nfact = factorial(n);
    check_s(s, nfact)?;
    let nf = nfact as f64;
    let y = s as f64 / nf;
    let s_prime = nf * y / (1.0 + (1.0 - 2.0 * y + 2.0 * y * y).sqrt());
    let half_alpha = (s as f64).atan2(nf - s as f64);
    let k = (s / 2) as f64;
    let half_theta = k.atan2(nf - k);
    let ok = s_prime >= s as f64 / 2.0 - BOUND_TOLERANCE * nf && half_theta <= half_alpha / 2.0 + BOUND_TOLERANCE;
    Ok(HalfwayCheck { s_prime, ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub total: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Nonlinear time of one zoom from `s` down to 1 against its budget.
pub fn time_budget(n: usize, s: u64, g: f64) -> Result<TimeBudget> {
    let nfact = factorial(n);
    check_s(s, nfact)?;
    let mut total = 0.0;
    let mut cur = s;
    while cur >= 1 {
        total += evolution_time(cur, nfact, g)?;
        cur /= 2;
    }
    let bound = zoom_time_bound(nfact, s, g);
    Ok(TimeBudget { total, bound, ok: total <= bound * (1.0 + BOUND_TOLERANCE) })
}

/// `(2/g)·ln(2s)·(log2(n!/√s) + 1)`.
pub fn zoom_time_bound(nfact: u64, s: u64, g: f64) -> f64 {
    let s = s as f64;
    2.0 / g * (2.0 * s).ln() * ((nfact as f64 / s.sqrt()).log2() + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityEntry {
    pub value: f64,
    /// `1/√2 <= value < 1`, or the certain final round at `s = 1`.
    pub suitable: bool,
}

/// `n → s → entry` for every `1 <= n <= 5` and `1 <= s <= n!`.
pub type SuitabilityTable = BTreeMap<usize, BTreeMap<u64, SuitabilityEntry>>;

pub fn suitability_table() -> SuitabilityTable {
    (1..=SUITABILITY_LIMIT)
        .map(|n| {
            let nfact = factorial(n);
            let per_s = (1..=nfact)
                .map(|s| {
                    let value = zoom_overlap_at(nfact as f64, s as f64, (s / 2) as f64);
                    let suitable = s == 1
                        || (std::f64::consts::FRAC_1_SQRT_2 - BOUND_TOLERANCE..1.0).contains(&value);
                    (s, SuitabilityEntry { value, suitable })
                })
                .collect();
            (n, per_s)
        })
        .collect()
}

pub fn suitability_json(table: &SuitabilityTable) -> String {
    serde_json::to_string_pretty(table).expect("table serializes")
}

/// True when every arc size of an `n`-vertex problem is suitable for zooming.
pub fn small_n_suitable(n: usize) -> bool {
    let table = suitability_table();
    table.get(&n).is_some_and(|m| m.values().all(|e| e.suitable))
}

/// A header plus string rows; renders as CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    /// Histogram of edge overlaps over all permutations of a graph pair.
    Evsbij,
    /// Zoom overlap for every arc size with its envelopes.
    Alldat,
    /// `ε_n` over a range of `n`.
    En,
    /// Success-probability estimate with the heuristic ensemble size.
    Psucc,
}

#[derive(Clone, Debug)]
pub struct FigureParams<'a> {
    pub n_lo: usize,
    pub n_hi: usize,
    pub graphs: Option<(&'a Graph, &'a Graph)>,
}

pub fn figure_data(name: FigureName, params: &FigureParams<'_>) -> Result<Table> {
    let range = params.n_lo..=params.n_hi;
    if params.n_lo > params.n_hi {
        return Err(Error::InvalidArgument(format!("empty range {}..{}", params.n_lo, params.n_hi)));
    }
    match name {
        FigureName::Evsbij => {
            let (g1, g2) = params
                .graphs
                .ok_or_else(|| Error::InvalidArgument("evsbij needs a graph pair".into()))?;
            let hist = eo_distribution(g1, g2)?;
            let mut t = Table::new(&["overlap", "count"]);
            for (k, c) in &hist.counts {
                t.rows.push(vec![k.to_string(), c.to_string()]);
            }
            Ok(t)
        }
        FigureName::Alldat => {
            if params.n_lo != params.n_hi {
                return Err(Error::InvalidArgument("alldat takes a single n".into()));
            }
            let n = params.n_lo;
            if !(1..=ZOOM_SWEEP_LIMIT).contains(&n) {
                return Err(Error::Guard { what: "alldat", n, max: ZOOM_SWEEP_LIMIT });
            }
            let nfact = factorial(n);
            let mut t = Table::new(&["s", "value", "upper", "lower"]);
            for s in 1..=nfact {
                let value = zoom_overlap_at(nfact as f64, s as f64, (s / 2) as f64);
                t.rows.push(vec![
                    s.to_string(),
                    value.to_string(),
                    zoom_upper(n, s as f64).to_string(),
                    zoom_lower(n, s as f64).to_string(),
                ]);
            }
            Ok(t)
        }
        FigureName::En => {
            let mut t = Table::new(&["n", "epsilon"]);
            for n in range {
                t.rows.push(vec![n.to_string(), epsilon_n(n)?.to_string()]);
            }
            Ok(t)
        }
        FigureName::Psucc => {
            let mut t = Table::new(&["n", "omega", "bound", "estimate", "above_half"]);
            for n in range {
                let omega = omega_heuristic_raw(n)?;
                let bound = success_probability_estimate(n, omega)?;
                let estimate = ensemble_estimate(n, omega)?;
                t.rows.push(vec![
                    n.to_string(),
                    omega.to_string(),
                    bound.to_string(),
                    estimate.to_string(),
                    (bound > 0.5).to_string(),
                ]);
            }
            Ok(t)
        }
    }
}

/// `(1 − (√(2/3) + ε_n)^{2ω})^{log2(n(n−1)/2)}`, the estimate that neglects
/// the rare `s = 3` rounds.
pub fn ensemble_estimate(n: usize, omega: u32) -> Result<f64> {
    let e_max = (n * (n - 1) / 2) as f64;
    let per_call = (sqrt_two_thirds() + epsilon_n(n)?).powi(2 * omega as i32);
    Ok((1.0 - per_call).powf(e_max.log2()))
}
