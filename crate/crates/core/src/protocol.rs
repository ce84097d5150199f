//! Procedures A and B, the threshold binary search, ensemble sizing and the
//! Dürr–Høyer baseline.
//!
//! Random streams: every trial uses `ChaCha20Rng::seed_from_u64(seed)` with
//! the stream number set to the trial index, so trial `t` draws the same
//! numbers on every platform no matter how trials are scheduled.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{small_n_suitable, zoom_time_bound, SUITABILITY_LIMIT};
use crate::bloch::{evolution_time, measure, run_arc, CandidateQubit, EvolutionParams};
use crate::circuit::{marked_codes, Backend, MarkedSummary, MarkingCircuit};
use crate::error::{Error, Result};
use crate::graph::{eo_distribution, max_edge_overlap_bound, overlap_of_slice, Graph, OverlapHistogram};
use crate::perm::{factorial, radix_decode, radix_index, RadixCode};

/// Smallest `n` for which the zooming bounds hold without the table.
pub const PROTOCOL_MIN_N: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OmegaPolicy {
    Theorem,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSetting {
    Auto,
    Fixed(u32),
}

impl std::str::FromStr for OmegaSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(OmegaSetting::Auto);
        }
        match s.parse::<u32>() {
            Ok(w) if w >= 1 => Ok(OmegaSetting::Fixed(w)),
            _ => Err(format!("omega must be a positive integer or \"auto\", got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Montecarlo,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub g: f64,
    pub omega: OmegaSetting,
    pub policy: OmegaPolicy,
    pub seed: u64,
    pub backend: Backend,
    pub trials: u64,
    pub assume_postselection: bool,
    pub mode: Mode,
    /// Permit `n < 5` when every arc size is in the suitability table.
    pub allow_small: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            omega: OmegaSetting::Auto,
            policy: OmegaPolicy::Theorem,
            seed: 0,
            backend: Backend::Structured,
            trials: 1,
            assume_postselection: true,
            mode: Mode::Montecarlo,
            allow_small: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaChoice {
    pub omega: u32,
    /// Value the policy produced before any escalation.
    pub raw: u32,
    pub escalated: bool,
}

impl RunConfig {
    pub fn resolve_omega(&self, n: usize) -> Result<OmegaChoice> {
        match self.omega {
            OmegaSetting::Fixed(w) => Ok(OmegaChoice { omega: w, raw: w, escalated: false }),
            OmegaSetting::Auto => omega_auto(n, self.policy),
        }
    }
}

fn e_max_bound(n: usize) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Smallest `ω` with `log2(n(n−1)/2)·(8/9)^ω < 1/2`.
pub fn omega_theorem(n: usize) -> Result<u32> {
    check_omega_n(n)?;
    let l = e_max_bound(n).log2().max(0.0);
    let mut w = 1u32;
    while l * (8.0f64 / 9.0).powi(w as i32) >= 0.5 {
        w += 1;
    }
    Ok(w)
}

/// `⌈10·ln(ln n)⌉`, at least 1.
pub fn omega_heuristic_raw(n: usize) -> Result<u32> {
    check_omega_n(n)?;
    Ok((10.0 * (n as f64).ln().ln()).ceil().max(1.0) as u32)
}

fn check_omega_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("ensemble sizing needs n >= 2, got {n}")));
    }
    Ok(())
}

/// Resolves `ω` under `policy`; a heuristic value whose success estimate
/// does not exceed 1/2 escalates to the theorem value.
pub fn omega_auto(n: usize, policy: OmegaPolicy) -> Result<OmegaChoice> {
    let theorem = omega_theorem(n)?;
    match policy {
        OmegaPolicy::Theorem => Ok(OmegaChoice { omega: theorem, raw: theorem, escalated: false }),
        OmegaPolicy::Heuristic => {
            let raw = omega_heuristic_raw(n)?;
            if success_probability_estimate(n, raw)? > 0.5 {
                Ok(OmegaChoice { omega: raw, raw, escalated: false })
            } else {
                Ok(OmegaChoice { omega: theorem, raw, escalated: true })
            }
        }
    }
}

/// `(1 − (8/9)^ω)^{log2(n(n−1)/2)}`.
pub fn success_probability_estimate(n: usize, omega: u32) -> Result<f64> {
    check_omega_n(n)?;
    if omega == 0 {
        return Err(Error::InvalidArgument("omega must be at least 1".into()));
    }
    let per_call = (8.0f64 / 9.0).powi(omega as i32);
    Ok((1.0 - per_call).powf(e_max_bound(n).log2().max(0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "m=0")]
    Zero,
    #[serde(rename = "m>0")]
    Positive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Zero => "m=0",
            Verdict::Positive => "m>0",
        }
    }
}

/// One zoom round of one Procedure-A call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: u64,
    #[serde(rename = "E")]
    pub e: usize,
    pub s: u64,
    pub zeros: u32,
    pub ones: u32,
    /// `"zoom"` while the search continues, else the verdict.
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub trial: u64,
    #[serde(rename = "E_returned")]
    pub e_returned: usize,
    pub omega: u32,
    pub predicate_calls: u32,
    pub trace: Vec<TraceRow>,
    pub postselection_retries: u64,
    /// Marking-pipeline invocations, one per prepared qubit (retries included).
    pub linear_gate_proxy: u64,
    pub nonlinear_time_total: f64,
    /// Nonlinear time of each Procedure-A call.
    pub procedure_a_times: Vec<f64>,
    /// Every Procedure-A call stayed within `ω` times the zoom time bound.
    pub budget_ok: bool,
}

impl RunReport {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("round,E,s,zeros,ones,verdict\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.round, r.e, r.s, r.zeros, r.ones, r.verdict);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Everything about a graph pair that does not depend on randomness:
/// candidate amplitudes per threshold and evolved qubits per `(E, s)`.
pub struct PreparedInstance {
    n: usize,
    nfact: u64,
    e_max: usize,
    params: EvolutionParams,
    summaries: Vec<MarkedSummary>,
    evolved: HashMap<(usize, u64), CandidateQubit>,
}

impl PreparedInstance {
    /// Runs the marking pipeline for every threshold and the evolution for
    /// every arc size that Procedure A can visit.
    pub fn new(g1: &Graph, g2: &Graph, cfg: &RunConfig) -> Result<Self> {
        if g1.n() != g2.n() {
            return Err(Error::SizeMismatch { left: g1.n(), right: g2.n() });
        }
        let n = g1.n();
        check_protocol_n(n, cfg)?;
        cfg.backend.check(n)?;
        let nfact = factorial(n);
        let e_max = max_edge_overlap_bound(g1, g2);
        let params = EvolutionParams::new(cfg.g);
        let summaries = (0..=e_max)
            .into_par_iter()
            .map(|e| Ok(MarkingCircuit::new(g1, g2, e)?.run(cfg.backend)?.summary))
            .collect::<Result<Vec<_>>>()?;
        let arcs = zoom_sizes(nfact);
        let jobs: Vec<(usize, u64)> = (0..=e_max).flat_map(|e| arcs.iter().map(move |&s| (e, s))).collect();
        let evolved = jobs
            .into_par_iter()
            .map(|(e, s)| {
                let q = run_arc(&summaries[e].candidate, s, nfact, &params, None)?.qubit;
                Ok(((e, s), q))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(Self { n, nfact, e_max, params, summaries, evolved })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e_max(&self) -> usize {
        self.e_max
    }

    pub fn summary(&self, e: usize) -> &MarkedSummary {
        &self.summaries[e]
    }

    /// Measurement-ready qubit for threshold `e` on the `s`-arc.
    pub fn procedure_b(&self, e: usize, s: u64) -> Result<CandidateQubit> {
        if s == 0 || s > self.nfact {
            return Err(Error::InvalidArgument(format!("s = {s} outside [1, {}]", self.nfact)));
        }
        if e > self.e_max {
            return Err(Error::InvalidArgument(format!("threshold {e} exceeds E_max = {}", self.e_max)));
        }
        match self.evolved.get(&(e, s)) {
            Some(q) => Ok(*q),
            None => Ok(run_arc(&self.summaries[e].candidate, s, self.nfact, &self.params, None)?.qubit),
        }
    }

    /// Probability that one Procedure-A call at threshold `e` reports `m>0`.
    pub fn positive_probability(&self, e: usize, omega: u32) -> Result<f64> {
        let mut all_zero = 1.0;
        for s in zoom_sizes(self.nfact) {
            let q = self.procedure_b(e, s)?;
            all_zero *= q.a0.powi(2).powi(omega as i32);
        }
        Ok(1.0 - all_zero)
    }
}

/// `n!, ⌊n!/2⌋, …, 1`.
pub fn zoom_sizes(nfact: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = nfact;
    while s >= 1 {
        out.push(s);
        s /= 2;
    }
    out
}

fn check_protocol_n(n: usize, cfg: &RunConfig) -> Result<()> {
    if n >= PROTOCOL_MIN_N {
        return Ok(());
    }
    if !cfg.allow_small {
        return Err(Error::Guard {
            what: "the zooming protocol without --allow-small (needs n >= 5)",
            n,
            max: PROTOCOL_MIN_N - 1,
        });
    }
    if n > SUITABILITY_LIMIT || !small_n_suitable(n) {
        return Err(Error::InvalidArgument(format!("the suitability table does not cover n = {n}")));
    }
    Ok(())
}

/// Per-trial counters shared by Procedure A calls.
#[derive(Clone, Debug, Default)]
struct Counters {
    round: u64,
    trace: Vec<TraceRow>,
    retries: u64,
    linear: u64,
    nonlinear: f64,
    per_call: Vec<f64>,
}

/// Zooms from `s = n!` until a 1 is seen or `s` reaches 0.
fn procedure_a_inner<R: Rng>(
    inst: &PreparedInstance,
    e: usize,
    omega: u32,
    assume_postselection: bool,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<Verdict> {
    let summary = inst.summary(e);
    let mut s = inst.nfact;
    let mut time = 0.0;
    let verdict = loop {
        let q = inst.procedure_b(e, s)?;
        let t = evolution_time(s, inst.nfact, inst.params.g)?;
        let mut ones = 0;
        for _ in 0..omega {
            counters.linear += 1;
            if !assume_postselection {
                while rng.gen::<f64>() >= summary.postselect_prob {
                    counters.retries += 1;
                    counters.linear += 1;
                }
            }
            ones += u32::from(measure(&q, rng));
        }
        time += omega as f64 * t;
        counters.round += 1;
        let verdict = if ones > 0 {
            Some(Verdict::Positive)
        } else if s == 1 {
            Some(Verdict::Zero)
        } else {
            None
        };
        counters.trace.push(TraceRow {
            round: counters.round,
            e,
            s,
            zeros: omega - ones,
            ones,
            verdict: verdict.map_or("zoom", Verdict::as_str).to_string(),
        });
        if let Some(v) = verdict {
            break v;
        }
        s /= 2;
    };
    counters.nonlinear += time;
    counters.per_call.push(time);
    Ok(verdict)
}

/// One Procedure-A call with its own random stream.
pub fn procedure_a(inst: &PreparedInstance, e: usize, cfg: &RunConfig, stream: u64) -> Result<Verdict> {
    let omega = cfg.resolve_omega(inst.n)?.omega;
    let mut rng = trial_rng(cfg.seed, stream);
    procedure_a_inner(inst, e, omega, cfg.assume_postselection, &mut rng, &mut Counters::default())
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Predicate "some permutation has overlap above `e`".
pub trait ThresholdPredicate {
    fn exceeds(&mut self, e: usize) -> Result<bool>;
}

/// Exact predicate from the overlap histogram.
pub struct ClassicalOracle {
    hist: OverlapHistogram,
}

impl ClassicalOracle {
    pub fn new(g1: &Graph, g2: &Graph) -> Result<Self> {
        Ok(Self { hist: eo_distribution(g1, g2)? })
    }
}

impl ThresholdPredicate for ClassicalOracle {
    fn exceeds(&mut self, e: usize) -> Result<bool> {
        Ok(self.hist.count_above(e) > 0)
    }
}

struct ZoomPredicate<'i, R> {
    inst: &'i PreparedInstance,
    omega: u32,
    assume_postselection: bool,
    rng: R,
    counters: Counters,
}

impl<R: Rng> ThresholdPredicate for ZoomPredicate<'_, R> {
    fn exceeds(&mut self, e: usize) -> Result<bool> {
        let v = procedure_a_inner(self.inst, e, self.omega, self.assume_postselection, &mut self.rng, &mut self.counters)?;
        Ok(v == Verdict::Positive)
    }
}

/// Integer binary search on `[0, e_max]` for the smallest `E` with a false
/// predicate. Returns `(E, calls)`.
pub fn threshold_search<P: ThresholdPredicate + ?Sized>(e_max: usize, pred: &mut P) -> Result<(usize, u32)> {
    let (mut lo, mut hi) = (0usize, e_max);
    let mut calls = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        calls += 1;
        if pred.exceeds(mid)? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok((lo, calls))
}

/// Threshold search with the exact predicate.
pub fn algorithm2_classical(g1: &Graph, g2: &Graph) -> Result<usize> {
    let mut oracle = ClassicalOracle::new(g1, g2)?;
    Ok(threshold_search(max_edge_overlap_bound(g1, g2), &mut oracle)?.0)
}

/// One Monte Carlo run of the full algorithm on a prepared instance.
pub fn algorithm2_trial(inst: &PreparedInstance, cfg: &RunConfig, trial: u64) -> Result<RunReport> {
    let omega = cfg.resolve_omega(inst.n)?.omega;
    let mut pred = ZoomPredicate {
        inst,
        omega,
        assume_postselection: cfg.assume_postselection,
        rng: trial_rng(cfg.seed, trial),
        counters: Counters::default(),
    };
    let (e_returned, predicate_calls) = threshold_search(inst.e_max, &mut pred)?;
    let c = pred.counters;
    let budget = omega as f64 * zoom_time_bound(inst.nfact, inst.nfact, cfg.g);
    let budget_ok = c.per_call.iter().all(|&t| t <= budget * (1.0 + 1e-12));
    Ok(RunReport {
        trial,
        e_returned,
        omega,
        predicate_calls,
        trace: c.trace,
        postselection_retries: c.retries,
        linear_gate_proxy: c.linear,
        nonlinear_time_total: c.nonlinear,
        procedure_a_times: c.per_call,
        budget_ok,
    })
}

/// `cfg.trials` independent runs, in trial order.
pub fn algorithm2(g1: &Graph, g2: &Graph, cfg: &RunConfig) -> Result<Vec<RunReport>> {
    let inst = PreparedInstance::new(g1, g2, cfg)?;
    (0..cfg.trials).into_par_iter().map(|t| algorithm2_trial(&inst, cfg, t)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub omega: u32,
    /// Probability that a Procedure-A call at each threshold reports `m>0`.
    pub positive_probability: BTreeMap<usize, f64>,
    /// Exact distribution of the returned threshold.
    pub distribution: BTreeMap<usize, f64>,
    pub meo: usize,
    pub success_probability: f64,
}

/// Exact outcome distribution of the binary search with the zooming predicate.
pub fn algorithm2_analytic(g1: &Graph, g2: &Graph, cfg: &RunConfig) -> Result<AnalyticReport> {
    let inst = PreparedInstance::new(g1, g2, cfg)?;
    let omega = cfg.resolve_omega(inst.n)?.omega;
    let positive_probability = (0..=inst.e_max)
        .map(|e| Ok((e, inst.positive_probability(e, omega)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let mut distribution = BTreeMap::new();
    spread(0, inst.e_max, 1.0, &positive_probability, &mut distribution);
    let meo = eo_distribution(g1, g2)?.max_overlap();
    let success_probability = distribution.get(&meo).copied().unwrap_or(0.0);
    Ok(AnalyticReport { omega, positive_probability, distribution, meo, success_probability })
}

fn spread(lo: usize, hi: usize, weight: f64, p: &BTreeMap<usize, f64>, out: &mut BTreeMap<usize, f64>) {
    if weight == 0.0 {
        return;
    }
    if lo >= hi {
        *out.entry(lo).or_insert(0.0) += weight;
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let q = p[&mid];
    spread(mid + 1, hi, weight * q, p, out);
    spread(lo, mid, weight * (1.0 - q), p, out);
}

/// Largest `n` for the Grover baseline.
pub const BASELINE_LIMIT: usize = 4;

/// Dürr–Høyer growth factor for the rotation-count range.
const LAMBDA: f64 = 6.0 / 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub trial: u64,
    #[serde(rename = "E_returned")]
    pub e_returned: usize,
    pub grover_rotations: u64,
    pub measurements: u64,
    pub budget: f64,
}

/// Marked sets per threshold as radix ranks, read off the marking circuit.
pub struct BaselineInstance<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    nfact: u64,
    /// `marked[e][rank]`.
    marked: Vec<Vec<bool>>,
    /// One-line maps per rank (0-indexed ranks).
    perms: Vec<Vec<usize>>,
}

impl<'a> BaselineInstance<'a> {
    pub fn new(g1: &'a Graph, g2: &'a Graph, backend: Backend) -> Result<Self> {
        if g1.n() != g2.n() {
            return Err(Error::SizeMismatch { left: g1.n(), right: g2.n() });
        }
        let n = g1.n();
        if n > BASELINE_LIMIT {
            return Err(Error::Guard { what: "the Grover baseline", n, max: BASELINE_LIMIT });
        }
        let nfact = factorial(n);
        let e_max = max_edge_overlap_bound(g1, g2);
        let marked = (0..=e_max)
            .map(|e| {
                let run = MarkingCircuit::new(g1, g2, e)?.run(backend)?;
                let mut flags = vec![false; nfact as usize];
                for code in marked_codes(&run.state) {
                    flags[(radix_index(&code) - 1) as usize] = true;
                }
                Ok(flags)
            })
            .collect::<Result<Vec<_>>>()?;
        let perms = (1..=nfact)
            .map(|i| Ok(radix_decode(&RadixCode::from_index(i, n)?).as_slice().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { g1, g2, nfact, marked, perms })
    }

    fn overlap(&self, rank: usize) -> usize {
        overlap_of_slice(self.g1, self.g2, &self.perms[rank])
    }

    /// `22.5·√n! + 1.4·log2²(n!)`.
    pub fn budget(&self) -> f64 {
        let nf = self.nfact as f64;
        22.5 * nf.sqrt() + 1.4 * nf.log2().powi(2)
    }

    /// Applies `r` Grover rotations for threshold `e` to the uniform code
    /// superposition and samples a rank.
    fn grover_sample<R: Rng>(&self, e: usize, r: u64, rng: &mut R) -> usize {
        let len = self.nfact as usize;
        let uniform = 1.0 / (len as f64).sqrt();
        let mut amps = vec![Complex64::new(uniform, 0.0); len];
        let marked = &self.marked[e];
        for _ in 0..r {
            for (a, &m) in amps.iter_mut().zip(marked) {
                if m {
                    *a = -*a;
                }
            }
            // 2|s⟩⟨s| − I
            let mean: Complex64 = amps.iter().sum::<Complex64>() / len as f64;
            for a in amps.iter_mut() {
                *a = mean * 2.0 - *a;
            }
        }
        let mut u: f64 = rng.gen();
        for (i, a) in amps.iter().enumerate() {
            u -= a.norm_sqr();
            if u < 0.0 {
                return i;
            }
        }
        len - 1
    }

    pub fn run<R: Rng>(&self, trial: u64, rng: &mut R) -> BaselineReport {
        let len = self.nfact as usize;
        let budget = self.budget();
        let cap = (self.nfact as f64).sqrt();
        let mut e = self.overlap(rng.gen_range(0..len));
        let mut used = 0.0;
        let mut rotations = 0;
        let mut measurements = 0;
        let mut p: f64 = 1.0;
        while used < budget {
            let r = rng.gen_range(0..p.ceil().max(1.0) as u64);
            let y = self.grover_sample(e, r, rng);
            rotations += r;
            measurements += 1;
            used += (r + 1) as f64;
            let eo = self.overlap(y);
            if eo > e {
                e = eo;
                p = 1.0;
            } else {
                p = (LAMBDA * p).min(cap);
            }
        }
        BaselineReport { trial, e_returned: e, grover_rotations: rotations, measurements, budget }
    }
}

/// `cfg.trials` runs of the baseline, in trial order.
pub fn grover_baseline(g1: &Graph, g2: &Graph, cfg: &RunConfig) -> Result<Vec<BaselineReport>> {
    let inst = BaselineInstance::new(g1, g2, cfg.backend)?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|t| inst.run(t, &mut trial_rng(cfg.seed, t)))
        .collect())
}
