//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use crate::analysis::{
    epsilon_n, figure_data, time_budget, verify_halfway, verify_zoomok, FigureName, FigureParams,
};
use crate::bloch::{calibrate, candidate_state, default_calibration_grid, run_arc, EvolutionParams};
use crate::circuit::{Backend, MarkingCircuit};
use crate::error::{Error, Result};
use crate::graph::{brute_force_meo, count_exceeding, is_isomorphic, max_edge_overlap_bound, similarity, Graph};
use crate::perm::factorial;
use crate::protocol::{
    algorithm2, algorithm2_analytic, grover_baseline, trial_rng, Mode, OmegaPolicy, OmegaSetting, RunConfig,
};

#[derive(Debug, Parser)]
#[command(name = "meosim", version, about = "Maximum edge overlap via simulated nonlinear quantum search")]
pub struct Cli {
    /// Worker threads for trials and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact maximum edge overlap, optimal count and similarity.
    Meo(PairArgs),
    /// Run the marking circuit for one threshold, optionally evolving one arc.
    Simulate(SimulateArgs),
    /// Full threshold search with the zooming predicate.
    Run(RunArgs),
    /// Dürr–Høyer maximum search on the marking circuit (n <= 4).
    Baseline(BaselineArgs),
    /// Numerical verification suites.
    Verify(VerifyArgs),
    /// CSV data series.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    pub graph1: PathBuf,
    pub graph2: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Threshold E.
    #[arg(long = "threshold", short = 'E')]
    pub threshold: usize,
    #[arg(long, value_enum, default_value_t = Backend::Structured)]
    pub backend: Backend,
    /// Print the uncomputed register state.
    #[arg(long)]
    pub dump: bool,
    /// Evolve the candidate on the arc of this size.
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Trajectory CSV destination (with --s).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also print the orientation calibration report.
    #[arg(long)]
    pub calibrate: bool,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Ensemble size, a positive integer or "auto".
    #[arg(long, default_value = "auto")]
    pub omega: OmegaSetting,
    #[arg(long, value_enum, default_value_t = OmegaPolicy::Theorem)]
    pub policy: OmegaPolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Backend::Structured)]
    pub backend: Backend,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub assume_postselection: bool,
    /// Write per-trial reports here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Allow n < 5 using the suitability table.
    #[arg(long)]
    pub allow_small: bool,
    #[arg(long, value_enum, default_value_t = Mode::Montecarlo)]
    pub mode: Mode,
    /// Also write the zoom trace of every trial as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Zoomok,
    Halfway,
    Timecost,
    Epsilon,
    Circuit,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination; printed to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub name: FigureName,
    /// A single n or an inclusive range such as 5..8.
    #[arg(long, default_value = "5")]
    pub n: NRange,
    /// Graph pair for evsbij.
    #[arg(long, num_args = 2, value_names = ["GRAPH1", "GRAPH2"])]
    pub graphs: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl std::str::FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad n range {s:?}"));
        match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                let (lo, hi) = (parse(a)?, parse(b)?);
                if lo > hi {
                    return Err(format!("empty n range {s:?}"));
                }
                Ok(NRange { lo, hi })
            }
            None => {
                let n = parse(s)?;
                Ok(NRange { lo: n, hi: n })
            }
        }
    }
}

/// What a command produced, before it becomes an exit code.
enum Outcome {
    Pass,
    Fail,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{}", e.render());
            if !e.use_stderr() {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let result = match cli.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(&cli.command, &mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        None => dispatch(&cli.command, out),
    };
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Meo(a) => cmd_meo(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Baseline(a) => cmd_baseline(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Figure(a) => cmd_figure(a, out),
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    Graph::parse(&text)
}

fn read_pair(p: &PairArgs) -> Result<(Graph, Graph)> {
    let g1 = read_graph(&p.graph1)?;
    let g2 = read_graph(&p.graph2)?;
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch { left: g1.n(), right: g2.n() });
    }
    Ok((g1, g2))
}

fn emit(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}")?;
    Ok(())
}

fn cmd_meo(a: &PairArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (g1, g2) = read_pair(a)?;
    let meo = brute_force_meo(&g1, &g2)?;
    let report = json!({
        "n": g1.n(),
        "edges1": g1.edge_count(),
        "edges2": g2.edge_count(),
        "meo": meo.meo,
        "optimal_count": meo.optimal_count,
        "similarity": similarity(&g1, &g2)?,
        "isomorphic": is_isomorphic(&g1, &g2)?,
    });
    emit(out, &report.to_string())?;
    Ok(Outcome::Pass)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (g1, g2) = read_pair(&a.pair)?;
    let circuit = MarkingCircuit::new(&g1, &g2, a.threshold)?;
    let run = circuit.run(a.backend)?;
    emit(out, &serde_json::to_string(&run.summary)?)?;
    if a.dump {
        write!(out, "{}", run.state.dump(1e-12))?;
    }
    if let Some(s) = a.s {
        let nfact = factorial(g1.n());
        let params = EvolutionParams::new(a.g);
        let outcome = run_arc(&run.summary.candidate, s, nfact, &params, Some(10))?;
        let line = json!({
            "s": s,
            "evolution_time": outcome.evolution_time,
            "p1": outcome.qubit.p1(),
            "qubit": outcome.qubit,
            "endpoint_overlap": outcome.endpoints[0].overlap(&outcome.endpoints[1]),
        });
        emit(out, &line.to_string())?;
        if let Some(path) = &a.out {
            std::fs::write(path, outcome.trajectory_csv())?;
        }
    }
    if a.calibrate {
        emit(out, &calibrate(&default_calibration_grid(), a.g)?.to_json())?;
    }
    Ok(Outcome::Pass)
}

fn protocol_config(p: &ProtocolArgs, allow_small: bool, mode: Mode) -> RunConfig {
    RunConfig {
        g: p.g,
        omega: p.omega,
        policy: p.policy,
        seed: p.seed,
        backend: p.backend,
        trials: p.trials,
        assume_postselection: p.assume_postselection,
        mode,
        allow_small,
    }
}

fn sink<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(out),
    })
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (g1, g2) = read_pair(&a.pair)?;
    let cfg = protocol_config(&a.protocol, a.allow_small, a.mode);
    let omega = cfg.resolve_omega(g1.n())?;
    let meo = brute_force_meo(&g1, &g2)?.meo;
    if a.mode == Mode::Analytic {
        let report = algorithm2_analytic(&g1, &g2, &cfg)?;
        emit(out, &serde_json::to_string(&report)?)?;
        return Ok(Outcome::Pass);
    }
    let reports = algorithm2(&g1, &g2, &cfg)?;
    {
        let mut w = sink(&a.protocol.out, out)?;
        for r in &reports {
            writeln!(w, "{}", r.to_json())?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.trace {
        let mut csv = String::from("trial,round,E,s,zeros,ones,verdict\n");
        for r in &reports {
            for line in r.trace_csv().lines().skip(1) {
                csv.push_str(&format!("{},{}\n", r.trial, line));
            }
        }
        std::fs::write(path, csv)?;
    }
    let hits = reports.iter().filter(|r| r.e_returned == meo).count();
    let summary = json!({
        "summary": {
            "trials": reports.len(),
            "meo": meo,
            "omega": omega.omega,
            "omega_raw": omega.raw,
            "omega_escalated": omega.escalated,
            "policy": cfg.policy,
            "success_rate": hits as f64 / reports.len().max(1) as f64,
            "budget_ok": reports.iter().all(|r| r.budget_ok),
        }
    });
    emit(out, &summary.to_string())?;
    Ok(Outcome::Pass)
}

fn cmd_baseline(a: &BaselineArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (g1, g2) = read_pair(&a.pair)?;
    let cfg = protocol_config(&a.protocol, true, Mode::Montecarlo);
    let meo = brute_force_meo(&g1, &g2)?.meo;
    let reports = grover_baseline(&g1, &g2, &cfg)?;
    {
        let mut w = sink(&a.protocol.out, out)?;
        for r in &reports {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        w.flush()?;
    }
    let hits = reports.iter().filter(|r| r.e_returned == meo).count();
    let summary = json!({
        "summary": {
            "trials": reports.len(),
            "meo": meo,
            "success_rate": hits as f64 / reports.len().max(1) as f64,
        }
    });
    emit(out, &summary.to_string())?;
    Ok(Outcome::Pass)
}

fn finish_report(report: serde_json::Value, passed: bool, dest: &Option<PathBuf>, out: &mut dyn Write) -> Result<Outcome> {
    let text = serde_json::to_string_pretty(&report)?;
    match dest {
        Some(path) => {
            std::fs::write(path, &text)?;
            emit(out, &json!({ "passed": passed, "report": path }).to_string())?;
        }
        None => emit(out, &text)?,
    }
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let n = a.n;
    match a.suite {
        Suite::Zoomok => {
            let report = verify_zoomok(n)?;
            let passed = report.passed();
            let body = json!({
                "suite": "zoomok",
                "n": n,
                "checked": report.rows.len(),
                "epsilon": report.epsilon,
                "violations": report.violations,
                "passed": passed,
            });
            finish_report(body, passed, &a.out, out)
        }
        Suite::Halfway => {
            guard_range("halfway", n, 1, 8)?;
            let mut failures = Vec::new();
            for s in 1..=factorial(n) {
                let h = verify_halfway(n, s)?;
                if !h.ok {
                    failures.push(json!({ "s": s, "s_prime": h.s_prime }));
                }
            }
            let passed = failures.is_empty();
            let body = json!({ "suite": "halfway", "n": n, "checked": factorial(n), "failures": failures, "passed": passed });
            finish_report(body, passed, &a.out, out)
        }
        Suite::Timecost => {
            guard_range("timecost", n, 2, 8)?;
            let mut failures = Vec::new();
            let mut worst_ratio: f64 = 0.0;
            for s in 1..=factorial(n) {
                let b = time_budget(n, s, a.g)?;
                if b.bound > 0.0 {
                    worst_ratio = worst_ratio.max(b.total / b.bound);
                }
                if !b.ok {
                    failures.push(json!({ "s": s, "total": b.total, "bound": b.bound }));
                }
            }
            let passed = failures.is_empty();
            let body = json!({
                "suite": "timecost", "n": n, "g": a.g, "checked": factorial(n),
                "worst_ratio": worst_ratio, "failures": failures, "passed": passed,
            });
            finish_report(body, passed, &a.out, out)
        }
        Suite::Epsilon => {
            let value = epsilon_n(n)?;
            let pinned = match n {
                5 => Some(0.00907762),
                6 => Some(0.00151206),
                _ => None,
            };
            let mut passed = pinned.is_none_or(|p| (value - p).abs() <= 1e-6);
            if n > 5 {
                passed &= value < epsilon_n(n - 1)?;
            }
            let body = json!({ "suite": "epsilon", "n": n, "epsilon": value, "pinned": pinned, "tolerance": 1e-6, "passed": passed });
            finish_report(body, passed, &a.out, out)
        }
        Suite::Circuit => {
            guard_range("circuit", n, 1, 4)?;
            let (checked, failures) = circuit_parity(n, a.seed)?;
            let passed = failures.is_empty();
            let body = json!({ "suite": "circuit", "n": n, "checked": checked, "failures": failures, "passed": passed });
            finish_report(body, passed, &a.out, out)
        }
    }
}

fn guard_range(what: &'static str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if n < lo || n > hi {
        return Err(Error::Guard { what, n, max: hi });
    }
    Ok(())
}

/// Dense/structured agreement, oracle marking counts and candidate
/// amplitudes over every threshold of a few seeded random pairs.
fn circuit_parity(n: usize, seed: u64) -> Result<(usize, Vec<serde_json::Value>)> {
    let mut rng = trial_rng(seed, 0);
    let mut failures = Vec::new();
    let mut checked = 0;
    for pair in 0..10 {
        let g1 = Graph::random(n, rng.gen_range(0.3..0.9), &mut rng);
        let g2 = Graph::random(n, rng.gen_range(0.3..0.9), &mut rng);
        for e in 0..=max_edge_overlap_bound(&g1, &g2) {
            checked += 1;
            let c = MarkingCircuit::new(&g1, &g2, e)?;
            let dense = c.run(Backend::Dense)?;
            let sparse = c.run(Backend::Structured)?;
            let m = count_exceeding(&g1, &g2, e)?;
            let expected = candidate_state(m, factorial(n))?;
            let mut worst: f64 = 0.0;
            for (label, amp) in sparse.state.support(0.0) {
                worst = worst.max((dense.state.amplitude(&label) - amp).norm());
            }
            for (label, amp) in dense.state.support(1e-12) {
                worst = worst.max((sparse.state.amplitude(&label) - amp).norm());
            }
            let cand_err = (dense.summary.candidate.a0 - expected.a0)
                .abs()
                .max((dense.summary.candidate.a1 - expected.a1).abs());
            if worst > 1e-10 || cand_err > 1e-10 || dense.summary.m_marked != m || sparse.summary.m_marked != m {
                failures.push(json!({
                    "pair": pair, "E": e, "amplitude_gap": worst, "candidate_gap": cand_err,
                    "m": m, "m_dense": dense.summary.m_marked, "m_structured": sparse.summary.m_marked,
                }));
            }
        }
    }
    Ok((checked, failures))
}

fn cmd_figure(a: &FigureArgs, out: &mut dyn Write) -> Result<Outcome> {
    let graphs = match &a.graphs {
        Some(paths) => {
            let g1 = read_graph(&paths[0])?;
            let g2 = read_graph(&paths[1])?;
            Some((g1, g2))
        }
        None => None,
    };
    let params = FigureParams {
        n_lo: a.n.lo,
        n_hi: a.n.hi,
        graphs: graphs.as_ref().map(|(g1, g2)| (g1, g2)),
    };
    let table = figure_data(a.name, &params)?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, table.to_csv())?;
            emit(out, &json!({ "rows": table.rows.len(), "out": path }).to_string())?;
        }
        None => write!(out, "{}", table.to_csv())?,
    }
    Ok(Outcome::Pass)
}
