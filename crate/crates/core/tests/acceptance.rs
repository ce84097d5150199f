//! Acceptance run: one PASS/FAIL line per criterion at pinned tolerances.
//! Reference values come from the naive oracles in `common` or from
//! independent closed forms written out below, never from the library path
//! under test.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use meosim::analysis::{epsilon_n, time_budget, zoom_overlap};
use meosim::bloch::{candidate_state, evolve_nonlinear, orient_arc, EvolutionParams, Orientation};
use meosim::circuit::{Backend, MarkingCircuit};
use meosim::graph::{max_edge_overlap_bound, Graph};
use meosim::perm::{hall_apply, hall_trace, radix_decode, radix_encode, Permutation, RadixCode};
use meosim::protocol::{
    algorithm2, algorithm2_classical, grover_baseline, procedure_a, PreparedInstance, RunConfig, Verdict,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: meosim::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Classical-oracle threshold search vs naive enumeration, 50 pairs per n.
fn oracle_equivalence() -> Check {
    let mut rng = common::rng(101);
    let mut pairs = 0;
    for n in 3..=8 {
        for _ in 0..50 {
            let (g1, g2) = common::random_pair(n, &mut rng);
            let got = lib(algorithm2_classical(&g1, &g2))?;
            let want = common::naive_meo(&g1, &g2);
            ensure(got == want, || format!("n = {n}: search returned {got}, enumeration {want}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, exact"))
}

fn epsilon_constants() -> Check {
    let e5 = lib(epsilon_n(5))?;
    let e6 = lib(epsilon_n(6))?;
    ensure((e5 - 0.00907762).abs() <= 1e-6, || format!("eps_5 = {e5}"))?;
    ensure((e6 - 0.00151206).abs() <= 1e-6, || format!("eps_6 = {e6}"))?;
    Ok(format!("eps_5 = {e5:.8}, eps_6 = {e6:.8}, tol 1e-6"))
}

/// `cos(θ/2)` for the ⌊s/2⌋-th candidate, via the logarithmic form of T
/// and the `cos(π/4 − μ/4)` readout.
fn zoom_reference(nfact: u64, s: u64) -> f64 {
    let n = nfact as f64;
    let half_angle = |k: f64| ((n - k) / (n - k).hypot(k)).acos();
    let alpha0 = 2.0 * half_angle(s as f64);
    let theta0 = 2.0 * half_angle((s / 2) as f64);
    let mu0 = alpha0 - 2.0 * theta0;
    let t = 2.0 * (1.0 / (alpha0 / 4.0).tan()).ln();
    let th = (t / 2.0).tanh();
    let c = (mu0 / 2.0).cos();
    let mu = 2.0 * ((c - th) / (1.0 - c * th)).clamp(-1.0, 1.0).acos();
    (FRAC_PI_4 - mu / 4.0).cos()
}

fn zoom_sweep() -> Check {
    let eps5 = lib(epsilon_n(5))?;
    let r23 = (2.0f64 / 3.0).sqrt();
    let mut checked = 0;
    let mut worst_ref: f64 = 0.0;
    for n in [5, 6] {
        let nfact = common::factorial(n);
        for s in 2..=nfact {
            let value = lib(zoom_overlap(n, s))?;
            let reference = zoom_reference(nfact, s);
            worst_ref = worst_ref.max((value - reference).abs());
            ensure((value - reference).abs() <= 1e-9, || format!("n = {n}, s = {s}: {value} vs reference {reference}"))?;
            let upper = match s {
                s if s % 2 == 0 => r23,
                3 => 2.0 * 2f64.sqrt() / 3.0,
                5 => 18.0 * 2f64.sqrt() / 29.0,
                _ => r23 + eps5,
            };
            ensure(value >= 0.5f64.sqrt() - 1e-12, || format!("n = {n}, s = {s}: {value} below 1/sqrt2"))?;
            ensure(value <= upper + 1e-12, || format!("n = {n}, s = {s}: {value} above {upper}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} values, zero violations, reference gap {worst_ref:.1e}"))
}

fn worked_example() -> Check {
    let code = lib(RadixCode::parse("002143"))?;
    let sigma = lib(Permutation::from_one_line(&[2, 4, 1, 6, 3, 5]))?;
    ensure(radix_encode(&sigma) == code, || format!("encode gave {}", radix_encode(&sigma)))?;
    ensure(radix_decode(&code) == sigma, || "decode mismatch".into())?;
    ensure(hall_apply(&code) == sigma, || "cascade mismatch".into())?;
    let trace: Vec<String> = hall_trace(&code)
        .iter()
        .map(|l| l.iter().map(|v| (v + 1).to_string()).collect())
        .collect();
    let expected = ["123456", "213456", "213456", "241356", "241356", "241635"];
    ensure(trace == expected, || format!("trace {trace:?}"))?;
    Ok("002143 <-> (2,4,1,6,3,5), trace ends 241635".into())
}

fn circuit_agreement() -> Check {
    let mut rng = common::rng(505);
    let nfact = common::factorial(4);
    let (mut cases, mut worst_amp, mut worst_backend): (usize, f64, f64) = (0, 0.0, 0.0);
    for _ in 0..20 {
        let (g1, g2) = common::random_pair(4, &mut rng);
        for e in 0..=max_edge_overlap_bound(&g1, &g2) {
            let circuit = lib(MarkingCircuit::new(&g1, &g2, e))?;
            let dense = lib(circuit.run(Backend::Dense))?;
            let sparse = lib(circuit.run(Backend::Structured))?;
            let m = common::naive_exceeding(&g1, &g2, e);
            let (a0, a1) = common::candidate(m, nfact);
            for run in [&dense, &sparse] {
                let q = run.summary.candidate;
                ensure(run.summary.m_marked == m, || format!("E = {e}: m_marked {} vs {m}", run.summary.m_marked))?;
                worst_amp = worst_amp.max((q.a0 - a0).abs()).max((q.a1 - a1).abs());
            }
            for (label, amp) in sparse.state.support(0.0) {
                worst_backend = worst_backend.max((dense.state.amplitude(&label) - amp).norm());
            }
            for (label, amp) in dense.state.support(0.0) {
                worst_backend = worst_backend.max((sparse.state.amplitude(&label) - amp).norm());
            }
            cases += 1;
        }
    }
    ensure(worst_amp <= 1e-10, || format!("candidate amplitude error {worst_amp:e}"))?;
    ensure(worst_backend <= 1e-10, || format!("backend gap {worst_backend:e}"))?;
    Ok(format!("{cases} (pair, E) cases, amplitude err {worst_amp:.1e}, backend gap {worst_backend:.1e}, tol 1e-10"))
}

fn nonlinear_dynamics() -> Check {
    let nfact = 120u64;
    let params = EvolutionParams::new(1.0).with_orientation(Orientation::CALIBRATED);
    let (mut worst_path, mut worst_final): (f64, f64) = (0.0, 0.0);
    for s in 1..=nfact {
        let (c0, _) = common::candidate(s, nfact);
        let alpha0 = 2.0 * c0.acos();
        let t_final = 2.0 * (1.0 / (alpha0 / 4.0).tan()).ln();
        let start = [
            lib(orient_arc(&lib(candidate_state(0, nfact))?, s, nfact, &params.orientation))?,
            lib(orient_arc(&lib(candidate_state(s, nfact))?, s, nfact, &params.orientation))?,
        ];
        let ev = lib(evolve_nonlinear(&start, alpha0, t_final, &params, Some(1)))?;
        for sample in &ev.samples {
            let th = (sample.t / 2.0).tanh();
            let expected = ((c0 - th) / (1.0 - c0 * th)).max(0.0);
            let got = sample.points[0].overlap(&sample.points[1]);
            worst_path = worst_path.max((got - expected).abs());
        }
        worst_final = worst_final.max(ev.final_points[0].overlap(&ev.final_points[1]));
    }
    ensure(worst_path <= 1e-6, || format!("trajectory residual {worst_path:e}"))?;
    ensure(worst_final <= 1e-6, || format!("overlap at T {worst_final:e}"))?;
    Ok(format!("s = 1..120, path residual {worst_path:.1e}, overlap at T {worst_final:.1e}, tol 1e-6"))
}

fn time_budget_sweep() -> Check {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let nfact = common::factorial(n);
        let t_of = |k: u64| {
            let (c0, _) = common::candidate(k, nfact);
            let alpha0 = 2.0 * c0.acos();
            2.0 * (1.0 / (alpha0 / 4.0).tan()).ln()
        };
        for s in 1..=nfact {
            let b = lib(time_budget(n, s, 1.0))?;
            let total: f64 = (0..=s.ilog2()).map(|i| t_of(s >> i)).sum();
            let bound = 2.0 * (2.0 * s as f64).ln() * ((nfact as f64 / (s as f64).sqrt()).log2() + 1.0);
            ensure((b.total - total).abs() <= 1e-9 * bound.max(1.0), || format!("n = {n}, s = {s}: total {} vs {total}", b.total))?;
            ensure((b.bound - bound).abs() <= 1e-9 * bound.max(1.0), || format!("n = {n}, s = {s}: bound {} vs {bound}", b.bound))?;
            ensure(b.ok && total <= bound, || format!("n = {n}, s = {s}: {total} > {bound}"))?;
            worst = worst.max(total / bound);
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, s) values, worst total/bound {worst:.6}"))
}

fn success_rate(g1: &Graph, g2: &Graph, seed: u64) -> Result<usize, String> {
    let cfg = RunConfig { trials: 100, seed, ..RunConfig::default() };
    let want = common::naive_meo(g1, g2);
    let reports = lib(algorithm2(g1, g2, &cfg))?;
    Ok(reports.iter().filter(|r| r.e_returned == want).count())
}

fn monte_carlo() -> Check {
    let path = Graph::path(5);
    let mut rates = vec![success_rate(&path, &path, 8)?];
    let mut rng = common::rng(808);
    for k in 0..5 {
        let (g1, g2) = common::random_pair(5, &mut rng);
        rates.push(success_rate(&g1, &g2, 80 + k)?);
    }
    ensure(rates.iter().all(|&r| r >= 50), || format!("successes per 100: {rates:?}"))?;
    Ok(format!("theorem omega, successes per 100 trials {rates:?}, need >= 50"))
}

fn grover() -> Check {
    let mut rng = common::rng(909);
    let mut rates = Vec::new();
    for n in [3, 4] {
        let mut pairs = vec![(Graph::path(n), Graph::cycle(n))];
        for _ in 0..3 {
            pairs.push(common::random_pair(n, &mut rng));
        }
        for (g1, g2) in pairs {
            let want = common::naive_meo(&g1, &g2);
            let cfg = RunConfig { trials: 200, seed: 90 + rates.len() as u64, ..RunConfig::default() };
            let reports = lib(grover_baseline(&g1, &g2, &cfg))?;
            rates.push(reports.iter().filter(|r| r.e_returned == want).count());
        }
    }
    ensure(rates.iter().all(|&r| r > 100), || format!("successes per 200: {rates:?}"))?;
    Ok(format!("successes per 200 trials {rates:?}, need > 100"))
}

fn one_sided() -> Check {
    let mut rng = common::rng(1010);
    let mut pairs = vec![(Graph::path(5), Graph::path(5))];
    for _ in 0..3 {
        pairs.push(common::random_pair(5, &mut rng));
    }
    let cfg = RunConfig { seed: 10, ..RunConfig::default() };
    let mut calls = 0u64;
    let mut positives = 0u64;
    for (g1, g2) in &pairs {
        let inst = lib(PreparedInstance::new(g1, g2, &cfg))?;
        let e = inst.e_max();
        ensure(common::naive_exceeding(g1, g2, e) == 0, || "m > 0 at E_max".into())?;
        for stream in 0..2500 {
            if lib(procedure_a(&inst, e, &cfg, stream))? == Verdict::Positive {
                positives += 1;
            }
            calls += 1;
        }
    }
    ensure(positives == 0, || format!("{positives} m>0 verdicts"))?;
    Ok(format!("{calls} calls at E = E_max, {positives} m>0 verdicts"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence, n = 3..8", oracle_equivalence),
        ("epsilon constants", epsilon_constants),
        ("zoom bound sweep, n = 5, 6", zoom_sweep),
        ("radix worked example", worked_example),
        ("circuit vs candidate formula, n = 4", circuit_agreement),
        ("nonlinear endpoint dynamics, n = 5", nonlinear_dynamics),
        ("time budget, n = 2..8", time_budget_sweep),
        ("end-to-end Monte Carlo, n = 5", monte_carlo),
        ("Grover baseline, n = 3, 4", grover),
        ("one-sided error", one_sided),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:2}] {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:2}] {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
