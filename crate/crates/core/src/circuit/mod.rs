//! The linear marking circuit: uniform code preparation, the controlled
//! Hall cascade, the edge-overlap adder, the threshold comparator,
//! uncomputation and postselection onto the uniform code superposition.

pub mod gk;
pub mod state;

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use gk::{embedding_dim, hadamard, solve_gk, GkUnitary, GK_TOLERANCE};
pub use state::{Backend, Label, RegisterLayout, RegisterState, DENSE_LIMIT, STRUCTURED_LIMIT};

use crate::bloch::CandidateQubit;
use crate::error::{Error, Result};
use crate::graph::{max_edge_overlap_bound, overlap_of_slice, Graph};
use crate::perm::{factorial, hall_block_swaps, RadixCode};

/// Norm tolerance checked after every gate.
pub const NORM_TOLERANCE: f64 = 1e-10;

fn gk_table() -> &'static [GkUnitary] {
    static TABLE: OnceLock<Vec<GkUnitary>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=STRUCTURED_LIMIT)
            .map(|k| solve_gk(k, embedding_dim(k)).expect("G_k solves for every register size"))
            .collect()
    })
}

/// `G_k` for radix subsystem `k` (1-indexed), cached.
pub fn gk(k: usize) -> &'static GkUnitary {
    &gk_table()[k - 1]
}

/// Marking circuit for one `(G1, G2, E)` instance.
#[derive(Clone, Debug)]
pub struct MarkingCircuit<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    threshold: usize,
    layout: RegisterLayout,
}

/// Counters and norms seen while running the pipeline.
#[derive(Clone, Debug)]
pub struct MarkingRun {
    pub state: RegisterState,
    pub summary: MarkedSummary,
    /// Norm after each stage, in pipeline order.
    pub norms: Vec<f64>,
    /// Largest support size seen after the uniform preparation.
    pub peak_support: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedSummary {
    pub m_marked: u64,
    pub nfact: u64,
    /// Mean magnitude of the surviving code amplitudes (ideally `1/√n!`).
    pub uniform_amplitude: f64,
    pub postselect_prob: f64,
    pub candidate: CandidateQubit,
}

impl<'a> MarkingCircuit<'a> {
    pub fn new(g1: &'a Graph, g2: &'a Graph, threshold: usize) -> Result<Self> {
        if g1.n() != g2.n() {
            return Err(Error::SizeMismatch { left: g1.n(), right: g2.n() });
        }
        let e_max = max_edge_overlap_bound(g1, g2);
        if threshold > e_max {
            return Err(Error::InvalidArgument(format!("threshold {threshold} exceeds E_max = {e_max}")));
        }
        let layout = RegisterLayout::new(g1.n(), e_max + 1);
        Ok(Self { g1, g2, threshold, layout })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn initial_state(&self, backend: Backend) -> Result<RegisterState> {
        RegisterState::initial(self.layout.clone(), backend)
    }

    /// `G = G_1 ⊗ G_2 ⊗ … ⊗ G_n` on the radix register.
    pub fn apply_g(&self, mut state: RegisterState) -> Result<RegisterState> {
        for k in 1..=self.layout.n() {
            state.apply_reg1_unitary(k - 1, &gk(k).matrix);
        }
        check_norm(state)
    }

    pub fn apply_g_dagger(&self, mut state: RegisterState) -> Result<RegisterState> {
        for k in (1..=self.layout.n()).rev() {
            state.apply_reg1_unitary(k - 1, &gk(k).matrix.adjoint());
        }
        check_norm(state)
    }

    /// Controlled `P_2 … P_n`: the digit in radix subsystem `i` selects the
    /// swap cascade applied to the list register.
    pub fn apply_hall(&self, mut state: RegisterState) -> Result<RegisterState> {
        let n = self.layout.n();
        state.permute_basis(
            |l| {
                for i in 2..=n {
                    for (a, b) in hall_block_swaps(i, l.reg1[i - 1] as usize) {
                        l.reg2.swap(a, b);
                    }
                }
            },
            |_| Ok(()),
        )?;
        check_norm(state)
    }

    pub fn apply_hall_inverse(&self, mut state: RegisterState) -> Result<RegisterState> {
        let n = self.layout.n();
        state.permute_basis(
            |l| {
                for i in (2..=n).rev() {
                    for (a, b) in hall_block_swaps(i, l.reg1[i - 1] as usize).into_iter().rev() {
                        l.reg2.swap(a, b);
                    }
                }
            },
            |_| Ok(()),
        )?;
        check_norm(state)
    }

    fn overlap_of(&self, l: &Label) -> usize {
        let map: Vec<usize> = l.reg2.iter().map(|&v| v as usize).collect();
        overlap_of_slice(self.g1, self.g2, &map)
    }

    fn is_permutation(reg2: &[u8]) -> bool {
        let mut seen = 0u32;
        for &v in reg2 {
            seen |= 1 << v;
        }
        seen.count_ones() as usize == reg2.len()
    }

    /// `|a⟩|σ⟩ ↦ |a + EO(σ) mod d⟩|σ⟩`. Only list contents that are true
    /// permutations are touched, which keeps the map a bijection.
    pub fn apply_eo(&self, state: RegisterState) -> Result<RegisterState> {
        self.shift_accumulator(state, true)
    }

    pub fn apply_eo_inverse(&self, state: RegisterState) -> Result<RegisterState> {
        self.shift_accumulator(state, false)
    }

    fn shift_accumulator(&self, mut state: RegisterState, forward: bool) -> Result<RegisterState> {
        let d = self.layout.reg3_dim();
        state.permute_basis(
            |l| {
                if Self::is_permutation(&l.reg2) {
                    let eo = self.overlap_of(l) % d;
                    l.reg3 = if forward { (l.reg3 + eo) % d } else { (l.reg3 + d - eo) % d };
                }
            },
            |l| {
                if Self::is_permutation(&l.reg2) {
                    let eo = self.overlap_of(l);
                    if eo >= d {
                        return Err(Error::AccumulatorOverflow { value: eo, levels: d });
                    }
                }
                Ok(())
            },
        )?;
        check_norm(state)
    }

    /// `anc ^= [reg3 > E]`; self-inverse.
    pub fn apply_comparator(&self, mut state: RegisterState) -> Result<RegisterState> {
        let e = self.threshold;
        state.permute_basis(
            |l| {
                if l.reg3 > e {
                    l.anc ^= 1;
                }
            },
            |_| Ok(()),
        )?;
        check_norm(state)
    }

    /// Undoes the adder and the Hall cascade, leaving the ancilla marked.
    pub fn uncompute(&self, state: RegisterState) -> Result<RegisterState> {
        let state = self.apply_eo_inverse(state)?;
        self.apply_hall_inverse(state)
    }

    /// Projects onto `|s⟩` on the radix register (with clean list and
    /// accumulator) for each ancilla value, by direct inner product.
    pub fn postselect(&self, state: &RegisterState) -> Result<MarkedSummary> {
        let nfact = factorial(self.layout.n());
        let s_amp = 1.0 / (nfact as f64).sqrt();
        let mut proj = [Complex64::new(0.0, 0.0); 2];
        let mut m_marked = 0u64;
        let mut mags = 0.0;
        let mut live = 0u64;
        for (label, amp) in state.support(1e-14) {
            if !(label.is_valid_code() && label.reg2_is_identity() && label.reg3 == 0) {
                continue;
            }
            proj[label.anc as usize] += amp * s_amp;
            if amp.norm() > 0.5 * s_amp {
                m_marked += u64::from(label.anc == 1);
                mags += amp.norm();
                live += 1;
            }
        }
        let p0 = proj[0].re.max(0.0);
        let p1 = proj[1].re.max(0.0);
        let prob = proj[0].norm_sqr() + proj[1].norm_sqr();
        if prob == 0.0 {
            return Err(Error::ZeroNormPostselection);
        }
        Ok(MarkedSummary {
            m_marked,
            nfact,
            uniform_amplitude: if live == 0 { 0.0 } else { mags / live as f64 },
            postselect_prob: prob,
            candidate: CandidateQubit::new(p0, p1)?,
        })
    }

    /// Same projection computed by applying `G†` and reading the all-zero code.
    pub fn postselect_via_inverse(&self, state: RegisterState) -> Result<[Complex64; 2]> {
        let state = self.apply_g_dagger(state)?;
        let mut label = self.layout.initial_label();
        let zero = state.amplitude(&label);
        label.anc = 1;
        Ok([zero, state.amplitude(&label)])
    }

    /// Runs the whole pipeline up to (not including) postselection.
    pub fn marked_state(&self, backend: Backend) -> Result<(RegisterState, Vec<f64>, usize)> {
        let mut norms = Vec::with_capacity(6);
        let mut peak = 0;
        let mut state = self.initial_state(backend)?;
        for stage in 0..5 {
            state = match stage {
                0 => self.apply_g(state)?,
                1 => self.apply_hall(state)?,
                2 => self.apply_eo(state)?,
                3 => self.apply_comparator(state)?,
                _ => self.uncompute(state)?,
            };
            norms.push(state.norm_sqr().sqrt());
            peak = peak.max(state.support_size(1e-12));
        }
        Ok((state, norms, peak))
    }

    pub fn run(&self, backend: Backend) -> Result<MarkingRun> {
        let (state, norms, peak_support) = self.marked_state(backend)?;
        let summary = self.postselect(&state)?;
        Ok(MarkingRun { state, summary, norms, peak_support })
    }
}

fn check_norm(state: RegisterState) -> Result<RegisterState> {
    let drift = (state.norm_sqr().sqrt() - 1.0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::NormDrift(drift));
    }
    Ok(state)
}

/// Prepare, mark, uncompute and postselect for one threshold.
pub fn run_marking_pipeline(g1: &Graph, g2: &Graph, threshold: usize, backend: Backend) -> Result<MarkedSummary> {
    Ok(MarkingCircuit::new(g1, g2, threshold)?.run(backend)?.summary)
}

/// Radix codes carrying the marked ancilla in an uncomputed state.
pub fn marked_codes(state: &RegisterState) -> Vec<RadixCode> {
    let nfact = factorial(state.layout().n());
    let cut = 0.5 / (nfact as f64).sqrt();
    state
        .support(cut)
        .into_iter()
        .filter(|(l, _)| l.anc == 1 && l.is_valid_code())
        .map(|(l, _)| RadixCode::new(l.radix_digits()).expect("valid code"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_codes, hall_apply, RadixCode};

    fn triangle() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn uniform_preparation() {
        let g = triangle();
        for (n, backend) in [(2, Backend::Structured), (3, Backend::Structured), (4, Backend::Dense)] {
            let gg = Graph::empty(n);
            let c = MarkingCircuit::new(&gg, &gg, 0).unwrap();
            let s = c.apply_g(c.initial_state(backend).unwrap()).unwrap();
            let support = s.support(1e-10);
            assert_eq!(support.len() as u64, factorial(n));
            let amp = 1.0 / (factorial(n) as f64).sqrt();
            for (l, a) in support {
                assert!(l.is_valid_code());
                assert!((a - Complex64::new(amp, 0.0)).norm() < 1e-10);
            }
        }
        let _ = g;
    }

    #[test]
    fn hall_cascade_branches() {
        let g = Graph::empty(6);
        let c = MarkingCircuit::new(&g, &g, 0).unwrap();
        let mut s = c.initial_state(Backend::Structured).unwrap();
        // load |002143⟩ directly
        let code = RadixCode::parse("002143").unwrap();
        s.permute_basis(|l| l.reg1 = code.digits().iter().map(|&d| d as u8).collect(), |_| Ok(())).unwrap();
        let s = c.apply_hall(s).unwrap();
        let (label, _) = &s.support(0.5)[0];
        let list: Vec<usize> = label.reg2.iter().map(|&v| v as usize + 1).collect();
        assert_eq!(list, vec![2, 4, 1, 6, 3, 5]);
    }

    #[test]
    fn hall_matches_decode_for_all_codes() {
        let g = Graph::empty(4);
        let c = MarkingCircuit::new(&g, &g, 0).unwrap();
        let s = c.apply_hall(c.apply_g(c.initial_state(Backend::Structured).unwrap()).unwrap()).unwrap();
        let support = s.support(1e-10);
        assert_eq!(support.len(), 24);
        for (l, _) in support {
            let code = RadixCode::new(l.radix_digits()).unwrap();
            let list: Vec<usize> = l.reg2.iter().map(|&v| v as usize).collect();
            assert_eq!(list, hall_apply(&code).as_slice());
        }
        assert_eq!(all_codes(4).count(), 24);
    }

    #[test]
    fn eo_gate_values() {
        let t = triangle();
        let c = MarkingCircuit::new(&t, &t, 0).unwrap();
        let s = c.run(Backend::Structured).unwrap();
        assert_eq!(s.summary.m_marked, 6);

        let p = Graph::path(3);
        let c = MarkingCircuit::new(&p, &p, 0).unwrap();
        let s = c.initial_state(Backend::Structured).unwrap();
        let s = c.apply_eo(s).unwrap();
        assert_eq!(s.support(0.5)[0].0.reg3, 2);

        let e = Graph::empty(3);
        let c = MarkingCircuit::new(&t, &e, 0).unwrap();
        let s = c.apply_eo(c.apply_hall(c.apply_g(c.initial_state(Backend::Structured).unwrap()).unwrap()).unwrap()).unwrap();
        assert!(s.support(1e-10).iter().all(|(l, _)| l.reg3 == 0));
    }

    #[test]
    fn comparator_and_uncompute() {
        let p4 = Graph::path(4);
        let c = MarkingCircuit::new(&p4, &p4, 2).unwrap();
        let run = c.run(Backend::Dense).unwrap();
        assert_eq!(run.summary.m_marked, 2);
        for (l, _) in run.state.support(1e-10) {
            assert!(l.reg2_is_identity());
            assert_eq!(l.reg3, 0);
        }
        for norm in &run.norms {
            assert!((norm - 1.0).abs() < NORM_TOLERANCE);
        }
        let c0 = CandidateQubit::new(22.0, 2.0).unwrap();
        assert!((run.summary.candidate.a0 - c0.a0).abs() < 1e-10);
        assert!((run.summary.candidate.a1 - c0.a1).abs() < 1e-10);
    }

    #[test]
    fn inverse_route_agrees_with_inner_product() {
        let p4 = Graph::path(4);
        let star = Graph::star(4);
        for e in 0..=3 {
            let c = MarkingCircuit::new(&p4, &star, e).unwrap();
            let run = c.run(Backend::Dense).unwrap();
            let [a0, a1] = c.postselect_via_inverse(run.state.clone()).unwrap();
            let prob = a0.norm_sqr() + a1.norm_sqr();
            assert!((prob - run.summary.postselect_prob).abs() < 1e-10);
            let q = CandidateQubit::new(a0.re.max(0.0), a1.re.max(0.0)).unwrap();
            assert!((q.a0 - run.summary.candidate.a0).abs() < 1e-10);
        }
    }

    #[test]
    fn threshold_at_maximum_marks_nothing() {
        let p4 = Graph::path(4);
        let s = run_marking_pipeline(&p4, &Graph::cycle(4), 3, Backend::Structured).unwrap();
        assert_eq!(s.m_marked, 0);
        assert_eq!(s.candidate, CandidateQubit::zero());
        assert!((s.postselect_prob - 1.0).abs() < 1e-12);
        assert!(run_marking_pipeline(&p4, &p4, 4, Backend::Structured).is_err());
    }

    #[test]
    fn backend_guards() {
        let g = Graph::path(5);
        assert!(matches!(run_marking_pipeline(&g, &g, 0, Backend::Dense), Err(Error::Guard { .. })));
        let g = Graph::path(9);
        assert!(matches!(run_marking_pipeline(&g, &g, 0, Backend::Structured), Err(Error::Guard { .. })));
    }
}
