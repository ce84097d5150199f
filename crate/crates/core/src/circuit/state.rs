use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gk::embedding_dim;
use crate::error::{Error, Result};

/// Largest problem size for the dense amplitude vector.
pub const DENSE_LIMIT: usize = 4;
/// Largest problem size for the structured (label → amplitude) backend.
pub const STRUCTURED_LIMIT: usize = 8;

/// Amplitudes below this are dropped from the structured map after a
/// non-permutation gate.
const PRUNE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Structured,
}

impl Backend {
    pub fn limit(self) -> usize {
        match self {
            Backend::Dense => DENSE_LIMIT,
            Backend::Structured => STRUCTURED_LIMIT,
        }
    }

    pub fn check(self, n: usize) -> Result<()> {
        if n > self.limit() {
            let what = match self {
                Backend::Dense => "the dense backend",
                Backend::Structured => "the structured backend",
            };
            return Err(Error::Guard { what, n, max: self.limit() });
        }
        Ok(())
    }
}

/// Register 1 (radix digits), register 2 (the permuted list), register 3
/// (edge-overlap accumulator) and the marking ancilla, in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    n: usize,
    reg1_dims: Vec<usize>,
    reg3_dim: usize,
}

impl RegisterLayout {
    pub fn new(n: usize, reg3_dim: usize) -> Self {
        let reg1_dims = (1..=n).map(embedding_dim).collect();
        Self { n, reg1_dims, reg3_dim: reg3_dim.max(1) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Levels of radix subsystem `i` (0-indexed), `2^⌈log2(i+1)⌉`.
    pub fn reg1_dims(&self) -> &[usize] {
        &self.reg1_dims
    }

    pub fn reg2_dim(&self) -> usize {
        self.n
    }

    pub fn reg3_dim(&self) -> usize {
        self.reg3_dim
    }

    fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.reg1_dims
            .iter()
            .copied()
            .chain(std::iter::repeat_n(self.n, self.n))
            .chain([self.reg3_dim, 2])
    }

    pub fn dense_dim(&self) -> usize {
        self.dims().product()
    }

    /// Stride of radix subsystem `i` in the dense index (ancilla is least significant).
    fn reg1_stride(&self, i: usize) -> usize {
        self.dims().skip(i + 1).product()
    }

    fn encode(&self, label: &Label) -> usize {
        let mut idx = 0;
        for (d, &v) in self.reg1_dims.iter().zip(&label.reg1) {
            idx = idx * d + v as usize;
        }
        for &v in &label.reg2 {
            idx = idx * self.n + v as usize;
        }
        idx = idx * self.reg3_dim + label.reg3;
        idx * 2 + label.anc as usize
    }

    fn decode_into(&self, mut idx: usize, label: &mut Label) {
        label.anc = (idx % 2) as u8;
        idx /= 2;
        label.reg3 = idx % self.reg3_dim;
        idx /= self.reg3_dim;
        for slot in label.reg2.iter_mut().rev() {
            *slot = (idx % self.n) as u8;
            idx /= self.n;
        }
        for (slot, &d) in label.reg1.iter_mut().zip(&self.reg1_dims).rev() {
            *slot = (idx % d) as u8;
            idx /= d;
        }
    }

    /// The all-zero radix register with `|1⟩|2⟩…|n⟩` loaded and clean accumulators.
    pub fn initial_label(&self) -> Label {
        Label {
            reg1: vec![0; self.n],
            reg2: (0..self.n as u8).collect(),
            reg3: 0,
            anc: 0,
        }
    }
}

/// A computational basis label of the four-register system.
///
/// `reg2` holds 0-indexed vertex labels; the dump renders them 1-indexed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub reg1: Vec<u8>,
    pub reg2: Vec<u8>,
    pub reg3: usize,
    pub anc: u8,
}

impl Label {
    pub fn radix_digits(&self) -> Vec<usize> {
        self.reg1.iter().map(|&d| d as usize).collect()
    }

    /// True when every digit satisfies `C[i] <= i - 1`.
    pub fn is_valid_code(&self) -> bool {
        self.reg1.iter().enumerate().all(|(i, &d)| (d as usize) <= i)
    }

    pub fn reg2_is_identity(&self) -> bool {
        self.reg2.iter().enumerate().all(|(i, &v)| v as usize == i)
    }
}

#[derive(Clone, Debug)]
enum Amplitudes {
    Dense(Vec<Complex64>),
    Structured(BTreeMap<Label, Complex64>),
}

/// Simulated state over a [`RegisterLayout`].
#[derive(Clone, Debug)]
pub struct RegisterState {
    layout: RegisterLayout,
    amps: Amplitudes,
}

impl RegisterState {
    pub fn initial(layout: RegisterLayout, backend: Backend) -> Result<Self> {
        backend.check(layout.n)?;
        let start = layout.initial_label();
        let one = Complex64::new(1.0, 0.0);
        let amps = match backend {
            Backend::Dense => {
                let mut v = vec![Complex64::new(0.0, 0.0); layout.dense_dim()];
                v[layout.encode(&start)] = one;
                Amplitudes::Dense(v)
            }
            Backend::Structured => Amplitudes::Structured(BTreeMap::from([(start, one)])),
        };
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn backend(&self) -> Backend {
        match self.amps {
            Amplitudes::Dense(_) => Backend::Dense,
            Amplitudes::Structured(_) => Backend::Structured,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.amps {
            Amplitudes::Dense(v) => v.iter().map(|a| a.norm_sqr()).sum(),
            Amplitudes::Structured(m) => m.values().map(|a| a.norm_sqr()).sum(),
        }
    }

    /// Number of labels carrying more than `tol` in magnitude.
    pub fn support_size(&self, tol: f64) -> usize {
        match &self.amps {
            Amplitudes::Dense(v) => v.iter().filter(|a| a.norm() > tol).count(),
            Amplitudes::Structured(m) => m.values().filter(|a| a.norm() > tol).count(),
        }
    }

    /// Labels with magnitude above `tol`, sorted.
    pub fn support(&self, tol: f64) -> Vec<(Label, Complex64)> {
        match &self.amps {
            Amplitudes::Dense(v) => {
                let mut label = self.layout.initial_label();
                let mut out = Vec::new();
                for (idx, a) in v.iter().enumerate() {
                    if a.norm() > tol {
                        self.layout.decode_into(idx, &mut label);
                        out.push((label.clone(), *a));
                    }
                }
                out.sort_by(|a, b| a.0.cmp(&b.0));
                out
            }
            Amplitudes::Structured(m) => {
                m.iter().filter(|(_, a)| a.norm() > tol).map(|(l, a)| (l.clone(), *a)).collect()
            }
        }
    }

    pub fn amplitude(&self, label: &Label) -> Complex64 {
        match &self.amps {
            Amplitudes::Dense(v) => v[self.layout.encode(label)],
            Amplitudes::Structured(m) => m.get(label).copied().unwrap_or_default(),
        }
    }

    /// Applies a basis permutation `|l⟩ ↦ |f(l)⟩`. `f` must be a bijection on
    /// the full label space; `check` sees every label with nonzero amplitude
    /// before it is moved.
    pub(crate) fn permute_basis<F, C>(&mut self, f: F, mut check: C) -> Result<()>
    where
        F: Fn(&mut Label),
        C: FnMut(&Label) -> Result<()>,
    {
        match &mut self.amps {
            Amplitudes::Dense(v) => {
                let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
                let mut label = self.layout.initial_label();
                for (idx, a) in v.iter().enumerate() {
                    if *a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    self.layout.decode_into(idx, &mut label);
                    check(&label)?;
                    f(&mut label);
                    out[self.layout.encode(&label)] = *a;
                }
                *v = out;
            }
            Amplitudes::Structured(m) => {
                let mut out = BTreeMap::new();
                for (mut label, a) in std::mem::take(m) {
                    check(&label)?;
                    f(&mut label);
                    out.insert(label, a);
                }
                *m = out;
            }
        }
        Ok(())
    }

    /// Applies `u` to radix subsystem `sub`, identity elsewhere.
    pub(crate) fn apply_reg1_unitary(&mut self, sub: usize, u: &DMatrix<Complex64>) {
        let d = self.layout.reg1_dims[sub];
        assert_eq!(u.nrows(), d, "unitary does not match subsystem {sub}");
        if d == 1 {
            let phase = u[(0, 0)];
            match &mut self.amps {
                Amplitudes::Dense(v) => v.iter_mut().for_each(|a| *a *= phase),
                Amplitudes::Structured(m) => m.values_mut().for_each(|a| *a *= phase),
            }
            return;
        }
        match &mut self.amps {
            Amplitudes::Dense(v) => {
                let stride = self.layout.reg1_stride(sub);
                let block = stride * d;
                let mut gather = vec![Complex64::new(0.0, 0.0); d];
                for base in (0..v.len()).step_by(block) {
                    for offset in 0..stride {
                        let start = base + offset;
                        for (r, g) in gather.iter_mut().enumerate() {
                            *g = v[start + r * stride];
                        }
                        if gather.iter().all(|g| *g == Complex64::new(0.0, 0.0)) {
                            continue;
                        }
                        for r in 0..d {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (c, g) in gather.iter().enumerate() {
                                acc += u[(r, c)] * g;
                            }
                            v[start + r * stride] = acc;
                        }
                    }
                }
            }
            Amplitudes::Structured(m) => {
                let mut out: BTreeMap<Label, Complex64> = BTreeMap::new();
                for (label, a) in m.iter() {
                    let col = label.reg1[sub] as usize;
                    for r in 0..d {
                        let coeff = u[(r, col)];
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut target = label.clone();
                        target.reg1[sub] = r as u8;
                        *out.entry(target).or_default() += coeff * a;
                    }
                }
                out.retain(|_, a| a.norm() > PRUNE);
                *m = out;
            }
        }
    }

    /// One line per support label, sorted:
    /// `reg1=<digits> reg2=<list> reg3=<int> anc=<bit> amp=<re>,<im>`.
    pub fn dump(&self, tol: f64) -> String {
        let mut out = String::new();
        for (label, a) in self.support(tol) {
            let reg1: String = label.reg1.iter().map(|d| d.to_string()).collect();
            let reg2: Vec<String> = label.reg2.iter().map(|v| (v + 1).to_string()).collect();
            let _ = writeln!(
                out,
                "reg1={} reg2={} reg3={} anc={} amp={},{}",
                reg1,
                reg2.join(","),
                label.reg3,
                label.anc,
                fmt_amp(a.re),
                fmt_amp(a.im)
            );
        }
        out
    }
}

fn fmt_amp(x: f64) -> String {
    let s = format!("{x:.12}");
    // avoid "-0.000000000000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_index_round_trip() {
        let layout = RegisterLayout::new(3, 3);
        assert_eq!(layout.dense_dim(), (2 * 4) * 27 * 3 * 2);
        let mut label = layout.initial_label();
        for idx in 0..layout.dense_dim() {
            layout.decode_into(idx, &mut label);
            assert_eq!(layout.encode(&label), idx);
        }
    }

    #[test]
    fn guards() {
        assert!(RegisterState::initial(RegisterLayout::new(5, 2), Backend::Dense).is_err());
        assert!(RegisterState::initial(RegisterLayout::new(9, 2), Backend::Structured).is_err());
        assert!(RegisterState::initial(RegisterLayout::new(8, 2), Backend::Structured).is_ok());
    }

    #[test]
    fn dump_format() {
        let s = RegisterState::initial(RegisterLayout::new(3, 2), Backend::Structured).unwrap();
        assert_eq!(s.dump(1e-12), "reg1=000 reg2=1,2,3 reg3=0 anc=0 amp=1.000000000000,0.000000000000\n");
        assert_eq!(fmt_amp(-1e-20), "0.000000000000");
    }
}
