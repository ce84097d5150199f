//! Uniform-`k` preparation `G_k|0⟩ = (|0⟩ + … + |k-1⟩)/√k` on `dim = 2^q` levels.
//!
//! For `k < dim` the unitary is `-H S_0(φ) H S_χ(ϕ) H` with `H = H^{⊗q}`,
//! `S_0(φ)` a phase on `|0⟩` and `S_χ(ϕ)` a phase on the first `k` levels.
//! The two phases are found by a Newton search on the amplitude left on the
//! first unwanted level; a global phase is then removed so the prepared
//! amplitudes are real and positive.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Post-state tolerance on every amplitude of `G_k|0⟩`.
pub const GK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GkUnitary {
    pub k: usize,
    pub dim: usize,
    /// `(φ, ϕ)`; `None` when `G_k` is a plain Hadamard transform.
    pub phases: Option<(f64, f64)>,
    pub matrix: DMatrix<Complex64>,
    /// Largest deviation of `G_k|0⟩` from the target state.
    pub residual: f64,
}

impl GkUnitary {
    /// Column `G_k|0⟩`.
    pub fn prepared(&self) -> Vec<Complex64> {
        self.matrix.column(0).iter().copied().collect()
    }
}

/// Smallest power of two `>= k` (1 for `k <= 1`).
pub fn embedding_dim(k: usize) -> usize {
    k.max(1).next_power_of_two()
}

/// Walsh–Hadamard transform on `dim = 2^q` levels.
pub fn hadamard(dim: usize) -> DMatrix<Complex64> {
    let norm = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |r, c| {
        let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * norm, 0.0)
    })
}

fn diagonal_phase(dim: usize, upto: usize, angle: f64) -> DMatrix<Complex64> {
    let phase = Complex64::from_polar(1.0, angle);
    DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            Complex64::new(0.0, 0.0)
        } else if r < upto {
            phase
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

fn amplified(k: usize, dim: usize, phi: f64, varphi: f64) -> DMatrix<Complex64> {
    let h = hadamard(dim);
    let s0 = diagonal_phase(dim, 1, phi);
    let sx = diagonal_phase(dim, k, varphi);
    -(&h * s0 * &h * sx * &h)
}

fn post_state_error(matrix: &DMatrix<Complex64>, k: usize) -> f64 {
    let target = 1.0 / (k as f64).sqrt();
    matrix
        .column(0)
        .iter()
        .enumerate()
        .map(|(j, a)| if j < k { (a - target).norm() } else { a.norm() })
        .fold(0.0, f64::max)
}

/// Amplitude that `G_k|0⟩` leaves on level `k`, as a real 2-vector.
fn leak(k: usize, dim: usize, phi: f64, varphi: f64) -> [f64; 2] {
    let a = amplified(k, dim, phi, varphi)[(k, 0)];
    [a.re, a.im]
}

fn newton(k: usize, dim: usize, start: (f64, f64)) -> Option<(f64, f64)> {
    let (mut phi, mut varphi) = start;
    let h = 1e-7;
    for _ in 0..60 {
        let r = leak(k, dim, phi, varphi);
        if r[0].hypot(r[1]) < 1e-15 {
            return Some((phi, varphi));
        }
        let dp = leak(k, dim, phi + h, varphi);
        let dv = leak(k, dim, phi, varphi + h);
        let j = [[(dp[0] - r[0]) / h, (dv[0] - r[0]) / h], [(dp[1] - r[1]) / h, (dv[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let step_phi = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let step_var = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        phi -= step_phi;
        varphi -= step_var;
        if !phi.is_finite() || !varphi.is_finite() {
            return None;
        }
    }
    let r = leak(k, dim, phi, varphi);
    (r[0].hypot(r[1]) < 1e-12).then_some((phi, varphi))
}

/// Solves for `G_k` on `dim` levels. Requires `k <= dim <= 2k` (or `k = dim = 1`).
pub fn solve_gk(k: usize, dim: usize) -> Result<GkUnitary> {
    if k == 0 || k > dim || (k > 1 && dim > 2 * k) || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "G_k needs 1 <= k <= dim <= 2k with dim a power of two (k = {k}, dim = {dim})"
        )));
    }
    if k == dim {
        let matrix = hadamard(dim);
        let residual = post_state_error(&matrix, k);
        return Ok(GkUnitary { k, dim, phases: None, matrix, residual });
    }

    let starts = [
        (std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
        (2.0, 2.0),
        (-std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2),
        (1.0, -1.0),
        (-2.0, 2.5),
        (3.0, 3.0),
    ];
    let mut best_residual = f64::INFINITY;
    for start in starts {
        let Some((phi, varphi)) = newton(k, dim, start) else { continue };
        let mut matrix = amplified(k, dim, phi, varphi);
        let lead = matrix[(0, 0)];
        if lead.norm() < 1e-12 {
            continue;
        }
        // remove the global phase so G_k|0⟩ is real and positive
        let fix = lead.conj() / lead.norm();
        matrix *= fix;
        let residual = post_state_error(&matrix, k);
        if residual < GK_TOLERANCE {
            return Ok(GkUnitary { k, dim, phases: Some((phi, varphi)), matrix, residual });
        }
        best_residual = best_residual.min(residual);
    }
    Err(Error::PhaseSolve { k, residual: best_residual })
}
