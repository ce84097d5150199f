//! Candidate qubits, their Bloch-sphere geometry and the nonlinear
//! (Gross–Pitaevskii) evolution that pushes the extremal candidates apart.
//!
//! Convention: `|0⟩` is the north pole. A real candidate `a0|0⟩ + a1|1⟩`
//! sits at `(2 a0 a1, 0, a0² − a1²)`. The Hilbert-space overlap of two pure
//! states with Bloch vectors `r1`, `r2` is `sqrt((1 + r1·r2) / 2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm drift tolerated by the integrator before it gives up.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Endpoint antipodality tolerance for [`final_orient`].
pub const ANTIPODAL_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateQubit {
    pub a0: f64,
    pub a1: f64,
}

impl CandidateQubit {
    /// Normalizes a pair of nonnegative amplitudes.
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        if a0 < 0.0 || a1 < 0.0 || !a0.is_finite() || !a1.is_finite() {
            return Err(Error::InvalidArgument(format!("amplitudes ({a0}, {a1}) must be finite and nonnegative")));
        }
        let norm = a0.hypot(a1);
        if norm == 0.0 {
            return Err(Error::ZeroNormPostselection);
        }
        Ok(Self { a0: a0 / norm, a1: a1 / norm })
    }

    pub fn zero() -> Self {
        Self { a0: 1.0, a1: 0.0 }
    }

    pub fn one() -> Self {
        Self { a0: 0.0, a1: 1.0 }
    }

    /// Probability of reading 1.
    pub fn p1(&self) -> f64 {
        self.a1 * self.a1
    }

    pub fn bloch(&self) -> BlochPoint {
        BlochPoint::new(2.0 * self.a0 * self.a1, 0.0, self.a0 * self.a0 - self.a1 * self.a1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub const NORTH: BlochPoint = BlochPoint { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn vec(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    fn from_vec(v: Vector3<f64>) -> Self {
        Self { x: v[0], y: v[1], z: v[2] }
    }

    pub fn norm(&self) -> f64 {
        self.vec().norm()
    }

    pub fn dot(&self, other: &BlochPoint) -> f64 {
        self.vec().dot(&other.vec())
    }

    /// `|⟨ψ|χ⟩|` for the pure states at `self` and `other`.
    pub fn overlap(&self, other: &BlochPoint) -> f64 {
        ((1.0 + self.dot(other)) / 2.0).max(0.0).sqrt()
    }
}

/// The `m`-th candidate, amplitudes proportional to `(n! − m, m)`.
pub fn candidate_state(m: u64, nfact: u64) -> Result<CandidateQubit> {
    check_count(m, nfact)?;
    CandidateQubit::new((nfact - m) as f64, m as f64)
}

/// `⟨0|m-th candidate⟩ = (n! − m) / sqrt(n!² − 2 n! m + 2 m²)`.
pub fn candidate_inner(m: u64, nfact: u64) -> Result<f64> {
    check_count(m, nfact)?;
    let a = (nfact - m) as f64;
    Ok(a / a.hypot(m as f64))
}

/// Probability that postselection onto `|s⟩` succeeds.
pub fn postselect_prob(m: u64, nfact: u64) -> Result<f64> {
    check_count(m, nfact)?;
    let y = m as f64 / nfact as f64;
    Ok(1.0 - 2.0 * y + 2.0 * y * y)
}

/// Bloch angle between the 0th and `s`-th candidates.
pub fn alpha0(s: u64, nfact: u64) -> Result<f64> {
    check_count(s, nfact)?;
    Ok(2.0 * (s as f64).atan2((nfact - s) as f64))
}

/// Time for the 0th and `s`-th candidates to become orthogonal,
/// `T = (2/g) ln cot(α0/4)`, evaluated as `(2/g) artanh cos(α0/2)`.
pub fn evolution_time(s: u64, nfact: u64, g: f64) -> Result<f64> {
    check_g(g)?;
    if s == 0 {
        return Err(Error::InvalidArgument("evolution time is unbounded for s = 0".into()));
    }
    Ok(2.0 / g * candidate_inner(s, nfact)?.atanh())
}

/// `cos(α(t)/2)` for two states starting `α0` apart.
pub fn closed_form_alpha(t: f64, alpha0: f64, g: f64) -> Result<f64> {
    check_g(g)?;
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("time {t} is negative")));
    }
    let value = half_angle_cos(t, (alpha0 / 2.0).cos(), g);
    if value < -1e-12 {
        return Err(Error::BeyondHorizon { t });
    }
    Ok(value)
}

/// Same law for the pair straddling a non-endpoint candidate, started `μ0` apart.
pub fn closed_form_mu(t: f64, mu0: f64, g: f64) -> Result<f64> {
    closed_form_alpha(t, mu0, g)
}

/// `(c0 cosh(gt/2) − sinh(gt/2)) / (cosh(gt/2) − c0 sinh(gt/2))`, divided through by cosh.
fn half_angle_cos(t: f64, c0: f64, g: f64) -> f64 {
    let th = (g * t / 2.0).tanh();
    (c0 - th) / (1.0 - c0 * th)
}

fn check_count(m: u64, nfact: u64) -> Result<()> {
    if nfact == 0 || m > nfact {
        return Err(Error::InvalidArgument(format!("need 0 <= m <= n! (m = {m}, n! = {nfact})")));
    }
    Ok(())
}

fn check_g(g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidArgument(format!("nonlinearity g = {g} must be positive")));
    }
    Ok(())
}

/// Placement of the candidate arc before evolution: its midpoint goes to
/// polar angle `phi` on the `xz` great circle and the arc is tilted by
/// `gamma` out of that plane. `sign` picks the sense of the linear
/// correction about the x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub phi: f64,
    pub gamma: f64,
    pub sign: f64,
}

impl Orientation {
    /// Selected by [`calibrate`]; see the calibration test.
    pub const CALIBRATED: Orientation = Orientation { phi: FRAC_PI_2, gamma: FRAC_PI_4, sign: 1.0 };

    /// Rotation taking the unrotated arc of width `alpha0` to this placement.
    fn rotation(&self, alpha0: f64) -> Matrix3<f64> {
        let h = alpha0 / 2.0;
        let e1 = Vector3::new(h.sin(), 0.0, h.cos());
        let e2 = Vector3::new(h.cos(), 0.0, -h.sin());
        let e3 = e1.cross(&e2);
        let f1 = Vector3::new(self.phi.sin(), 0.0, self.phi.cos());
        let f2 = Vector3::new(0.0, 1.0, 0.0) * self.gamma.cos()
            + Vector3::new(-self.phi.cos(), 0.0, self.phi.sin()) * self.gamma.sin();
        let f3 = f1.cross(&f2);
        f1 * e1.transpose() + f2 * e2.transpose() + f3 * e3.transpose()
    }
}

impl Default for Orientation {
    fn default() -> Self {
        Self::CALIBRATED
    }
}

/// Source of `cos(α(t)/2)` in the correction Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    /// Closed-form law for the endpoint pair.
    ClosedForm,
    /// Measured from the first two integrated points.
    Endpoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub g: f64,
    /// Upper bound on the RK4 step; the integrator also caps it at `T/2000`.
    pub dt: f64,
    pub orientation: Orientation,
    pub drive: Drive,
}

impl EvolutionParams {
    pub fn new(g: f64) -> Self {
        Self { g, dt: 0.01 / g, orientation: Orientation::CALIBRATED, drive: Drive::ClosedForm }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn validate(&self) -> Result<()> {
        check_g(self.g)?;
        let limit = 0.01 / self.g;
        if self.dt.is_nan() || self.dt <= 0.0 || self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepSize { dt: self.dt, limit });
        }
        Ok(())
    }
}

/// Rotates the candidate's Bloch vector into the evolution frame for the
/// `0..=s` arc.
pub fn orient_arc(q: &CandidateQubit, s: u64, nfact: u64, orientation: &Orientation) -> Result<BlochPoint> {
    let r = orientation.rotation(alpha0(s, nfact)?);
    Ok(BlochPoint::from_vec(r * q.bloch().vec()))
}

/// Inverse of [`orient_arc`] on Bloch points.
pub fn orient_arc_inverse(p: &BlochPoint, s: u64, nfact: u64, orientation: &Orientation) -> Result<BlochPoint> {
    let r = orientation.rotation(alpha0(s, nfact)?);
    Ok(BlochPoint::from_vec(r.transpose() * p.vec()))
}

/// One recorded instant of an integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub points: Vec<BlochPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub final_points: Vec<BlochPoint>,
    pub steps: usize,
    pub samples: Vec<TrajectorySample>,
}

fn field(r: &Vector3<f64>, c: f64, g: f64, sign: f64) -> Vector3<f64> {
    let (x, y, z) = (r[0], r[1], r[2]);
    Vector3::new(-g * z * y, g * z * x, 0.0) + Vector3::new(0.0, -z, y) * (sign * g / 2.0 * c)
}

fn endpoint_cos(points: &[Vector3<f64>]) -> f64 {
    ((1.0 + points[0].dot(&points[1])) / 2.0).max(0.0).sqrt()
}

/// Integrates every point in `start` under the nonlinear flow plus the
/// linear correction `(g/4) cos(α(t)/2) σ_x` for `t ∈ [0, t_final]`.
///
/// `alpha0` is the initial endpoint separation that feeds the closed-form
/// drive; with [`Drive::Endpoints`] the first two points must be the
/// endpoints. Every `record_every`-th step (and the last) is sampled.
pub fn evolve_nonlinear(
    start: &[BlochPoint],
    alpha0: f64,
    t_final: f64,
    params: &EvolutionParams,
    record_every: Option<usize>,
) -> Result<Evolution> {
    params.validate()?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time {t_final} is invalid")));
    }
    if params.drive == Drive::Endpoints && start.len() < 2 {
        return Err(Error::InvalidArgument("endpoint drive needs both endpoints".into()));
    }
    for p in start {
        let drift = (p.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift(drift));
        }
    }
    let g = params.g;
    let sign = params.orientation.sign;
    let c0 = (alpha0 / 2.0).cos();
    let dt = params.dt.min(t_final / 2000.0);
    let steps = if t_final == 0.0 { 0 } else { (t_final / dt).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };

    let mut pts: Vec<Vector3<f64>> = start.iter().map(BlochPoint::vec).collect();
    let mut samples = Vec::new();
    let record = |t: f64, pts: &[Vector3<f64>], samples: &mut Vec<TrajectorySample>| {
        samples.push(TrajectorySample { t, points: pts.iter().map(|v| BlochPoint::from_vec(*v)).collect() });
    };
    if record_every.is_some() {
        record(0.0, &pts, &mut samples);
    }

    for step in 0..steps {
        let t = t_final * step as f64 / steps as f64;
        match params.drive {
            Drive::ClosedForm => {
                let ca = half_angle_cos(t, c0, g);
                let cb = half_angle_cos(t + h / 2.0, c0, g);
                let cc = half_angle_cos(t + h, c0, g);
                for r in pts.iter_mut() {
                    let k1 = field(r, ca, g, sign);
                    let k2 = field(&(*r + k1 * (h / 2.0)), cb, g, sign);
                    let k3 = field(&(*r + k2 * (h / 2.0)), cb, g, sign);
                    let k4 = field(&(*r + k3 * h), cc, g, sign);
                    *r += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
            }
            Drive::Endpoints => {
                // the drive couples all points, so stage the whole set together
                let stage = |pts: &[Vector3<f64>]| -> Vec<Vector3<f64>> {
                    let c = endpoint_cos(pts);
                    pts.iter().map(|r| field(r, c, g, sign)).collect()
                };
                let shift = |k: &[Vector3<f64>], a: f64| -> Vec<Vector3<f64>> {
                    pts.iter().zip(k).map(|(r, d)| r + d * a).collect()
                };
                let k1 = stage(&pts);
                let k2 = stage(&shift(&k1, h / 2.0));
                let k3 = stage(&shift(&k2, h / 2.0));
                let k4 = stage(&shift(&k3, h));
                for (i, r) in pts.iter_mut().enumerate() {
                    *r += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
                }
            }
        }
        for r in &pts {
            let drift = (r.norm() - 1.0).abs();
            if drift > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift(drift));
            }
        }
        if let Some(every) = record_every {
            if (step + 1) % every.max(1) == 0 || step + 1 == steps {
                record(t_final * (step + 1) as f64 / steps as f64, &pts, &mut samples);
            }
        }
    }

    Ok(Evolution { final_points: pts.into_iter().map(BlochPoint::from_vec).collect(), steps, samples })
}

/// Reads `p` in the frame where `endpoint0` is `|0⟩` and `endpoint1` is `|1⟩`.
///
/// Only the polar angle about the `endpoint0` axis matters for the
/// measurement, so the relative phase is dropped and the result is real.
pub fn final_orient(p: &BlochPoint, endpoint0: &BlochPoint, endpoint1: &BlochPoint) -> Result<CandidateQubit> {
    let e0 = endpoint0.vec().normalize();
    let e1 = endpoint1.vec().normalize();
    let gap = (e0 + e1).norm();
    if gap > ANTIPODAL_TOLERANCE {
        return Err(Error::NotAntipodal(gap));
    }
    let v = p.vec().normalize();
    CandidateQubit::new((v + e0).norm() / 2.0, (v - e0).norm() / 2.0)
}

/// Bernoulli draw with `P(1) = a1²`.
pub fn measure<R: Rng + ?Sized>(q: &CandidateQubit, rng: &mut R) -> u8 {
    u8::from(rng.gen::<f64>() < q.p1())
}

/// Result of orienting, evolving and re-reading the `m`-th candidate of an
/// `s`-arc.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcOutcome {
    pub qubit: CandidateQubit,
    pub evolution_time: f64,
    pub endpoints: [BlochPoint; 2],
    pub evolution: Evolution,
}

impl ArcOutcome {
    /// CSV `t,x,y,z,inner`: the tracked candidate and the endpoint overlap.
    pub fn trajectory_csv(&self) -> String {
        trajectory_csv(&self.evolution.samples)
    }
}

/// Rows `t,x,y,z,inner` from samples whose points are `[e0, e1, tracked]`.
pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    let mut out = String::from("t,x,y,z,inner\n");
    for s in samples {
        let p = s.points.last().copied().unwrap_or(BlochPoint::NORTH);
        let inner = if s.points.len() >= 2 { s.points[0].overlap(&s.points[1]) } else { 1.0 };
        let _ = writeln!(out, "{},{},{},{},{}", s.t, p.x, p.y, p.z, inner);
    }
    out
}

/// Evolves the `m`-th candidate together with the two endpoints of the
/// `0..=s` arc and reads it out in the endpoint frame.
pub fn run_arc(
    q: &CandidateQubit,
    s: u64,
    nfact: u64,
    params: &EvolutionParams,
    record_every: Option<usize>,
) -> Result<ArcOutcome> {
    let a0 = alpha0(s, nfact)?;
    let t = evolution_time(s, nfact, params.g)?;
    let o = &params.orientation;
    let start = [
        orient_arc(&candidate_state(0, nfact)?, s, nfact, o)?,
        orient_arc(&candidate_state(s, nfact)?, s, nfact, o)?,
        orient_arc(q, s, nfact, o)?,
    ];
    let evolution = evolve_nonlinear(&start, a0, t, params, record_every)?;
    let [e0, e1, p] = [evolution.final_points[0], evolution.final_points[1], evolution.final_points[2]];
    let qubit = final_orient(&p, &e0, &e1)?;
    Ok(ArcOutcome { qubit, evolution_time: t, endpoints: [e0, e1], evolution })
}

/// Largest deviation of the integrated endpoint overlap from the closed form
/// over the sampled times of one arc.
pub fn endpoint_residual(s: u64, nfact: u64, params: &EvolutionParams) -> Result<f64> {
    let a0 = alpha0(s, nfact)?;
    let t = evolution_time(s, nfact, params.g)?;
    let o = &params.orientation;
    let start = [
        orient_arc(&candidate_state(0, nfact)?, s, nfact, o)?,
        orient_arc(&candidate_state(s, nfact)?, s, nfact, o)?,
    ];
    let ev = evolve_nonlinear(&start, a0, t, params, Some(1))?;
    let mut worst: f64 = 0.0;
    for sample in &ev.samples {
        let expected = half_angle_cos(sample.t, (a0 / 2.0).cos(), params.g);
        let got = sample.points[0].overlap(&sample.points[1]);
        worst = worst.max((got - expected.max(0.0)).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub phi: f64,
    pub gamma: f64,
    pub sign: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub chosen: Orientation,
    pub entries: Vec<CalibrationEntry>,
    /// `(n!, s)` pairs integrated for every candidate orientation.
    pub grid: Vec<(u64, u64)>,
    pub g: f64,
}

impl CalibrationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Integrates the endpoint pair under each candidate tilt and correction
/// sense and keeps the orientation whose overlap best tracks the closed form.
pub fn calibrate(grid: &[(u64, u64)], g: f64) -> Result<CalibrationReport> {
    let mut entries = Vec::new();
    for gamma in [FRAC_PI_4, 3.0 * FRAC_PI_4] {
        for sign in [1.0, -1.0] {
            let orientation = Orientation { phi: FRAC_PI_2, gamma, sign };
            let params = EvolutionParams::new(g).with_orientation(orientation);
            let mut worst: f64 = 0.0;
            for &(nfact, s) in grid {
                worst = worst.max(endpoint_residual(s, nfact, &params)?);
            }
            entries.push(CalibrationEntry { phi: FRAC_PI_2, gamma, sign, max_residual: worst });
        }
    }
    let best = entries
        .iter()
        .min_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
        .expect("four entries");
    let chosen = Orientation { phi: best.phi, gamma: best.gamma, sign: best.sign };
    Ok(CalibrationReport { chosen, entries, grid: grid.to_vec(), g })
}

/// Default calibration grid: every arc of a 4! register plus a few of 5!.
pub fn default_calibration_grid() -> Vec<(u64, u64)> {
    let mut grid: Vec<(u64, u64)> = (1..=24).map(|s| (24, s)).collect();
    grid.extend([1, 7, 60, 119].map(|s| (120, s)));
    grid
}
