//! Centering and scaling constants for the boundary-perturbed trapezoid,
//! and the limit laws: Tracy–Widom GUE and BBP through Fredholm
//! determinants on wedge contours, and the standard Gaussian.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::specialfn::{polygamma, ComplexScalar};

pub use crate::specialfn::gaussian_cdf;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConfig {
    pub theta: f64,
    pub theta0: f64,
    pub n: usize,
    pub m: usize,
}

impl AsymptoticConfig {
    pub fn p(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) || !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return Err(Error::Parameter(format!(
                "theta and theta0 must be positive, got {} and {}",
                self.theta, self.theta0
            )));
        }
        if self.n == 0 || self.m < self.n {
            return Err(Error::Parameter(format!("need m ≥ n ≥ 1, got n={}, m={}", self.n, self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConstants {
    pub theta_c: f64,
    pub f: f64,
    /// Present only when `0 < θ₀ < θ`.
    pub f_bar: Option<f64>,
    pub sigma: f64,
}

/// Root of `ψ′(x) − pψ′(θ − x)` on `(0, θ)`; the map is strictly decreasing.
pub fn solve_theta_c(theta: f64, p: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) || !(p > 0.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("need theta > 0 and p > 0, got {theta}, {p}")));
    }
    let g = |x: f64| polygamma(1, x).unwrap() - p * polygamma(1, theta - x).unwrap();
    let (mut lo, mut hi) = (0.0, theta);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `f̄ = −ψ(θ₀) − pψ(θ − θ₀)`.
pub fn f_bar(theta: f64, theta0: f64, p: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < theta) {
        return Err(Error::Parameter(format!("f_bar needs 0 < theta0 < theta, got theta0={theta0}, theta={theta}")));
    }
    Ok(-polygamma(0, theta0)? - p * polygamma(0, theta - theta0)?)
}

/// Variance rate `ψ′(θ₀) − pψ′(θ − θ₀)` of the Gaussian phase.
pub fn gaussian_variance_rate(theta: f64, theta0: f64, p: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < theta) {
        return Err(Error::Parameter(format!("need 0 < theta0 < theta, got theta0={theta0}, theta={theta}")));
    }
    Ok(polygamma(1, theta0)? - p * polygamma(1, theta - theta0)?)
}

pub fn phase_constants(config: &AsymptoticConfig) -> Result<PhaseConstants> {
    config.validate()?;
    let (theta, p) = (config.theta, config.p());
    let theta_c = solve_theta_c(theta, p)?;
    let f = -polygamma(0, theta_c)? - p * polygamma(0, theta - theta_c)?;
    let s3 = 0.5 * (-polygamma(2, theta_c)? - p * polygamma(2, theta - theta_c)?);
    let f_bar = if config.theta0 < theta { Some(f_bar(theta, config.theta0, p)?) } else { None };
    Ok(PhaseConstants { theta_c, f, f_bar, sigma: s3.cbrt() })
}

/// Contour discretization for the GUE/BBP determinants.
///
/// `𝒞` is two straight legs through `c₀` at angles `5π/4` (incoming) and
/// `3π/4`; `𝒟` passes through `c₀ + d_offset` at `−π/4` and `π/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmSpec {
    /// `None` picks `−1`, or `max b + 1/2` when that is larger.
    pub c0: Option<f64>,
    pub d_offset: f64,
    pub leg_length: f64,
    pub nodes_per_leg: usize,
    /// Reject when doubling the nodes moves the value by more than this.
    pub convergence_tol: Option<f64>,
}

impl Default for FredholmSpec {
    fn default() -> Self {
        Self { c0: None, d_offset: 1.0, leg_length: 8.0, nodes_per_leg: 128, convergence_tol: Some(1e-8) }
    }
}

impl FredholmSpec {
    pub fn anchor(&self, b: &[f64]) -> f64 {
        self.c0.unwrap_or_else(|| b.iter().map(|x| x + 0.5).fold(-1.0, f64::max))
    }

    fn validate(&self, b: &[f64]) -> Result<()> {
        if !(self.d_offset > 0.0) || !(self.leg_length > 0.0) || self.nodes_per_leg < 4 {
            return Err(Error::Config(format!("invalid contour spec {self:?}")));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("BBP parameters must be finite".into()));
        }
        let c0 = self.anchor(b);
        if let Some(&bmax) = b.iter().max_by(|x, y| x.total_cmp(y)) {
            if !(c0 > bmax) {
                return Err(Error::Config(format!("contour anchor {c0} must lie right of max b = {bmax}")));
            }
        }
        Ok(())
    }
}

/// Nodes and complex line elements of a two-leg wedge through `anchor`,
/// entering along `e^{i·a_in}∞` and leaving along `e^{i·a_out}∞`.
fn wedge(anchor: f64, a_in: f64, a_out: f64, length: f64, n: usize) -> (Vec<ComplexScalar>, Vec<ComplexScalar>) {
    let (x, w) = gauss_legendre(n);
    let e_in = ComplexScalar::from_polar(1.0, a_in);
    let e_out = ComplexScalar::from_polar(1.0, a_out);
    let a = ComplexScalar::new(anchor, 0.0);
    let mut z = Vec::with_capacity(2 * n);
    let mut dz = Vec::with_capacity(2 * n);
    for k in (0..n).rev() {
        let s = 0.5 * length * (x[k] + 1.0);
        z.push(a + e_in * s);
        dz.push(-e_in * (0.5 * length * w[k]));
    }
    for k in 0..n {
        let s = 0.5 * length * (x[k] + 1.0);
        z.push(a + e_out * s);
        dz.push(e_out * (0.5 * length * w[k]));
    }
    (z, dz)
}

fn determinant(t: f64, b: &[f64], c0: f64, spec: &FredholmSpec, nodes: usize) -> f64 {
    use std::f64::consts::PI;
    let (v, dv) = wedge(c0, 1.25 * PI, 0.75 * PI, spec.leg_length, nodes);
    let (w, dw) = wedge(c0 + spec.d_offset, -0.25 * PI, 0.25 * PI, spec.leg_length, nodes);
    let two_pi_i = ComplexScalar::new(0.0, 2.0 * PI);
    // A(v, w)·dw/2πi on 𝒞 × 𝒟
    let a = DMatrix::from_fn(v.len(), w.len(), |i, j| {
        let (vi, wj) = (v[i], w[j]);
        let mut x = (wj.powu(3) / 3.0 - vi.powu(3) / 3.0 + t * (vi - wj)).exp() / (vi - wj);
        for &bk in b {
            x *= (wj - bk) / (vi - bk);
        }
        x * dw[j] / two_pi_i
    });
    // B(w, v)·dv/2πi on 𝒟 × 𝒞
    let bm = DMatrix::from_fn(w.len(), v.len(), |i, j| dv[j] / (two_pi_i * (w[i] - v[j])));
    let m = DMatrix::identity(w.len(), w.len()) + bm * a;
    m.lu().determinant().re
}

/// `F_BBP;b(t) = det(I + K_b)` on `L²(𝒞)`; empty `b` gives `F_GUE`.
pub fn f_bbp(t: f64, b: &[f64], spec: &FredholmSpec) -> Result<f64> {
    spec.validate(b)?;
    if !t.is_finite() {
        return Err(Error::Parameter(format!("t must be finite, got {t}")));
    }
    let c0 = spec.anchor(b);
    let value = determinant(t, b, c0, spec, spec.nodes_per_leg);
    if let Some(tol) = spec.convergence_tol {
        let fine = determinant(t, b, c0, spec, 2 * spec.nodes_per_leg);
        if !((value - fine).abs() <= tol) {
            return Err(Error::Accuracy(format!(
                "determinant at t={t} moved by {:.3e} under node doubling",
                (value - fine).abs()
            )));
        }
    }
    Ok(value)
}

pub fn f_gue(t: f64, spec: &FredholmSpec) -> Result<f64> {
    f_bbp(t, &[], spec)
}

/// Tabulates `F_BBP;b` over `ts`, in parallel across grid points.
pub fn tabulate(ts: &[f64], b: &[f64], spec: &FredholmSpec) -> Result<Vec<f64>> {
    ts.par_iter().map(|&t| f_bbp(t, b, spec)).collect()
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("t-grid must look like a:b:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> =
        parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::Config(format!("t-grid has {count} points")));
    }
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}
