//! Laplace transform `E[exp(−rZ)]` of the polymer partition function, by
//! contour quadrature over `(μ + iℝ)ⁿ` and by Monte Carlo.
//!
//! On `λ = μ + iy` the factor `dλ / (2πi)` becomes `dy / 2π`, so the contour
//! sum is real up to rounding; the imaginary part is kept as a residual.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymer::{Model, ParameterSet};
use crate::quad::gauss_legendre;
use crate::specialfn::{complex_ln_gamma, ln_complex_recip_gamma, ln_gamma, ComplexScalar};

/// Largest `n` handled by the contour quadrature.
pub const MAX_CONTOUR_N: usize = 2;

const TAIL_LIMIT: f64 = 1e-12;

/// Which grouping of the Gamma factors builds the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourVariant {
    /// Separate `α∘`, `α` and `β` products; needs `m ≥ n − 1`.
    Trapezoid,
    /// One product over the concatenation `α̂ = (α∘) ⊔ α ⊔ β`.
    Fullspace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceQuery {
    pub r: f64,
    /// Real part of the contour; `None` picks the default offset.
    pub mu: Option<f64>,
    pub params: ParameterSet,
    pub variant: ContourVariant,
}

/// Composite Gauss–Legendre grid on `[−T, T]`, shared by every variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub truncation: f64,
    pub nodes_per_unit: usize,
}

impl Default for ContourGrid {
    fn default() -> Self {
        Self { truncation: 40.0, nodes_per_unit: 32 }
    }
}

impl ContourGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(Error::Parameter(format!("truncation must be positive, got {}", self.truncation)));
        }
        if self.nodes_per_unit < 2 {
            return Err(Error::Parameter("nodes_per_unit must be at least 2".into()));
        }
        Ok(())
    }

    /// Nodes and weights, symmetric about 0: unit panels of `nodes_per_unit`
    /// points, the last panel on each side shortened to end at `±T`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let (x, w) = gauss_legendre(self.nodes_per_unit);
        let mut ys = Vec::new();
        let mut ws = Vec::new();
        let mut lo = 0.0;
        while lo < self.truncation {
            let hi = (lo + 1.0).min(self.truncation);
            let h = hi - lo;
            for (xi, wi) in x.iter().zip(&w) {
                ys.push(lo + 0.5 * h * (xi + 1.0));
                ws.push(0.5 * h * wi);
            }
            lo = hi;
        }
        let mut y_all: Vec<f64> = ys.iter().rev().map(|y| -y).collect();
        let mut w_all: Vec<f64> = ws.iter().rev().copied().collect();
        y_all.extend_from_slice(&ys);
        w_all.extend_from_slice(&ws);
        (y_all, w_all)
    }
}

/// Which lower bound on `μ` is the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuConstraint {
    /// `μ > max αᵢ`.
    Alpha,
    /// `μ > max(−α̂ⱼ)`.
    AlphaHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourValue {
    pub value: f64,
    pub imag_residual: f64,
    pub mu: f64,
    pub binding: MuConstraint,
    /// Largest `|integrand|` on the outermost unit band, relative to `|value|`.
    pub tail: f64,
    pub nodes: usize,
}

/// `α̂ = (α∘) ⊔ α ⊔ β`.
pub fn alpha_hat(p: &ParameterSet) -> Vec<f64> {
    std::iter::once(p.alpha_circ).chain(p.alpha.iter().copied()).chain(p.beta.iter().copied()).collect()
}

/// Lower bound for `μ` and the constraint that sets it.
pub fn mu_bound(p: &ParameterSet) -> (f64, MuConstraint) {
    let a = p.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = alpha_hat(p).iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
    if h > a {
        (h, MuConstraint::AlphaHat)
    } else {
        (a, MuConstraint::Alpha)
    }
}

/// Default contour: `max αᵢ + 0.5`, raised past `max(−α̂ⱼ)` when that binds.
pub fn default_mu(p: &ParameterSet) -> f64 {
    let a = p.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lb, _) = mu_bound(p);
    (a + 0.5).max(lb + 0.5)
}

/// `sₙ(λ) = (2πi)⁻ⁿ (n!)⁻¹ ∏_{j≠k} Γ(λⱼ − λ_k)⁻¹`.
pub fn sklyanin_weight(lambda: &[ComplexScalar]) -> ComplexScalar {
    let n = lambda.len();
    let mut log = ComplexScalar::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            if j != k {
                match ln_complex_recip_gamma(lambda[j] - lambda[k]) {
                    Some(v) => log += v,
                    None => return ComplexScalar::new(0.0, 0.0),
                }
            }
        }
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let two_pi_i = ComplexScalar::new(0.0, 2.0 * std::f64::consts::PI);
    log.exp() / (two_pi_i.powu(n as u32) * fact)
}

impl LaplaceQuery {
    pub fn validate(&self) -> Result<f64> {
        self.params.validate()?;
        let n = self.params.n();
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Parameter(format!("r must be positive, got {}", self.r)));
        }
        if n > MAX_CONTOUR_N {
            return Err(Error::Capability(format!("contour quadrature supports n ≤ {MAX_CONTOUR_N}, got {n}")));
        }
        if self.variant == ContourVariant::Trapezoid && self.params.m() + 1 < n {
            return Err(Error::Parameter(format!(
                "trapezoid contour needs m ≥ n − 1, got n={n}, m={}",
                self.params.m()
            )));
        }
        let (lb, which) = mu_bound(&self.params);
        let mu = self.mu.unwrap_or_else(|| default_mu(&self.params));
        if !(mu > lb) {
            let name = match which {
                MuConstraint::Alpha => "max alpha",
                MuConstraint::AlphaHat => "max(-alpha_hat)",
            };
            return Err(Error::Parameter(format!("mu = {mu} must exceed {name} = {lb}")));
        }
        Ok(mu)
    }

    /// λ-dependent log factor of one variable, without the Sklyanin part.
    fn log_single(&self, lambda: ComplexScalar) -> Result<ComplexScalar> {
        let p = &self.params;
        let mut s = -lambda * self.r.ln();
        for &a in &p.alpha {
            s += complex_ln_gamma(lambda - a)?;
        }
        match self.variant {
            ContourVariant::Trapezoid => {
                // boundary, β strip and bulk groups, each summed on its own
                let mut strip = ComplexScalar::new(0.0, 0.0);
                for &b in &p.beta {
                    strip += complex_ln_gamma(lambda + b)?;
                }
                let mut bulk = ComplexScalar::new(0.0, 0.0);
                for &a in &p.alpha {
                    bulk += complex_ln_gamma(lambda + a)?;
                }
                s += complex_ln_gamma(lambda + p.alpha_circ)? + (strip + bulk);
            }
            ContourVariant::Fullspace => {
                for h in alpha_hat(p) {
                    s += complex_ln_gamma(lambda + h)?;
                }
            }
        }
        Ok(s)
    }

    /// λ-free log constant: `Σαᵢ ln r − Σ ln Γ(αᵢ + α̂ⱼ)`.
    fn log_constant(&self) -> Result<f64> {
        let p = &self.params;
        let mut c: f64 = p.alpha.iter().sum::<f64>() * self.r.ln();
        match self.variant {
            ContourVariant::Trapezoid => {
                let mut boundary = 0.0;
                let mut bulk = 0.0;
                let mut strip = 0.0;
                for &ai in &p.alpha {
                    boundary += ln_gamma(ai + p.alpha_circ)?;
                    for &aj in &p.alpha {
                        bulk += ln_gamma(ai + aj)?;
                    }
                    for &b in &p.beta {
                        strip += ln_gamma(ai + b)?;
                    }
                }
                c -= boundary + bulk + strip;
            }
            ContourVariant::Fullspace => {
                for &ai in &p.alpha {
                    for h in alpha_hat(p) {
                        c -= ln_gamma(ai + h)?;
                    }
                }
            }
        }
        Ok(c)
    }
}

/// Evaluates the contour formula for `E[exp(−rZ)]`.
pub fn laplace_contour(query: &LaplaceQuery, grid: &ContourGrid) -> Result<ContourValue> {
    let mu = query.validate()?;
    grid.validate()?;
    let n = query.params.n();
    let (ys, ws) = grid.nodes();
    let c = query.log_constant()?;
    let lambdas: Vec<ComplexScalar> = ys.iter().map(|&y| ComplexScalar::new(mu, y)).collect();
    let single = lambdas.iter().map(|&l| query.log_single(l).map(|v| v + c / n as f64)).collect::<Result<Vec<_>>>()?;
    let outer = |y: f64| y.abs() > grid.truncation - 1.0;

    // per first-axis node: (sum, max tail magnitude)
    let rows: Vec<(ComplexScalar, f64)> = (0..ys.len())
        .into_par_iter()
        .map(|a| {
            if n == 1 {
                let v = ws[a] * single[a].exp();
                let tail = if outer(ys[a]) { v.norm() } else { 0.0 };
                return (v, tail);
            }
            let mut s = ComplexScalar::new(0.0, 0.0);
            let mut tail = 0.0f64;
            for b in 0..ys.len() {
                let d = lambdas[a] - lambdas[b];
                let pair = match (ln_complex_recip_gamma(d), ln_complex_recip_gamma(-d)) {
                    (Some(x), Some(y)) => x + y,
                    _ => continue,
                };
                let v = ws[a] * ws[b] * (single[a] + single[b] + pair).exp();
                if outer(ys[a]) || outer(ys[b]) {
                    tail = tail.max(v.norm());
                }
                s += v;
            }
            (s, tail)
        })
        .collect();
    let mut total = ComplexScalar::new(0.0, 0.0);
    let mut tail = 0.0f64;
    for (s, t) in rows {
        total += s;
        tail = tail.max(t);
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let scale = 1.0 / ((2.0 * std::f64::consts::PI).powi(n as i32) * fact);
    let total = total * scale;
    let tail = tail * scale / total.re.abs();
    if !total.re.is_finite() || tail > TAIL_LIMIT {
        return Err(Error::Accuracy(format!(
            "contour truncation T = {} leaves relative tail {tail:.3e}",
            grid.truncation
        )));
    }
    let (_, binding) = mu_bound(&query.params);
    Ok(ContourValue {
        value: total.re,
        imag_residual: total.im.abs() / total.re.abs(),
        mu,
        binding,
        tail,
        nodes: ys.len().pow(n as u32),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// Sample mean and standard error of `exp(−r·Z)` over independent replicas.
pub fn laplace_mc<R: Rng + ?Sized>(model: &Model, r: f64, replicas: usize, rng: &mut R) -> Result<McEstimate> {
    if replicas < 100 {
        return Err(Error::Parameter(format!("need at least 100 replicas, got {replicas}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("r must be non-negative, got {r}")));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..replicas {
        let x = (-r * model.sample_log_z(rng).exp()).exp();
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (replicas - 1) as f64;
    Ok(McEstimate { estimate: mean, stderr: (var / replicas as f64).sqrt(), replicas })
}

/// Number of standard errors separating an MC estimate from a reference.
pub fn agreement_sigma(reference: f64, mc: &McEstimate) -> f64 {
    let d = (reference - mc.estimate).abs();
    if mc.stderr == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / mc.stderr
    }
}
