//! Whittaker functions of `gl_n` and `so_{2n+1}` through Givental-type
//! integrals, the `T` function, and checks of their integral transforms.
//!
//! Every integral is taken in logarithmic coordinates `u = log z`, so the
//! measures `dz/z` become Lebesgue measure and integrands are handled as
//! log-values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, CompositeRule};
use crate::specialfn::{ln_gamma, LogPositive};

/// Hard cap on the total integration dimension.
pub const MAX_DIMENSION: usize = 4;

const LN_TINY: f64 = -36.841_361_487_904_734; // ln(1e-16)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    /// Nested adaptive Gauss–Kronrod, one dimension at a time.
    Iterated1d,
    /// Tensor-product composite Gauss–Legendre.
    TensorGauss,
    /// Uniform Monte Carlo on the truncation box; reports a standard error.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub nodes_per_dim: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub mc_samples: usize,
    pub seed: u64,
    /// Tensor panels are split until no wider than this (in `u`), so
    /// `nodes_per_dim` acts as a minimum.
    #[serde(default = "default_panel_width")]
    pub max_panel_width: f64,
}

fn default_panel_width() -> f64 {
    2.0
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::TensorGauss,
            nodes_per_dim: 64,
            u_min: -12.0,
            u_max: 12.0,
            mc_samples: 1_000_000,
            seed: 0,
            max_panel_width: default_panel_width(),
        }
    }
}

impl QuadratureSpec {
    pub fn tensor(nodes_per_dim: usize) -> Self {
        Self { nodes_per_dim, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_dim < 8 {
            return Err(Error::Parameter(format!("nodes_per_dim = {} must be >= 8", self.nodes_per_dim)));
        }
        if !(self.u_min.is_finite() && self.u_max.is_finite() && self.u_min < self.u_max) {
            return Err(Error::Parameter("truncation [u_min, u_max] must be finite and nonempty".into()));
        }
        if !(self.max_panel_width > 0.0) {
            return Err(Error::Parameter("max_panel_width must be > 0".into()));
        }
        if self.method == QuadratureMethod::MonteCarlo && self.mc_samples < 100 {
            return Err(Error::Parameter("Monte Carlo needs at least 100 samples".into()));
        }
        Ok(())
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: LogPositive,
    /// Estimated relative error (a standard error for Monte Carlo).
    pub rel_error: f64,
    pub evaluations: usize,
    pub dims: usize,
}

/// Log-integrand on `R^d` in logarithmic coordinates.
pub struct LogIntegrand<'a> {
    pub dims: usize,
    pub f: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
}

impl<'a> LogIntegrand<'a> {
    pub fn new<F: Fn(&[f64]) -> f64 + Sync + 'a>(dims: usize, f: F) -> Self {
        Self { dims, f: Box::new(f) }
    }
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.618_033_988_749_894_9;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-10 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Coordinate ascent for the (concave) log-integrand.
fn locate_peak(g: &LogIntegrand) -> (Vec<f64>, f64) {
    let d = g.dims;
    let mut u = vec![0.0; d];
    let mut best = (g.f)(&u);
    for _ in 0..60 {
        let before = best;
        for k in 0..d {
            let center = u[k];
            let mut v = u.clone();
            let arg = golden_max(
                |t| {
                    v[k] = t;
                    let y = (g.f)(&v);
                    if y.is_nan() {
                        f64::NEG_INFINITY
                    } else {
                        y
                    }
                },
                center - 30.0,
                center + 30.0,
            );
            u[k] = arg;
            best = (g.f)(&u);
        }
        if (best - before).abs() < 1e-12 * best.abs().max(1.0) {
            break;
        }
    }
    (u, best)
}

#[derive(Debug, Clone)]
struct Box_ {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Truncation box: the axis extents around the peak clipped to the default
/// window, then widened face by face while the face maximum exceeds
/// `1e-16 × peak`.
fn truncation_box(g: &LogIntegrand, spec: &QuadratureSpec, peak_at: &[f64], peak: f64) -> Box_ {
    let d = g.dims;
    let cut = peak + LN_TINY - 4.0;
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for k in 0..d {
        for (dir, slot) in [(-1.0, &mut lo), (1.0, &mut hi)] {
            let mut v = peak_at.to_vec();
            let mut step = 0.25;
            let mut t = peak_at[k];
            for _ in 0..400 {
                t += dir * step;
                v[k] = t;
                let y = (g.f)(&v);
                if !(y > cut) {
                    break;
                }
                step = (step * 1.2).min(2.0);
            }
            slot[k] = t;
        }
        lo[k] = lo[k].max(spec.u_min.min(peak_at[k] - 1.0));
        hi[k] = hi[k].min(spec.u_max.max(peak_at[k] + 1.0));
    }
    let mut bx = Box_ { lo, hi };
    let probe = spec.nodes_per_dim.clamp(8, 24);
    for _ in 0..12 {
        let mut grew = false;
        for k in 0..d {
            for upper in [false, true] {
                let m = face_max(g, &bx, k, upper, probe);
                if m > peak + LN_TINY {
                    let w = 0.25 * (bx.hi[k] - bx.lo[k]);
                    if upper {
                        bx.hi[k] += w;
                    } else {
                        bx.lo[k] -= w;
                    }
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    bx
}

fn face_max(g: &LogIntegrand, bx: &Box_, k: usize, upper: bool, probe: usize) -> f64 {
    let d = g.dims;
    let others: Vec<usize> = (0..d).filter(|&j| j != k).collect();
    let total = probe.pow(others.len() as u32);
    let mut u = vec![0.0; d];
    u[k] = if upper { bx.hi[k] } else { bx.lo[k] };
    let mut best = f64::NEG_INFINITY;
    for idx in 0..total {
        let mut r = idx;
        for &j in &others {
            let s = r % probe;
            r /= probe;
            u[j] = bx.lo[j] + (bx.hi[j] - bx.lo[j]) * (s as f64 + 0.5) / probe as f64;
        }
        let y = (g.f)(&u);
        if y > best {
            best = y;
        }
    }
    best
}

fn rule_for(lo: f64, hi: f64, nodes: usize, max_width: f64) -> CompositeRule {
    let order = nodes.min(16);
    let by_width = ((hi - lo) / max_width).ceil();
    let panels =
        if by_width.is_finite() { nodes.div_ceil(order).max(by_width as usize) } else { nodes.div_ceil(order) };
    CompositeRule::new(lo, hi, panels, order)
}

/// `Σ w · exp(f − shift)` over the tensor grid, with rayon over the first
/// axis and an ordered reduction.
fn tensor_sum(g: &LogIntegrand, bx: &Box_, nodes: usize, max_width: f64, shift: f64) -> (f64, usize) {
    let d = g.dims;
    let rules: Vec<CompositeRule> = (0..d).map(|k| rule_for(bx.lo[k], bx.hi[k], nodes, max_width)).collect();
    let n0 = rules[0].len();
    let inner_total: usize = rules[1..].iter().map(|r| r.len()).product();
    let partial: Vec<f64> = (0..n0)
        .into_par_iter()
        .map(|a| {
            let mut u = vec![0.0; d];
            u[0] = rules[0].nodes[a];
            let w0 = rules[0].weights[a];
            let mut s = 0.0;
            for idx in 0..inner_total {
                let mut r = idx;
                let mut w = w0;
                for k in 1..d {
                    let len = rules[k].len();
                    let t = r % len;
                    r /= len;
                    u[k] = rules[k].nodes[t];
                    w *= rules[k].weights[t];
                }
                let y = (g.f)(&u);
                if y.is_finite() {
                    s += w * (y - shift).exp();
                }
            }
            s
        })
        .collect();
    (partial.iter().sum(), n0 * inner_total)
}

fn iterated_level(
    g: &LogIntegrand,
    bx: &Box_,
    shift: f64,
    tol: f64,
    k: usize,
    prefix: &mut Vec<f64>,
    count: &mut usize,
) -> f64 {
    let last = k + 1 == g.dims;
    let f = |t: f64| -> f64 {
        prefix[k] = t;
        if last {
            *count += 1;
            let y = (g.f)(prefix);
            if y.is_finite() {
                (y - shift).exp()
            } else {
                0.0
            }
        } else {
            iterated_level(g, bx, shift, tol, k + 1, prefix, count)
        }
    };
    adaptive_gk(f, bx.lo[k], bx.hi[k], tol, 10).0
}

fn iterated_sum(g: &LogIntegrand, bx: &Box_, shift: f64, tol: f64) -> (f64, usize) {
    let mut count = 0;
    let mut prefix = vec![0.0; g.dims];
    let v = iterated_level(g, bx, shift, tol, 0, &mut prefix, &mut count);
    (v, count)
}

/// Integrates `exp(g)` over `R^d`.
pub fn integrate(g: &LogIntegrand, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    if g.dims == 0 {
        let v = (g.f)(&[]);
        return Ok(Estimate { value: LogPositive::from_log(v)?, rel_error: 0.0, evaluations: 1, dims: 0 });
    }
    if g.dims > MAX_DIMENSION {
        return Err(Error::Capability(format!("integral of dimension {} exceeds the cap {MAX_DIMENSION}", g.dims)));
    }
    let (at, peak) = locate_peak(g);
    if !peak.is_finite() {
        return Err(Error::Accuracy("integrand has no finite peak".into()));
    }
    let bx = truncation_box(g, spec, &at, peak);
    let d = g.dims;
    match spec.method {
        QuadratureMethod::TensorGauss => {
            let (full, evaluations) = tensor_sum(g, &bx, spec.nodes_per_dim, spec.max_panel_width, peak);
            let (half, _) = tensor_sum(g, &bx, (spec.nodes_per_dim / 2).max(4), 2.0 * spec.max_panel_width, peak);
            if !(full > 0.0) {
                return Err(Error::Accuracy("tensor quadrature returned a non-positive sum".into()));
            }
            Ok(Estimate {
                value: LogPositive::from_log(peak + full.ln())?,
                rel_error: ((full - half) / full).abs(),
                evaluations,
                dims: d,
            })
        }
        QuadratureMethod::Iterated1d => {
            let (v, count) = iterated_sum(g, &bx, peak, 1e-11);
            let (v2, _) = iterated_sum(g, &bx, peak, 1e-7);
            if !(v > 0.0) {
                return Err(Error::Accuracy("iterated quadrature returned a non-positive sum".into()));
            }
            Ok(Estimate {
                value: LogPositive::from_log(peak + v.ln())?,
                rel_error: ((v - v2) / v).abs().max(1e-11 / v),
                evaluations: count,
                dims: d,
            })
        }
        QuadratureMethod::MonteCarlo => {
            let vol: f64 = (0..d).map(|k| bx.hi[k] - bx.lo[k]).product();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut u = vec![0.0; d];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..spec.mc_samples {
                for k in 0..d {
                    u[k] = rng.gen_range(bx.lo[k]..bx.hi[k]);
                }
                let y = (g.f)(&u);
                let v = if y.is_finite() { (y - peak).exp() } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            let n = spec.mc_samples as f64;
            let mean = s / n;
            let var = (s2 / n - mean * mean).max(0.0);
            if !(mean > 0.0) {
                return Err(Error::Accuracy("Monte Carlo estimate is zero".into()));
            }
            Ok(Estimate {
                value: LogPositive::from_log(peak + (mean * vol).ln())?,
                rel_error: (var / n).sqrt() / mean,
                evaluations: spec.mc_samples,
                dims: d,
            })
        }
    }
}

/// Flat layout of a triangular array `z_{i,j}`, `1 ≤ j ≤ i < n`.
fn tri_index(i: usize, j: usize) -> usize {
    (i - 1) * i / 2 + (j - 1)
}

/// Log of the `gl_n` Givental integrand; `u` holds `log z_{i,j}` for the
/// rows above the bottom row, `logx` the bottom row.
pub fn gl_log_integrand(alpha: &[f64], logx: &[f64], u: &[f64]) -> f64 {
    let n = alpha.len();
    let lz = |i: usize, j: usize| -> Option<f64> {
        if i == 0 || i > n || j == 0 || j > i {
            None
        } else if i == n {
            Some(logx[j - 1])
        } else {
            Some(u[tri_index(i, j)])
        }
    };
    let mut acc = 0.0;
    for i in 1..=n {
        let row: f64 = (1..=i).map(|j| lz(i, j).unwrap()).sum();
        let prev: f64 = (1..i).map(|j| lz(i - 1, j).unwrap()).sum();
        acc += alpha[i - 1] * (row - prev);
        for j in 1..=i {
            let own = lz(i, j).unwrap();
            if let Some(a) = lz(i + 1, j + 1) {
                acc -= (a - own).exp();
            }
            if let Some(b) = lz(i - 1, j) {
                acc -= (b - own).exp();
            }
        }
    }
    acc
}

/// Number of integration variables of the `gl_n` integral.
pub fn gl_dims(n: usize) -> usize {
    n * (n - 1) / 2
}

fn check_point(x: &[f64], n: usize) -> Result<Vec<f64>> {
    if x.len() != n {
        return Err(Error::Parameter(format!("expected {n} coordinates, got {}", x.len())));
    }
    if x.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Parameter("evaluation point must be positive".into()));
    }
    Ok(x.iter().map(|v| v.ln()).collect())
}

/// `Ψ^{gl_n}_α(x)`.
pub fn whittaker_gl(alpha: &[f64], x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    let n = alpha.len();
    if n == 0 {
        return Err(Error::Parameter("alpha must be nonempty".into()));
    }
    let logx = check_point(x, n)?;
    if n > 3 {
        return Err(Error::Capability(format!("gl_{n} Whittaker quadrature is capped at n = 3")));
    }
    let g = LogIntegrand::new(gl_dims(n), |u: &[f64]| gl_log_integrand(alpha, &logx, u));
    integrate(&g, spec)
}

/// Row lengths `⌈i/2⌉` of the half-triangular array.
fn so_row_len(i: usize) -> usize {
    i.div_ceil(2)
}

/// Number of integration variables of the `so_{2n+1}` integral.
pub fn so_dims(n: usize) -> usize {
    n * n
}

fn so_offsets(n: usize) -> Vec<usize> {
    let mut off = vec![0; 2 * n + 1];
    for i in 1..2 * n {
        off[i + 1] = off[i] + so_row_len(i);
    }
    off
}

/// Log of the `so_{2n+1}` integrand; `u` holds the rows `1..2n−1`.
pub fn so_log_integrand(alpha: &[f64], logx: &[f64], u: &[f64]) -> f64 {
    let n = alpha.len();
    let off = so_offsets(n);
    let lz = |i: usize, j: usize| -> f64 {
        if j > so_row_len(i) {
            0.0
        } else if i == 2 * n {
            logx[j - 1]
        } else {
            u[off[i] + j - 1]
        }
    };
    let mut acc = 0.0;
    for i in 1..=2 * n {
        let a = if i % 2 == 1 { alpha[(i - 1) / 2] } else { -alpha[(i - 1) / 2] };
        let row: f64 = (1..=so_row_len(i)).map(|j| lz(i, j)).sum();
        let prev: f64 = (1..=so_row_len(i - 1)).map(|j| lz(i - 1, j)).sum();
        acc += a * (row - prev);
    }
    for i in 1..2 * n {
        for j in 1..=so_row_len(i) {
            let own = lz(i, j);
            acc -= (lz(i + 1, j + 1) - own).exp() + (own - lz(i + 1, j)).exp();
        }
    }
    acc
}

/// `Ψ^{so_{2n+1}}_α(x)`.
pub fn whittaker_so(alpha: &[f64], x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    let n = alpha.len();
    if n == 0 {
        return Err(Error::Parameter("alpha must be nonempty".into()));
    }
    let logx = check_point(x, n)?;
    if n > 2 {
        return Err(Error::Capability(format!("so_{} Whittaker quadrature is capped at n = 2", 2 * n + 1)));
    }
    let g = LogIntegrand::new(so_dims(n), |u: &[f64]| so_log_integrand(alpha, &logx, u));
    integrate(&g, spec)
}

/// Arguments of the `T` function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFunctionQuery {
    pub alpha_circ: f64,
    pub beta: Vec<f64>,
    pub r: f64,
    pub x: Vec<f64>,
}

/// Log of the `T` integrand. `u` holds `log t_{i,j}` for `i = 1..n`,
/// `j = i..i+m−1`, row-major.
pub fn t_log_integrand(alpha_circ: f64, beta: &[f64], r: f64, logx: &[f64], u: &[f64]) -> f64 {
    let n = logx.len();
    let m = beta.len();
    let lt = |i: usize, j: usize| -> f64 {
        if j == i + m {
            logx[i - 1]
        } else {
            u[(i - 1) * m + (j - i)]
        }
    };
    let lr = r.ln();
    let mut acc = 0.0;
    for i in 1..=n {
        let s = if (n - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += alpha_circ * s * (lr + lt(i, i));
    }
    for (jj, b) in beta.iter().enumerate() {
        let j = jj + 1;
        for i in 1..=n {
            acc += b * (lt(i, i + j) - lt(i, i + j - 1));
        }
    }
    acc -= (lr + lt(1, 1)).exp();
    for i in 2..=n {
        for j in i..i + m {
            acc -= (lt(i, j) - lt(i - 1, j)).exp();
        }
    }
    for i in 1..=n {
        for j in i..i + m {
            acc -= (lt(i, j + 1) - lt(i, j)).exp();
        }
    }
    acc
}

/// `T_{α∘,β;r}(x)`; closed form when `β` is empty.
pub fn t_function(q: &TFunctionQuery, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(q.r > 0.0 && q.r.is_finite()) {
        return Err(Error::Parameter(format!("r = {} must be > 0", q.r)));
    }
    let n = q.x.len();
    if n == 0 {
        return Err(Error::Parameter("x must be nonempty".into()));
    }
    let logx = check_point(&q.x, n)?;
    let dims = n * q.beta.len();
    if dims > MAX_DIMENSION {
        return Err(Error::Capability(format!("T integral of dimension {dims} exceeds the cap {MAX_DIMENSION}")));
    }
    let g = LogIntegrand::new(dims, |u: &[f64]| t_log_integrand(q.alpha_circ, &q.beta, q.r, &logx, u));
    integrate(&g, spec)
}

/// Which transform identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformIdentity {
    Stade,
    TTransform,
    SoTransform,
}

/// Parameters for a transform check. `beta` is used by the `T` transform;
/// `mu` and `lambda` by the `so` transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub alpha_circ: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub lambda: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub identity: TransformIdentity,
    pub lhs: f64,
    pub lhs_rel_error: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub dims: usize,
    pub evaluations: usize,
    pub nodes_per_dim: usize,
}

fn lgam(x: f64, what: &str) -> Result<f64> {
    ln_gamma(x).map_err(|_| Error::Parameter(format!("{what} = {x} must be > 0")))
}

/// Evaluates both sides of a transform identity.
pub fn verify_transform(
    identity: TransformIdentity,
    p: &TransformParams,
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<TransformReport> {
    let n = p.alpha.len();
    if n == 0 {
        return Err(Error::Parameter("alpha must be nonempty".into()));
    }
    if !(p.r > 0.0) {
        return Err(Error::Parameter(format!("r = {} must be > 0", p.r)));
    }
    let (log_rhs, g) = match identity {
        TransformIdentity::Stade | TransformIdentity::TTransform => {
            let beta: &[f64] = if identity == TransformIdentity::Stade { &[] } else { &p.beta };
            let mut rhs = -p.alpha.iter().sum::<f64>() * p.r.ln();
            for i in 0..n {
                rhs += lgam(p.alpha[i] + p.alpha_circ, &format!("alpha[{}] + alpha_circ", i + 1))?;
                for j in i + 1..n {
                    rhs += lgam(p.alpha[i] + p.alpha[j], &format!("alpha[{}] + alpha[{}]", i + 1, j + 1))?;
                }
                for (k, b) in beta.iter().enumerate() {
                    rhs += lgam(p.alpha[i] + b, &format!("alpha[{}] + beta[{}]", i + 1, k + 1))?;
                }
            }
            let m = beta.len();
            let dims = n + n * m + gl_dims(n);
            if dims > MAX_DIMENSION {
                return Err(Error::Capability(format!("transform integral of dimension {dims} exceeds the cap")));
            }
            let alpha = p.alpha.clone();
            let beta = beta.to_vec();
            let (ac, r) = (p.alpha_circ, p.r);
            let g = LogIntegrand::new(dims, move |u: &[f64]| {
                let (lx, rest) = u.split_at(n);
                let (lt, lz) = rest.split_at(n * m);
                let t = if m == 0 {
                    let mut acc = 0.0;
                    for i in 1..=n {
                        let s = if (n - i) % 2 == 0 { 1.0 } else { -1.0 };
                        acc += ac * s * (r.ln() + lx[i - 1]);
                    }
                    acc - r * lx[0].exp()
                } else {
                    t_log_integrand(ac, &beta, r, lx, lt)
                };
                t + gl_log_integrand(&alpha, lx, lz)
            });
            (rhs, g)
        }
        TransformIdentity::SoTransform => {
            let max_abs = p.alpha.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if !(p.mu > max_abs) {
                return Err(Error::Parameter(format!("mu = {} must exceed max |alpha_j| = {max_abs}", p.mu)));
            }
            let lambda = if p.lambda.is_empty() { vec![0.0; n] } else { p.lambda.clone() };
            if lambda.len() != n {
                return Err(Error::Parameter("lambda must have n entries".into()));
            }
            let mut rhs = 0.0;
            for li in &lambda {
                for a in &p.alpha {
                    rhs += lgam(p.mu - li + a, "mu - lambda_i + alpha_j")?;
                    rhs += lgam(p.mu - li - a, "mu - lambda_i - alpha_j")?;
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    rhs -= lgam(2.0 * p.mu - lambda[i] - lambda[j], "2 mu - lambda_i - lambda_j")?;
                }
            }
            let dims = n + so_dims(n) + gl_dims(n);
            if dims > MAX_DIMENSION {
                return Err(Error::Capability(format!("transform integral of dimension {dims} exceeds the cap")));
            }
            let alpha = p.alpha.clone();
            let mu = p.mu;
            let g = LogIntegrand::new(dims, move |u: &[f64]| {
                let (lx, rest) = u.split_at(n);
                let (ls, lz) = rest.split_at(so_dims(n));
                -mu * lx.iter().sum::<f64>() + so_log_integrand(&alpha, lx, ls) + gl_log_integrand(&lambda, lx, lz)
            });
            (rhs, g)
        }
    };
    let est = integrate(&g, spec)?;
    let lhs = est.value.log_value;
    let discrepancy = (lhs - log_rhs).exp_m1().abs();
    Ok(TransformReport {
        identity,
        lhs: lhs.exp(),
        lhs_rel_error: est.rel_error,
        rhs: log_rhs.exp(),
        discrepancy,
        tolerance: tol,
        pass: discrepancy <= tol,
        dims: est.dims,
        evaluations: est.evaluations,
        nodes_per_dim: spec.nodes_per_dim,
    })
}
