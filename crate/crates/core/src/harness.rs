//! Monte Carlo orchestration: keyed per-replica streams, standardized
//! free-energy samples, empirical distributions and Kolmogorov–Smirnov
//! statistics.
//!
//! Replica `k` of a plan always draws from ChaCha8 stream `k` under the
//! plan's seed, and results are assembled by index, so output does not
//! depend on the number of worker threads.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{gaussian_variance_rate, phase_constants, tabulate, AsymptoticConfig, FredholmSpec};
use crate::error::{Error, Result};
use crate::polymer::{assign_parameters, DomainKind, Model, Observable, ParameterSet, PolygonalDomain, Scheme};

/// Stream `replica` of the ChaCha8 generator keyed by `master`.
pub fn derive_seed(master: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(replica);
    rng
}

/// A master seed for a labelled sub-experiment (SplitMix64 finalizer).
pub fn sub_seed(master: u64, label: u64) -> u64 {
    let mut z = master ^ label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sorted samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("empirical distribution needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Parameter("empirical distribution got a NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let n = self.len() as f64;
        (self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
    }
}

/// What is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `log Z(n, n+m+1)` on the rectangle under the full-space scheme.
    Full { params: ParameterSet },
    /// Point-to-line `log Z` on the trapezoid `(n, m)`.
    Trapezoid { params: ParameterSet },
    /// Symmetrized point-to-line `log Z` on the symmetric union.
    Symmetrized { params: ParameterSet },
    /// Point-to-line `log Z` on the trapezoid of total width `m` (`m ≥ n`)
    /// with `θ₀` on the diagonal and `θ` elsewhere.
    PhaseTrapezoid { theta: f64, theta0: f64, n: usize, m: usize },
    /// Corner `log Z` on an `n × m` rectangle under any rectangle scheme.
    Rectangle { n: usize, m: usize, scheme: Scheme },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Full { params } => Model::full(params),
            ModelSpec::Trapezoid { params } => Model::trapezoid(params),
            ModelSpec::Symmetrized { params } => Model::symmetrized(params),
            ModelSpec::PhaseTrapezoid { theta, theta0, n, m } => {
                let d = PolygonalDomain::trapezoid_by_width(*n, *m)?;
                let f = assign_parameters(&d, &Scheme::TrapGue { theta: *theta, theta0: *theta0 })?;
                Model::new(f, Observable::Line)
            }
            ModelSpec::Rectangle { n, m, scheme } => {
                let d = PolygonalDomain::rectangle(*n, *m)?;
                let f = assign_parameters(&d, scheme)?;
                if f.domain().kind() != DomainKind::Rectangle {
                    return Err(Error::Parameter("rectangle model needs a rectangle domain".into()));
                }
                Model::new(f, Observable::Corner)
            }
        }
    }
}

/// `(log Z − center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: f64,
    pub scale: f64,
}

impl Standardization {
    pub const IDENTITY: Standardization = Standardization { center: 0.0, scale: 1.0 };

    /// `(n f, n^{1/3} σ)` for the trapezoid of total width `m`.
    pub fn gue(theta: f64, n: usize, m: usize) -> Result<Self> {
        let c = phase_constants(&AsymptoticConfig { theta, theta0: theta, n, m })?;
        Ok(Self { center: n as f64 * c.f, scale: (n as f64).cbrt() * c.sigma })
    }

    /// `(n f̄, n^{1/2} √(ψ′(θ₀) − pψ′(θ − θ₀)))`.
    pub fn gaussian(theta: f64, theta0: f64, n: usize, m: usize) -> Result<Self> {
        let cfg = AsymptoticConfig { theta, theta0, n, m };
        let c = phase_constants(&cfg)?;
        let f_bar = c.f_bar.ok_or_else(|| Error::Parameter("Gaussian standardization needs theta0 < theta".into()))?;
        let v = gaussian_variance_rate(theta, theta0, cfg.p())?;
        if !(v > 0.0) {
            return Err(Error::Parameter(format!(
                "variance rate psi'(theta0) - p psi'(theta - theta0) = {v} is not positive"
            )));
        }
        Ok(Self { center: n as f64 * f_bar, scale: (n as f64).sqrt() * v.sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub replicas: usize,
    pub seed: u64,
    pub standardization: Standardization,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replicas < 100 {
            return Err(Error::Parameter(format!("need at least 100 replicas, got {}", self.replicas)));
        }
        let s = self.standardization;
        if !(s.scale > 0.0 && s.scale.is_finite() && s.center.is_finite()) {
            return Err(Error::Parameter(format!("invalid standardization {s:?}")));
        }
        Ok(())
    }
}

/// Per-replica `log Z` and its standardized value, in replica order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub log_z: Vec<f64>,
    pub standardized: Vec<f64>,
}

impl ExperimentResult {
    pub fn distribution(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(self.standardized.clone())
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let model = plan.model.build()?;
    let s = plan.standardization;
    let log_z: Vec<f64> =
        (0..plan.replicas as u64).into_par_iter().map(|k| model.sample_log_z(&mut derive_seed(plan.seed, k))).collect();
    if let Some(k) = log_z.iter().position(|z| !z.is_finite()) {
        return Err(Error::Accuracy(format!("replica {k} produced log Z = {}", log_z[k])));
    }
    let standardized = log_z.iter().map(|z| (z - s.center) / s.scale).collect();
    Ok(ExperimentResult { log_z, standardized })
}

/// Writes `replica,log_z,standardized` after a `#` line holding `header`
/// (normally the plan) as JSON.
pub fn write_samples_csv<W: Write, H: Serialize>(mut out: W, header: &H, result: &ExperimentResult) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replica", "log_z", "standardized"])?;
    for (k, (z, s)) in result.log_z.iter().zip(&result.standardized).enumerate() {
        w.write_record([k.to_string(), z.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KsLevel {
    #[serde(rename = "0.01")]
    P01,
    #[serde(rename = "0.05")]
    P05,
}

impl KsLevel {
    /// Asymptotic Kolmogorov quantile `c(α)`.
    pub fn coefficient(self) -> f64 {
        match self {
            KsLevel::P01 => 1.628,
            KsLevel::P05 => 1.358,
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            KsLevel::P01 => 0.01,
            KsLevel::P05 => 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub sizes: Vec<usize>,
    pub level: KsLevel,
    pub critical_value: f64,
    pub pass: bool,
}

/// Exact `sup |F_a − F_b|` by a merge scan over both sorted samples.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution, level: KsLevel) -> KsReport {
    let (x, y) = (a.samples(), b.samples());
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let critical = level.coefficient() * ((n1 + n2) / (n1 * n2)).sqrt();
    KsReport { statistic: d, sizes: vec![x.len(), y.len()], level, critical_value: critical, pass: d < critical }
}

/// `sup |F_emp − F|` against a continuous CDF, taking both one-sided gaps
/// at every sample point.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &EmpiricalDistribution, cdf: F, level: KsLevel) -> Result<KsReport> {
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in a.samples().iter().enumerate() {
        let f = cdf(x);
        if !(-1e-12..=1.0 + 1e-12).contains(&f) {
            return Err(Error::Parameter(format!("cdf({x}) = {f} is outside [0, 1]")));
        }
        d = d.max((k + 1) as f64 / n - f).max(f - k as f64 / n);
    }
    let critical = level.coefficient() / n.sqrt();
    Ok(KsReport { statistic: d, sizes: vec![a.len()], level, critical_value: critical, pass: d < critical })
}

/// A CDF tabulated on a uniform grid with linear interpolation, clamped to
/// 0 and 1 outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl TabulatedCdf {
    /// `F_BBP;b` on `[lo, hi]` (empty `b` is `F_GUE`).
    pub fn bbp(b: &[f64], lo: f64, hi: f64, step: f64, spec: &FredholmSpec) -> Result<Self> {
        let count = ((hi - lo) / step).round() as usize + 1;
        let ts: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
        let values = tabulate(&ts, b, spec)?.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(Self { start: lo, step, values })
    }

    /// The GUE table used by the phase experiments.
    pub fn gue() -> Result<Self> {
        let spec = FredholmSpec { convergence_tol: None, ..FredholmSpec::default() };
        Self::bbp(&[], -8.0, 5.0, 0.025, &spec)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.start) / self.step;
        if x <= 0.0 {
            return if x == 0.0 { self.values[0] } else { 0.0 };
        }
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return 1.0;
        }
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

/// Two-sample test of `log Z` on the trapezoid against `log Z(n, n+m+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub params: ParameterSet,
    pub replicas: usize,
    pub seed: u64,
    pub ks: KsReport,
    pub mean_trapezoid: f64,
    pub mean_full: f64,
}

pub fn identity_test(params: &ParameterSet, replicas: usize, seed: u64, level: KsLevel) -> Result<IdentityReport> {
    let plan = |model, label| ExperimentPlan {
        model,
        replicas,
        seed: sub_seed(seed, label),
        standardization: Standardization::IDENTITY,
    };
    let trap = run_experiment(&plan(ModelSpec::Trapezoid { params: params.clone() }, 0))?.distribution()?;
    let full = run_experiment(&plan(ModelSpec::Full { params: params.clone() }, 1))?.distribution()?;
    Ok(IdentityReport {
        params: params.clone(),
        replicas,
        seed,
        ks: ks_two_sample(&trap, &full, level),
        mean_trapezoid: trap.mean(),
        mean_full: full.mean(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Gue,
    Gaussian,
}

impl Phase {
    pub fn other(self) -> Phase {
        match self {
            Phase::Gue => Phase::Gaussian,
            Phase::Gaussian => Phase::Gue,
        }
    }
}

/// Phase-transition experiment on the boundary-perturbed trapezoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub theta: f64,
    pub theta0: f64,
    pub p: f64,
    pub ns: Vec<usize>,
    pub replicas: usize,
    /// `None` picks GUE when `θ₀ ≥ θ_c` and Gaussian otherwise.
    #[serde(default)]
    pub phase: Option<Phase>,
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) || !(self.theta0 > 0.0) || !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::Parameter(format!(
                "phase experiment needs theta, theta0 > 0 and p >= 1, got {}, {}, {}",
                self.theta, self.theta0, self.p
            )));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::Parameter("phase experiment needs a nonempty list of positive n".into()));
        }
        if self.replicas < 100 {
            return Err(Error::Parameter(format!("need at least 100 replicas, got {}", self.replicas)));
        }
        Ok(())
    }

    pub fn width(&self, n: usize) -> usize {
        ((self.p * n as f64).round() as usize).max(n)
    }

    pub fn resolved_phase(&self, n: usize) -> Result<Phase> {
        if let Some(p) = self.phase {
            return Ok(p);
        }
        let c = phase_constants(&AsymptoticConfig { theta: self.theta, theta0: self.theta0, n, m: self.width(n) })?;
        Ok(if self.theta0 >= c.theta_c { Phase::Gue } else { Phase::Gaussian })
    }

    pub fn plan(&self, n: usize, seed: u64) -> Result<ExperimentPlan> {
        let m = self.width(n);
        let standardization = match self.resolved_phase(n)? {
            Phase::Gue => Standardization::gue(self.theta, n, m)?,
            Phase::Gaussian => Standardization::gaussian(self.theta, self.theta0, n, m)?,
        };
        Ok(ExperimentPlan {
            model: ModelSpec::PhaseTrapezoid { theta: self.theta, theta0: self.theta0, n, m },
            replicas: self.replicas,
            seed: sub_seed(seed, n as u64),
            standardization,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub n: usize,
    pub m: usize,
    pub phase: Phase,
    pub plan: ExperimentPlan,
    pub mean: f64,
    pub std_dev: f64,
    /// KS against the phase's own limit law.
    pub ks: KsReport,
    /// KS against the other phase's limit law.
    pub cross: KsReport,
}

/// One-sample KS of standardized samples against the limit law of `phase`.
pub fn ks_against_phase(
    d: &EmpiricalDistribution,
    phase: Phase,
    gue: &TabulatedCdf,
    level: KsLevel,
) -> Result<KsReport> {
    match phase {
        Phase::Gue => ks_one_sample(d, |t| gue.eval(t), level),
        Phase::Gaussian => ks_one_sample(d, crate::asymptotics::gaussian_cdf, level),
    }
}

/// Runs every `n` of the config, returning rows and the per-`n` results.
pub fn run_phase(cfg: &PhaseConfig, seed: u64, gue: &TabulatedCdf) -> Result<Vec<(PhaseRow, ExperimentResult)>> {
    cfg.validate()?;
    cfg.ns
        .iter()
        .map(|&n| {
            let plan = cfg.plan(n, seed)?;
            let phase = cfg.resolved_phase(n)?;
            let res = run_experiment(&plan)?;
            let d = res.distribution()?;
            let ks = ks_against_phase(&d, phase, gue, KsLevel::P01)?;
            let cross = ks_against_phase(&d, phase.other(), gue, KsLevel::P01)?;
            let row = PhaseRow { n, m: cfg.width(n), phase, plan, mean: d.mean(), std_dev: d.std_dev(), ks, cross };
            Ok((row, res))
        })
        .collect()
}
