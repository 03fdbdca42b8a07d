//! Verification suites shared by the command line and the acceptance tests.
//! Each suite takes a serializable config plus a master seed and returns a
//! serializable report with an overall `pass` flag.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grsk::{
    random_array, random_symmetric_array, trapezoid_hull, verify_grsk_properties, GrskTolerances, PolygonalArray,
};
use crate::harness::{derive_seed, identity_test, sub_seed, IdentityReport, KsLevel};
use crate::laplace::{agreement_sigma, laplace_contour, ContourGrid, ContourValue, ContourVariant, LaplaceQuery};
use crate::polymer::{Model, ParameterField, ParameterSet, PolygonalDomain};
use crate::whittaker::{verify_transform, whittaker_gl, QuadratureSpec, TransformIdentity, TransformParams};

/// Generic inhomogeneous parameters of size `(n, m)`.
pub fn generic_params(n: usize, m: usize) -> Result<ParameterSet> {
    let alpha = (0..n).map(|i| 0.7 + 0.35 * ((i * 7) % 5) as f64 / 2.0).collect();
    let beta = (0..m).map(|k| 0.55 + 0.3 * ((k * 3) % 4) as f64).collect();
    ParameterSet::new(0.45, alpha, beta)
}

/// Parses `NxM`.
pub fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("shape must look like NxM, got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let n: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    if n == 0 || m == 0 {
        return Err(bad());
    }
    Ok((n, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrskSuiteConfig {
    pub trials: usize,
    pub jacobian_trials: usize,
    /// Entries are `exp(U)` with `U` uniform on `[−spread, spread]`.
    pub spread: f64,
    /// Fixes every array to an `NxM` rectangle.
    pub shape: Option<String>,
    pub tolerances: GrskTolerances,
}

impl Default for GrskSuiteConfig {
    fn default() -> Self {
        Self { trials: 200, jacobian_trials: 100, spread: 1.0, shape: None, tolerances: GrskTolerances::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub arrays: usize,
    pub worst_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrskSuiteReport {
    /// Arrays per domain family.
    pub families: BTreeMap<String, usize>,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<String>,
    pub pass: bool,
}

fn random_domain<R: Rng>(
    k: usize,
    shape: Option<(usize, usize)>,
    rng: &mut R,
) -> Result<(&'static str, PolygonalDomain)> {
    if let Some((n, m)) = shape {
        return Ok(("rectangle", PolygonalDomain::rectangle(n, m)?));
    }
    Ok(match k % 3 {
        0 => ("rectangle", PolygonalDomain::rectangle(rng.gen_range(1..=5), rng.gen_range(1..=7))?),
        1 => ("trapezoid", trapezoid_hull(rng.gen_range(1..=4), rng.gen_range(0..=3))?),
        _ => ("symmetric-union", PolygonalDomain::symmetric_union(rng.gen_range(1..=4), rng.gen_range(0..=3))?),
    })
}

fn random_filled<R: Rng>(family: &str, d: &PolygonalDomain, spread: f64, rng: &mut R) -> Result<PolygonalArray> {
    if family == "symmetric-union" {
        random_symmetric_array(d, spread, rng)
    } else {
        random_array(d, spread, rng)
    }
}

fn coordinate_count(family: &str, d: &PolygonalDomain) -> usize {
    if family == "symmetric-union" {
        d.cells().filter(|&(i, j)| i <= j).count()
    } else {
        d.len()
    }
}

/// Random arrays over rectangles, trapezoid hulls and symmetric unions
/// (cycled), then a separate batch of small arrays for the Jacobian.
pub fn grsk_suite(cfg: &GrskSuiteConfig, seed: u64) -> Result<GrskSuiteReport> {
    if !(cfg.spread > 0.0 && cfg.spread.is_finite()) {
        return Err(Error::Config(format!("spread must be positive, got {}", cfg.spread)));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let shape = cfg.shape.as_deref().map(parse_shape).transpose()?;
    let no_jac = GrskTolerances { jac_max_cells: 0, ..cfg.tolerances };
    let identity_seed = sub_seed(seed, 0);
    let main: Vec<(&str, crate::grsk::GrskReport)> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = derive_seed(identity_seed, k as u64);
            let (family, d) = random_domain(k, shape, &mut rng)?;
            let a = random_filled(family, &d, cfg.spread, &mut rng)?;
            Ok((family, verify_grsk_properties(&a, &no_jac)?))
        })
        .collect::<Result<_>>()?;

    let jac_seed = sub_seed(seed, 1);
    let limit = cfg.tolerances.jac_max_cells;
    if let Some((n, m)) = shape {
        if cfg.jacobian_trials > 0 && n * m > limit {
            return Err(Error::Config(format!("shape {n}x{m} exceeds the Jacobian cell limit {limit}")));
        }
    }
    let jac: Vec<(&str, crate::grsk::GrskReport)> = (0..cfg.jacobian_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = derive_seed(jac_seed, k as u64);
            let (family, d) = loop {
                let (f, d) = random_domain(k, shape, &mut rng)?;
                if coordinate_count(f, &d) <= limit {
                    break (f, d);
                }
            };
            let a = random_filled(family, &d, cfg.spread, &mut rng)?;
            Ok((family, verify_grsk_properties(&a, &cfg.tolerances)?))
        })
        .collect::<Result<_>>()?;

    let mut families = BTreeMap::new();
    for (f, _) in &main {
        *families.entry(f.to_string()).or_insert(0) += 1;
    }
    let mut agg: Vec<CheckSummary> = Vec::new();
    let mut failures = Vec::new();
    let batches = [("identity", &main, false), ("jacobian", &jac, true)];
    for (batch, reports, jacobian_only) in batches {
        for (k, (family, rep)) in reports.iter().enumerate() {
            for c in rep.checks.iter().filter(|c| !c.skipped && (c.name == "jacobian") == jacobian_only) {
                let tol = if c.name == "jacobian" { cfg.tolerances.jac } else { cfg.tolerances.rel };
                let entry = match agg.iter_mut().find(|s| s.name == c.name) {
                    Some(s) => s,
                    None => {
                        agg.push(CheckSummary {
                            name: c.name.clone(),
                            arrays: 0,
                            worst_error: 0.0,
                            tolerance: tol,
                            pass: true,
                        });
                        agg.last_mut().unwrap()
                    }
                };
                entry.arrays += 1;
                entry.worst_error = entry.worst_error.max(c.error);
                if !c.pass {
                    entry.pass = false;
                    if failures.len() < 20 {
                        failures.push(format!(
                            "{batch} array {k} ({family}, {} cells): {} error {:.3e}",
                            rep.cells, c.name, c.error
                        ));
                    }
                }
            }
        }
    }
    let pass = agg.iter().all(|c| c.pass);
    Ok(GrskSuiteReport { families, checks: agg, failures, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitySuiteConfig {
    /// Parameter sets tested by two-sample KS.
    pub cases: Vec<ParameterSet>,
    pub replicas: usize,
    pub level: KsLevel,
    /// `m` values of the exact `n = 1` comparison.
    pub closed_form_m: Vec<usize>,
}

impl Default for IdentitySuiteConfig {
    fn default() -> Self {
        let cases = [(2, 0), (2, 1), (3, 0), (3, 2)].iter().map(|&(n, m)| generic_params(n, m).unwrap()).collect();
        Self { cases, replicas: 100_000, level: KsLevel::P01, closed_form_m: vec![0, 1, 2, 3] }
    }
}

/// For `n = 1` both sides are a single path through every cell, so
/// `log Z` is a sum of independent log-inverse-gammas and the laws agree
/// exactly when the multisets of shapes agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub params: ParameterSet,
    pub trapezoid_shapes: Vec<f64>,
    pub full_shapes: Vec<f64>,
    pub single_path: bool,
    pub identical: bool,
}

fn sorted_shapes(f: &ParameterField) -> Vec<f64> {
    let mut v: Vec<f64> = f.domain().cells().map(|(i, j)| f.theta(i, j).unwrap_or(f64::NAN)).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn closed_form_n1(m: usize) -> Result<ClosedFormCheck> {
    let params = generic_params(1, m)?;
    let trap = Model::trapezoid(&params)?;
    let full = Model::full(&params)?;
    let single_path = trap.field().domain().line_endpoints()?.len() == 1 && full.field().domain().num_rows() == 1;
    let trapezoid_shapes = sorted_shapes(trap.field());
    let full_shapes = sorted_shapes(full.field());
    let identical = single_path && trapezoid_shapes == full_shapes;
    Ok(ClosedFormCheck { params, trapezoid_shapes, full_shapes, single_path, identical })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySuiteReport {
    pub closed_form: Vec<ClosedFormCheck>,
    pub cases: Vec<IdentityReport>,
    pub pass: bool,
}

pub fn identity_suite(cfg: &IdentitySuiteConfig, seed: u64) -> Result<IdentitySuiteReport> {
    let closed_form = cfg.closed_form_m.iter().map(|&m| closed_form_n1(m)).collect::<Result<Vec<_>>>()?;
    let cases = cfg
        .cases
        .iter()
        .enumerate()
        .map(|(k, p)| identity_test(p, cfg.replicas, sub_seed(seed, k as u64), cfg.level))
        .collect::<Result<Vec<_>>>()?;
    let pass = closed_form.iter().all(|c| c.identical) && cases.iter().all(|c| c.ks.pass);
    Ok(IdentitySuiteReport { closed_form, cases, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplaceCheckConfig {
    pub params: ParameterSet,
    pub r: f64,
    pub mu: Option<f64>,
    pub replicas: usize,
    pub variant: ContourVariant,
    pub grid: ContourGrid,
    /// Largest accepted `|contour − MC| / stderr`.
    pub max_sigma: f64,
    /// Also evaluate the other contour variant when admissible.
    pub compare_variants: bool,
    pub variant_tolerance: f64,
}

impl Default for LaplaceCheckConfig {
    fn default() -> Self {
        Self {
            params: generic_params(1, 0).unwrap(),
            r: 1.0,
            mu: None,
            replicas: 1_000_000,
            variant: ContourVariant::Fullspace,
            grid: ContourGrid::default(),
            max_sigma: 3.0,
            compare_variants: true,
            variant_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheckReport {
    pub contour: f64,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    pub agreement_sigma: f64,
    pub contour_detail: ContourValue,
    /// Relative gap between the trapezoid and full-space integrands.
    pub variant_discrepancy: Option<f64>,
    pub pass: bool,
}

/// Contour value against Monte Carlo on the matching model.
pub fn laplace_check(cfg: &LaplaceCheckConfig, seed: u64) -> Result<LaplaceCheckReport> {
    let q = LaplaceQuery { r: cfg.r, mu: cfg.mu, params: cfg.params.clone(), variant: cfg.variant };
    let c = laplace_contour(&q, &cfg.grid)?;
    let model = match cfg.variant {
        ContourVariant::Trapezoid => Model::trapezoid(&cfg.params)?,
        ContourVariant::Fullspace => Model::full(&cfg.params)?,
    };
    let mc = crate::laplace::laplace_mc(&model, cfg.r, cfg.replicas, &mut derive_seed(seed, 0))?;
    let sigma = agreement_sigma(c.value, &mc);
    let admissible = cfg.params.m() + 1 >= cfg.params.n();
    let variant_discrepancy = if cfg.compare_variants && admissible {
        let other = match cfg.variant {
            ContourVariant::Trapezoid => ContourVariant::Fullspace,
            ContourVariant::Fullspace => ContourVariant::Trapezoid,
        };
        let o = laplace_contour(&LaplaceQuery { variant: other, ..q }, &cfg.grid)?;
        Some(((o.value - c.value) / c.value).abs())
    } else {
        None
    };
    let pass = sigma <= cfg.max_sigma && variant_discrepancy.is_none_or(|d| d <= cfg.variant_tolerance);
    Ok(LaplaceCheckReport {
        contour: c.value,
        mc_estimate: mc.estimate,
        mc_stderr: mc.stderr,
        agreement_sigma: sigma,
        contour_detail: c,
        variant_discrepancy,
        pass,
    })
}

/// One Whittaker check: a transform identity or the translation property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittakerCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub nodes_per_dim: usize,
    pub evaluations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittakerSuiteReport {
    pub checks: Vec<WhittakerCheck>,
    pub pass: bool,
}

/// Which group of Whittaker checks to run; `All` adds the translation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhittakerSelection {
    All,
    Stade,
    TTransform,
    SoTransform,
    Translation,
}

fn transform_check(
    name: &str,
    id: TransformIdentity,
    p: TransformParams,
    nodes: usize,
    tol: f64,
) -> Result<WhittakerCheck> {
    let rep = verify_transform(id, &p, &QuadratureSpec::tensor(nodes), tol)?;
    Ok(WhittakerCheck {
        name: name.into(),
        lhs: rep.lhs,
        rhs: rep.rhs,
        discrepancy: rep.discrepancy,
        tolerance: tol,
        nodes_per_dim: rep.nodes_per_dim,
        evaluations: rep.evaluations,
        pass: rep.pass,
    })
}

fn params(alpha: &[f64], alpha_circ: f64, beta: &[f64], r: f64, mu: f64) -> TransformParams {
    TransformParams { alpha: alpha.to_vec(), alpha_circ, beta: beta.to_vec(), r, mu, lambda: vec![] }
}

pub fn whittaker_suite(which: WhittakerSelection) -> Result<WhittakerSuiteReport> {
    use TransformIdentity::*;
    use WhittakerSelection as W;
    let wants = |w: W| which == W::All || which == w;
    let mut checks = Vec::new();
    if wants(W::Stade) {
        checks.push(transform_check("stade n=1", Stade, params(&[1.2], 0.5, &[], 1.0, 0.0), 128, 1e-8)?);
        checks.push(transform_check("stade n=2", Stade, params(&[0.8, 1.1], 0.6, &[], 2.0, 0.0), 64, 1e-3)?);
    }
    if wants(W::TTransform) {
        checks.push(transform_check("t-transform n=1 m=0", TTransform, params(&[1.0], 0.4, &[], 1.0, 0.0), 128, 1e-8)?);
        checks.push(transform_check(
            "t-transform n=1 m=1",
            TTransform,
            params(&[1.0], 0.4, &[0.9], 1.0, 0.0),
            96,
            1e-3,
        )?);
    }
    if wants(W::SoTransform) {
        checks.push(transform_check("so-transform n=1", SoTransform, params(&[0.3], 0.0, &[], 1.0, 1.0), 96, 1e-3)?);
    }
    if wants(W::Translation) {
        let (x, c, alpha) = ([0.8, 1.9], 0.7, [0.4, -0.2]);
        let spec = QuadratureSpec::tensor(96);
        let a = whittaker_gl(&alpha, &x, &spec)?;
        let shifted: Vec<f64> = alpha.iter().map(|v| v + c).collect();
        let b = whittaker_gl(&shifted, &x, &spec)?;
        let lhs = b.value.log_value;
        let rhs = c * (x[0] * x[1]).ln() + a.value.log_value;
        let discrepancy = (lhs - rhs).exp_m1().abs();
        checks.push(WhittakerCheck {
            name: "translation n=2".into(),
            lhs: lhs.exp(),
            rhs: rhs.exp(),
            discrepancy,
            tolerance: 1e-6,
            nodes_per_dim: spec.nodes_per_dim,
            evaluations: a.evaluations + b.evaluations,
            pass: discrepancy <= 1e-6,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(WhittakerSuiteReport { checks, pass })
}
