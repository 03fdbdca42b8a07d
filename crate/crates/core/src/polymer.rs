//! Lattice domains, parameter schemes, inverse-gamma weights and log-space
//! partition functions.
//!
//! Indices are 1-based: cell `(i, j)` sits in row `i` and column `j`.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::{lse2, LogPositive};

/// Shape family of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Rectangle,
    Trapezoid,
    SymmetricUnion,
    StationaryQuadrant,
    /// Any down-left closed shape given by its row lengths.
    Custom,
}

/// A finite set of cells stored as one contiguous column interval per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalDomain {
    kind: DomainKind,
    n: usize,
    m: i64,
    rows: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    len: usize,
}

impl PolygonalDomain {
    fn from_parts(kind: DomainKind, n: usize, m: i64, rows: Vec<(usize, usize)>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len());
        let mut len = 0;
        for &(lo, hi) in &rows {
            offsets.push(len);
            len += hi + 1 - lo;
        }
        Self { kind, n, m, rows, offsets, len }
    }

    /// `{1..n} × {1..m}`.
    pub fn rectangle(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!("rectangle needs n, m >= 1, got {n}x{m}")));
        }
        Ok(Self::from_parts(DomainKind::Rectangle, n, m as i64, vec![(1, m); n]))
    }

    /// `{(i, j): 1 ≤ i ≤ n, i ≤ j ≤ 2n + m − i + 1}`.
    pub fn trapezoid(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("trapezoid needs n >= 1".into()));
        }
        Ok(Self::trapezoid_signed(n, m as i64))
    }

    /// The trapezoid `{(i, j): 1 ≤ i ≤ n, i ≤ j ≤ n + m − i}` written with the
    /// total width `m ≥ n`; equal to `trapezoid(n, m − n − 1)` when `m > n`.
    pub fn trapezoid_by_width(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m < n {
            return Err(Error::Domain(format!("octant trapezoid needs 1 <= n <= m, got n={n}, m={m}")));
        }
        Ok(Self::trapezoid_signed(n, m as i64 - n as i64 - 1))
    }

    fn trapezoid_signed(n: usize, m: i64) -> Self {
        let rows = (1..=n).map(|i| (i, (2 * n as i64 + m - i as i64 + 1) as usize)).collect();
        Self::from_parts(DomainKind::Trapezoid, n, m, rows)
    }

    /// Trapezoid `(n, m)` together with its transpose.
    pub fn symmetric_union(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("symmetric union needs n >= 1".into()));
        }
        Ok(Self::symmetric_union_signed(n, m as i64))
    }

    fn symmetric_union_signed(n: usize, m: i64) -> Self {
        let top = 2 * n as i64 + m + 1;
        let rows = (1..top)
            .map(|i| {
                let hi = top - i;
                if i <= n as i64 {
                    (1, hi as usize)
                } else {
                    (1, hi.min(n as i64) as usize)
                }
            })
            .collect();
        Self::from_parts(DomainKind::SymmetricUnion, n, m, rows)
    }

    /// `{1..n} × {1..m}` carrying the stationary boundary scheme.
    pub fn stationary(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!("stationary quadrant needs n, m >= 1, got {n}x{m}")));
        }
        Ok(Self::from_parts(DomainKind::StationaryQuadrant, n, m as i64, vec![(1, m); n]))
    }

    /// A down-left closed shape with the given row lengths (non-increasing).
    pub fn young(row_lengths: &[usize]) -> Result<Self> {
        if row_lengths.is_empty() || row_lengths.iter().any(|&l| l == 0) {
            return Err(Error::Domain("young shape needs nonempty positive rows".into()));
        }
        if row_lengths.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain("young shape row lengths must be non-increasing".into()));
        }
        let rows = row_lengths.iter().map(|&l| (1, l)).collect();
        Ok(Self::from_parts(DomainKind::Custom, row_lengths.len(), row_lengths[0] as i64, rows))
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Size parameter `n` the domain was built with.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Size parameter `m` the domain was built with (−1 only for the
    /// narrowest octant trapezoid).
    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Inclusive column interval of row `i`.
    pub fn row(&self, i: usize) -> Option<(usize, usize)> {
        if i == 0 {
            None
        } else {
            self.rows.get(i - 1).copied()
        }
    }

    pub fn max_col(&self) -> usize {
        self.rows.iter().map(|r| r.1).max().unwrap_or(0)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.index(i, j).is_some()
    }

    /// Flat storage index of `(i, j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || i > self.rows.len() {
            return None;
        }
        let (lo, hi) = self.rows[i - 1];
        if j < lo || j > hi {
            None
        } else {
            Some(self.offsets[i - 1] + j - lo)
        }
    }

    /// Cells in row-major order (the storage order).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, &(lo, hi))| (lo..=hi).map(move |j| (r + 1, j)))
    }

    /// Down-left closure: `(i+1, j)` or `(i, j+1)` present implies `(i, j)`.
    pub fn is_closed(&self) -> bool {
        self.cells().all(|(i, j)| (i == 1 || self.contains(i - 1, j)) && (j == 1 || self.contains(i, j - 1)))
    }

    /// Every cell is reachable from (1, 1) by an up-right path in the domain.
    pub fn is_path_connected(&self) -> bool {
        if !self.contains(1, 1) {
            return false;
        }
        self.cells()
            .all(|(i, j)| (i, j) == (1, 1) || (i > 1 && self.contains(i - 1, j)) || (j > 1 && self.contains(i, j - 1)))
    }

    pub fn is_transpose_closed(&self) -> bool {
        self.cells().all(|(i, j)| self.contains(j, i))
    }

    /// `(i+1, j+1)` is outside the domain.
    pub fn is_border(&self, i: usize, j: usize) -> bool {
        self.contains(i, j) && !self.contains(i + 1, j + 1)
    }

    /// None of `(i+1, j)`, `(i, j+1)`, `(i+1, j+1)` is in the domain.
    pub fn is_outer(&self, i: usize, j: usize) -> bool {
        self.contains(i, j) && !self.contains(i + 1, j) && !self.contains(i, j + 1) && !self.contains(i + 1, j + 1)
    }

    /// Endpoints `(k, 2n − k + m + 1)`, `k = 1..n`, of the point-to-line sum.
    pub fn line_endpoints(&self) -> Result<Vec<(usize, usize)>> {
        match self.kind {
            DomainKind::Trapezoid | DomainKind::SymmetricUnion => {
                Ok((1..=self.n).map(|k| (k, (2 * self.n as i64 - k as i64 + self.m + 1) as usize)).collect())
            }
            other => Err(Error::Domain(format!("{other:?} domain has no line endpoints"))),
        }
    }

    /// Checks the structural invariants of the kind.
    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            DomainKind::Trapezoid => self.is_path_connected(),
            DomainKind::SymmetricUnion => self.is_closed() && self.is_transpose_closed(),
            _ => self.is_closed(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{:?} domain violates its closure invariant", self.kind)))
        }
    }
}

/// Builds a domain of the given kind; `m` follows the trapezoid convention
/// for trapezoids and symmetric unions.
pub fn build_domain(kind: DomainKind, n: usize, m: usize) -> Result<PolygonalDomain> {
    let d = match kind {
        DomainKind::Rectangle => PolygonalDomain::rectangle(n, m)?,
        DomainKind::Trapezoid => PolygonalDomain::trapezoid(n, m)?,
        DomainKind::SymmetricUnion => PolygonalDomain::symmetric_union(n, m)?,
        DomainKind::StationaryQuadrant => PolygonalDomain::stationary(n, m)?,
        DomainKind::Custom => return Err(Error::Domain("custom domains are built from row lengths".into())),
    };
    d.validate()?;
    Ok(d)
}

/// The inhomogeneity parameters `(α∘, α, β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub alpha_circ: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ParameterSet {
    pub fn new(alpha_circ: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let p = Self { alpha_circ, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn m(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(Error::Parameter("alpha must have at least one entry".into()));
        }
        let all = std::iter::once(self.alpha_circ).chain(self.alpha.iter().copied()).chain(self.beta.iter().copied());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("parameters must be finite".into()));
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            if a + self.alpha_circ <= 0.0 {
                return Err(Error::Parameter(format!(
                    "alpha[{}] + alpha_circ = {} must be > 0",
                    i + 1,
                    a + self.alpha_circ
                )));
            }
            for (j, &b) in self.alpha.iter().enumerate() {
                if a + b <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "alpha[{}] + alpha[{}] = {} must be > 0",
                        i + 1,
                        j + 1,
                        a + b
                    )));
                }
            }
            for (k, &b) in self.beta.iter().enumerate() {
                if a + b <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "alpha[{}] + beta[{}] = {} must be > 0",
                        i + 1,
                        k + 1,
                        a + b
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How inverse-gamma shapes are laid on a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Scheme {
    /// Rectangle `n × (n+m+1)`: column 1 gets `αᵢ+α∘`, then `αᵢ+αⱼ`, then `αᵢ+β_k`.
    Full { params: ParameterSet },
    /// Trapezoid `(n, m)`: diagonal, upper bulk, β strip, reflected strip.
    Hal { params: ParameterSet },
    /// Symmetric union of the `Hal` field with halved diagonal weights.
    Symmetrized { params: ParameterSet },
    /// Rectangle with `Gamma⁻¹(θ₀)` in column 1 and `Gamma⁻¹(θ)` elsewhere.
    Gue { theta: f64, theta0: f64 },
    /// Trapezoid with `Gamma⁻¹(θ₀)` on the diagonal and `Gamma⁻¹(θ)` elsewhere.
    TrapGue { theta: f64, theta0: f64 },
    /// Unit corner, `θ₀` on column 1, `θ − θ₀` on row 1, `θ` in the bulk.
    Stationary { theta: f64, theta0: f64 },
    /// `Gamma⁻¹(θ)` everywhere.
    Homogeneous { theta: f64 },
    /// Deterministic unit weights.
    Unit,
}

const UNIT: u32 = u32::MAX;

/// Per-cell inverse-gamma shapes on a domain.
#[derive(Debug, Clone)]
pub struct ParameterField {
    domain: PolygonalDomain,
    thetas: Vec<f64>,
    class: Vec<u32>,
    diagonal_halving: bool,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be finite and > 0")))
    }
}

/// θ of the half-space scheme at cell `(i, j)` of trapezoid `(n, m)`.
fn hal_theta(p: &ParameterSet, i: usize, j: usize) -> f64 {
    let n = p.n();
    let m = p.m();
    let a = p.alpha[i - 1];
    if i == j {
        a + p.alpha_circ
    } else if j <= n {
        a + p.alpha[j - 1]
    } else if j <= n + m {
        a + p.beta[j - n - 1]
    } else {
        a + p.alpha[2 * n + m - j]
    }
}

impl ParameterField {
    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    /// Whether diagonal weights are divided by 2 after sampling.
    pub fn diagonal_halving(&self) -> bool {
        self.diagonal_halving
    }

    /// θ at `(i, j)`; `None` for deterministic unit cells.
    pub fn theta(&self, i: usize, j: usize) -> Option<f64> {
        let idx = self.domain.index(i, j)?;
        let c = self.class[idx];
        (c != UNIT).then(|| self.thetas[c as usize])
    }

    pub fn is_unit(&self, i: usize, j: usize) -> bool {
        self.domain.index(i, j).map(|k| self.class[k] == UNIT).unwrap_or(false)
    }

    /// Distinct shapes used by the field.
    pub fn shape_classes(&self) -> &[f64] {
        &self.thetas
    }

    fn from_fn<F: Fn(usize, usize) -> Option<f64>>(domain: PolygonalDomain, halving: bool, f: F) -> Result<Self> {
        let mut thetas: Vec<f64> = Vec::new();
        let mut class = Vec::with_capacity(domain.len());
        for (i, j) in domain.cells() {
            match f(i, j) {
                None => class.push(UNIT),
                Some(t) => {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(Error::Parameter(format!("shape {t} at cell ({i},{j}) must be > 0")));
                    }
                    let k = match thetas.iter().position(|&x| x == t) {
                        Some(k) => k,
                        None => {
                            thetas.push(t);
                            thetas.len() - 1
                        }
                    };
                    class.push(k as u32);
                }
            }
        }
        Ok(Self { domain, thetas, class, diagonal_halving: halving })
    }
}

/// Lays the scheme's shapes over `domain`, checking compatibility.
pub fn assign_parameters(domain: &PolygonalDomain, scheme: &Scheme) -> Result<ParameterField> {
    let d = domain.clone();
    let mismatch = |what: &str| {
        Error::Parameter(format!(
            "scheme {what} is incompatible with a {:?} domain of size ({}, {})",
            d.kind(),
            d.n(),
            d.m()
        ))
    };
    match scheme {
        Scheme::Full { params } => {
            params.validate()?;
            let (n, m) = (params.n(), params.m());
            if d.kind() != DomainKind::Rectangle || d.num_rows() != n || d.max_col() != n + m + 1 {
                return Err(mismatch("full"));
            }
            ParameterField::from_fn(d.clone(), false, |i, j| {
                let a = params.alpha[i - 1];
                Some(if j == 1 {
                    a + params.alpha_circ
                } else if j <= n + 1 {
                    a + params.alpha[j - 2]
                } else {
                    a + params.beta[j - n - 2]
                })
            })
        }
        Scheme::Hal { params } => {
            params.validate()?;
            if d.kind() != DomainKind::Trapezoid || d.n() != params.n() || d.m() != params.m() as i64 {
                return Err(mismatch("hal"));
            }
            ParameterField::from_fn(d.clone(), false, |i, j| Some(hal_theta(params, i, j)))
        }
        Scheme::Symmetrized { params } => {
            params.validate()?;
            if d.kind() != DomainKind::SymmetricUnion || d.n() != params.n() || d.m() != params.m() as i64 {
                return Err(mismatch("symmetrized"));
            }
            ParameterField::from_fn(d.clone(), true, |i, j| {
                Some(if i <= j { hal_theta(params, i, j) } else { hal_theta(params, j, i) })
            })
        }
        Scheme::Gue { theta, theta0 } => {
            check_positive("theta", *theta)?;
            check_positive("theta0", *theta0)?;
            if d.kind() != DomainKind::Rectangle {
                return Err(mismatch("gue"));
            }
            ParameterField::from_fn(d.clone(), false, |_, j| Some(if j == 1 { *theta0 } else { *theta }))
        }
        Scheme::TrapGue { theta, theta0 } => {
            check_positive("theta", *theta)?;
            check_positive("theta0", *theta0)?;
            if d.kind() != DomainKind::Trapezoid {
                return Err(mismatch("trap-gue"));
            }
            ParameterField::from_fn(d.clone(), false, |i, j| Some(if i == j { *theta0 } else { *theta }))
        }
        Scheme::Stationary { theta, theta0 } => {
            if !(*theta0 > 0.0 && theta0 < theta && theta.is_finite()) {
                return Err(Error::Parameter(format!(
                    "stationary scheme needs 0 < theta0 < theta, got theta0={theta0}, theta={theta}"
                )));
            }
            if d.kind() != DomainKind::StationaryQuadrant {
                return Err(mismatch("stationary"));
            }
            ParameterField::from_fn(d.clone(), false, |i, j| match (i, j) {
                (1, 1) => None,
                (_, 1) => Some(*theta0),
                (1, _) => Some(theta - theta0),
                _ => Some(*theta),
            })
        }
        Scheme::Homogeneous { theta } => {
            check_positive("theta", *theta)?;
            ParameterField::from_fn(d.clone(), false, |_, _| Some(*theta))
        }
        Scheme::Unit => ParameterField::from_fn(d.clone(), false, |_, _| None),
    }
}

/// Draws `log X` for `X ~ Gamma(θ, 1)`, exact in the far left tail for
/// small θ.
#[derive(Debug, Clone)]
pub struct LogGammaSampler {
    shape: f64,
    gamma: Gamma<f64>,
    boost: bool,
}

impl LogGammaSampler {
    pub fn new(shape: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        let boost = shape < 1.0;
        let base = if boost { shape + 1.0 } else { shape };
        let gamma = Gamma::new(base, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(Self { shape, gamma, boost })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    #[inline]
    pub fn sample_log<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = self.gamma.sample(rng);
        if self.boost {
            let u: f64 = 1.0 - rng.gen::<f64>();
            g.ln() + u.ln() / self.shape
        } else {
            g.ln()
        }
    }
}

/// Log-weights on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightArray {
    domain: PolygonalDomain,
    log_w: Vec<f64>,
}

impl WeightArray {
    pub fn new(domain: PolygonalDomain, log_w: Vec<f64>) -> Result<Self> {
        if log_w.len() != domain.len() {
            return Err(Error::Domain(format!("weight vector has {} entries for {} cells", log_w.len(), domain.len())));
        }
        if log_w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("log-weights must be finite".into()));
        }
        Ok(Self { domain, log_w })
    }

    /// Builds from linear positive values given row-major.
    pub fn from_values(domain: PolygonalDomain, values: &[f64]) -> Result<Self> {
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        Self::new(domain, values.iter().map(|v| v.ln()).collect())
    }

    /// Builds with `f(i, j)` giving the linear weight.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(domain: PolygonalDomain, mut f: F) -> Result<Self> {
        let values: Vec<f64> = domain.cells().map(|(i, j)| f(i, j)).collect();
        Self::from_values(domain, &values)
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    pub fn log_w(&self, i: usize, j: usize) -> Option<f64> {
        self.domain.index(i, j).map(|k| self.log_w[k])
    }

    /// Exact transpose symmetry of the stored values.
    pub fn is_symmetric(&self) -> bool {
        self.domain.is_transpose_closed() && self.domain.cells().all(|(i, j)| self.log_w(i, j) == self.log_w(j, i))
    }

    /// CSV dump with header `i,j,log_w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "log_w"])?;
        for ((i, j), v) in self.domain.cells().zip(&self.log_w) {
            w.write_record([i.to_string(), j.to_string(), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples every non-unit cell independently; symmetric fields are drawn on
/// `i ≤ j` (row-major) and mirrored, with diagonal halving when flagged.
pub fn sample_weights<R: Rng + ?Sized>(field: &ParameterField, rng: &mut R) -> Result<WeightArray> {
    let samplers = field.thetas.iter().map(|&t| LogGammaSampler::new(t)).collect::<Result<Vec<_>>>()?;
    let d = &field.domain;
    let mut log_w = vec![0.0; d.len()];
    let symmetric = d.kind() == DomainKind::SymmetricUnion;
    for (k, (i, j)) in d.cells().enumerate() {
        if symmetric && i > j {
            continue;
        }
        let c = field.class[k];
        let mut v = if c == UNIT { 0.0 } else { -samplers[c as usize].sample_log(rng) };
        if field.diagonal_halving && i == j {
            v -= std::f64::consts::LN_2;
        }
        log_w[k] = v;
        if symmetric && i != j {
            let t = d.index(j, i).expect("symmetric domain");
            log_w[t] = v;
        }
    }
    Ok(WeightArray { domain: d.clone(), log_w })
}

/// Where a partition function ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    Point { i: usize, j: usize },
    Line { cells: Vec<(usize, usize)> },
}

/// A partition function value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub log_z: LogPositive,
    pub endpoint: Endpoint,
    /// Number of admissible paths, filled in for domains of at most 24 cells.
    pub path_count: Option<u128>,
}

/// `log Z(i, j)` for every cell; unreachable cells hold −∞.
pub fn log_partition_table(weights: &WeightArray) -> Vec<f64> {
    let d = &weights.domain;
    let mut z = vec![f64::NEG_INFINITY; d.len()];
    for r in 1..=d.num_rows() {
        let (lo, hi) = d.row(r).unwrap();
        let base = d.index(r, lo).unwrap();
        let prev = d.row(r - 1);
        for j in lo..=hi {
            let k = base + j - lo;
            let up = match prev {
                Some((plo, phi)) if j >= plo && j <= phi => z[d.index(r - 1, j).unwrap()],
                _ => f64::NEG_INFINITY,
            };
            let left = if j > lo { z[k - 1] } else { f64::NEG_INFINITY };
            let acc = if r == 1 && j == 1 { 0.0 } else { lse2(up, left) };
            z[k] = if acc == f64::NEG_INFINITY { acc } else { weights.log_w[k] + acc };
        }
    }
    z
}

fn path_counts(d: &PolygonalDomain) -> Vec<u128> {
    let mut c = vec![0u128; d.len()];
    for (k, (i, j)) in d.cells().enumerate() {
        c[k] = if (i, j) == (1, 1) {
            1
        } else {
            let up = if i > 1 { d.index(i - 1, j).map(|t| c[t]).unwrap_or(0) } else { 0 };
            let left = if j > 1 { d.index(i, j - 1).map(|t| c[t]).unwrap_or(0) } else { 0 };
            up + left
        };
    }
    c
}

fn count_if_small(d: &PolygonalDomain, ends: &[(usize, usize)]) -> Option<u128> {
    (d.len() <= 24).then(|| {
        let c = path_counts(d);
        ends.iter().map(|&(i, j)| c[d.index(i, j).unwrap()]).sum()
    })
}

fn finish(log_z: f64, endpoint: Endpoint, count: Option<u128>) -> Result<PartitionResult> {
    Ok(PartitionResult { log_z: LogPositive::from_log(log_z)?, endpoint, path_count: count })
}

/// Point-to-point partition function from (1, 1) to `target`.
pub fn partition_point_to_point(weights: &WeightArray, target: (usize, usize)) -> Result<PartitionResult> {
    let d = &weights.domain;
    let idx =
        d.index(target.0, target.1).ok_or_else(|| Error::Domain(format!("target {target:?} is outside the domain")))?;
    if !d.contains(1, 1) {
        return Err(Error::Domain("domain does not contain (1,1)".into()));
    }
    let z = log_partition_table(weights);
    if z[idx] == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("target {target:?} is unreachable")));
    }
    finish(z[idx], Endpoint::Point { i: target.0, j: target.1 }, count_if_small(d, &[target]))
}

/// Point-to-line partition function of trapezoid `(n, m)`.
pub fn partition_point_to_line(weights: &WeightArray, n: usize, m: usize) -> Result<PartitionResult> {
    let d = &weights.domain;
    if d.kind() != DomainKind::Trapezoid || d.n() != n || d.m() != m as i64 {
        return Err(Error::Domain(format!(
            "point-to-line needs trapezoid({n}, {m}), got {:?}({}, {})",
            d.kind(),
            d.n(),
            d.m()
        )));
    }
    point_to_line_any(weights)
}

/// Point-to-line sum over the line endpoints of any trapezoid, including
/// the octant form built by [`PolygonalDomain::trapezoid_by_width`].
pub fn point_to_line_any(weights: &WeightArray) -> Result<PartitionResult> {
    let d = &weights.domain;
    if d.kind() != DomainKind::Trapezoid {
        return Err(Error::Domain(format!("point-to-line needs a trapezoid, got {:?}", d.kind())));
    }
    let ends = d.line_endpoints()?;
    let z = log_partition_table(weights);
    let log_z = ends.iter().map(|&(i, j)| z[d.index(i, j).unwrap()]).fold(f64::NEG_INFINITY, lse2);
    let count = count_if_small(d, &ends);
    finish(log_z, Endpoint::Line { cells: ends }, count)
}

/// Symmetrized point-to-line partition function over both half-domains.
pub fn partition_symmetrized(weights: &WeightArray, n: usize, m: usize) -> Result<PartitionResult> {
    let d = &weights.domain;
    if d.kind() != DomainKind::SymmetricUnion || d.n() != n || d.m() != m as i64 {
        return Err(Error::Domain(format!(
            "symmetrized partition function needs symmetric-union({n}, {m}), got {:?}({}, {})",
            d.kind(),
            d.n(),
            d.m()
        )));
    }
    if !weights.is_symmetric() {
        return Err(Error::Domain("symmetrized partition function needs symmetric weights".into()));
    }
    let upper = d.line_endpoints()?;
    let ends: Vec<(usize, usize)> = upper.iter().copied().chain(upper.iter().map(|&(i, j)| (j, i))).collect();
    let z = log_partition_table(weights);
    let log_z = ends.iter().map(|&(i, j)| z[d.index(i, j).unwrap()]).fold(f64::NEG_INFINITY, lse2);
    let count = count_if_small(d, &ends);
    finish(log_z, Endpoint::Line { cells: ends }, count)
}

/// Samples the stationary model and returns `log Z^stat(n, m)`.
pub fn partition_stationary<R: Rng + ?Sized>(
    theta: f64,
    theta0: f64,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<PartitionResult> {
    let d = PolygonalDomain::stationary(n, m)?;
    let field = assign_parameters(&d, &Scheme::Stationary { theta, theta0 })?;
    let w = sample_weights(&field, rng)?;
    partition_point_to_point(&w, (n, m))
}

/// Which partition function a model reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// Point-to-point at the last cell of the last row.
    Corner,
    /// Sum over the trapezoid's line endpoints.
    Line,
    /// Sum over both halves of a symmetric union.
    SymmetricLine,
}

/// A sampled model: field plus observable, with a fused sample-and-DP path.
#[derive(Debug, Clone)]
pub struct Model {
    field: ParameterField,
    observable: Observable,
    samplers: Vec<LogGammaSampler>,
    ends: Vec<usize>,
}

impl Model {
    pub fn new(field: ParameterField, observable: Observable) -> Result<Self> {
        let d = field.domain();
        let ends: Vec<(usize, usize)> = match observable {
            Observable::Corner => {
                let r = d.num_rows();
                vec![(r, d.row(r).unwrap().1)]
            }
            Observable::Line => {
                if d.kind() != DomainKind::Trapezoid {
                    return Err(Error::Domain("line observable needs a trapezoid".into()));
                }
                d.line_endpoints()?
            }
            Observable::SymmetricLine => {
                if d.kind() != DomainKind::SymmetricUnion {
                    return Err(Error::Domain("symmetric line observable needs a symmetric union".into()));
                }
                let u = d.line_endpoints()?;
                u.iter().copied().chain(u.iter().map(|&(i, j)| (j, i))).collect()
            }
        };
        let ends = ends.iter().map(|&(i, j)| d.index(i, j).unwrap()).collect();
        let samplers = field.thetas.iter().map(|&t| LogGammaSampler::new(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { field, observable, samplers, ends })
    }

    /// Full-space model `Z(n, n+m+1)` under the full-space scheme.
    pub fn full(params: &ParameterSet) -> Result<Self> {
        let d = PolygonalDomain::rectangle(params.n(), params.n() + params.m() + 1)?;
        Self::new(assign_parameters(&d, &Scheme::Full { params: params.clone() })?, Observable::Corner)
    }

    /// Trapezoidal model `Z^▱(n; m)` under the half-space scheme.
    pub fn trapezoid(params: &ParameterSet) -> Result<Self> {
        let d = PolygonalDomain::trapezoid(params.n(), params.m())?;
        Self::new(assign_parameters(&d, &Scheme::Hal { params: params.clone() })?, Observable::Line)
    }

    /// Symmetrized model `Z^symflat(n; m)`.
    pub fn symmetrized(params: &ParameterSet) -> Result<Self> {
        let d = PolygonalDomain::symmetric_union(params.n(), params.m())?;
        Self::new(assign_parameters(&d, &Scheme::Symmetrized { params: params.clone() })?, Observable::SymmetricLine)
    }

    pub fn field(&self) -> &ParameterField {
        &self.field
    }

    pub fn observable(&self) -> Observable {
        self.observable
    }

    /// Samples weights and returns them with the observable's `log Z`.
    pub fn sample_with_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(WeightArray, f64)> {
        let w = sample_weights(&self.field, rng)?;
        let z = log_partition_table(&w);
        let log_z = self.ends.iter().map(|&k| z[k]).fold(f64::NEG_INFINITY, lse2);
        Ok((w, log_z))
    }

    /// Samples weights and runs the DP in one row-major sweep, consuming the
    /// stream exactly as [`sample_weights`] does.
    pub fn sample_log_z<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = &self.field.domain;
        if d.kind() == DomainKind::SymmetricUnion {
            return self.sample_with_weights(rng).map(|x| x.1).unwrap_or(f64::NAN);
        }
        let max_col = d.max_col();
        let mut prev = vec![f64::NEG_INFINITY; max_col + 2];
        let mut cur = vec![f64::NEG_INFINITY; max_col + 2];
        let mut end_iter = self.ends.iter().peekable();
        let mut acc = f64::NEG_INFINITY;
        let mut k = 0usize;
        for r in 1..=d.num_rows() {
            let (lo, hi) = d.row(r).unwrap();
            cur[lo - 1] = f64::NEG_INFINITY;
            for j in lo..=hi {
                let c = self.field.class[k];
                let log_w = if c == UNIT { 0.0 } else { -self.samplers[c as usize].sample_log(rng) };
                let pre = if r == 1 && j == 1 { 0.0 } else { lse2(prev[j], cur[j - 1]) };
                cur[j] = log_w + pre;
                while end_iter.peek() == Some(&&k) {
                    acc = lse2(acc, cur[j]);
                    end_iter.next();
                }
                k += 1;
            }
            for v in prev.iter_mut() {
                *v = f64::NEG_INFINITY;
            }
            prev[lo..=hi].copy_from_slice(&cur[lo..=hi]);
            for v in cur.iter_mut() {
                *v = f64::NEG_INFINITY;
            }
        }
        acc
    }
}
