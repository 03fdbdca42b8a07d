//! Geometric RSK on polygonal arrays through local moves, its symmetric
//! variant, and checks of the identities it satisfies.
//!
//! Entries are kept in linear space: the moves mix sums and reciprocals.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymer::{log_partition_table, PolygonalDomain, WeightArray};
use crate::specialfn::LogPositive;

/// Positive values on a polygonal domain, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalArray {
    domain: PolygonalDomain,
    values: Vec<f64>,
}

impl PolygonalArray {
    pub fn new(domain: PolygonalDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Domain(format!("array has {} entries for {} cells", values.len(), domain.len())));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("polygonal array entries must be positive and finite".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(domain: PolygonalDomain, mut f: F) -> Result<Self> {
        let values = domain.cells().map(|(i, j)| f(i, j)).collect();
        Self::new(domain, values)
    }

    pub fn from_weights(w: &WeightArray) -> Result<Self> {
        Self::new(w.domain().clone(), w.log_weights().iter().map(|v| v.exp()).collect())
    }

    pub fn to_weights(&self) -> Result<WeightArray> {
        WeightArray::new(self.domain.clone(), self.values.iter().map(|v| v.ln()).collect())
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.domain.index(i, j).map(|k| self.values[k])
    }

    /// Entry with the zero convention outside the domain.
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.domain.index(i, j).map(|k| self.values[k]).unwrap_or(0.0)
    }

    /// `w_{i−1,j} + w_{i,j−1}`, equal to 1 at (1, 1).
    #[inline]
    fn incoming(&self, i: usize, j: usize) -> f64 {
        if (i, j) == (1, 1) {
            1.0
        } else {
            let up = if i > 1 { self.at(i - 1, j) } else { 0.0 };
            let left = if j > 1 { self.at(i, j - 1) } else { 0.0 };
            up + left
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.domain.is_transpose_closed() && self.domain.cells().all(|(i, j)| self.at(i, j) == self.at(j, i))
    }

    /// Largest relative gap between mirrored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.domain
            .cells()
            .filter(|&(i, j)| i < j)
            .map(|(i, j)| {
                let a = self.at(i, j);
                let b = self.at(j, i);
                if b == 0.0 {
                    f64::INFINITY
                } else {
                    ((a - b) / a).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Applies `a_{i,j}` in place.
pub fn local_move_a(array: &mut PolygonalArray, i: usize, j: usize) -> Result<()> {
    let k = array.domain.index(i, j).ok_or_else(|| Error::Domain(format!("a-move at ({i},{j}) outside the domain")))?;
    let s = array.incoming(i, j);
    array.values[k] *= s;
    Ok(())
}

/// Applies `b_{i,j}` in place; `(i, j)` must be a non-border index.
pub fn local_move_b(array: &mut PolygonalArray, i: usize, j: usize) -> Result<()> {
    let k = array.domain.index(i, j).ok_or_else(|| Error::Domain(format!("b-move at ({i},{j}) outside the domain")))?;
    if !array.domain.contains(i + 1, j + 1) {
        return Err(Error::Contract(format!("b-move at border index ({i},{j})")));
    }
    let s = array.incoming(i, j);
    let d = 1.0 / array.at(i + 1, j) + 1.0 / array.at(i, j + 1);
    if s == 0.0 || !d.is_finite() || d == 0.0 {
        return Err(Error::Contract(format!("vanishing factor in b-move at ({i},{j})")));
    }
    array.values[k] = s / (array.values[k] * d);
    Ok(())
}

/// One applied local move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    A(usize, usize),
    B(usize, usize),
}

/// Ordered record of applied moves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveTrace {
    pub moves: Vec<Move>,
}

impl MoveTrace {
    /// Re-applies the moves to a fresh copy of `array`. A cell joins the
    /// growing sub-domain when its a-move is applied.
    pub fn replay(&self, array: &PolygonalArray) -> Result<PolygonalArray> {
        let mut t = array.clone();
        let mut done = vec![false; array.domain.len()];
        for m in &self.moves {
            let mut sub = SubView { t: &mut t, done: &done };
            match *m {
                Move::A(i, j) => {
                    sub.a(i, j)?;
                    done[array.domain.index(i, j).unwrap()] = true;
                }
                Move::B(i, j) => sub.b(i, j)?,
            }
        }
        Ok(t)
    }
}

/// Output of gRSK.
#[derive(Debug, Clone)]
pub struct GrskOutput {
    pub t: PolygonalArray,
    /// `τ_q`, the product of `t` along the diagonal `j − i = q`.
    pub tau: BTreeMap<i64, LogPositive>,
    /// `t` at every border index.
    pub border: BTreeMap<(usize, usize), LogPositive>,
    pub trace: MoveTrace,
}

/// Shells of outer indices, innermost first; each shell row-major.
pub fn outer_shells(domain: &PolygonalDomain) -> Vec<Vec<(usize, usize)>> {
    let mut rows: Vec<usize> = (1..=domain.num_rows()).map(|i| domain.row(i).unwrap().1).collect();
    let mut shells = Vec::new();
    while rows.iter().any(|&l| l > 0) {
        let has = |rows: &[usize], i: usize, j: usize| i >= 1 && i <= rows.len() && j >= 1 && j <= rows[i - 1];
        let mut shell = Vec::new();
        for i in 1..=rows.len() {
            let j = rows[i - 1];
            if j == 0 {
                continue;
            }
            if !has(&rows, i + 1, j) && !has(&rows, i, j + 1) && !has(&rows, i + 1, j + 1) {
                shell.push((i, j));
            }
        }
        for &(i, _) in &shell {
            rows[i - 1] -= 1;
        }
        shells.push(shell);
    }
    shells.reverse();
    shells
}

fn check_grsk_domain(domain: &PolygonalDomain) -> Result<()> {
    if !domain.is_closed() || !domain.contains(1, 1) {
        return Err(Error::Domain("gRSK needs a down-left closed domain containing (1,1)".into()));
    }
    if (1..=domain.num_rows()).any(|i| domain.row(i).unwrap().0 != 1) {
        return Err(Error::Domain("gRSK needs every row to start at column 1".into()));
    }
    Ok(())
}

/// gRSK by the shell recursion, outer indices row-major within a shell.
pub fn grsk(array: &PolygonalArray) -> Result<GrskOutput> {
    check_grsk_domain(&array.domain)?;
    let order: Vec<(usize, usize)> = outer_shells(&array.domain).into_iter().flatten().collect();
    grsk_with_order(array, &order)
}

/// gRSK applying `ϱ` in the given cell order. Each cell must be an outer
/// index of the cells processed so far plus itself.
pub fn grsk_with_order(array: &PolygonalArray, order: &[(usize, usize)]) -> Result<GrskOutput> {
    check_grsk_domain(&array.domain)?;
    if order.len() != array.domain.len() {
        return Err(Error::Contract("order must visit every cell once".into()));
    }
    let mut done = vec![false; array.domain.len()];
    let is_done = |done: &[bool], i: usize, j: usize| array.domain.index(i, j).map(|k| done[k]).unwrap_or(false);
    let mut t = array.clone();
    let mut trace = MoveTrace::default();
    for &(i, j) in order {
        let k = array
            .domain
            .index(i, j)
            .ok_or_else(|| Error::Contract(format!("order visits ({i},{j}) outside the domain")))?;
        let closed = (i == 1 || is_done(&done, i - 1, j)) && (j == 1 || is_done(&done, i, j - 1));
        let outer = !is_done(&done, i + 1, j) && !is_done(&done, i, j + 1) && !is_done(&done, i + 1, j + 1);
        if done[k] || !closed || !outer {
            return Err(Error::Contract(format!("({i},{j}) is not an admissible next outer index")));
        }
        let mut sub = SubView { t: &mut t, done: &done };
        sub.rho(i, j, &mut trace)?;
        done[k] = true;
    }
    Ok(finish_output(t, trace))
}

/// A view restricting moves to the processed cells plus the current one.
struct SubView<'a> {
    t: &'a mut PolygonalArray,
    done: &'a [bool],
}

impl SubView<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        match self.t.domain.index(i, j) {
            Some(k) if self.done[k] => self.t.values[k],
            _ => 0.0,
        }
    }

    fn incoming(&self, i: usize, j: usize) -> f64 {
        if (i, j) == (1, 1) {
            1.0
        } else {
            let up = if i > 1 { self.at(i - 1, j) } else { 0.0 };
            let left = if j > 1 { self.at(i, j - 1) } else { 0.0 };
            up + left
        }
    }

    fn b(&mut self, p: usize, q: usize) -> Result<()> {
        let idx = self
            .t
            .domain
            .index(p, q)
            .ok_or_else(|| Error::Domain(format!("b-move at ({p},{q}) outside the domain")))?;
        let s = self.incoming(p, q);
        let d = 1.0 / self.at(p + 1, q) + 1.0 / self.at(p, q + 1);
        if s == 0.0 || !d.is_finite() || d == 0.0 {
            return Err(Error::Contract(format!("vanishing factor in b-move at ({p},{q})")));
        }
        self.t.values[idx] = s / (self.t.values[idx] * d);
        Ok(())
    }

    fn a(&mut self, i: usize, j: usize) -> Result<()> {
        let idx = self
            .t
            .domain
            .index(i, j)
            .ok_or_else(|| Error::Domain(format!("a-move at ({i},{j}) outside the domain")))?;
        let s = self.incoming(i, j);
        self.t.values[idx] *= s;
        Ok(())
    }

    /// `ϱ_{i,j}`: b-moves from the lowest diagonal index up, then `a_{i,j}`.
    fn rho(&mut self, i: usize, j: usize, trace: &mut MoveTrace) -> Result<()> {
        let depth = i.min(j) - 1;
        for k in (1..=depth).rev() {
            self.b(i - k, j - k)?;
            trace.moves.push(Move::B(i - k, j - k));
        }
        self.a(i, j)?;
        trace.moves.push(Move::A(i, j));
        Ok(())
    }
}

fn finish_output(t: PolygonalArray, trace: MoveTrace) -> GrskOutput {
    let mut tau_log: BTreeMap<i64, f64> = BTreeMap::new();
    let mut border = BTreeMap::new();
    for ((i, j), v) in t.domain.cells().zip(&t.values) {
        *tau_log.entry(j as i64 - i as i64).or_insert(0.0) += v.ln();
        if t.domain.is_border(i, j) {
            border.insert((i, j), LogPositive { log_value: v.ln() });
        }
    }
    let tau = tau_log.into_iter().map(|(q, l)| (q, LogPositive { log_value: l })).collect();
    GrskOutput { t, tau, border, trace }
}

/// gRSK of a symmetric array; the `i ≤ j` half of the result is mirrored.
pub fn grsk_symmetric(array: &PolygonalArray) -> Result<GrskOutput> {
    if !array.is_symmetric() {
        return Err(Error::Domain("symmetric gRSK needs a symmetric array".into()));
    }
    let out = grsk(array)?;
    let mut t = out.t;
    let cells: Vec<(usize, usize)> = t.domain.cells().filter(|&(i, j)| i < j).collect();
    for (i, j) in cells {
        let v = t.at(i, j);
        let k = t.domain.index(j, i).unwrap();
        t.values[k] = v;
    }
    Ok(finish_output(t, out.trace))
}

/// `(t_{1,1}, …, t_{ℓ,ℓ})` for the diagonal length `ℓ`.
pub fn diagonal(t: &PolygonalArray) -> Vec<f64> {
    (1..).map_while(|i| t.get(i, i)).collect()
}

/// Tolerances for [`verify_grsk_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrskTolerances {
    pub rel: f64,
    pub jac: f64,
    /// Largest domain for the finite-difference Jacobian.
    pub jac_max_cells: usize,
}

impl Default for GrskTolerances {
    fn default() -> Self {
        Self { rel: 1e-10, jac: 1e-5, jac_max_cells: 30 }
    }
}

/// One verified identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    /// Worst relative error (or `| |det| − 1 |` for the Jacobian).
    pub error: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrskReport {
    pub cells: usize,
    pub symmetric: bool,
    pub checks: Vec<IdentityCheck>,
}

impl GrskReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b.abs().max(a.abs())).abs()
    }
}

/// Relative error of two positive numbers given by their logs.
fn rel_log(la: f64, lb: f64) -> f64 {
    (la - lb).exp_m1().abs()
}

/// Checks the energy, border, τ-product, diagonal and Jacobian identities.
pub fn verify_grsk_properties(array: &PolygonalArray, tol: &GrskTolerances) -> Result<GrskReport> {
    let symmetric = array.is_symmetric();
    let out = if symmetric { grsk_symmetric(array)? } else { grsk(array)? };
    let t = &out.t;
    let d = array.domain();
    let mut checks = Vec::new();
    let mut push = |name: &str, error: f64, limit: f64| {
        checks.push(IdentityCheck { name: name.into(), pass: error <= limit, error, skipped: false });
    };

    let lhs: f64 = array.values.iter().map(|w| 1.0 / w).sum();
    let mut rhs = 1.0 / t.at(1, 1);
    for (i, j) in d.cells() {
        let up = if i > 1 { t.at(i - 1, j) } else { 0.0 };
        let left = if j > 1 { t.at(i, j - 1) } else { 0.0 };
        rhs += (up + left) / t.at(i, j);
    }
    push("energy", rel(rhs, lhs), tol.rel);

    let weights = array.to_weights()?;
    let z = log_partition_table(&weights);
    let border_err =
        out.border.iter().map(|(&(i, j), v)| rel_log(v.log_value, z[d.index(i, j).unwrap()])).fold(0.0, f64::max);
    push("border-partition", border_err, tol.rel);

    let logw = |i: usize, j: usize| array.get(i, j).unwrap().ln();
    let tau = |q: i64| out.tau.get(&q).map(|v| v.log_value).unwrap_or(0.0);
    let mut tau_err: f64 = 0.0;
    for &(n, m) in out.border.keys() {
        let mut s = 0.0;
        for i in 1..=n {
            for j in 1..=m {
                s += logw(i, j);
            }
        }
        let q = m as i64 - n as i64;
        tau_err = tau_err.max(rel_log(s, tau(q)));
        if d.is_outer(n, m) {
            let col: f64 = (1..=n).map(|i| logw(i, m)).sum();
            let row: f64 = (1..=m).map(|j| logw(n, j)).sum();
            tau_err = tau_err.max(rel_log(col, tau(q) - tau(q - 1)));
            tau_err = tau_err.max(rel_log(row, tau(q) - tau(q + 1)));
        }
    }
    push("tau-products", tau_err, tol.rel);

    if symmetric {
        push("symmetry", t.max_asymmetry().max(grsk(array)?.t.max_asymmetry()), tol.rel);
        let diag_t = diagonal(t);
        let l = diag_t.len();
        let lhs = (4.0f64).ln() * (l / 2) as f64 + (1..=l).map(|i| logw(i, i)).sum::<f64>();
        let rhs: f64 =
            diag_t.iter().enumerate().map(|(k, v)| if (l - (k + 1)) % 2 == 0 { v.ln() } else { -v.ln() }).sum();
        push("diagonal-product", rel_log(lhs, rhs), tol.rel);
    }

    let cells = if symmetric { d.cells().filter(|&(i, j)| i <= j).count() } else { d.len() };
    if cells <= tol.jac_max_cells {
        let det = log_jacobian_det(array, symmetric)?;
        push("jacobian", (det.abs() - 1.0).abs(), tol.jac);
    } else {
        checks.push(IdentityCheck { name: "jacobian".into(), pass: true, error: 0.0, skipped: true });
    }

    Ok(GrskReport { cells: d.len(), symmetric, checks })
}

/// Determinant of the log-coordinate Jacobian by central differences with
/// step `1e-6`; symmetric arrays use the `i ≤ j` coordinates.
pub fn log_jacobian_det(array: &PolygonalArray, symmetric: bool) -> Result<f64> {
    let d = array.domain();
    let coords: Vec<(usize, usize)> =
        if symmetric { d.cells().filter(|&(i, j)| i <= j).collect() } else { d.cells().collect() };
    let n = coords.len();
    let h = 1e-6;
    let eval = |k: usize, delta: f64| -> Result<Vec<f64>> {
        let mut a = array.clone();
        let (i, j) = coords[k];
        let f = delta.exp();
        a.values[d.index(i, j).unwrap()] *= f;
        if symmetric && i != j {
            a.values[d.index(j, i).unwrap()] *= f;
        }
        let out = grsk(&a)?;
        Ok(coords.iter().map(|&(p, q)| out.t.at(p, q).ln()).collect())
    };
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let plus = eval(k, h)?;
        let minus = eval(k, -h)?;
        for r in 0..n {
            jac[(r, k)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    Ok(jac.lu().determinant())
}

/// Random array with log-uniform entries in `[e^{−spread}, e^{spread}]`,
/// clamped to `[1e-6, 1e6]`.
pub fn random_array<R: Rng + ?Sized>(domain: &PolygonalDomain, spread: f64, rng: &mut R) -> Result<PolygonalArray> {
    PolygonalArray::from_fn(domain.clone(), |_, _| rng.gen_range(-spread..=spread).exp().clamp(1e-6, 1e6))
}

/// Random symmetric array on a transpose-closed domain.
pub fn random_symmetric_array<R: Rng + ?Sized>(
    domain: &PolygonalDomain,
    spread: f64,
    rng: &mut R,
) -> Result<PolygonalArray> {
    if !domain.is_transpose_closed() {
        return Err(Error::Domain("symmetric array needs a transpose-closed domain".into()));
    }
    let mut upper = BTreeMap::new();
    for (i, j) in domain.cells().filter(|&(i, j)| i <= j) {
        upper.insert((i, j), rng.gen_range(-spread..=spread).exp().clamp(1e-6, 1e6));
    }
    PolygonalArray::from_fn(domain.clone(), |i, j| upper[&(i.min(j), i.max(j))])
}

/// The down-left closed hull `{1 ≤ i ≤ n, 1 ≤ j ≤ 2n + m − i + 1}` of
/// trapezoid `(n, m)`.
pub fn trapezoid_hull(n: usize, m: usize) -> Result<PolygonalDomain> {
    let rows: Vec<usize> = (1..=n).map(|i| 2 * n + m - i + 1).collect();
    PolygonalDomain::young(&rows)
}
