//! Scalar special functions: real and complex log-gamma, polygamma of order
//! 0..=2, and log-space accumulation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used for contour points and spectral variables.
pub type ComplexScalar = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_2, B_4, ..., B_16.
const BERNOULLI: [f64; 8] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];

/// A strictly positive quantity carried by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogPositive {
    pub log_value: f64,
}

impl LogPositive {
    pub fn from_log(log_value: f64) -> Result<Self> {
        if log_value.is_finite() {
            Ok(Self { log_value })
        } else {
            Err(Error::Domain(format!("log value {log_value} is not finite")))
        }
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self { log_value: value.ln() })
        } else {
            Err(Error::Domain(format!("{value} is not a finite positive number")))
        }
    }

    pub fn value(self) -> f64 {
        self.log_value.exp()
    }
}

/// ζ(k) − 1 for integer k ≥ 2 (Euler–Maclaurin after 40 explicit terms).
fn zeta_minus_one(k: usize) -> f64 {
    const N: f64 = 40.0;
    let s = k as f64;
    let mut sum = 0.0;
    for n in (2..40).rev() {
        sum += (n as f64).powf(-s);
    }
    let tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s) + s / 12.0 * N.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * N.powf(-s - 3.0)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * N.powf(-s - 5.0);
    sum + tail
}

fn zeta_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..64).map(|k| if k < 2 { 0.0 } else { zeta_minus_one(k) }).collect())
}

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += b / (two_k * (two_k - 1.0)) * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// log Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    // Taylor series around the zeros of log Γ at 1 and 2
    if (x - 1.0).abs() <= 0.25 {
        let e = x - 1.0;
        let z = zeta_table();
        let mut acc = 0.0;
        let mut pow = -e;
        for k in 2..64 {
            pow *= -e;
            let term = (1.0 + z[k]) * pow / k as f64;
            acc += term;
            if term.abs() < 1e-18 * acc.abs().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA * e + acc;
    }
    if (x - 2.0).abs() <= 0.25 {
        let e = x - 2.0;
        let z = zeta_table();
        let mut acc = 0.0;
        let mut pow = -e;
        for k in 2..64 {
            pow *= -e;
            let term = z[k] * pow / k as f64;
            acc += term;
            if term.abs() < 1e-18 * acc.abs().max(1e-300) {
                break;
            }
        }
        return (1.0 - EULER_GAMMA) * e + acc;
    }
    if x >= 10.0 {
        return stirling_real(x);
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < 10.0 {
        prod *= y;
        y += 1.0;
    }
    stirling_real(y) - prod.ln()
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (two_k * (two_k - 1.0)));
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log Γ(z) on the branch obtained by analytic continuation along the
/// recurrence; exp of the result equals Γ(z).
pub fn complex_ln_gamma(z: ComplexScalar) -> Result<ComplexScalar> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("complex_ln_gamma requires finite input, got {z}")));
    }
    if is_pole(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    Ok(complex_ln_gamma_unchecked(z))
}

pub(crate) fn complex_ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re > 0.0 {
        return Complex64::new(ln_gamma_unchecked(z.re), 0.0);
    }
    let shift = if z.im.abs() >= 15.0 { (-z.re).ceil().max(0.0) } else { (15.0 - z.re).ceil().max(0.0) } as usize;
    let mut w = z;
    let mut log_prod = Complex64::new(0.0, 0.0);
    // multiply in blocks to limit the number of complex logarithms
    let mut block = Complex64::new(1.0, 0.0);
    for k in 0..shift {
        block *= w;
        if k % 8 == 7 {
            log_prod += block.ln();
            block = Complex64::new(1.0, 0.0);
        }
        w += 1.0;
    }
    log_prod += block.ln();
    stirling_complex(w) - log_prod
}

/// 1/Γ(z), an entire function; exactly zero at the poles of Γ.
pub fn complex_recip_gamma(z: ComplexScalar) -> ComplexScalar {
    if is_pole(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        let s = (z * PI).sin() / PI;
        s * complex_ln_gamma_unchecked(Complex64::new(1.0, 0.0) - z).exp()
    } else {
        (-complex_ln_gamma_unchecked(z)).exp()
    }
}

/// log(1/Γ(z)), or `None` where 1/Γ vanishes.
pub fn ln_complex_recip_gamma(z: ComplexScalar) -> Option<ComplexScalar> {
    if is_pole(z) {
        None
    } else {
        Some(-complex_ln_gamma_unchecked(z))
    }
}

/// ψ^{(order)}(x) for order ∈ {0, 1, 2} and x > 0.
pub fn polygamma(order: u32, x: f64) -> Result<f64> {
    if order > 2 {
        return Err(Error::Domain(format!("polygamma order {order} not in 0..=2")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("polygamma requires finite x > 0, got {x}")));
    }
    Ok(match order {
        0 => digamma_unchecked(x),
        1 => trigamma_unchecked(x),
        _ => tetragamma_unchecked(x),
    })
}

const SHIFT_TO: f64 = 14.0;

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        series += b / (2.0 * (k as f64 + 1.0)) * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 * inv - series
}

pub(crate) fn trigamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for b in BERNOULLI.iter() {
        series += b * pow;
        pow *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

pub(crate) fn tetragamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        series += (2.0 * (k as f64 + 1.0) + 1.0) * b * pow;
        pow *= inv2;
    }
    acc - inv2 - inv2 * inv - series
}

/// log Σ exp(vᵢ) with a max shift.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("log_sum_exp of an empty list".into()));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(max);
    }
    if !max.is_finite() {
        return Err(Error::Domain(format!("log_sum_exp received non-finite value {max}")));
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// log(eᵃ + eᵇ); −∞ acts as an absent term.
#[inline]
pub fn lse2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Running log-sum-exp accumulator with deterministic merge.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogAccumulator {
    /// Adds `weight · exp(log_term)` with a nonnegative weight.
    #[inline]
    pub fn add(&mut self, log_term: f64, weight: f64) {
        if log_term == f64::NEG_INFINITY || weight == 0.0 {
            return;
        }
        if log_term > self.max {
            self.scaled = self.scaled * (self.max - log_term).exp() + weight;
            self.max = log_term;
        } else {
            self.scaled += weight * (log_term - self.max).exp();
        }
    }

    pub fn merge(mut self, other: LogAccumulator) -> LogAccumulator {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if other.max > self.max {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * (other.max - self.max).exp();
        }
        self
    }

    pub fn ln(self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    pub fn max_log(self) -> f64 {
        self.max
    }
}

/// Standard Gaussian distribution function.
pub fn gaussian_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}
