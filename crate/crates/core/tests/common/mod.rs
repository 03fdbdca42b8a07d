#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// GL nodes on [-1, 1] by Newton iteration on the Legendre recurrence.
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for j in 2..=n {
                    let q2 = ((2 * j - 1) as f64 * z * q1 - (j - 1) as f64 * q0) / j as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[k] = z;
                w[k] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// (Ai(x), Ai'(x)) from the ray integral through the saddle at √x⁺:
/// Ai(x) = (1/π) Im ∫₀^∞ exp(w³/3 − xw) e^{iπ/3} ds, w = w₀ + s e^{iπ/3}.
pub fn airy(x: f64) -> (f64, f64) {
    let w0 = x.max(0.0).sqrt();
    let e = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    let (gx, gw) = legendre_rule(48);
    let (mut ai, mut aip) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let panel = 0.5;
    for p in 0..24 {
        let lo = p as f64 * panel;
        for (xi, wi) in gx.iter().zip(&gw) {
            let s = lo + 0.5 * panel * (xi + 1.0);
            let w = w0 + e * s;
            let g = (w * w * w / 3.0 - x * w).exp() * e * (0.5 * panel * wi);
            ai += g;
            aip -= w * g;
        }
    }
    (ai.im / std::f64::consts::PI, aip.im / std::f64::consts::PI)
}

/// F₂(s) = det(I − K_Ai) on L²(s, s + 24) by Gauss–Legendre Nyström.
pub fn tracy_widom_airy(s: f64) -> f64 {
    let m = 120;
    let len = 24.0;
    let (gx, gw) = legendre_rule(m);
    let x: Vec<f64> = gx.iter().map(|t| s + 0.5 * len * (t + 1.0)).collect();
    let w: Vec<f64> = gw.iter().map(|t| 0.5 * len * t).collect();
    let a: Vec<(f64, f64)> = x.iter().map(|&v| airy(v)).collect();
    let k = DMatrix::from_fn(m, m, |i, j| {
        let kij = if i == j {
            a[i].1 * a[i].1 - x[i] * a[i].0 * a[i].0
        } else {
            (a[i].0 * a[j].1 - a[i].1 * a[j].0) / (x[i] - x[j])
        };
        -(w[i] * w[j]).sqrt() * kij
    });
    (DMatrix::identity(m, m) + k).determinant()
}

/// F₂ from a scipy Airy-kernel Nyström determinant (120 and 200 nodes agree).
pub const TW_FROZEN: [(f64, f64); 11] = [
    (-6.0, 1.0622546742072151e-08),
    (-5.0, 2.1359969847467754e-05),
    (-4.0, 0.0035445535955093786),
    (-3.0, 0.08031955293933338),
    (-2.0, 0.41322414250511974),
    (-1.0, 0.8072142419992838),
    (0.0, 0.9693728283552626),
    (1.0, 0.9975054381493891),
    (2.0, 0.9998875536983092),
    (3.0, 0.9999970059566079),
    (4.0, 0.9999999504208787),
];

pub const TW_MEDIAN: f64 = -1.8049124089365722;

/// E[exp(−r/(G₁G₂))] for independent Gamma(a), Gamma(b), integrated on a
/// trapezoid grid in (log G₁, log G₂).
pub fn product_law_oracle(a: f64, b: f64, r: f64) -> f64 {
    let h = 0.01;
    let (lo, hi) = (-45.0, 6.0);
    let n = ((hi - lo) / h) as usize;
    let (ga, gb) = (lgpoly::specialfn::ln_gamma(a).unwrap(), lgpoly::specialfn::ln_gamma(b).unwrap());
    let mut s = 0.0;
    for p in 0..=n {
        let u = lo + p as f64 * h;
        let fu = a * u - u.exp() - ga;
        for q in 0..=n {
            let v = lo + q as f64 * h;
            s += (fu + b * v - v.exp() - gb - r * (-u - v).exp()).exp();
        }
    }
    s * h * h
}
