use lgpoly::specialfn::ln_gamma;
use lgpoly::whittaker::*;
use lgpoly::Error;

/// K_ν(z) = ∫₀^∞ exp(−z cosh t) cosh(νt) dt by the trapezoid rule.
fn bessel_k(nu: f64, z: f64) -> f64 {
    let h = 1e-3;
    let mut s = 0.5 * (-z).exp();
    let mut t: f64 = h;
    loop {
        let term = (-z * t.cosh()).exp() * (nu * t).cosh();
        s += term;
        if term < 1e-30 * s || t > 50.0 {
            break;
        }
        t += h;
    }
    s * h
}

/// ∫_R exp(f(u)) du by the trapezoid rule on a wide window.
fn trapezoid_r(f: impl Fn(f64) -> f64) -> f64 {
    let h = 2e-3;
    let mut s = 0.0;
    let mut u = -60.0;
    while u <= 60.0 {
        s += f(u).exp();
        u += h;
    }
    s * h
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn bessel_oracle_sanity() {
    // K_{1/2}(z) = √(π/(2z)) e^{−z}
    let z = 1.3;
    let exact = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
    assert!(rel(bessel_k(0.5, z), exact) < 1e-12);
}

#[test]
fn gl1_is_a_power() {
    let v = whittaker_gl(&[0.7], &[2.5], &QuadratureSpec::default()).unwrap();
    assert!(rel(v.value.value(), 2.5f64.powf(0.7)) < 1e-15);
    assert_eq!(v.dims, 0);
}

#[test]
fn gl2_matches_bessel_reduction() {
    let spec = QuadratureSpec::tensor(96);
    for (alpha, x) in [([0.3, -0.4], [1.0, 2.0]), ([1.1, 0.2], [0.4, 3.0]), ([0.0, 0.0], [5.0, 0.5])] {
        let v = whittaker_gl(&alpha, &x, &spec).unwrap();
        let c = (x[1] / x[0]).sqrt();
        let exact = 2.0 * (x[0] * x[1]).powf(0.5 * (alpha[0] + alpha[1])) * bessel_k(alpha[0] - alpha[1], 2.0 * c);
        assert!(rel(v.value.value(), exact) < 1e-6, "{alpha:?} {x:?}");
        assert!(v.rel_error < 1e-4);
    }
}

#[test]
fn gl2_translation() {
    let spec = QuadratureSpec::tensor(96);
    let x = [0.8, 1.9];
    let c = 0.7;
    let a = whittaker_gl(&[0.4, -0.2], &x, &spec).unwrap();
    let b = whittaker_gl(&[0.4 + c, -0.2 + c], &x, &spec).unwrap();
    let ratio = (b.value.log_value - a.value.log_value).exp();
    assert!(rel(ratio, (x[0] * x[1]).powf(c)) < 1e-6);
}

#[test]
fn gl3_converges() {
    let a = whittaker_gl(&[0.2, 0.5, -0.3], &[1.0, 1.5, 0.7], &QuadratureSpec::tensor(32)).unwrap();
    let b = whittaker_gl(&[0.2, 0.5, -0.3], &[1.0, 1.5, 0.7], &QuadratureSpec::tensor(64)).unwrap();
    assert!(rel(a.value.value(), b.value.value()) < 1e-3);
    assert!(b.rel_error < 1e-3);
}

#[test]
fn so3_matches_bessel_and_is_even() {
    let spec = QuadratureSpec::tensor(96);
    for (alpha, x) in [(0.3, 1.0), (0.8, 0.5), (-0.6, 4.0)] {
        let v = whittaker_so(&[alpha], &[x], &spec).unwrap();
        let exact = 2.0 * bessel_k(2.0 * alpha, 2.0 / x.sqrt());
        assert!(rel(v.value.value(), exact) < 1e-8, "{alpha} {x}");
        let w = whittaker_so(&[-alpha], &[x], &spec).unwrap();
        assert!(rel(v.value.value(), w.value.value()) < 1e-8);
    }
}

#[test]
fn so5_positive_and_converging() {
    let coarse = |n| QuadratureSpec { max_panel_width: f64::INFINITY, ..QuadratureSpec::tensor(n) };
    for x in [[0.5, 2.0], [1.0, 1.0], [3.0, 0.2]] {
        let a = whittaker_so(&[0.3, 0.1], &x, &coarse(24)).unwrap();
        let b = whittaker_so(&[0.3, 0.1], &x, &coarse(40)).unwrap();
        assert!(a.value.value() > 0.0 && a.value.value().is_finite());
        assert!(rel(a.value.value(), b.value.value()) < 1e-3, "{x:?}");
    }
}

#[test]
fn t_function_closed_forms() {
    let q = TFunctionQuery { alpha_circ: 1.0, beta: vec![], r: 1.0, x: vec![2.0, 3.0] };
    let v = t_function(&q, &QuadratureSpec::default()).unwrap();
    assert!(rel(v.value.value(), 1.5 * (-2.0f64).exp()) < 1e-15);
    let q = TFunctionQuery { alpha_circ: 0.6, beta: vec![], r: 2.0, x: vec![0.7] };
    let v = t_function(&q, &QuadratureSpec::default()).unwrap();
    assert!(rel(v.value.value(), 1.4f64.powf(0.6) * (-1.4f64).exp()) < 1e-14);
}

#[test]
fn t_function_one_by_one_matches_direct_quadrature() {
    let (ac, b, r, x) = (0.4, 0.9, 1.3, 0.8);
    let q = TFunctionQuery { alpha_circ: ac, beta: vec![b], r, x: vec![x] };
    let v = t_function(&q, &QuadratureSpec::tensor(96)).unwrap();
    let oracle = trapezoid_r(|u| ac * (r.ln() + u) + b * (x.ln() - u) - r * u.exp() - x * (-u).exp());
    assert!(rel(v.value.value(), oracle) < 1e-10);
}

#[test]
fn stade_n1() {
    let p = TransformParams { alpha: vec![1.2], alpha_circ: 0.5, beta: vec![], r: 1.0, mu: 0.0, lambda: vec![] };
    let rep = verify_transform(TransformIdentity::Stade, &p, &QuadratureSpec::tensor(128), 1e-8).unwrap();
    assert!(rel(rep.rhs, ln_gamma(1.7).unwrap().exp()) < 1e-14);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn stade_n2() {
    let p = TransformParams { alpha: vec![0.8, 1.1], alpha_circ: 0.6, beta: vec![], r: 2.0, mu: 0.0, lambda: vec![] };
    let rep = verify_transform(TransformIdentity::Stade, &p, &QuadratureSpec::tensor(64), 1e-3).unwrap();
    let rhs = 2.0f64.powf(-1.9) * (ln_gamma(1.4).unwrap() + ln_gamma(1.7).unwrap() + ln_gamma(1.9).unwrap()).exp();
    assert!(rel(rep.rhs, rhs) < 1e-13);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn t_transform_one_one() {
    let p = TransformParams { alpha: vec![1.0], alpha_circ: 0.4, beta: vec![0.9], r: 1.0, mu: 0.0, lambda: vec![] };
    let rep = verify_transform(TransformIdentity::TTransform, &p, &QuadratureSpec::tensor(96), 1e-3).unwrap();
    assert!(rel(rep.rhs, (ln_gamma(1.4).unwrap() + ln_gamma(1.9).unwrap()).exp()) < 1e-14);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn so_transform_slice() {
    let p = TransformParams { alpha: vec![0.3], alpha_circ: 0.0, beta: vec![], r: 1.0, mu: 1.0, lambda: vec![] };
    let rep = verify_transform(TransformIdentity::SoTransform, &p, &QuadratureSpec::tensor(96), 1e-3).unwrap();
    assert!(rep.pass, "{rep:?}");
    let bad = TransformParams { mu: 0.2, ..p };
    assert!(matches!(
        verify_transform(TransformIdentity::SoTransform, &bad, &QuadratureSpec::default(), 1e-3),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn dimension_caps_are_errors() {
    let spec = QuadratureSpec::default();
    assert!(matches!(whittaker_gl(&[0.1; 4], &[1.0; 4], &spec), Err(Error::Capability(_))));
    assert!(matches!(whittaker_so(&[0.1; 3], &[1.0; 3], &spec), Err(Error::Capability(_))));
    let q = TFunctionQuery { alpha_circ: 0.5, beta: vec![0.5; 3], r: 1.0, x: vec![1.0, 1.0] };
    assert!(matches!(t_function(&q, &spec), Err(Error::Capability(_))));
    let p =
        TransformParams { alpha: vec![1.0, 1.2], alpha_circ: 0.4, beta: vec![0.9], r: 1.0, mu: 0.0, lambda: vec![] };
    assert!(matches!(verify_transform(TransformIdentity::TTransform, &p, &spec, 1e-3), Err(Error::Capability(_))));
}

#[test]
fn methods_agree() {
    let alpha = [0.5, -0.1];
    let x = [1.2, 0.9];
    let t = whittaker_gl(&alpha, &x, &QuadratureSpec::tensor(64)).unwrap();
    let it =
        whittaker_gl(&alpha, &x, &QuadratureSpec { method: QuadratureMethod::Iterated1d, ..QuadratureSpec::default() })
            .unwrap();
    assert!(rel(t.value.value(), it.value.value()) < 1e-8);
    let mc = whittaker_gl(
        &alpha,
        &x,
        &QuadratureSpec {
            method: QuadratureMethod::MonteCarlo,
            mc_samples: 200_000,
            seed: 3,
            ..QuadratureSpec::default()
        },
    )
    .unwrap();
    assert!(rel(mc.value.value(), t.value.value()) < 5.0 * mc.rel_error + 1e-12);
}

#[test]
fn doubling_nodes_stays_within_estimate() {
    let alpha = [0.8, 1.1];
    let x = [0.6, 1.7];
    for nodes in [32, 64] {
        let a = whittaker_gl(&alpha, &x, &QuadratureSpec::tensor(nodes)).unwrap();
        let b = whittaker_gl(&alpha, &x, &QuadratureSpec::tensor(2 * nodes)).unwrap();
        assert!(rel(a.value.value(), b.value.value()) <= a.rel_error.max(1e-14));
    }
}

#[test]
fn bad_spec_rejected() {
    let spec = QuadratureSpec { nodes_per_dim: 4, ..QuadratureSpec::default() };
    assert!(whittaker_gl(&[0.1, 0.2], &[1.0, 1.0], &spec).is_err());
    assert!(whittaker_gl(&[0.1, 0.2], &[1.0, -1.0], &QuadratureSpec::default()).is_err());
}
