mod common;

use common::{airy, tracy_widom_airy, TW_FROZEN, TW_MEDIAN};
use lgpoly::asymptotics::*;
use lgpoly::specialfn::polygamma;
use lgpoly::Error;
use proptest::prelude::*;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[test]
fn airy_oracle_sanity() {
    // Ai(0) = 3^{-2/3}/Γ(2/3), Ai'(0) = −3^{-1/3}/Γ(1/3)
    let (a, ap) = airy(0.0);
    assert!((a - 0.355_028_053_887_817_2).abs() < 1e-14, "{a}");
    assert!((ap + 0.258_819_403_792_806_8).abs() < 1e-14, "{ap}");
    let (a, _) = airy(-4.0);
    assert!((a + 0.070_265_532_949_289_52).abs() < 1e-12, "{a}");
}

#[test]
fn airy_oracle_matches_frozen_values() {
    for (t, f) in TW_FROZEN {
        assert!((tracy_widom_airy(t) - f).abs() < 1e-11, "t={t}");
    }
}

#[test]
fn theta_c_symmetric_cases() {
    assert!((solve_theta_c(2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((solve_theta_c(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn theta_c_asymmetric() {
    let tc = solve_theta_c(2.0, 2.0).unwrap();
    assert!(tc > 0.0 && tc < 1.0);
    let res = polygamma(1, tc).unwrap() - 2.0 * polygamma(1, 2.0 - tc).unwrap();
    assert!(res.abs() <= 1e-12 * polygamma(1, tc).unwrap());
    // independent 256-step bisection written out here
    let g = |x: f64| polygamma(1, x).unwrap() - 2.0 * polygamma(1, 2.0 - x).unwrap();
    let (mut lo, mut hi) = (1e-300, 2.0 - 1e-15);
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    assert!((tc - lo).abs() < 1e-14);
    assert!(solve_theta_c(-1.0, 1.0).is_err());
}

#[test]
fn constants_at_theta_two() {
    let c = phase_constants(&AsymptoticConfig { theta: 2.0, theta0: 0.4, n: 10, m: 10 }).unwrap();
    assert!((c.f - 2.0 * EULER_GAMMA).abs() < 1e-14);
    // ψ″(1) = −2ζ(3), ζ(3) by direct summation with a tail correction
    let zeta3: f64 = (1..200_000).map(|k| 1.0 / (k as f64).powi(3)).sum::<f64>() + 0.5 / (200_000f64).powi(2);
    assert!((c.sigma - (2.0 * zeta3).cbrt()).abs() < 1e-12);
    let fb = -polygamma(0, 0.4).unwrap() - polygamma(0, 1.6).unwrap();
    assert!((c.f_bar.unwrap() - fb).abs() < 1e-15);
    // ψ(0.4), ψ(1.6) against frozen mpmath values
    assert!((polygamma(0, 0.4).unwrap() + 2.561_384_544_585_116).abs() < 1e-13);
    assert!((polygamma(0, 1.6).unwrap() - 0.126_047_452_773_476_33).abs() < 1e-13);
    let c = phase_constants(&AsymptoticConfig { theta: 2.0, theta0: 2.0, n: 10, m: 10 }).unwrap();
    assert!(c.f_bar.is_none());
    assert!(f_bar(2.0, 2.5, 1.0).is_err());
    assert!(phase_constants(&AsymptoticConfig { theta: 2.0, theta0: 1.0, n: 10, m: 5 }).is_err());
}

#[test]
fn sigma_positive_on_grid() {
    for theta in [0.5, 1.0, 2.0, 4.0] {
        for m in [10, 20, 50] {
            let c = phase_constants(&AsymptoticConfig { theta, theta0: theta, n: 10, m }).unwrap();
            assert!(c.sigma > 0.0 && c.sigma.is_finite());
        }
    }
}

#[test]
fn gue_matches_airy_oracle() {
    let spec = FredholmSpec::default();
    for t in [-4.0, -2.0, 0.0, 2.0] {
        let f = f_gue(t, &spec).unwrap();
        assert!((f - tracy_widom_airy(t)).abs() < 1e-10, "t={t}: {f}");
    }
    assert!((f_gue(TW_MEDIAN, &spec).unwrap() - 0.5).abs() < 1e-10);
    assert!((f_gue(10.0, &spec).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn gue_table_against_frozen() {
    let spec = FredholmSpec::default();
    let ts: Vec<f64> = TW_FROZEN.iter().map(|x| x.0).collect();
    let vals = tabulate(&ts, &[], &spec).unwrap();
    for ((t, f), v) in TW_FROZEN.iter().zip(vals) {
        assert!((v - f).abs() < 1e-10, "t={t}: {v} vs {f}");
    }
}

#[test]
fn gue_is_a_cdf_on_grid() {
    let spec = FredholmSpec { convergence_tol: None, ..FredholmSpec::default() };
    let ts = parse_t_grid("-6:4:0.1").unwrap();
    assert_eq!(ts.len(), 101);
    let v = tabulate(&ts, &[], &spec).unwrap();
    for k in 0..v.len() {
        assert!(v[k] >= -1e-12 && v[k] <= 1.0 + 1e-12);
        if k > 0 {
            assert!(v[k] >= v[k - 1] - 1e-12);
        }
    }
}

#[test]
fn bbp_empty_equals_gue() {
    let spec = FredholmSpec::default();
    for t in [-3.0, -1.0, 1.5] {
        assert_eq!(f_bbp(t, &[], &spec).unwrap(), f_gue(t, &spec).unwrap());
    }
}

#[test]
fn bbp_self_converges() {
    let base = FredholmSpec::default();
    let fine = FredholmSpec { nodes_per_leg: 256, leg_length: 12.0, convergence_tol: None, ..base };
    for b in [vec![0.0], vec![-1.0, -1.2], vec![-8.0]] {
        for t in [-4.0, -2.0, 0.0, 2.0] {
            let a = f_bbp(t, &b, &base).unwrap();
            let c = f_bbp(t, &b, &fine).unwrap();
            assert!((a - c).abs() < 1e-7, "b={b:?} t={t}");
            assert!((0.0..=1.0).contains(&a));
        }
    }
}

#[test]
fn bbp_approaches_gue_as_boundary_recedes() {
    let spec = FredholmSpec::default();
    let gue = f_gue(-2.0, &spec).unwrap();
    let gaps: Vec<f64> = [8.0, 32.0, 128.0].iter().map(|u| (f_bbp(-2.0, &[-u], &spec).unwrap() - gue).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    // the gap scales like 1/U
    assert!((gaps[0] / gaps[2] - 16.0).abs() < 1.0, "{gaps:?}");
    // a positive boundary shifts mass left
    assert!(f_bbp(0.0, &[0.0], &spec).unwrap() < f_gue(0.0, &spec).unwrap());
}

#[test]
fn bbp_contour_conflict_is_config_error() {
    let spec = FredholmSpec { c0: Some(-1.0), ..FredholmSpec::default() };
    assert!(matches!(f_bbp(0.0, &[0.0], &spec), Err(Error::Config(_))));
    assert!(parse_t_grid("1:0:0.1").is_err());
    assert!(parse_t_grid("0:1").is_err());
}

#[test]
fn under_resolved_contour_is_flagged() {
    let spec = FredholmSpec { nodes_per_leg: 24, ..FredholmSpec::default() };
    assert!(matches!(f_gue(-4.0, &spec), Err(Error::Accuracy(_))));
}

#[test]
fn gaussian_cdf_values() {
    assert_eq!(gaussian_cdf(0.0), 0.5);
    assert!((gaussian_cdf(8.0) - 1.0).abs() < 1e-14);
    assert!((gaussian_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
    assert!((gaussian_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_c_residual(theta in 0.1f64..6.0, p in 1.0f64..8.0) {
        let tc = solve_theta_c(theta, p).unwrap();
        prop_assert!(tc > 0.0 && tc < theta);
        let r = polygamma(1, tc).unwrap() - p * polygamma(1, theta - tc).unwrap();
        prop_assert!(r.abs() <= 1e-12 * polygamma(1, tc).unwrap());
    }
}
