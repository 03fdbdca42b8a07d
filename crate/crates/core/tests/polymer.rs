use lgpoly::polymer::*;
use lgpoly::specialfn::polygamma;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sum over all up-right paths from (1,1) to `end` by explicit enumeration.
fn brute_paths(d: &PolygonalDomain, log_w: &dyn Fn(usize, usize) -> f64, end: (usize, usize)) -> Vec<f64> {
    fn go(
        d: &PolygonalDomain,
        log_w: &dyn Fn(usize, usize) -> f64,
        end: (usize, usize),
        cur: (usize, usize),
        acc: f64,
        out: &mut Vec<f64>,
    ) {
        let acc = acc + log_w(cur.0, cur.1);
        if cur == end {
            out.push(acc);
            return;
        }
        if cur.0 < end.0 && d.contains(cur.0 + 1, cur.1) {
            go(d, log_w, end, (cur.0 + 1, cur.1), acc, out);
        }
        if cur.1 < end.1 && d.contains(cur.0, cur.1 + 1) {
            go(d, log_w, end, (cur.0, cur.1 + 1), acc, out);
        }
    }
    let mut out = Vec::new();
    go(d, log_w, end, (1, 1), 0.0, &mut out);
    out
}

fn brute_log_z(w: &WeightArray, ends: &[(usize, usize)]) -> f64 {
    let d = w.domain();
    let f = |i: usize, j: usize| w.log_w(i, j).unwrap();
    let terms: Vec<f64> = ends.iter().flat_map(|&e| brute_paths(d, &f, e)).collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn ones(d: &PolygonalDomain) -> WeightArray {
    WeightArray::new(d.clone(), vec![0.0; d.len()]).unwrap()
}

fn params(n: usize, m: usize) -> ParameterSet {
    ParameterSet::new(
        0.6,
        (0..n).map(|i| 0.9 + 0.17 * i as f64).collect(),
        (0..m).map(|k| 0.7 + 0.11 * k as f64).collect(),
    )
    .unwrap()
}

#[test]
fn trapezoid_one_zero_has_two_cells() {
    let d = build_domain(DomainKind::Trapezoid, 1, 0).unwrap();
    assert_eq!(d.cells().collect::<Vec<_>>(), vec![(1, 1), (1, 2)]);
}

#[test]
fn rectangle_cell_count() {
    assert_eq!(build_domain(DomainKind::Rectangle, 2, 3).unwrap().len(), 6);
}

#[test]
fn symmetric_union_two_zero() {
    let d = build_domain(DomainKind::SymmetricUnion, 2, 0).unwrap();
    let trap = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3)];
    let mut expected: Vec<(usize, usize)> = trap.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect();
    expected.sort();
    expected.dedup();
    let mut got: Vec<_> = d.cells().collect();
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(got.len(), 10);
    assert!(d.is_closed() && d.is_transpose_closed());
}

#[test]
fn invalid_sizes_rejected() {
    assert!(build_domain(DomainKind::Rectangle, 0, 3).is_err());
    assert!(build_domain(DomainKind::Trapezoid, 0, 1).is_err());
    assert!(PolygonalDomain::trapezoid_by_width(3, 2).is_err());
}

#[test]
fn octant_trapezoid_matches_shifted_convention() {
    let a = PolygonalDomain::trapezoid_by_width(3, 7).unwrap();
    let b = PolygonalDomain::trapezoid(3, 3).unwrap();
    assert_eq!(a.cells().collect::<Vec<_>>(), b.cells().collect::<Vec<_>>());
    let narrow = PolygonalDomain::trapezoid_by_width(2, 2).unwrap();
    assert_eq!(narrow.cells().collect::<Vec<_>>(), vec![(1, 1), (1, 2), (1, 3), (2, 2)]);
    assert_eq!(narrow.line_endpoints().unwrap(), vec![(1, 3), (2, 2)]);
}

#[test]
fn transpose_closure_only_for_symmetric_kind() {
    for kind in [DomainKind::Rectangle, DomainKind::Trapezoid, DomainKind::StationaryQuadrant] {
        let d = build_domain(kind, 2, 3).unwrap();
        assert!(!d.is_transpose_closed(), "{kind:?}");
    }
    assert!(build_domain(DomainKind::SymmetricUnion, 2, 3).unwrap().is_transpose_closed());
}

#[test]
fn parameter_validation_names_pair() {
    let e = ParameterSet::new(0.5, vec![1.0, -0.6], vec![]).unwrap_err().to_string();
    assert!(e.contains("alpha[2] + alpha_circ"), "{e}");
    let e = ParameterSet::new(2.0, vec![1.0, 0.3], vec![-0.5]).unwrap_err().to_string();
    assert!(e.contains("alpha[2] + beta[1]"), "{e}");
    let e = ParameterSet::new(2.0, vec![1.0, -0.4], vec![]).unwrap_err().to_string();
    assert!(e.contains("alpha[2] + alpha[2]"), "{e}");
}

#[test]
fn param_hal_diagonal_and_full_first_column() {
    let p = params(3, 2);
    let t = PolygonalDomain::trapezoid(3, 2).unwrap();
    let f = assign_parameters(&t, &Scheme::Hal { params: p.clone() }).unwrap();
    for i in 1..=3 {
        assert_eq!(f.theta(i, i), Some(p.alpha[i - 1] + p.alpha_circ));
    }
    let r = PolygonalDomain::rectangle(3, 6).unwrap();
    let g = assign_parameters(&r, &Scheme::Full { params: p.clone() }).unwrap();
    for i in 1..=3 {
        assert_eq!(g.theta(i, 1), Some(p.alpha[i - 1] + p.alpha_circ));
        assert_eq!(g.theta(i, 6), Some(p.alpha[i - 1] + p.beta[1]));
        assert_eq!(g.theta(i, 3), Some(p.alpha[i - 1] + p.alpha[1]));
    }
}

#[test]
fn param_hal_cell_classes_n6_m3() {
    let p = params(6, 3);
    let d = PolygonalDomain::trapezoid(6, 3).unwrap();
    let f = assign_parameters(&d, &Scheme::Hal { params: p.clone() }).unwrap();
    for (i, j) in d.cells() {
        let a = p.alpha[i - 1];
        let expect = if i == j {
            a + p.alpha_circ
        } else if j <= 6 {
            a + p.alpha[j - 1]
        } else if j <= 9 {
            a + p.beta[j - 7]
        } else {
            // reflected strip: column 2n+m+1−k carries α_k
            a + p.alpha[15 - j]
        };
        assert_eq!(f.theta(i, j), Some(expect), "cell ({i},{j})");
    }
    // the last cell of row 1 reflects α_1
    assert_eq!(f.theta(1, 15), Some(2.0 * p.alpha[0]));
}

#[test]
fn stationary_corner_is_unit() {
    let d = PolygonalDomain::stationary(3, 4).unwrap();
    let f = assign_parameters(&d, &Scheme::Stationary { theta: 2.0, theta0: 0.7 }).unwrap();
    assert!(f.is_unit(1, 1));
    assert_eq!(f.theta(2, 1), Some(0.7));
    assert!((f.theta(1, 3).unwrap() - 1.3).abs() < 1e-15);
    assert_eq!(f.theta(3, 3), Some(2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let w = sample_weights(&f, &mut rng).unwrap();
        assert_eq!(w.log_w(1, 1), Some(0.0));
    }
    assert!(assign_parameters(&d, &Scheme::Stationary { theta: 1.0, theta0: 1.5 }).is_err());
}

#[test]
fn scheme_domain_mismatch_rejected() {
    let r = PolygonalDomain::rectangle(2, 4).unwrap();
    assert!(assign_parameters(&r, &Scheme::Hal { params: params(2, 1) }).is_err());
    assert!(assign_parameters(&r, &Scheme::Full { params: params(2, 0) }).is_err());
}

#[test]
fn inverse_gamma_mean_of_reciprocal() {
    let d = PolygonalDomain::rectangle(1000, 1000).unwrap();
    let f = assign_parameters(&d, &Scheme::Homogeneous { theta: 3.0 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = sample_weights(&f, &mut rng).unwrap();
    let n = w.log_weights().len() as f64;
    let mean = w.log_weights().iter().map(|l| (-l).exp()).sum::<f64>() / n;
    // Var(Gamma(3)) = 3
    assert!((mean - 3.0).abs() < 3.0 * (3.0f64 / n).sqrt(), "{mean}");
}

#[test]
fn small_shape_log_moments() {
    // E[log Gamma(θ)] = ψ(θ), also for θ < 1 where the boosted sampler runs
    let theta = 0.3;
    let s = LogGammaSampler::new(theta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 400_000;
    let xs: Vec<f64> = (0..n).map(|_| s.sample_log(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = polygamma(1, theta).unwrap().sqrt();
    assert!((mean - polygamma(0, theta).unwrap()).abs() < 4.0 * sd / (n as f64).sqrt());
}

#[test]
fn large_shape_concentration() {
    // k·Gamma⁻¹(k+1) has mean 1 and variance 1/(k−1)
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut prev_var = f64::INFINITY;
    for k in [10.0, 100.0, 1000.0] {
        let s = LogGammaSampler::new(k + 1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| k * (-s.sample_log(&mut rng)).exp()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((m - 1.0).abs() < 5.0 * (v / xs.len() as f64).sqrt() + 1e-12);
        assert!(v < prev_var);
        assert!((v * (k - 1.0) - 1.0).abs() < 0.05, "k={k} v={v}");
        prev_var = v;
    }
}

#[test]
fn all_ones_point_to_point() {
    let d = PolygonalDomain::rectangle(2, 2).unwrap();
    let z = partition_point_to_point(&ones(&d), (2, 2)).unwrap();
    assert!((z.log_z.value() - 2.0).abs() < 1e-15);
    assert_eq!(z.path_count, Some(2));
    let d = PolygonalDomain::rectangle(2, 3).unwrap();
    let z = partition_point_to_point(&ones(&d), (2, 3)).unwrap();
    assert!((z.log_z.value() - 3.0).abs() < 1e-15);
    let d = PolygonalDomain::rectangle(1, 1).unwrap();
    let w = WeightArray::from_values(d, &[2.5]).unwrap();
    assert!((partition_point_to_point(&w, (1, 1)).unwrap().log_z.value() - 2.5).abs() < 1e-15);
    assert!(partition_point_to_point(&w, (2, 1)).is_err());
}

#[test]
fn point_to_line_examples() {
    let d = PolygonalDomain::trapezoid(1, 0).unwrap();
    let w = WeightArray::from_values(d, &[1.7, 0.4]).unwrap();
    assert!((partition_point_to_line(&w, 1, 0).unwrap().log_z.value() - 0.68).abs() < 1e-14);
    let d = PolygonalDomain::trapezoid(2, 0).unwrap();
    let z = partition_point_to_line(&ones(&d), 2, 0).unwrap();
    assert!((z.log_z.value() - 3.0).abs() < 1e-14);
    assert_eq!(z.path_count, Some(3));
    assert!(partition_point_to_line(&ones(&d), 2, 1).is_err());
    let r = PolygonalDomain::rectangle(2, 4).unwrap();
    assert!(partition_point_to_line(&ones(&r), 2, 0).is_err());
}

#[test]
fn point_to_line_dominates_first_endpoint() {
    let p = params(3, 1);
    let d = PolygonalDomain::trapezoid(3, 1).unwrap();
    let f = assign_parameters(&d, &Scheme::Hal { params: p }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let w = sample_weights(&f, &mut rng).unwrap();
        let line = partition_point_to_line(&w, 3, 1).unwrap().log_z.log_value;
        let first = partition_point_to_point(&w, (1, 7)).unwrap().log_z.log_value;
        assert!(line >= first);
    }
}

#[test]
fn symmetrized_examples() {
    let p = params(1, 0);
    let d = PolygonalDomain::symmetric_union(1, 0).unwrap();
    let f = assign_parameters(&d, &Scheme::Symmetrized { params: p }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = sample_weights(&f, &mut rng).unwrap();
    let z = partition_symmetrized(&w, 1, 0).unwrap().log_z.log_value;
    let expect = w.log_w(1, 1).unwrap() + w.log_w(1, 2).unwrap() + std::f64::consts::LN_2;
    assert!((z - expect).abs() < 1e-14);

    let d = PolygonalDomain::symmetric_union(2, 0).unwrap();
    let w = WeightArray::from_fn(d, |i, j| if i == j { 0.5 } else { 1.0 }).unwrap();
    assert!((partition_symmetrized(&w, 2, 0).unwrap().log_z.value() - 3.0).abs() < 1e-14);

    let d = PolygonalDomain::symmetric_union(2, 1).unwrap();
    let w = WeightArray::from_fn(d, |i, j| 1.0 + i as f64 * 0.1 + j as f64 * 0.3).unwrap();
    assert!(partition_symmetrized(&w, 2, 1).is_err());
}

fn symmetrize_from_trapezoid(w: &WeightArray, n: usize, m: usize) -> WeightArray {
    let d = PolygonalDomain::symmetric_union(n, m).unwrap();
    WeightArray::from_fn(d, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let v = w.log_w(a, b).unwrap().exp();
        if i == j {
            v / 2.0
        } else {
            v
        }
    })
    .unwrap()
}

#[test]
fn symmetrization_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=4 {
        for m in 0..=3 {
            let d = PolygonalDomain::trapezoid(n, m).unwrap();
            let f = assign_parameters(&d, &Scheme::Hal { params: params(n, m) }).unwrap();
            let w = sample_weights(&f, &mut rng).unwrap();
            let lhs = partition_point_to_line(&w, n, m).unwrap().log_z.log_value;
            let ws = symmetrize_from_trapezoid(&w, n, m);
            let rhs = partition_symmetrized(&ws, n, m).unwrap().log_z.log_value;
            assert!(((lhs - rhs) / lhs.abs().max(1.0)).abs() < 1e-12, "n={n} m={m}");
        }
    }
}

#[test]
fn symmetrized_sampler_law_matches_halving() {
    let d = PolygonalDomain::symmetric_union(2, 1).unwrap();
    let f = assign_parameters(&d, &Scheme::Symmetrized { params: params(2, 1) }).unwrap();
    assert!(f.diagonal_halving());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = sample_weights(&f, &mut rng).unwrap();
    assert!(w.is_symmetric());
}

#[test]
fn stationary_small_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z = partition_stationary(2.0, 0.5, 1, 1, &mut rng).unwrap();
    assert_eq!(z.log_z.log_value, 0.0);
    let d = PolygonalDomain::stationary(2, 1).unwrap();
    let f = assign_parameters(&d, &Scheme::Stationary { theta: 2.0, theta0: 0.5 }).unwrap();
    let w = sample_weights(&f, &mut rng).unwrap();
    let z = partition_point_to_point(&w, (2, 1)).unwrap();
    assert_eq!(z.log_z.log_value, w.log_w(2, 1).unwrap());
    assert!(partition_stationary(1.0, 1.0, 2, 2, &mut rng).is_err());
}

#[test]
fn fused_sampler_matches_materialized() {
    for model in [Model::full(&params(3, 2)).unwrap(), Model::trapezoid(&params(3, 2)).unwrap()] {
        for seed in 0..5 {
            let mut a = ChaCha8Rng::seed_from_u64(seed);
            let mut b = ChaCha8Rng::seed_from_u64(seed);
            let (_, z1) = model.sample_with_weights(&mut a).unwrap();
            let z2 = model.sample_log_z(&mut b);
            assert_eq!(z1, z2);
        }
    }
}

#[test]
fn octant_trapezoid_line_endpoints_lie_on_last_columns() {
    let d = PolygonalDomain::trapezoid_by_width(4, 9).unwrap();
    let ends = d.line_endpoints().unwrap();
    for &(i, j) in &ends {
        assert_eq!(j, 4 + 9 - i);
        assert_eq!(d.row(i).unwrap().1, j);
    }
}

#[test]
fn weight_csv_header() {
    let d = PolygonalDomain::rectangle(1, 2).unwrap();
    let w = WeightArray::from_values(d, &[1.0, 2.0]).unwrap();
    let mut buf = Vec::new();
    w.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("i,j,log_w\n1,1,"));
    assert_eq!(s.lines().count(), 3);
}

fn small_domains() -> Vec<PolygonalDomain> {
    let mut v = Vec::new();
    for n in 1..=3 {
        for m in 1..=4 {
            if n * m <= 12 {
                v.push(PolygonalDomain::rectangle(n, m).unwrap());
            }
        }
    }
    v.push(PolygonalDomain::trapezoid(1, 0).unwrap());
    v.push(PolygonalDomain::trapezoid(2, 0).unwrap());
    v.push(PolygonalDomain::trapezoid(2, 1).unwrap());
    v.push(PolygonalDomain::trapezoid(2, 2).unwrap());
    v.push(PolygonalDomain::symmetric_union(1, 0).unwrap());
    v.push(PolygonalDomain::symmetric_union(2, 0).unwrap());
    v.push(PolygonalDomain::symmetric_union(1, 2).unwrap());
    v.push(PolygonalDomain::young(&[4, 3, 3, 1]).unwrap());
    v.into_iter().filter(|d| d.len() <= 12).collect()
}

proptest! {
    #[test]
    fn dp_equals_brute_force(idx in 0usize..64, seed in any::<u64>()) {
        let ds = small_domains();
        let d = ds[idx % ds.len()].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = assign_parameters(&d, &Scheme::Homogeneous { theta: 1.3 }).unwrap();
        let w = sample_weights(&f, &mut rng).unwrap();
        let table = log_partition_table(&w);
        for (i, j) in d.cells() {
            let bf = brute_log_z(&w, &[(i, j)]);
            let dp = table[d.index(i, j).unwrap()];
            prop_assert!(((dp - bf) / bf.abs().max(1.0)).abs() < 1e-12);
        }
        if d.kind() == DomainKind::Trapezoid {
            let ends = d.line_endpoints().unwrap();
            let z = point_to_line_any(&w).unwrap();
            let bf = brute_log_z(&w, &ends);
            prop_assert!(((z.log_z.log_value - bf) / bf.abs().max(1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn increasing_a_weight_never_decreases_z(seed in any::<u64>(), bump in 0.0f64..3.0, cell in 0usize..20) {
        let d = PolygonalDomain::trapezoid(3, 1).unwrap();
        let f = assign_parameters(&d, &Scheme::Hal { params: params(3, 1) }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sample_weights(&f, &mut rng).unwrap();
        let mut lw = w.log_weights().to_vec();
        let k = cell % lw.len();
        lw[k] += bump;
        let w2 = WeightArray::new(d.clone(), lw).unwrap();
        let a = partition_point_to_line(&w, 3, 1).unwrap().log_z.log_value;
        let b = partition_point_to_line(&w2, 3, 1).unwrap().log_z.log_value;
        prop_assert!(b >= a);
    }
}
