use levy_multipoint::*;
use num_rational::Ratio;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

#[test]
fn dimension_examples() {
    for k in 2..8 {
        assert!((hausdorff_dim_r2::<f64>(2.0, 2.0, k).unwrap() - 2.0).abs() < 1e-15);
        assert!(beta_threshold_r2::<f64>(2.0, 2.0, k).unwrap().abs() < 1e-15);
    }
    assert!((hausdorff_dim_r2::<f64>(1.7, 1.7, 3).unwrap() - 1.1).abs() < 1e-12);
    assert!((hausdorff_dim_r2::<f64>(2.0, 1.0, 2).unwrap() - 1.0).abs() < 1e-15);
    assert!((hausdorff_dim_r2::<f64>(1.0, 1.0, 3).unwrap() + 1.0).abs() < 1e-15);
    assert!((beta_threshold_r2::<f64>(1.0, 1.0, 3).unwrap() - 3.0).abs() < 1e-15);
    assert_eq!(beta_threshold_r2(r(9, 5), r(6, 5), 2).unwrap(), r(14, 15));
    assert_eq!(hausdorff_dim_r2(r(9, 5), r(3, 2), 2).unwrap(), r(4, 3));
    assert!(matches!(hausdorff_dim_r2(1.0, 1.5, 2), Err(Error::Domain(_))));
    assert!(matches!(hausdorff_dim_r2(2.5, 1.5, 2), Err(Error::Domain(_))));
}

#[test]
fn existence_examples() {
    let a2 = SpectralProfile::from_alphas(&[r(4, 3), r(4, 3)], CaseLabel::A2).unwrap();
    let rep = exists_multiple(&a2, 3).unwrap();
    assert!(rep.exists && rep.boundary_case);
    assert_eq!(rep.dim_clamped, r(0, 1));
    assert_eq!(rep.dim_value, Some(r(0, 1)));

    let b3 = SpectralProfile::from_alphas(&[r(3, 2); 3], CaseLabel::B3).unwrap();
    let rep = exists_multiple(&b3, 2).unwrap();
    assert!(rep.exists && rep.boundary_case);
    assert_eq!(rep.source, Source::SpatialNilpotentThreshold);

    let b1 = SpectralProfile::from_alphas(&[2.0, 2.0, 2.0], CaseLabel::B1).unwrap();
    assert!(!exists_multiple(&b1, 3).unwrap().exists);
    let d4 = SpectralProfile::from_alphas(&[2.0; 4], CaseLabel::HigherDim).unwrap();
    let rep = exists_multiple(&d4, 2).unwrap();
    assert!(!rep.exists);
    assert_eq!(rep.source, Source::NoDoublePointsAboveThree);

    let a1 = SpectralProfile::from_alphas(&[1.8, 1.5], CaseLabel::A1Diag).unwrap();
    assert!(exists_multiple(&a1, 2).unwrap().exists);
    let d1 = SpectralProfile::from_alphas(&[1.5], CaseLabel::D1).unwrap();
    assert!(matches!(exists_multiple(&d1, 2), Err(Error::Unsupported(_))));
}

#[test]
fn float_boundary_from_a_classified_matrix() {
    let e = Exponent::new(&[vec![0.75, 0.0], vec![1.0, 0.75]], 2.0).unwrap();
    let p = classify_exponent(&e, 1e-8).unwrap();
    let rep = exists_multiple(&p, 3).unwrap();
    assert!(rep.exists && rep.boundary_case);
    assert_eq!(rep.dim_clamped, 0.0);
}

#[test]
fn exact_nilpotent_threshold_for_every_k() {
    for k in 3..10u32 {
        let t = r(2 * (k as i64 - 1), k as i64);
        let at = SpectralProfile::from_alphas(&[t, t], CaseLabel::A2).unwrap();
        let rep = exists_multiple(&at, k).unwrap();
        assert!(rep.exists && rep.boundary_case, "k = {k}");
        let below = t - r(1, 1000);
        let p = SpectralProfile::from_alphas(&[below, below], CaseLabel::A2).unwrap();
        assert!(!exists_multiple(&p, k).unwrap().exists);
    }
}

fn pair() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..=2.0, 0.0f64..=1.0).prop_map(|(a1, t)| (a1, 0.1 + t * (a1 - 0.1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn dimension_non_increasing_in_k((a1, a2) in pair(), k in 2u32..7) {
        let now = hausdorff_dim_r2(a1, a2, k).unwrap();
        let next = hausdorff_dim_r2(a1, a2, k + 1).unwrap();
        prop_assert!(next <= now + 1e-12);
    }

    #[test]
    fn min_max_duality((a1, a2) in pair(), k in 2u32..7) {
        let dim = hausdorff_dim_r2(a1, a2, k).unwrap();
        let beta = beta_threshold_r2(a1, a2, k).unwrap();
        prop_assert!((dim - (2.0 - beta)).abs() < 1e-12);
        let cd = dim.clamp(0.0, 2.0);
        let cb = beta.clamp(0.0, 2.0);
        prop_assert!((cd - (2.0 - cb)).abs() < 1e-12);
    }

    #[test]
    fn equal_indices_collapse(a in 0.1f64..=2.0, k in 2u32..7) {
        let kf = k as f64;
        prop_assert!((hausdorff_dim_r2(a, a, k).unwrap() - (kf * a - 2.0 * (kf - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn positive_dimension_means_existence((a1, a2) in pair(), k in 2u32..7, rot in any::<bool>()) {
        let label = if rot && a1 == a2 { CaseLabel::A1Rot } else { CaseLabel::A1Diag };
        let p = SpectralProfile::from_alphas(&[a1, a2], label).unwrap();
        let rep = exists_multiple(&p, k).unwrap();
        let dim = hausdorff_dim_r2(a1, a2, k).unwrap();
        if dim > 0.0 {
            prop_assert!(rep.exists);
        }
        if rep.exists {
            prop_assert!((rep.dim_clamped - dim.max(0.0)).abs() < 1e-15);
        } else {
            prop_assert_eq!(rep.dim_clamped, 0.0);
        }
        prop_assert!(!rep.boundary_case);
        // existence for k >= 3 follows the sign of the first term
        if k >= 3 {
            let (t1, _) = dimension_terms(a1, a2, k).unwrap();
            prop_assert_eq!(rep.exists, t1 > 0.0);
        }
    }

    #[test]
    fn rational_duality_is_exact(n1 in 1i64..=20, n2 in 1i64..=20, k in 2u32..7) {
        let (a1, a2) = if n1 >= n2 { (r(n1, 10), r(n2, 10)) } else { (r(n2, 10), r(n1, 10)) };
        let dim = hausdorff_dim_r2(a1, a2, k).unwrap();
        let beta = beta_threshold_r2(a1, a2, k).unwrap();
        prop_assert_eq!(dim, r(2, 1) - beta);
    }
}
