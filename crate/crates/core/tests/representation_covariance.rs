use projmetric::linalg::Matrix;
use projmetric::representation::{classify_rep, compute_rep, RepKind};
use projmetric::sampling::sample_points;
use projmetric::scenarios::{build_levi_civita_family, LeviCivitaSpec};
use proptest::prelude::*;

fn eigenvalues(m: &Matrix<f64>) -> (f64, f64, f64) {
    // (trace, det, discriminant) determine the 2×2 spectrum
    let (t, d) = (m.trace(), m.det());
    (t, d, t * t - 4.0 * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rep_conjugates_under_basis_change(entries in prop::collection::vec(-2.0..2.0f64, 4)) {
        let b = Matrix::from_rows(&[vec![entries[0], entries[1]], vec![entries[2], entries[3]]]);
        prop_assume!(b.det().abs() > 0.2);
        let s = build_levi_civita_family(&LeviCivitaSpec::new(3)).unwrap();
        let pts = sample_points(&s.chart, &s.sampling.with_count(40));
        let basis = s.sol_basis.as_ref().unwrap();
        let changed = basis.transformed(&b);
        let binv = b.inverse().unwrap();
        for m in &s.maps {
            let a = compute_rep(&m.map, basis, &pts).unwrap();
            let a2 = compute_rep(&m.map, &changed, &pts).unwrap();
            let expected = &(&b * &a.matrix()) * &binv;
            let scale = expected.max_abs().max(1.0);
            prop_assert!((&a2.matrix() - &expected).max_abs() <= 1e-8 * scale, "{}: {:?} vs {:?}", m.map.label(), a2.matrix(), expected);
            let (t1, d1, q1) = eigenvalues(&a.matrix());
            let (t2, d2, q2) = eigenvalues(&a2.matrix());
            prop_assert!((t1 - t2).abs() <= 1e-8 * scale && (d1 - d2).abs() <= 1e-8 * scale * scale);
            prop_assert!((q1 - q2).abs() <= 1e-8 * scale * scale);
            let (k1, k2) = (classify_rep(&a, 1e-6).kind, classify_rep(&a2, 1e-6).kind);
            prop_assert_eq!(k1, k2);
            prop_assert!(matches!(k1, RepKind::ReflectionType | RepKind::Identity));
        }
    }
}
