use henon_core::maps::InvParams;
use henon_core::normal_form::*;
use henon_core::orbit::{solve_degenerate, DegenerateSolution};
use henon_core::verify::{REFERENCE_AB_BMINUS, REFERENCE_AB_BPLUS, REFERENCE_BMINUS, REFERENCE_BPLUS};
use henon_core::{HenonMap, MapKind};
use nalgebra::DVector;
use proptest::prelude::*;

fn solution(b: f64, reference: &[f64; 8]) -> DegenerateSolution {
    let guess: Vec<f64> = reference.iter().map(|v| v + 1e-3).collect();
    solve_degenerate(MapKind::Inverse, b, &guess).unwrap()
}

fn essential(c: &NormalFormCoeffs) -> [f64; 4] {
    [c.a, c.a1, c.b, c.b3]
}

#[test]
fn reference_orbits_are_lorenz_attractors() {
    for (b, reference, (a_ref, b_ref)) in
        [(-1.0, &REFERENCE_BMINUS, REFERENCE_AB_BMINUS), (1.0, &REFERENCE_BPLUS, REFERENCE_AB_BPLUS)]
    {
        let sol = solution(b, reference);
        assert!(sol.jordan_defect.unwrap() < 1e-6);
        let nf = normal_form_at(&sol.orbit.map, &sol.orbit.points[0], 6).unwrap();
        assert_eq!(nf.classification, Classification::LorenzAttractor);
        assert!(nf.coeffs.a < 0.0 && nf.coeffs.b < 0.0);
        assert!((nf.coeffs.a - a_ref).abs() < 1e-6 && (nf.coeffs.b - b_ref).abs() < 1e-4, "{:?}", nf.coeffs);
        assert!(nf.chart.jordan_defect < 1e-6);
    }
}

#[test]
fn classification_does_not_depend_on_base_point() {
    let sol = solution(-1.0, &REFERENCE_BMINUS);
    let first = normal_form_at(&sol.orbit.map, &sol.orbit.points[0], 6).unwrap();
    for p in &sol.orbit.points[1..] {
        let nf = normal_form_at(&sol.orbit.map, p, 6).unwrap();
        assert_eq!(nf.classification, first.classification);
    }
}

#[test]
fn rank_gap_of_homological_operator() {
    let sv = homological_singular_values();
    assert_eq!(sv.len(), 18);
    assert!(sv[HOMOLOGICAL_RANK - 1] > 0.1);
    assert!(sv.iter().skip(HOMOLOGICAL_RANK).all(|s| *s < 1e-12));
}

#[test]
fn generic_point_is_not_degenerate() {
    let map = HenonMap::Inverse(InvParams::new(0.3, 0.2, -1.0));
    assert!(normal_form_at(&map, &henon_core::State3::new(0.1, 0.2, 0.3), 1).is_err());
}

#[test]
fn classify_examples() {
    let mk = |a: f64, b: f64| NormalFormCoeffs { a, a1: 0.3, b, b1: 0.0, b2: 0.0, b3: -0.2 };
    assert_eq!(classify(&mk(-1.0, -1.0)), Classification::LorenzAttractor);
    assert_eq!(classify(&mk(2.0, 0.5)), Classification::LorenzAttractor);
    assert_eq!(classify(&mk(-1.0, 1.0)), Classification::LorenzRepeller);
    assert_eq!(classify(&mk(0.0, 1.0)), Classification::Degenerate);
    assert_eq!(classify(&mk(1e-6, 1e-6)), Classification::Degenerate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn removable_terms_do_not_change_coefficients(
        r in prop::array::uniform4(-2.0..2.0f64),
        h in prop::collection::vec(-1.0..1.0f64, 18),
    ) {
        let mut q = DVector::zeros(18);
        for (k, &slot) in ESSENTIAL.iter().enumerate() {
            let (i, m) = RESONANT[slot];
            q[6 * i + m] = r[k];
        }
        q += homological_operator(&normal_form_linear()) * DVector::from_vec(h);
        let got = reduce_quadratic(&q).unwrap();
        for (g, w) in essential(&got).iter().zip(r) {
            prop_assert!((g - w).abs() < 1e-8, "{:?} vs {:?}", got, r);
        }
    }

    #[test]
    fn chart_rescaling_follows_the_weight_law(sigma in 0.2..5.0f64, tau in 0.2..5.0f64, flip_s in any::<bool>(), flip_t in any::<bool>()) {
        let sigma = if flip_s { -sigma } else { sigma };
        let tau = if flip_t { -tau } else { tau };
        let sol = solution(1.0, &REFERENCE_BPLUS);
        let x0 = sol.orbit.points[0];
        let jet = iterate_jet2(&sol.orbit.map, &x0, 6).unwrap();
        let chart = NormalFormChart::build(&jet, x0).unwrap();
        let base = quadratic_reduce(&jet, &chart).unwrap();
        let got = quadratic_reduce(&jet, &chart.rescaled(sigma, tau)).unwrap();
        let want = [tau * base.a, tau * base.a1, sigma * sigma / tau * base.b, tau * base.b3];
        for (g, w) in essential(&got).iter().zip(want) {
            prop_assert!((g - w).abs() < 1e-7 * (1.0 + w.abs()));
        }
        prop_assert_eq!(classify(&got), classify(&base));
    }
}
