use henon_core::dynamics::*;
use henon_core::maps::{sm_field, InvParams, MapParams, SMParams};
use henon_core::orbit::multipliers_of;
use henon_core::sweep::SeedRule;
use henon_core::{Error, HenonMap, MapKind, State3};
use proptest::prelude::*;

/// Parameters of the period-6 attractor near the B = -1 degenerate orbit.
const SIX_PIECE: [f64; 3] = [0.3969093334897318, 0.21558555497602117, -0.990432];

#[test]
fn exponents_at_a_sink_are_log_multipliers() {
    let map = HenonMap::Forward(MapParams::new(0.1, 0.2, 0.3));
    let sink = fixed_points(&map)
        .into_iter()
        .find(|p| multipliers_of(&map.jacobian(p)).values.iter().all(|m| m.norm() < 1.0))
        .unwrap();
    let mut want: Vec<f64> = multipliers_of(&map.jacobian(&sink)).values.iter().map(|m| m.norm().ln()).collect();
    want.sort_by(|a, b| b.total_cmp(a));
    let r = lyapunov_spectrum(&map, &(sink + State3::repeat(1e-3)), 1000, MIN_SAMPLE * 10).unwrap();
    for (g, w) in r.exponents.iter().zip(&want) {
        assert!((g - w).abs() < 1e-3, "{:?} vs {want:?}", r.exponents);
    }
}

#[test]
fn chaotic_orbit_sum_is_log_det() {
    let map = HenonMap::Forward(MapParams::new(1.77, -0.925, -0.95));
    let x0 = SeedRule::default_for(MapKind::Forward).initial_state(&map).unwrap();
    let r = lyapunov_spectrum(&map, &x0, 10_000, 100_000).unwrap();
    assert!(r.is_complete());
    assert!((r.sum() - 0.95f64.ln()).abs() < 1e-6);
    assert!(r.exponents[0] > 0.0 && r.exponents[0] >= r.exponents[1] && r.exponents[1] >= r.exponents[2]);
}

#[test]
fn escaping_orbits_are_reported() {
    let map = HenonMap::Forward(MapParams::new(5.0, 0.0, 0.5));
    assert!(matches!(lyapunov_spectrum(&map, &State3::zeros(), 100, MIN_SAMPLE), Err(Error::Escaped(_))));
    let r = lyapunov_spectrum(&map, &State3::zeros(), 0, MIN_SAMPLE).unwrap();
    assert!(r.escaped_at.is_some() && !r.is_complete());
    assert!(lyapunov_spectrum(&map, &State3::zeros(), 0, 10).is_err());
}

#[test]
fn six_piece_attractor_components() {
    let map = HenonMap::Inverse(InvParams::new(SIX_PIECE[0], SIX_PIECE[1], SIX_PIECE[2]));
    let x0 = State3::new(1.1109087187819051, 0.5430803496704105, -0.018564282101437988) + State3::repeat(1e-3);
    let s = sample_attractor(&map, &x0, 10_000, 100_000, 6).unwrap();
    assert!(!s.escaped);
    assert_eq!(s.component_count, Some(6));
    assert_eq!(s.bounding_boxes.len(), 6);
    let s1 = sample_attractor(&map, &x0, 10_000, 100_000, 1).unwrap();
    assert_eq!(s1.component_count, None);
}

#[test]
fn tracker_counts_a_cycle() {
    let pts = [State3::new(0.0, 0.0, 0.0), State3::new(1.0, 0.0, 0.0), State3::new(2.0, 0.0, 0.0)];
    let mut t = ComponentTracker::new();
    for k in 0..300 {
        t.push(&(pts[k % 3] + State3::repeat(1e-3 * (k as f64 * 0.618_033_988_7).fract())));
    }
    assert_eq!(t.component_count(3), Some(3));
    assert_eq!(t.component_count(2), None);
    assert_eq!(t.component_count(1), None);
}

#[test]
fn sm_exponent_sum_is_divergence() {
    for (lam, alpha) in [(0.75, 0.45), (0.8, 0.4), (0.7, 0.5), (1.2, 0.2), (0.9, 0.35)] {
        let q = SMParams::new(lam, alpha);
        let r = sm_lyapunov(&q, &State3::new(0.1, 0.0, 0.0), 50.0, 200.0, DEFAULT_DT).unwrap();
        assert!((r.sum() + lam + alpha).abs() < 1e-3, "{lam} {alpha}: {:?}", r.exponents);
    }
}

#[test]
fn sm_lorenz_attractor_has_a_neutral_exponent() {
    let r = sm_lyapunov(&SMParams::new(0.75, 0.45), &State3::new(0.1, 0.0, 0.0), 100.0, 500.0, DEFAULT_DT).unwrap();
    assert!(r.exponents[0] > 0.02, "{:?}", r.exponents);
    assert!(r.exponents[1].abs() < 0.01, "{:?}", r.exponents);
}

#[test]
fn rk4_is_fourth_order() {
    let q = SMParams::new(0.75, 0.45);
    let x0 = State3::new(1.0, 0.5, 0.2);
    let end = |dt: f64| *sm_integrate(&q, &x0, 1.0, dt).unwrap().last().unwrap();
    let exact = end(1e-4);
    let e1 = (end(0.1) - exact).norm();
    let e2 = (end(0.05) - exact).norm();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn sm_equilibria_and_trajectory_length() {
    let q = SMParams::new(0.75, 0.45);
    let eq = q.equilibria().unwrap();
    for e in &eq {
        assert!(sm_field(e, &q).norm() < 1e-14);
        assert!((e.z - 1.0).abs() < 1e-14);
    }
    assert!((eq[0].x + eq[1].x).abs() < 1e-14);
    assert_eq!(sm_integrate(&q, &eq[0], 1.0, 0.01).unwrap().len(), 101);
    assert!(sm_integrate(&q, &eq[0], 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sum_is_log_det_on_bounded_orbits(m1 in -0.5..0.5f64, m2 in -0.5..0.5f64, b in 0.2..0.8f64, neg in any::<bool>()) {
        let b = if neg { -b } else { b };
        let map = HenonMap::Forward(MapParams::new(m1, m2, b));
        if let Ok(r) = lyapunov_spectrum(&map, &State3::repeat(0.1), 1000, MIN_SAMPLE) {
            if r.is_complete() {
                prop_assert!((r.sum() - b.abs().ln()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sm_orbits_are_mirror_symmetric(x in -1.0..1.0f64, y in -1.0..1.0f64, z in 0.0..1.0f64) {
        let q = SMParams::new(0.75, 0.45);
        let a = sm_integrate(&q, &State3::new(x, y, z), 2.0, 0.01).unwrap();
        let b = sm_integrate(&q, &State3::new(-x, -y, z), 2.0, 0.01).unwrap();
        for (p, m) in a.iter().zip(&b) {
            prop_assert!((p.x + m.x).abs() < 1e-12 && (p.y + m.y).abs() < 1e-12 && (p.z - m.z).abs() < 1e-12);
        }
    }
}
