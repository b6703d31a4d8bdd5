use henon_core::maps::*;
use henon_core::normal_form::iterate_jet2;
use henon_core::{HenonMap, MapKind};
use nalgebra::Matrix2;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn state() -> impl Strategy<Value = State3> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| State3::new(x, y, z))
}

fn nonzero_b() -> impl Strategy<Value = f64> {
    (0.25..2.0f64, any::<bool>()).prop_map(|(b, neg)| if neg { -b } else { b })
}

fn params() -> impl Strategy<Value = MapParams> {
    (coord(), coord(), nonzero_b()).prop_map(|(m1, m2, b)| MapParams::new(m1, m2, b))
}

#[test]
fn step_examples() {
    let p = MapParams::new(1.0, 0.5, -0.5);
    assert_eq!(henon3d_step(&State3::new(1.0, 2.0, 3.0), &p), State3::new(2.0, 3.0, -7.5));
    let h = State3::new(0.5, 0.5, 0.5);
    assert_eq!(henon3d_step(&h, &CODIM3_ORIENTABLE), h);
    let q = InvParams::new(-0.25, -1.0, 1.0);
    assert_eq!(henon3d_inv_step(&-h, &q), -h);
}

#[test]
fn correspondence_examples() {
    let q = param_correspondence(&CODIM3_ORIENTABLE).unwrap();
    assert_eq!((q.m1h, q.m2h, q.bh), (-0.25, -1.0, 1.0));
    let q = param_correspondence(&CODIM3_NONORIENTABLE).unwrap();
    assert_eq!((q.m1h, q.m2h, q.bh), (1.75, -1.0, -1.0));
    assert!(param_correspondence(&MapParams::new(1.0, 1.0, 0.0)).is_err());
}

#[test]
fn conjugacy_at_fixed_points_and_origin() {
    let h = State3::new(0.5, 0.5, 0.5);
    assert!(inverse_conjugacy_defect(&CODIM3_ORIENTABLE, &h).unwrap() < 1e-14);
    assert_eq!(inverse_conjugacy_defect(&MapParams::new(0.0, 0.0, 1.0), &State3::zeros()).unwrap(), 0.0);
}

#[test]
fn inverse_map_advances_reference_orbit() {
    let z = [1.1109087187819051, 0.5430803496704105, -0.018564282101437988, -1.0126053862814206];
    let q = InvParams::new(0.3974562084897318, 0.2271356235631268, -1.0);
    let next = henon3d_inv_step(&State3::new(z[0], z[1], z[2]), &q);
    assert!((next - State3::new(z[1], z[2], z[3])).amax() < 1e-12);
}

#[test]
fn belyakov_examples() {
    let blk = BelyakovBlock::new(0.5, 0.0).unwrap();
    assert!((belyakov_power(&blk, 3) - Matrix2::new(0.125, 0.75, 0.0, 0.125)).amax() < 1e-15);
    let blk = BelyakovBlock::new(0.5, 0.04).unwrap();
    assert!((belyakov_power(&blk, 2) - Matrix2::new(0.29, 1.0, 0.04, 0.29)).amax() < 1e-14);
    assert_eq!(belyakov_power(&blk, 0), Matrix2::identity());
    assert!((belyakov_power(&blk, 1) - blk.matrix()).amax() < 1e-15);
    assert!(BelyakovBlock::new(0.2, 0.05).is_err());
    assert!(BelyakovBlock::new(-0.5, 0.0).is_err());
}

#[test]
fn jet_hessian_slots() {
    let f = HenonMap::Forward(MapParams::new(0.3, 0.2, 0.7)).jet2(&State3::new(0.1, 0.2, 0.3));
    let i = HenonMap::Inverse(InvParams::new(0.3, 0.2, 0.7)).jet2(&State3::new(0.1, 0.2, 0.3));
    for c in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let want_f = if (c, j, k) == (2, 2, 2) { -2.0 } else { 0.0 };
                let want_i = if (c, j, k) == (2, 1, 1) { -2.0 } else { 0.0 };
                assert_eq!(f.hess[c][(j, k)], want_f);
                assert_eq!(i.hess[c][(j, k)], want_i);
            }
        }
    }
}

#[test]
fn sm_field_examples() {
    let q = SMParams::new(0.75, 0.45);
    assert_eq!(sm_field(&State3::zeros(), &q), State3::zeros());
    for e in q.equilibria().unwrap() {
        assert!(sm_field(&e, &q).amax() < 1e-15);
    }
}

proptest! {
    #[test]
    fn jacobian_determinant_is_b(p in params(), s in state()) {
        let f = HenonMap::Forward(p);
        prop_assert!((f.jacobian(&s).determinant() - p.b).abs() < 1e-14);
        let g = HenonMap::Inverse(InvParams::new(p.m1, p.m2, p.b));
        prop_assert!((g.jacobian(&s).determinant() - p.b).abs() < 1e-14);
    }

    #[test]
    fn conjugacy_defect_is_tiny(p in params(), s in state()) {
        prop_assert!(inverse_conjugacy_defect(&p, &s).unwrap() < 1e-12);
    }

    #[test]
    fn preimage_inverts_step(p in params(), s in state()) {
        let back = henon3d_preimage(&henon3d_step(&s, &p), &p);
        prop_assert!((back - s).amax() < 1e-11);
    }

    #[test]
    fn correspondence_is_an_involution(p in params()) {
        let q = param_correspondence(&p).unwrap();
        let r = param_correspondence(&MapParams::new(q.m1h, q.m2h, q.bh)).unwrap();
        prop_assert!((r.m1h - p.m1).abs() < 1e-12 && (r.m2h - p.m2).abs() < 1e-12 && (r.bh - p.b).abs() < 1e-12);
    }

    #[test]
    fn generic_limit_is_the_forward_map(p in params(), s in state()) {
        // generic coordinates (X1, X2, Y) hold (y, x, z)
        let g = limit_map_step(LimitVariant::Generic, &State3::new(s.y, s.x, s.z), &p);
        prop_assert_eq!(State3::new(g.y, g.x, g.z), henon3d_step(&s, &p));
    }

    #[test]
    fn orbit_flip_becomes_generic(p in params(), s in state()) {
        let flipped = MapParams::new(p.m1, -p.m2, p.b);
        let lhs = orbit_flip_to_generic(&limit_map_step(LimitVariant::OrbitFlip, &s, &p), &p);
        let rhs = limit_map_step(LimitVariant::Generic, &orbit_flip_to_generic(&s, &p), &flipped);
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn sm_field_is_equivariant(s in state(), lam in 0.1..2.0f64, alpha in 0.1..1.0f64) {
        let q = SMParams::new(lam, alpha);
        let a = sm_field(&State3::new(-s.x, -s.y, s.z), &q);
        let b = sm_field(&s, &q);
        prop_assert_eq!(a, State3::new(-b.x, -b.y, b.z));
    }

    #[test]
    fn hessians_are_symmetric(p in params(), s in state(), n in 1usize..4) {
        let jet = iterate_jet2(&HenonMap::Forward(p), &(s * 0.3), n);
        if let Ok(jet) = jet {
            for h in &jet.hess {
                prop_assert!((h - h.transpose()).amax() <= 1e-12 * (1.0 + h.amax()));
            }
        }
    }

    #[test]
    fn composed_jet_matches_finite_differences(p in params(), s in state()) {
        let map = HenonMap::Forward(p);
        let s = s * 0.5;
        let jet = iterate_jet2(&map, &s, 2).unwrap();
        let f2 = |x: &State3| map.step(&map.step(x));
        let h = 1e-4;
        for j in 0..3 {
            let mut e = State3::zeros();
            e[j] = h;
            let fd = (f2(&(s + e)) - f2(&(s - e))) / (2.0 * h);
            prop_assert!((jet.jac.column(j) - fd).amax() < 1e-6);
            for k in 0..3 {
                let mut d = State3::zeros();
                d[k] = h;
                let fd2 = (f2(&(s + e + d)) - f2(&(s + e - d)) - f2(&(s - e + d)) + f2(&(s - e - d))) / (4.0 * h * h);
                for c in 0..3 {
                    prop_assert!((jet.hess[c][(j, k)] - fd2[c]).abs() < 1e-6, "c={} j={} k={}", c, j, k);
                }
            }
        }
    }

    #[test]
    fn belyakov_matches_direct_product(lambda in 0.3..1.0f64, frac in -0.9..0.9f64, k in 1u32..=50) {
        let blk = BelyakovBlock::new(lambda, frac * lambda * lambda).unwrap();
        let direct = (1..k).fold(blk.matrix(), |m, _| m * blk.matrix());
        let closed = belyakov_power(&blk, k);
        prop_assert!((closed - direct).amax() <= 1e-10 * direct.amax());
    }

    #[test]
    fn belyakov_is_continuous_at_zero(lambda in 0.3..1.0f64, k in 1u32..=50) {
        let lo = belyakov_power(&BelyakovBlock::new(lambda, -1e-10).unwrap(), k);
        let mid = belyakov_power(&BelyakovBlock::new(lambda, 0.0).unwrap(), k);
        let hi = belyakov_power(&BelyakovBlock::new(lambda, 1e-10).unwrap(), k);
        let scale = 1.0f64.max(mid.amax());
        prop_assert!((lo - hi).amax() < 1e-6 * scale && (lo - mid).amax() < 1e-6 * scale);
    }
}

#[test]
fn kind_names_round_trip() {
    for k in [MapKind::Forward, MapKind::Inverse, MapKind::OrbitFlip, MapKind::Generic] {
        assert_eq!(k.name().parse::<MapKind>().unwrap(), k);
    }
    assert!("henon".parse::<MapKind>().is_err());
}
