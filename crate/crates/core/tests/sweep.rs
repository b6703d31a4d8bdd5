use henon_core::dynamics::MIN_SAMPLE;
use henon_core::maps::InvParams;
use henon_core::sweep::*;
use henon_core::verify::REFERENCE_BMINUS;
use henon_core::{HenonMap, MapKind};

fn forward_spec(n: usize) -> SweepSpec {
    SweepSpec {
        map: MapKind::Forward,
        fixed: (Axis::B, -0.95),
        axes: [
            AxisRange { axis: Axis::M1, lo: 1.6, hi: 1.8, n },
            AxisRange { axis: Axis::M2, lo: -0.95, hi: -0.85, n },
        ],
        n_transient: 1000,
        n_sample: MIN_SAMPLE,
        seed: SeedRule::default_for(MapKind::Forward),
    }
}

fn reference_map() -> HenonMap {
    HenonMap::Inverse(InvParams::new(REFERENCE_BMINUS[6], REFERENCE_BMINUS[7], -1.0))
}

fn probe_spec(center: [f64; 3], radius: f64, n_probes: usize) -> BallProbeSpec {
    BallProbeSpec {
        map: MapKind::Inverse,
        center,
        radius,
        n_probes,
        expected_period: 6,
        n_transient: 10_000,
        n_sample: 100_000,
        seed: SeedRule::near_orbit(&reference_map(), &REFERENCE_BMINUS[..6], DEFAULT_SEED_OFFSET).unwrap(),
    }
}

#[test]
fn single_cell_matches_direct_classification() {
    let spec = forward_spec(1);
    let cells = run_sweep(&spec).unwrap();
    assert_eq!(cells.len(), 1);
    let map = HenonMap::from_triple(MapKind::Forward, spec.triple(0, 0));
    let direct = classify_point(&map, &spec.seed, spec.n_transient, spec.n_sample, 1).unwrap();
    assert_eq!(cells[0].class, direct.class);
    assert_eq!(cells[0].exponents, direct.exponents);
    assert_eq!((cells[0].axis1, cells[0].axis2), (1.6, -0.95));
}

#[test]
fn sweep_is_row_major_and_thread_independent() {
    let spec = forward_spec(3);
    let run = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| run_sweep(&spec).unwrap());
    let one = run(1);
    assert_eq!(one.iter().map(|c| (c.i, c.j)).collect::<Vec<_>>(), (0..9).map(|k| (k / 3, k % 3)).collect::<Vec<_>>());
    for n in [2, 8] {
        assert_eq!(run(n), one);
    }
}

#[test]
fn escape_cells_have_no_exponents() {
    let mut spec = forward_spec(2);
    spec.axes[0] = AxisRange { axis: Axis::M1, lo: 6.0, hi: 8.0, n: 2 };
    for c in run_sweep(&spec).unwrap() {
        assert_eq!(c.class, CellClass::Escape);
        assert!(c.exponents.is_none());
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = forward_spec(2);
    spec.axes[1].axis = Axis::M1;
    assert!(run_sweep(&spec).is_err());
    let mut spec = forward_spec(0);
    spec.axes[0].n = 2;
    assert!(run_sweep(&spec).is_err());
    let mut spec = forward_spec(2);
    spec.n_sample = 10;
    assert!(run_sweep(&spec).is_err());
    assert!(ball_probe(&probe_spec([0.4, 0.2, -1.0], -1.0, 5)).is_err());
}

#[test]
fn zero_radius_probes_only_the_center() {
    let center = [0.3969093334897318, 0.21558555497602117, -0.990432];
    let hits = ball_probe(&probe_spec(center, 0.0, 50)).unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].index, 0);
    assert_eq!(hits[0].params, center);
}

#[test]
fn probe_hits_are_stable() {
    let c: Vec<f64> = REFERENCE_BMINUS[6..].iter().copied().chain([-1.0]).collect();
    let spec = probe_spec([c[0], c[1], c[2]], 0.02, 120);
    let hits = ball_probe(&spec).unwrap();
    assert!(!hits.is_empty());
    for h in &hits {
        let map = HenonMap::from_triple(MapKind::Inverse, h.params);
        let again = classify_point(&map, &spec.seed, spec.n_transient, 2 * spec.n_sample, 6).unwrap();
        assert_eq!(again.class, CellClass::ChaoticPh, "{:?}", h.params);
        assert_eq!(again.component_count, Some(6));
        assert_eq!(h.component_count, 6);
    }
}
