//! Parameter-plane scans and ball probes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, fixed_points, probe_orbit, unstable_direction, LyapunovResult};
use crate::error::{Error, Result};
use crate::maps::{HenonMap, MapKind, State3};
use crate::orbit::find_periodic_orbit;
use crate::quasi;

/// Exponent threshold separating the classes.
pub const CLASS_TOL: f64 = 1e-3;
pub const DEFAULT_SEED_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    M1,
    M2,
    B,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::M1 => 0,
            Axis::M2 => 1,
            Axis::B => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::M1 => "m1",
            Axis::M2 => "m2",
            Axis::B => "b",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(Axis::M1),
            "m2" => Ok(Axis::M2),
            "b" => Ok(Axis::B),
            other => Err(Error::InvalidParameter(format!("unknown axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    /// Number of grid values; 1 means `lo` only.
    pub n: usize,
}

impl AxisRange {
    pub fn value(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

/// How the initial condition of each run is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedRule {
    /// Real fixed point nearest `near_z`, displaced by `offset` along the
    /// most unstable eigendirection.
    FixedPoint {
        near_z: f64,
        offset: f64,
    },
    /// A periodic orbit continued from the delay-coordinate `guess`,
    /// displaced from its first point along the most unstable direction of
    /// the monodromy.
    Orbit {
        guess: Vec<f64>,
        offset: f64,
    },
    Point(State3),
}

impl SeedRule {
    /// Default rule: the fixed point nearest the degenerate one.
    pub fn default_for(kind: MapKind) -> Self {
        let near_z = match kind {
            MapKind::Inverse => -0.5,
            _ => 0.5,
        };
        SeedRule::FixedPoint { near_z, offset: DEFAULT_SEED_OFFSET }
    }

    /// Fixed seed at the first point of the period-`n` orbit through
    /// `guess` at `map`, displaced along its most unstable direction. Used
    /// to probe around a degenerate orbit, where continuation may fail on
    /// one side of the fold.
    pub fn near_orbit(map: &HenonMap, guess: &[f64], offset: f64) -> Result<Self> {
        let orbit = find_periodic_orbit(map, guess)?;
        Ok(SeedRule::Point(orbit.points[0] + unstable_direction(&orbit.monodromy()) * offset))
    }

    pub fn initial_state(&self, map: &HenonMap) -> Option<State3> {
        match self {
            SeedRule::Point(p) => Some(*p),
            SeedRule::FixedPoint { near_z, offset } => {
                let fp = fixed_points(map)
                    .into_iter()
                    .min_by(|a, b| (a.z - near_z).abs().total_cmp(&(b.z - near_z).abs()))?;
                Some(fp + unstable_direction(&map.jacobian(&fp)) * *offset)
            }
            SeedRule::Orbit { guess, offset } => {
                let orbit = find_periodic_orbit(map, guess).ok()?;
                let p0 = orbit.points[0];
                Some(p0 + unstable_direction(&orbit.monodromy()) * *offset)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub map: MapKind,
    pub fixed: (Axis, f64),
    pub axes: [AxisRange; 2],
    pub n_transient: usize,
    pub n_sample: usize,
    pub seed: SeedRule,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = &self.axes;
        if a.axis == b.axis || a.axis == self.fixed.0 || b.axis == self.fixed.0 {
            return Err(Error::InvalidParameter("sweep axes and fixed parameter must be distinct".into()));
        }
        for r in &self.axes {
            if !(r.lo.is_finite() && r.hi.is_finite()) || r.n == 0 {
                return Err(Error::InvalidParameter(format!("invalid range for axis {}", r.axis.name())));
            }
        }
        if !self.fixed.1.is_finite() {
            return Err(Error::InvalidParameter("fixed parameter must be finite".into()));
        }
        if self.n_sample < dynamics::MIN_SAMPLE {
            return Err(Error::InvalidParameter(format!("n_sample must be at least {}", dynamics::MIN_SAMPLE)));
        }
        Ok(())
    }

    pub fn triple(&self, i: usize, j: usize) -> [f64; 3] {
        let mut t = [0.0; 3];
        t[self.fixed.0.index()] = self.fixed.1;
        t[self.axes[0].axis.index()] = self.axes[0].value(i);
        t[self.axes[1].axis.index()] = self.axes[1].value(j);
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellClass {
    Escape,
    /// `lambda_1 < -tol`
    Periodic,
    /// `|lambda_1| <= tol`
    Neutral,
    Chaotic,
    /// chaotic with `lambda_1 + lambda_2 > tol`
    ChaoticPh,
}

impl CellClass {
    pub fn name(self) -> &'static str {
        match self {
            CellClass::Escape => "escape",
            CellClass::Periodic => "periodic",
            CellClass::Neutral => "neutral",
            CellClass::Chaotic => "chaotic",
            CellClass::ChaoticPh => "chaotic-ph",
        }
    }

    pub fn from_exponents(e: &[f64; 3]) -> Self {
        if e[0] < -CLASS_TOL {
            CellClass::Periodic
        } else if e[0] <= CLASS_TOL {
            CellClass::Neutral
        } else if e[0] + e[1] > CLASS_TOL {
            CellClass::ChaoticPh
        } else {
            CellClass::Chaotic
        }
    }
}

impl fmt::Display for CellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub class: CellClass,
    pub exponents: Option<[f64; 3]>,
    pub component_count: Option<usize>,
}

/// Classifies one parameter point from the seed rule.
pub fn classify_point(
    map: &HenonMap,
    seed: &SeedRule,
    n_transient: usize,
    n_sample: usize,
    expected_period: usize,
) -> Result<Classified> {
    let escape = Classified { class: CellClass::Escape, exponents: None, component_count: None };
    let Some(x0) = seed.initial_state(map) else {
        return Ok(escape);
    };
    match probe_orbit(map, &x0, n_transient, n_sample, expected_period) {
        Ok((lr, comps)) if lr.is_complete() => Ok(Classified {
            class: CellClass::from_exponents(&lr.exponents),
            exponents: Some(lr.exponents),
            component_count: comps,
        }),
        Ok(_) | Err(Error::Escaped(_)) => Ok(escape),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub axis1: f64,
    pub axis2: f64,
    pub class: CellClass,
    pub exponents: Option<[f64; 3]>,
}

/// Classifies every grid cell, row-major in `(axis1, axis2)`. Cells are
/// independent, so the result does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let (n1, n2) = (spec.axes[0].n, spec.axes[1].n);
    (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            let map = HenonMap::from_triple(spec.map, spec.triple(i, j));
            let c = if map.validate().is_err() {
                Classified { class: CellClass::Escape, exponents: None, component_count: None }
            } else {
                classify_point(&map, &spec.seed, spec.n_transient, spec.n_sample, 1)?
            };
            Ok(SweepCell {
                i,
                j,
                axis1: spec.axes[0].value(i),
                axis2: spec.axes[1].value(j),
                class: c.class,
                exponents: c.exponents,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeHit {
    pub index: usize,
    pub params: [f64; 3],
    pub lyapunov: LyapunovResult,
    pub component_count: usize,
}

#[derive(Debug, Clone)]
pub struct BallProbeSpec {
    pub map: MapKind,
    pub center: [f64; 3],
    pub radius: f64,
    pub n_probes: usize,
    pub expected_period: usize,
    pub n_transient: usize,
    pub n_sample: usize,
    pub seed: SeedRule,
}

/// Probes Halton points of the parameter ball (index 0 is the center) and
/// returns those carrying a pseudo-hyperbolic chaotic attractor with
/// `expected_period` cyclically permuted components.
pub fn ball_probe(spec: &BallProbeSpec) -> Result<Vec<ProbeHit>> {
    if !(spec.radius >= 0.0 && spec.radius.is_finite()) {
        return Err(Error::InvalidParameter("radius must be >= 0".into()));
    }
    let n = if spec.radius == 0.0 { spec.n_probes.min(1) } else { spec.n_probes };
    let hits: Vec<Option<ProbeHit>> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<Option<ProbeHit>> {
            let v = quasi::halton_in_ball(k as u64, &spec.center, spec.radius);
            let params = [v[0], v[1], v[2]];
            let map = HenonMap::from_triple(spec.map, params);
            if map.validate().is_err() {
                return Ok(None);
            }
            let Some(x0) = spec.seed.initial_state(&map) else {
                return Ok(None);
            };
            let (lr, comps) = match probe_orbit(&map, &x0, spec.n_transient, spec.n_sample, spec.expected_period) {
                Ok(r) => r,
                Err(Error::Escaped(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let e = lr.exponents;
            let hit =
                lr.is_complete() && e[0] > CLASS_TOL && e[0] + e[1] > CLASS_TOL && comps == Some(spec.expected_period);
            Ok(hit.then_some(ProbeHit { index: k, params, lyapunov: lr, component_count: spec.expected_period }))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_thresholds() {
        assert_eq!(CellClass::from_exponents(&[-0.1, -0.2, -0.3]), CellClass::Periodic);
        assert_eq!(CellClass::from_exponents(&[0.0005, -0.2, -0.3]), CellClass::Neutral);
        assert_eq!(CellClass::from_exponents(&[0.1, -0.2, -0.3]), CellClass::Chaotic);
        assert_eq!(CellClass::from_exponents(&[0.1, -0.05, -0.3]), CellClass::ChaoticPh);
    }

    #[test]
    fn axis_values() {
        let r = AxisRange { axis: Axis::M1, lo: 1.0, hi: 2.0, n: 3 };
        assert_eq!((r.value(0), r.value(1), r.value(2)), (1.0, 1.5, 2.0));
        let r = AxisRange { axis: Axis::M1, lo: 1.0, hi: 2.0, n: 1 };
        assert_eq!(r.value(0), 1.0);
    }

    #[test]
    fn repeated_axes_are_rejected() {
        let spec = SweepSpec {
            map: MapKind::Forward,
            fixed: (Axis::B, 0.5),
            axes: [
                AxisRange { axis: Axis::M1, lo: 0.0, hi: 1.0, n: 2 },
                AxisRange { axis: Axis::M1, lo: 0.0, hi: 1.0, n: 2 },
            ],
            n_transient: 10,
            n_sample: 10_000,
            seed: SeedRule::default_for(MapKind::Forward),
        };
        assert!(run_sweep(&spec).is_err());
    }
}
