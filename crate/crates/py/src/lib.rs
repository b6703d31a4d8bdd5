//! Python module `henon3d`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use henon_core::dynamics::{self, fixed_points};
use henon_core::io;
use henon_core::maps::{self, BelyakovBlock};
use henon_core::normal_form::normal_form_at;
use henon_core::orbit::{self, multipliers_of, PeriodicOrbit};
use henon_core::sweep::{self, Axis, AxisRange, BallProbeSpec, SeedRule, SweepSpec};
use henon_core::verify::{run_verification, VerifyOptions};
use henon_core::{Error, MapKind, MapParams, SMParams, State3};

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::UnknownMap(_) | Error::UnsupportedMap(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn state(v: [f64; 3]) -> State3 {
    State3::new(v[0], v[1], v[2])
}

fn kind(s: &str) -> PyResult<MapKind> {
    s.parse().map_err(err)
}

/// A member of the 3D Henon family: `forward`, `inverse`, `orbit-flip` or `generic`.
#[pyclass(name = "HenonMap", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHenonMap {
    inner: maps::HenonMap,
}

#[pymethods]
impl PyHenonMap {
    #[new]
    #[pyo3(signature = (m1, m2, b, kind="forward"))]
    fn new(m1: f64, m2: f64, b: f64, kind: &str) -> PyResult<Self> {
        let inner = maps::HenonMap::from_triple(self::kind(kind)?, [m1, m2, b]);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn params(&self) -> [f64; 3] {
        self.inner.triple()
    }

    fn step(&self, x: [f64; 3]) -> [f64; 3] {
        let s = self.inner.step(&state(x));
        [s.x, s.y, s.z]
    }

    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let j = self.inner.jacobian(&state(x));
        [0, 1, 2].map(|r| [0, 1, 2].map(|c| j[(r, c)]))
    }

    fn det(&self) -> f64 {
        self.inner.det()
    }

    /// Real fixed points as dicts with `z` and `multipliers` (pairs re, im).
    fn fixed_points<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let pts: Vec<_> =
            fixed_points(&self.inner).into_iter().map(|p| (p, multipliers_of(&self.inner.jacobian(&p)))).collect();
        to_py(py, &io::fixed_points_json(&self.inner, &pts)["fixed_points"])
    }

    fn __repr__(&self) -> String {
        let [m1, m2, b] = self.inner.triple();
        format!("HenonMap({m1}, {m2}, {b}, kind='{}')", self.inner.kind().name())
    }
}

/// Periodic orbit by Newton from delay coordinates `guess`.
#[pyfunction]
fn find_periodic_orbit<'py>(py: Python<'py>, map: &PyHenonMap, guess: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let o = orbit::find_periodic_orbit(&map.inner, &guess).map_err(err)?;
    to_py(py, &io::orbit_json(&o))
}

/// Degenerate period-n orbit; `guess` is `z1..zn, M1, M2`.
#[pyfunction]
#[pyo3(signature = (b, guess, kind="inverse"))]
fn solve_degenerate<'py>(py: Python<'py>, b: f64, guess: Vec<f64>, kind: &str) -> PyResult<Bound<'py, PyAny>> {
    let s = orbit::solve_degenerate(self::kind(kind)?, b, &guess).map_err(err)?;
    let nf = normal_form_at(&s.orbit.map, &s.orbit.points[0], s.orbit.period()).ok();
    to_py(py, &io::degenerate_json(&s, nf.as_ref().map(|r| (&r.coeffs, r.classification))))
}

/// Multistart search over `[lo, hi]^(n+2)`.
#[pyfunction]
#[pyo3(signature = (period, b, n_seeds, lo=-2.0, hi=2.0, kind="inverse"))]
fn hunt_degenerate<'py>(
    py: Python<'py>,
    period: usize,
    b: f64,
    n_seeds: usize,
    lo: f64,
    hi: f64,
    kind: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let k = self::kind(kind)?;
    let h = py.detach(|| orbit::hunt_degenerate(k, b, &vec![(lo, hi); period + 2], n_seeds)).map_err(err)?;
    let nf: Vec<_> = h
        .solutions
        .iter()
        .map(|s| normal_form_at(&s.orbit.map, &s.orbit.points[0], period).ok().map(|r| (r.coeffs, r.classification)))
        .collect();
    to_py(py, &io::hunt_json(&h, &nf))
}

/// Quadratic normal-form coefficients of `F^n` at `x0`.
#[pyfunction]
fn normal_form<'py>(py: Python<'py>, map: &PyHenonMap, x0: [f64; 3], n: usize) -> PyResult<Bound<'py, PyAny>> {
    let r = normal_form_at(&map.inner, &state(x0), n).map_err(err)?;
    let mut v = serde_json::json!({
        "coeffs": io::coeffs_json(&r.coeffs),
        "classification": r.classification.name(),
        "jordan_defect": r.chart.jordan_defect,
    });
    v["basis"] = (0..3).map(|j| r.chart.basis.column(j).iter().copied().collect::<Vec<f64>>()).collect();
    to_py(py, &v)
}

/// Orbit points from delay coordinates `zs`.
#[pyfunction]
fn orbit_points(map: &PyHenonMap, zs: Vec<f64>) -> Vec<[f64; 3]> {
    PeriodicOrbit::from_delay(map.inner, &zs).points.iter().map(|p| [p.x, p.y, p.z]).collect()
}

#[pyfunction]
#[pyo3(signature = (map, x0, n_transient=dynamics::DEFAULT_TRANSIENT, n_sample=dynamics::DEFAULT_SAMPLE))]
fn lyapunov_spectrum<'py>(
    py: Python<'py>,
    map: &PyHenonMap,
    x0: [f64; 3],
    n_transient: usize,
    n_sample: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let m = map.inner;
    let r = py.detach(|| dynamics::lyapunov_spectrum(&m, &state(x0), n_transient, n_sample)).map_err(err)?;
    to_py(py, &io::lyapunov_json(Some(&m), &r))
}

/// Returns `(points, summary)`.
#[pyfunction]
#[pyo3(signature = (map, x0, n_transient, n_sample, expected_period=1))]
fn sample_attractor<'py>(
    py: Python<'py>,
    map: &PyHenonMap,
    x0: [f64; 3],
    n_transient: usize,
    n_sample: usize,
    expected_period: usize,
) -> PyResult<(Vec<[f64; 3]>, Bound<'py, PyAny>)> {
    let m = map.inner;
    let s = py
        .detach(|| dynamics::sample_attractor(&m, &state(x0), n_transient, n_sample, expected_period))
        .map_err(err)?;
    let pts = s.points.iter().map(|p| [p.x, p.y, p.z]).collect();
    Ok((pts, to_py(py, &io::attractor_json(&s))?))
}

#[pyfunction]
#[pyo3(signature = (lam, alpha, x0, t_transient=dynamics::DEFAULT_T_TRANSIENT, t_sample=dynamics::DEFAULT_T_SAMPLE, dt=dynamics::DEFAULT_DT))]
fn sm_lyapunov<'py>(
    py: Python<'py>,
    lam: f64,
    alpha: f64,
    x0: [f64; 3],
    t_transient: f64,
    t_sample: f64,
    dt: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let q = SMParams::new(lam, alpha);
    let r = py.detach(|| dynamics::sm_lyapunov(&q, &state(x0), t_transient, t_sample, dt)).map_err(err)?;
    to_py(py, &io::lyapunov_json(None, &r))
}

type SweepRow = (f64, f64, &'static str, Option<[f64; 3]>);

/// Rows `(axis1, axis2, class, exponents or None)`, row-major.
#[pyfunction]
#[pyo3(signature = (kind, fixed, axis1, axis2, n_transient=10_000, n_sample=100_000))]
fn run_sweep(
    py: Python<'_>,
    kind: &str,
    fixed: (String, f64),
    axis1: (String, f64, f64, usize),
    axis2: (String, f64, f64, usize),
    n_transient: usize,
    n_sample: usize,
) -> PyResult<Vec<SweepRow>> {
    let k = self::kind(kind)?;
    let axis = |name: &str| name.parse::<Axis>().map_err(err);
    let spec = SweepSpec {
        map: k,
        fixed: (axis(&fixed.0)?, fixed.1),
        axes: [
            AxisRange { axis: axis(&axis1.0)?, lo: axis1.1, hi: axis1.2, n: axis1.3 },
            AxisRange { axis: axis(&axis2.0)?, lo: axis2.1, hi: axis2.2, n: axis2.3 },
        ],
        n_transient,
        n_sample,
        seed: SeedRule::default_for(k),
    };
    let cells = py.detach(|| sweep::run_sweep(&spec)).map_err(err)?;
    Ok(cells.into_iter().map(|c| (c.axis1, c.axis2, c.class.name(), c.exponents)).collect())
}

/// Hits of a quasi-random parameter-ball probe, seeded near the orbit with
/// delay coordinates `seed_orbit` at the center.
#[pyfunction]
#[pyo3(signature = (center, radius, n_probes, seed_orbit, expected_period=6, n_transient=10_000, n_sample=100_000, kind="inverse"))]
#[allow(clippy::too_many_arguments)]
fn ball_probe<'py>(
    py: Python<'py>,
    center: [f64; 3],
    radius: f64,
    n_probes: usize,
    seed_orbit: Vec<f64>,
    expected_period: usize,
    n_transient: usize,
    n_sample: usize,
    kind: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let k = self::kind(kind)?;
    let seed = SeedRule::near_orbit(&maps::HenonMap::from_triple(k, center), &seed_orbit, 1e-3).map_err(err)?;
    let spec = BallProbeSpec { map: k, center, radius, n_probes, expected_period, n_transient, n_sample, seed };
    let hits = py.detach(|| sweep::ball_probe(&spec)).map_err(err)?;
    to_py(py, &io::ball_probe_json(&center, radius, n_probes, &hits))
}

#[pyfunction]
fn belyakov_power(lam: f64, mu2: f64, k: u32) -> PyResult<[[f64; 2]; 2]> {
    let m = maps::belyakov_power(&BelyakovBlock::new(lam, mu2).map_err(err)?, k);
    Ok([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

#[pyfunction]
fn inverse_conjugacy_defect(m1: f64, m2: f64, b: f64, x: [f64; 3]) -> PyResult<f64> {
    maps::inverse_conjugacy_defect(&MapParams::new(m1, m2, b), &state(x)).map_err(err)
}

/// `(M1, M2, B) -> (M1/B^2, -M2/B, 1/B)`.
#[pyfunction]
fn param_correspondence(m1: f64, m2: f64, b: f64) -> PyResult<[f64; 3]> {
    let q = maps::param_correspondence(&MapParams::new(m1, m2, b)).map_err(err)?;
    Ok([q.m1h, q.m2h, q.bh])
}

/// Runs the pinned verification suite; the dict has `pass` and `checks`.
#[pyfunction]
fn verify(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| run_verification(&VerifyOptions::default()));
    to_py(py, &r.to_json())
}

#[pymodule]
fn henon3d(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHenonMap>()?;
    m.add_function(wrap_pyfunction!(find_periodic_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(solve_degenerate, m)?)?;
    m.add_function(wrap_pyfunction!(hunt_degenerate, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_points, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sample_attractor, m)?)?;
    m.add_function(wrap_pyfunction!(sm_lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ball_probe, m)?)?;
    m.add_function(wrap_pyfunction!(belyakov_power, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_conjugacy_defect, m)?)?;
    m.add_function(wrap_pyfunction!(param_correspondence, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
