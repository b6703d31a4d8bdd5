//! Periodic orbits of the delay-form maps, their multipliers, and the
//! search for orbits whose monodromy has multipliers `(-1, -1, +1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{HenonMap, MapKind, Mat3, State3};
use crate::newton::{self, NewtonOptions};
use crate::normal_form;
use crate::quasi;

/// Periods above this are outside the supported range.
pub const MAX_PERIOD: usize = 24;
/// Tolerance used to decide whether an orbit repeats with a proper divisor of its period.
pub const MINIMALITY_TOL: f64 = 1e-8;
/// Coarser minimality tolerance for degenerate solutions, whose defining
/// system is singular next to a shorter orbit with multiplier -1.
pub const DEGENERATE_MINIMALITY_TOL: f64 = 1e-4;
/// Sup-norm distance under which two degenerate solutions are identified.
pub const DEDUP_TOL: f64 = 1e-6;
/// Finite-difference step for the spectral rows of the degenerate system.
pub const SPECTRAL_FD_STEP: f64 = 1e-7;

/// Eigenvalues of a 3x3 matrix, sorted by descending modulus then by argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub values: [Complex64; 3],
}

impl Multipliers {
    pub fn product(&self) -> Complex64 {
        self.values.iter().product()
    }

    /// Largest distance from the multiset `{-1, -1, +1}` after pairing the
    /// root nearest `+1` with `+1`.
    pub fn distance_to_degenerate(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let (ip, _) = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - one).norm()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| if i == ip { (v - one).norm() } else { (v + one).norm() })
            .fold(0.0, f64::max)
    }
}

/// Coefficients `(c2, c1, c0)` of `det(t I - m) = t^3 + c2 t^2 + c1 t + c0`.
pub fn char_poly(m: &Mat3) -> [f64; 3] {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-tr, minors, -m.determinant()]
}

fn cubic_real_candidates(a: f64, b: f64, c: f64) -> Vec<f64> {
    // Depressed cubic t^3 + p t + q with x = t - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p == 0.0 && q == 0.0 {
        return vec![-shift];
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v - shift]
    } else {
        // three real roots (p < 0)
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        (0..3).map(|k| 2.0 * r * (th - 2.0 * std::f64::consts::PI * f64::from(k) / 3.0).cos() - shift).collect()
    }
}

/// Roots of the monic cubic `t^3 + a t^2 + b t + c`.
///
/// A real root is taken from the closed form, choosing the candidate where
/// the derivative is largest (the best-conditioned one), polished by Newton,
/// and deflated; the remaining quadratic is solved in the cancellation-free form.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let mut r = cubic_real_candidates(a, b, c)
        .into_iter()
        .fold((f64::NAN, -1.0), |best, x| {
            let d = dp(x).abs();
            if d > best.1 {
                (x, d)
            } else {
                best
            }
        })
        .0;
    for _ in 0..4 {
        let d = dp(r);
        if d == 0.0 {
            break;
        }
        let next = r - p(r) / d;
        if p(next).abs() < p(r).abs() {
            r = next;
        } else {
            break;
        }
    }
    let e = a + r;
    let f = b + r * e;
    let disc = e * e - 4.0 * f;
    let (r1, r2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (e + if e >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (Complex64::new(q, 0.0), Complex64::new(f / q, 0.0))
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * e, im), Complex64::new(-0.5 * e, -im))
    };
    [Complex64::new(r, 0.0), r1, r2]
}

fn sort_key(z: &Complex64) -> (i64, f64) {
    (-(z.norm() * 1e9).round() as i64, z.arg())
}

pub fn multipliers_of(m: &Mat3) -> Multipliers {
    let [c2, c1, c0] = char_poly(m);
    let mut values = cubic_roots(c2, c1, c0);
    values.sort_by(|x, y| {
        let (a, b) = (sort_key(x), sort_key(y));
        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
    Multipliers { values }
}

/// A periodic orbit of a delay-form map, stored as its cyclic point list.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub map: HenonMap,
    pub points: Vec<State3>,
}

impl PeriodicOrbit {
    /// Builds the orbit `(z_i, z_{i+1}, z_{i+2})`, indices taken mod `n`.
    pub fn from_delay(map: HenonMap, zs: &[f64]) -> Self {
        let n = zs.len();
        let points = (0..n).map(|i| State3::new(zs[i], zs[(i + 1) % n], zs[(i + 2) % n])).collect();
        Self { map, points }
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// The scalar sequence `z_1 .. z_n`.
    pub fn zs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// Largest sup-norm mismatch between `step(points[i])` and `points[i+1]`.
    pub fn residual(&self) -> f64 {
        let n = self.period();
        (0..n).map(|i| (self.map.step(&self.points[i]) - self.points[(i + 1) % n]).amax()).fold(0.0, f64::max)
    }

    /// False when the orbit already closes after a proper divisor of its period.
    pub fn is_minimal(&self) -> bool {
        self.is_minimal_within(MINIMALITY_TOL)
    }

    /// As [`Self::is_minimal`] with an explicit closing tolerance.
    pub fn is_minimal_within(&self, tol: f64) -> bool {
        let n = self.period();
        !(1..n)
            .filter(|&d| n.is_multiple_of(d))
            .any(|d| (0..n).all(|i| (self.points[i] - self.points[(i + d) % n]).amax() < tol))
    }

    /// Product of the step Jacobians in orbit order, rightmost factor at `points[0]`.
    pub fn monodromy(&self) -> Mat3 {
        monodromy(&self.map, &self.points)
    }

    pub fn multipliers(&self) -> Multipliers {
        multipliers_of(&self.monodromy())
    }
}

pub fn monodromy(map: &HenonMap, points: &[State3]) -> Mat3 {
    points.iter().fold(Mat3::identity(), |acc, p| map.jacobian(p) * acc)
}

/// Delay-form update `z_{k+3} = M1 + B z_k + M2 w - v^2` where
/// `(w, v) = (z_{k+1}, z_{k+2})` for the forward map and
/// `(z_{k+2}, z_{k+1})` for the inverse one.
#[derive(Debug, Clone, Copy)]
struct DelaySystem {
    kind: MapKind,
    n: usize,
}

impl DelaySystem {
    fn new(kind: MapKind, n: usize) -> Result<Self> {
        if !kind.is_delay_form() {
            return Err(Error::UnsupportedMap(kind.name()));
        }
        if n == 0 || n > MAX_PERIOD {
            return Err(Error::InvalidParameter(format!("period must lie in 1..={MAX_PERIOD}, got {n}")));
        }
        Ok(Self { kind, n })
    }

    /// Indices `(w, v)` of the linear and squared neighbours of equation `k`.
    fn wv(&self, k: usize) -> (usize, usize) {
        let n = self.n;
        match self.kind {
            MapKind::Forward => ((k + 1) % n, (k + 2) % n),
            _ => ((k + 2) % n, (k + 1) % n),
        }
    }

    fn residual(&self, z: &[f64], m: [f64; 3], out: &mut [f64]) {
        let n = self.n;
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let (w, v) = self.wv(k);
            *o = z[(k + 3) % n] - (m[0] + m[2] * z[k] + m[1] * z[w] - z[v] * z[v]);
        }
    }

    /// Writes the `n x n` block of derivatives with respect to `z` and,
    /// when `param_cols` is set, the columns for `(M1, M2)` at `n, n + 1`.
    fn jacobian(&self, z: &[f64], m: [f64; 3], jac: &mut DMatrix<f64>, param_cols: bool) {
        let n = self.n;
        for k in 0..n {
            let (w, v) = self.wv(k);
            jac[(k, (k + 3) % n)] += 1.0;
            jac[(k, k)] -= m[2];
            jac[(k, w)] -= m[1];
            jac[(k, v)] += 2.0 * z[v];
            if param_cols {
                jac[(k, n)] = -1.0;
                jac[(k, n + 1)] = -z[w];
            }
        }
    }
}

/// Newton solve for a period-`n` orbit of a delay-form map from `n` scalar
/// guesses `z_1 .. z_n`. Minimality of the period is not enforced; see
/// [`PeriodicOrbit::is_minimal`].
pub fn find_periodic_orbit(map: &HenonMap, guess: &[f64]) -> Result<PeriodicOrbit> {
    map.validate()?;
    let sys = DelaySystem::new(map.kind(), guess.len())?;
    if guess.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("guess must be finite".into()));
    }
    let m = map.triple();
    let n = sys.n;
    let out = newton::solve(
        DVector::from_column_slice(guess),
        |x| {
            let mut r = DVector::zeros(n);
            sys.residual(x.as_slice(), m, r.as_mut_slice());
            r
        },
        |x| {
            let mut j = DMatrix::zeros(n, n);
            sys.jacobian(x.as_slice(), m, &mut j, false);
            j
        },
        &NewtonOptions::default(),
    )?;
    Ok(PeriodicOrbit::from_delay(*map, out.x.as_slice()))
}

/// An orbit whose `n`-th iterate has multipliers `(-1, -1, +1)`, together
/// with the parameters at which this happens.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateSolution {
    pub orbit: PeriodicOrbit,
    /// `n` orbit equations, then `trace + 1`, then `det(M - I)`.
    pub residuals: Vec<f64>,
    pub multipliers: Multipliers,
    /// `Some(defect)` when the `-1` pair forms a Jordan block, `None` when it
    /// is semi-simple.
    pub jordan_defect: Option<f64>,
    pub minimal: bool,
}

impl DegenerateSolution {
    pub fn params(&self) -> [f64; 3] {
        self.orbit.map.triple()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn has_jordan_block(&self) -> bool {
        self.jordan_defect.is_some()
    }

    /// Unknown vector `(z_1 .. z_n, M1, M2)`.
    pub fn unknowns(&self) -> Vec<f64> {
        let mut u = self.orbit.zs();
        let p = self.params();
        u.extend([p[0], p[1]]);
        u
    }
}

fn spectral_residual(kind: MapKind, b: f64, u: &[f64]) -> [f64; 2] {
    let n = u.len() - 2;
    let map = HenonMap::from_triple(kind, [u[n], u[n + 1], b]);
    let orbit = PeriodicOrbit::from_delay(map, &u[..n]);
    let m = orbit.monodromy();
    [m.trace() + 1.0, (m - Mat3::identity()).determinant()]
}

fn degenerate_residual(sys: &DelaySystem, b: f64, u: &DVector<f64>) -> DVector<f64> {
    let n = sys.n;
    let mut r = DVector::zeros(n + 2);
    let m = [u[n], u[n + 1], b];
    sys.residual(&u.as_slice()[..n], m, &mut r.as_mut_slice()[..n]);
    let [t, d] = spectral_residual(sys.kind, b, u.as_slice());
    r[n] = t;
    r[n + 1] = d;
    r
}

fn degenerate_jacobian(sys: &DelaySystem, b: f64, u: &DVector<f64>) -> DMatrix<f64> {
    let n = sys.n;
    let mut j = DMatrix::zeros(n + 2, n + 2);
    let m = [u[n], u[n + 1], b];
    sys.jacobian(&u.as_slice()[..n], m, &mut j, true);
    let mut x = u.as_slice().to_vec();
    for c in 0..n + 2 {
        let x0 = x[c];
        x[c] = x0 + SPECTRAL_FD_STEP;
        let hi = spectral_residual(sys.kind, b, &x);
        x[c] = x0 - SPECTRAL_FD_STEP;
        let lo = spectral_residual(sys.kind, b, &x);
        x[c] = x0;
        j[(n, c)] = (hi[0] - lo[0]) / (2.0 * SPECTRAL_FD_STEP);
        j[(n + 1, c)] = (hi[1] - lo[1]) / (2.0 * SPECTRAL_FD_STEP);
    }
    j
}

/// Solves the `n` orbit equations together with `trace(DF^n) = -1` and
/// `det(DF^n - I) = 0` for `(z_1 .. z_n, M1, M2)` at fixed Jacobian
/// parameter `b_fixed`. `guess` has length `n + 2`.
pub fn solve_degenerate(kind: MapKind, b_fixed: f64, guess: &[f64]) -> Result<DegenerateSolution> {
    if guess.len() < 3 {
        return Err(Error::InvalidParameter("guess needs n orbit values plus (M1, M2)".into()));
    }
    if !(b_fixed.is_finite() && b_fixed != 0.0) {
        return Err(Error::InvalidParameter("Jacobian parameter must be nonzero".into()));
    }
    let sys = DelaySystem::new(kind, guess.len() - 2)?;
    let n = sys.n;
    let out = newton::solve(
        DVector::from_column_slice(guess),
        |u| degenerate_residual(&sys, b_fixed, u),
        |u| degenerate_jacobian(&sys, b_fixed, u),
        &NewtonOptions::default(),
    )?;
    let u = out.x;
    let map = HenonMap::from_triple(kind, [u[n], u[n + 1], b_fixed]);
    let orbit = PeriodicOrbit::from_delay(map, &u.as_slice()[..n]);
    let monodromy = orbit.monodromy();
    let multipliers = multipliers_of(&monodromy);
    let dist = multipliers.distance_to_degenerate();
    if !(dist < 1e-6) {
        return Err(Error::NotDegenerate(format!(
            "multipliers {:?} are {dist:e} from (-1, -1, +1)",
            multipliers.values
        )));
    }
    let jordan_defect = match normal_form::NormalFormChart::from_matrix(&monodromy, orbit.points[0]) {
        Ok(chart) => Some(chart.jordan_defect),
        Err(Error::SemiSimple(_)) => None,
        Err(e) => return Err(e),
    };
    let minimal = orbit.is_minimal_within(DEGENERATE_MINIMALITY_TOL);
    Ok(DegenerateSolution {
        residuals: out.residual.iter().copied().collect(),
        orbit,
        multipliers,
        jordan_defect,
        minimal,
    })
}

/// Outcome of a multi-start search. `solutions` holds distinct orbits of
/// minimal period `n` whose `-1` pair forms a Jordan block; the counters
/// record converged seeds that were set aside.
#[derive(Debug, Clone, Default)]
pub struct HuntResult {
    pub solutions: Vec<DegenerateSolution>,
    pub converged_seeds: usize,
    pub non_minimal: usize,
    pub semi_simple: usize,
}

/// Rotates the orbit so that its largest `z` comes first; returns the
/// canonical unknown vector.
fn canonical_unknowns(sol: &DegenerateSolution) -> Vec<f64> {
    let zs = sol.orbit.zs();
    let n = zs.len();
    let start = (0..n).fold(0, |best, i| if zs[i] > zs[best] { i } else { best });
    let mut u: Vec<f64> = (0..n).map(|i| zs[(start + i) % n]).collect();
    let p = sol.params();
    u.extend([p[0], p[1]]);
    u
}

fn canonicalize(sol: DegenerateSolution) -> DegenerateSolution {
    let u = canonical_unknowns(&sol);
    let n = u.len() - 2;
    let mut rotated = sol;
    let b = rotated.orbit.map.det();
    rotated.orbit =
        PeriodicOrbit::from_delay(HenonMap::from_triple(rotated.orbit.map.kind(), [u[n], u[n + 1], b]), &u[..n]);
    rotated
}

/// Runs [`solve_degenerate`] from `n_seeds` Halton points of `seed_box`
/// (`n + 2` intervals: orbit values then `M1`, `M2`) and returns the distinct
/// solutions. Output does not depend on the number of worker threads.
pub fn hunt_degenerate(kind: MapKind, b_fixed: f64, seed_box: &[(f64, f64)], n_seeds: usize) -> Result<HuntResult> {
    DelaySystem::new(kind, seed_box.len().saturating_sub(2))?;
    if seed_box.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidParameter("seed box must be finite".into()));
    }
    let found: Vec<Option<DegenerateSolution>> = (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| solve_degenerate(kind, b_fixed, &quasi::halton_in_box(i, seed_box)).ok())
        .collect();

    let mut result = HuntResult::default();
    let mut keep = Vec::new();
    for sol in found.into_iter().flatten() {
        result.converged_seeds += 1;
        if !sol.minimal {
            result.non_minimal += 1;
        } else if !sol.has_jordan_block() {
            result.semi_simple += 1;
        } else {
            keep.push(canonicalize(sol));
        }
    }
    keep.sort_by(|a, b| {
        let (ua, ub) = (canonical_unknowns(a), canonical_unknowns(b));
        ua.iter().zip(&ub).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    for sol in keep {
        let u = canonical_unknowns(&sol);
        let dup = result
            .solutions
            .iter()
            .any(|s| canonical_unknowns(s).iter().zip(&u).all(|(a, b)| (a - b).abs() < DEDUP_TOL));
        if !dup {
            result.solutions.push(sol);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{MapParams, CODIM3_NONORIENTABLE, CODIM3_ORIENTABLE};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn codim3_multipliers() {
        let m = HenonMap::Forward(CODIM3_ORIENTABLE).jacobian(&State3::new(0.5, 0.5, 0.5));
        let mu = multipliers_of(&m);
        assert!(close(mu.values[0], c(1.0, 0.0), 1e-12));
        assert!(close(mu.values[1], c(-1.0, 0.0), 1e-12));
        assert!(close(mu.values[2], c(-1.0, 0.0), 1e-12));

        let m = HenonMap::Forward(CODIM3_NONORIENTABLE).jacobian(&State3::new(0.5, 0.5, 0.5));
        let mu = multipliers_of(&m);
        let want = [c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0)];
        for (got, w) in mu.values.iter().zip(want) {
            assert!(close(*got, w, 1e-12), "{got} vs {w}");
        }
    }

    #[test]
    fn identity_multipliers() {
        let mu = multipliers_of(&Mat3::identity());
        assert!(mu.values.iter().all(|v| close(*v, c(1.0, 0.0), 1e-12)));
    }

    #[test]
    fn cubic_with_three_distinct_real_roots() {
        // (t - 1)(t - 2)(t + 3) = t^3 - 7t + 6
        let r = cubic_roots(0.0, -7.0, 6.0);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 3.0).abs() < 1e-13 && (re[1] - 1.0).abs() < 1e-13 && (re[2] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn fixed_point_of_codim3_map() {
        let map = HenonMap::Forward(CODIM3_ORIENTABLE);
        let orbit = find_periodic_orbit(&map, &[0.4]).unwrap();
        // double root: Newton converges linearly, so only ~sqrt(eps) accuracy
        assert!((orbit.points[0].z - 0.5).abs() < 1e-6);
        assert_eq!(orbit.monodromy(), map.jacobian(&orbit.points[0]));
    }

    #[test]
    fn period_one_is_not_minimal_as_period_two() {
        let map = HenonMap::Forward(MapParams::new(0.3, 0.2, 0.5));
        let orbit = find_periodic_orbit(&map, &[0.8, 0.8]).unwrap();
        assert!(orbit.residual() < 1e-12);
        assert!(!orbit.is_minimal());
    }

    #[test]
    fn limit_maps_are_rejected_by_delay_solver() {
        let map = HenonMap::from_triple(MapKind::Generic, [0.1, 0.2, 0.3]);
        assert!(matches!(find_periodic_orbit(&map, &[0.0]), Err(Error::UnsupportedMap(_))));
    }

    #[test]
    fn inverse_degenerate_fixed_point() {
        let sol = solve_degenerate(MapKind::Inverse, 1.0, &[-0.45, -0.2, -0.95]).unwrap();
        let p = sol.params();
        assert!((sol.orbit.points[0].z + 0.5).abs() < 1e-6, "{:?}", sol.orbit.points[0]);
        assert!((p[0] + 0.25).abs() < 1e-6 && (p[1] + 1.0).abs() < 1e-6, "{p:?}");
        assert!(sol.has_jordan_block());
    }
}
