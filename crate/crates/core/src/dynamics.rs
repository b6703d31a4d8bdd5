//! Long-run orbit analysis: Lyapunov spectra, escape, attractor sampling
//! with cyclic component detection, and the Shimizu–Morioka flow.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{sm_field, sm_jacobian, HenonMap, Mat3, SMParams, State3};
use crate::orbit::multipliers_of;

pub const ESCAPE_NORM: f64 = 1e6;
pub const DEFAULT_TRANSIENT: usize = 10_000;
pub const DEFAULT_SAMPLE: usize = 1_000_000;
pub const MIN_SAMPLE: usize = 10_000;
pub const DEFAULT_T_TRANSIENT: f64 = 100.0;
pub const DEFAULT_T_SAMPLE: f64 = 1000.0;
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest period tried when checking that a component partition is not
/// a coarsening of a finer cyclic one.
pub const MAX_COMPONENTS: usize = 24;
/// Minimum gap between bounding boxes for them to count as disjoint.
pub const BOX_GAP: f64 = 1e-6;

/// Non-finite or sup-norm above [`ESCAPE_NORM`].
pub fn escaped(s: &State3) -> bool {
    !s.iter().all(|v| v.is_finite()) || s.amax() > ESCAPE_NORM
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    /// Descending; per iteration for maps, per unit time for flows.
    pub exponents: [f64; 3],
    pub n_transient: usize,
    pub n_sample: usize,
    /// Largest gap between the full-run and second-half estimates.
    pub convergence_halfwidth: f64,
    /// Step of the sampling phase at which the orbit escaped, if it did.
    pub escaped_at: Option<usize>,
}

impl LyapunovResult {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    pub fn is_complete(&self) -> bool {
        self.escaped_at.is_none()
    }
}

/// `lambda_1 + lambda_2`; positive values indicate expansion of 2D volumes
/// transverse to the strong-stable direction.
pub fn pseudo_hyperbolicity_indicator(lr: &LyapunovResult) -> f64 {
    lr.exponents[0] + lr.exponents[1]
}

/// Modified Gram-Schmidt on the columns; returns `Q` and `|diag R|`.
fn gram_schmidt(m: &Mat3) -> (Mat3, [f64; 3]) {
    let mut q = *m;
    let mut r = [0.0; 3];
    for (j, rj) in r.iter_mut().enumerate() {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let ck = q.column(k).into_owned();
            q.column_mut(j).axpy(-proj, &ck, 1.0);
        }
        let n = q.column(j).norm();
        *rj = n;
        if n > 0.0 {
            q.column_mut(j).unscale_mut(n);
        }
    }
    (q, r)
}

/// Running sums of `log |R_ii|`, with a snapshot at the half-way point.
struct LogAccumulator {
    sums: [f64; 3],
    half: Option<([f64; 3], usize)>,
    steps: usize,
}

impl LogAccumulator {
    fn new() -> Self {
        Self { sums: [0.0; 3], half: None, steps: 0 }
    }

    fn push(&mut self, r: &[f64; 3], total: usize) {
        for (s, v) in self.sums.iter_mut().zip(r) {
            *s += v.ln();
        }
        self.steps += 1;
        if self.steps == total / 2 {
            self.half = Some((self.sums, self.steps));
        }
    }

    fn finish(&self, scale: f64) -> ([f64; 3], f64) {
        let n = self.steps.max(1) as f64;
        let full: [f64; 3] = std::array::from_fn(|i| self.sums[i] / (n * scale));
        let halfwidth = match self.half {
            Some((h, k)) if self.steps > k => (0..3)
                .map(|i| {
                    let second = (self.sums[i] - h[i]) / ((self.steps - k) as f64 * scale);
                    (second - full[i]).abs()
                })
                .fold(0.0, f64::max),
            _ => f64::NAN,
        };
        let mut e = full;
        e.sort_by(|a, b| b.total_cmp(a));
        (e, halfwidth)
    }
}

fn check_budget(n_sample: usize) -> Result<()> {
    if n_sample < MIN_SAMPLE {
        return Err(Error::InvalidParameter(format!("n_sample must be at least {MIN_SAMPLE}, got {n_sample}")));
    }
    Ok(())
}

fn run_transient(map: &HenonMap, x0: &State3, n_transient: usize) -> Result<State3> {
    let mut x = *x0;
    for k in 0..n_transient {
        x = map.step(&x);
        if escaped(&x) {
            return Err(Error::Escaped(k + 1));
        }
    }
    Ok(x)
}

/// Lyapunov spectrum of a map orbit with QR re-orthonormalization every step.
pub fn lyapunov_spectrum(map: &HenonMap, x0: &State3, n_transient: usize, n_sample: usize) -> Result<LyapunovResult> {
    check_budget(n_sample)?;
    map.validate()?;
    let mut x = run_transient(map, x0, n_transient)?;
    let mut q = Mat3::identity();
    let mut acc = LogAccumulator::new();
    let mut escaped_at = None;
    for k in 0..n_sample {
        let (qn, r) = gram_schmidt(&(map.jacobian(&x) * q));
        x = map.step(&x);
        if escaped(&x) {
            escaped_at = Some(k + 1);
            break;
        }
        q = qn;
        acc.push(&r, n_sample);
    }
    let (exponents, convergence_halfwidth) = acc.finish(1.0);
    Ok(LyapunovResult { exponents, n_transient, n_sample, convergence_halfwidth, escaped_at })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoundingBox {
    fn empty() -> Self {
        Self { lo: [f64::INFINITY; 3], hi: [f64::NEG_INFINITY; 3] }
    }

    fn include(&mut self, s: &State3) {
        for i in 0..3 {
            self.lo[i] = self.lo[i].min(s[i]);
            self.hi[i] = self.hi[i].max(s[i]);
        }
    }

    fn merge(&mut self, other: &BoundingBox) {
        for i in 0..3 {
            self.lo[i] = self.lo[i].min(other.lo[i]);
            self.hi[i] = self.hi[i].max(other.hi[i]);
        }
    }

    /// Separated by more than [`BOX_GAP`] along at least one axis.
    pub fn disjoint(&self, other: &BoundingBox) -> bool {
        (0..3).any(|i| self.lo[i] > other.hi[i] + BOX_GAP || other.lo[i] > self.hi[i] + BOX_GAP)
    }
}

/// Bounding boxes of the residue classes of the sample index modulo every
/// period up to [`MAX_COMPONENTS`], accumulated while streaming.
#[derive(Debug, Clone)]
pub struct ComponentTracker {
    /// `boxes[q - 1][r]`: residue `r` modulo `q`.
    boxes: Vec<Vec<BoundingBox>>,
    count: usize,
}

impl ComponentTracker {
    pub fn new() -> Self {
        Self { boxes: (1..=MAX_COMPONENTS).map(|q| vec![BoundingBox::empty(); q]).collect(), count: 0 }
    }

    pub fn push(&mut self, s: &State3) {
        let k = self.count;
        for (qi, b) in self.boxes.iter_mut().enumerate() {
            b[k % (qi + 1)].include(s);
        }
        self.count += 1;
    }

    fn boxes_mod(&self, q: usize) -> Vec<BoundingBox> {
        if q <= MAX_COMPONENTS {
            return self.boxes[q - 1].clone();
        }
        Vec::new()
    }

    fn pairwise_disjoint(boxes: &[BoundingBox]) -> bool {
        (0..boxes.len()).all(|i| (i + 1..boxes.len()).all(|j| boxes[i].disjoint(&boxes[j])))
    }

    /// `Some(p)` when the residue boxes modulo `p` are pairwise disjoint and
    /// no multiple of `p` up to [`MAX_COMPONENTS`] splits them further.
    pub fn component_count(&self, p: usize) -> Option<usize> {
        if p == 0 || p > MAX_COMPONENTS || self.count < 2 * MAX_COMPONENTS {
            return None;
        }
        if !Self::pairwise_disjoint(&self.boxes_mod(p)) {
            return None;
        }
        let finer = (2..)
            .map(|k| k * p)
            .take_while(|&q| q <= MAX_COMPONENTS)
            .any(|q| Self::pairwise_disjoint(&self.boxes_mod(q)));
        (!finer).then_some(p)
    }

    pub fn residue_boxes(&self, p: usize) -> Vec<BoundingBox> {
        if (1..=MAX_COMPONENTS).contains(&p) {
            self.boxes_mod(p)
        } else {
            let mut all = BoundingBox::empty();
            for b in &self.boxes[0] {
                all.merge(b);
            }
            vec![all]
        }
    }
}

impl Default for ComponentTracker {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorSample {
    pub points: Vec<State3>,
    pub escaped: bool,
    /// Number of cyclically permuted components, when detected.
    pub component_count: Option<usize>,
    pub bounding_boxes: Vec<BoundingBox>,
}

/// Iterates past the transient and records `n_sample` points. Points are
/// truncated at an escape.
pub fn sample_attractor(
    map: &HenonMap,
    x0: &State3,
    n_transient: usize,
    n_sample: usize,
    expected_period: usize,
) -> Result<AttractorSample> {
    if expected_period == 0 {
        return Err(Error::InvalidParameter("expected period must be >= 1".into()));
    }
    map.validate()?;
    let mut x = match run_transient(map, x0, n_transient) {
        Ok(x) => x,
        Err(Error::Escaped(_)) => {
            return Ok(AttractorSample {
                points: Vec::new(),
                escaped: true,
                component_count: None,
                bounding_boxes: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let mut points = Vec::with_capacity(n_sample);
    let mut tracker = ComponentTracker::new();
    let mut esc = false;
    for _ in 0..n_sample {
        points.push(x);
        tracker.push(&x);
        x = map.step(&x);
        if escaped(&x) {
            esc = true;
            break;
        }
    }
    let component_count = if esc { None } else { tracker.component_count(expected_period) };
    Ok(AttractorSample {
        bounding_boxes: tracker.residue_boxes(expected_period),
        points,
        escaped: esc,
        component_count,
    })
}

/// Lyapunov spectrum and component structure from a single orbit, without
/// storing the points.
pub fn probe_orbit(
    map: &HenonMap,
    x0: &State3,
    n_transient: usize,
    n_sample: usize,
    expected_period: usize,
) -> Result<(LyapunovResult, Option<usize>)> {
    check_budget(n_sample)?;
    let mut x = run_transient(map, x0, n_transient)?;
    let mut q = Mat3::identity();
    let mut acc = LogAccumulator::new();
    let mut tracker = ComponentTracker::new();
    let mut escaped_at = None;
    for k in 0..n_sample {
        tracker.push(&x);
        let (qn, r) = gram_schmidt(&(map.jacobian(&x) * q));
        x = map.step(&x);
        if escaped(&x) {
            escaped_at = Some(k + 1);
            break;
        }
        q = qn;
        acc.push(&r, n_sample);
    }
    let (exponents, convergence_halfwidth) = acc.finish(1.0);
    let comps = if escaped_at.is_none() { tracker.component_count(expected_period) } else { None };
    Ok((LyapunovResult { exponents, n_transient, n_sample, convergence_halfwidth, escaped_at }, comps))
}

/// Real fixed points of a delay-form map: roots of
/// `z^2 + (1 - B - M2) z - M1 = 0`, ascending.
pub fn fixed_points(map: &HenonMap) -> Vec<State3> {
    if !map.kind().is_delay_form() {
        return Vec::new();
    }
    let [m1, m2, b] = map.triple();
    let c = 1.0 - b - m2;
    let disc = c * c + 4.0 * m1;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut roots = if sq == 0.0 {
        vec![-0.5 * c]
    } else {
        // cancellation-free pair
        let q = -0.5 * (c + if c >= 0.0 { sq } else { -sq });
        vec![q, -m1 / q]
    };
    roots.sort_by(f64::total_cmp);
    roots.into_iter().map(|z| State3::new(z, z, z)).collect()
}

/// Unit real direction associated with the multiplier of largest modulus
/// (real part of the eigenvector for a complex pair).
pub fn unstable_direction(m: &Mat3) -> State3 {
    let mu = multipliers_of(m).values[0];
    let shifted: Matrix3<Complex64> = m.map(|v| Complex64::new(v, 0.0)) - Matrix3::<Complex64>::identity() * mu;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let v: Vector3<Complex64> = vt.row(imin).transpose().map(|c| c.conj());
    // rotate the phase so the largest component is real
    let (_, big) =
        v.iter().fold((0.0, Complex64::new(1.0, 0.0)), |acc, c| if c.norm() > acc.0 { (c.norm(), *c) } else { acc });
    let phase = big.conj() / big.norm();
    let re = State3::from_fn(|i, _| (v[i] * phase).re);
    let n = re.norm();
    if n > 0.0 {
        re / n
    } else {
        State3::new(1.0, 0.0, 0.0)
    }
}

fn rk4_step<F: Fn(&State3) -> State3>(f: &F, x: &State3, dt: f64) -> State3 {
    let k1 = f(x);
    let k2 = f(&(x + k1 * (0.5 * dt)));
    let k3 = f(&(x + k2 * (0.5 * dt)));
    let k4 = f(&(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn check_flow_args(dt: f64, spans: &[f64]) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if spans.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("time spans must be finite and >= 0".into()));
    }
    Ok(())
}

fn steps_for(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

/// Fixed-step RK4 trajectory of the Shimizu–Morioka flow, including `x0`.
pub fn sm_integrate(q: &SMParams, x0: &State3, t_end: f64, dt: f64) -> Result<Vec<State3>> {
    check_flow_args(dt, &[t_end])?;
    let n = steps_for(t_end, dt);
    let f = |s: &State3| sm_field(s, q);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = *x0;
    out.push(x);
    for _ in 0..n {
        x = rk4_step(&f, &x, dt);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        out.push(x);
    }
    Ok(out)
}

/// One RK4 step of the flow together with its variational equation.
fn rk4_variational(q: &SMParams, x: &State3, phi: &Mat3, dt: f64) -> (State3, Mat3) {
    let f = |s: &State3, p: &Mat3| (sm_field(s, q), sm_jacobian(s, q) * p);
    let (k1, l1) = f(x, phi);
    let (k2, l2) = f(&(x + k1 * (0.5 * dt)), &(phi + l1 * (0.5 * dt)));
    let (k3, l3) = f(&(x + k2 * (0.5 * dt)), &(phi + l2 * (0.5 * dt)));
    let (k4, l4) = f(&(x + k3 * dt), &(phi + l3 * dt));
    (x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), phi + (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (dt / 6.0))
}

/// Lyapunov spectrum of the Shimizu–Morioka flow, per unit time.
pub fn sm_lyapunov(q: &SMParams, x0: &State3, t_transient: f64, t_sample: f64, dt: f64) -> Result<LyapunovResult> {
    check_flow_args(dt, &[t_transient, t_sample])?;
    let f = |s: &State3| sm_field(s, q);
    let n_transient = steps_for(t_transient, dt);
    let n_sample = steps_for(t_sample, dt);
    let mut x = *x0;
    for k in 0..n_transient {
        x = rk4_step(&f, &x, dt);
        if escaped(&x) {
            return Err(Error::Escaped(k + 1));
        }
    }
    let mut phi = Mat3::identity();
    let mut acc = LogAccumulator::new();
    let mut escaped_at = None;
    for k in 0..n_sample {
        let (xn, pn) = rk4_variational(q, &x, &phi, dt);
        if escaped(&xn) {
            escaped_at = Some(k + 1);
            break;
        }
        let (qn, r) = gram_schmidt(&pn);
        x = xn;
        phi = qn;
        acc.push(&r, n_sample);
    }
    let (exponents, convergence_halfwidth) = acc.finish(dt);
    Ok(LyapunovResult { exponents, n_transient, n_sample, convergence_halfwidth, escaped_at })
}
