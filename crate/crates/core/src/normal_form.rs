//! Quadratic normal form at a fixed point with multipliers `(-1, -1, +1)`
//! and a Jordan block on the `-1` pair:
//!
//! ```text
//! u1' = -u1 - u2
//! u2' = -u2 + a u1 u3 + a1 u2 u3
//! u3' =  u3 + b u1^2 + b1 u2^2 + b2 u1 u2 + b3 u3^2
//! ```
//!
//! The sign of `a b` separates the birth of a discrete Lorenz attractor
//! (`a b > 0`) from that of a repeller.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{HenonMap, Jet2, Mat3, State3};

/// Multipliers must lie this close to `(-1, -1, +1)` to build a chart.
pub const CHART_MULTIPLIER_TOL: f64 = 1e-4;
/// Largest accepted `|(A + I) v2 + v1|`.
pub const JORDAN_DEFECT_TOL: f64 = 1e-3;
pub const MAX_BASIS_CONDITION: f64 = 1e8;
/// Largest accepted entry of `P^-1 A P - A_nf`.
pub const LINEAR_PART_TOL: f64 = 1e-5;
/// Ratio `sigma2 / sigma1` of `A + I` below which its rank is taken as 1.
const RANK_GAP: f64 = 1e-8;
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Linear part of the normal form.
pub fn normal_form_linear() -> Mat3 {
    Mat3::new(
        -1.0, -1.0, 0.0, //
        0.0, -1.0, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// Iterates the exact 2-jet of the map `n` times from `x0`.
pub fn iterate_jet2(map: &HenonMap, x0: &State3, n: usize) -> Result<Jet2> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of iterates must be >= 1".into()));
    }
    let mut jet = Jet2::identity(*x0);
    for k in 0..n {
        let step = map.jet2(&jet.value);
        jet = Jet2::compose(&step, &jet);
        if crate::dynamics::escaped(&jet.value) {
            return Err(Error::Escaped(k + 1));
        }
    }
    Ok(jet)
}

/// Flips `v` so that its first component with magnitude above `1e-12` is positive.
fn orient(v: State3) -> State3 {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// Right singular vectors of a 3x3 matrix with singular values in
/// descending order.
fn svd3(m: &Mat3) -> (nalgebra::Vector3<f64>, Mat3, Mat3) {
    let svd = m.svd(true, true);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s = nalgebra::Vector3::from_fn(|i, _| svd.singular_values[idx[i]]);
    let uu = Mat3::from_fn(|r, c| u[(r, idx[c])]);
    let vv = Mat3::from_fn(|r, c| vt[(idx[c], r)]);
    (s, uu, vv)
}

/// Linear chart `xi = P u` bringing the linear part to [`normal_form_linear`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormChart {
    /// Columns `v1, v2, v3`.
    pub basis: Mat3,
    pub origin: State3,
    pub jordan_defect: f64,
}

impl NormalFormChart {
    pub fn from_matrix(a: &Mat3, origin: State3) -> Result<Self> {
        let mu = crate::orbit::multipliers_of(a);
        let dist = mu.distance_to_degenerate();
        if !(dist < CHART_MULTIPLIER_TOL) {
            return Err(Error::NotDegenerate(format!("distance {dist:e}")));
        }
        let id = Mat3::identity();

        let (_, _, w) = svd3(&(a - id));
        let v3 = orient(w.column(2).into_owned());

        let m = a + id;
        let (s, u, w) = svd3(&m);
        let v1 = orient(w.column(2).into_owned());
        let rank = if s[1] > RANK_GAP * s[0] { 2 } else { 1 };
        // minimum-norm solution of (A + I) v2 = -v1 with the null direction dropped
        let mut v2 = State3::zeros();
        for k in 0..rank {
            v2 += w.column(k) * (u.column(k).dot(&(-v1)) / s[k]);
        }
        let jordan_defect = (m * v2 + v1).norm();
        if jordan_defect > JORDAN_DEFECT_TOL * v1.norm() {
            return Err(Error::SemiSimple(jordan_defect));
        }

        let basis = Mat3::from_columns(&[v1, v2, v3]);
        let (sb, _, _) = svd3(&basis);
        let cond = sb[0] / sb[2];
        if !(cond < MAX_BASIS_CONDITION) {
            return Err(Error::IllConditioned(cond));
        }
        let chart = Self { basis, origin, jordan_defect };
        let lin = chart.linear_part(a);
        let off = (lin - normal_form_linear()).amax();
        if !(off < LINEAR_PART_TOL) {
            return Err(Error::NotDegenerate(format!("chart linear part deviates by {off:e}")));
        }
        Ok(chart)
    }

    /// Builds the chart at the base point of `jet` from its linear part.
    pub fn build(jet: &Jet2, origin: State3) -> Result<Self> {
        Self::from_matrix(&jet.jac, origin)
    }

    pub fn linear_part(&self, a: &Mat3) -> Mat3 {
        let inv = self.basis.try_inverse().expect("chart basis is invertible");
        inv * a * self.basis
    }

    /// Rescales `v1, v2` by `sigma` and `v3` by `tau`.
    pub fn rescaled(&self, sigma: f64, tau: f64) -> Self {
        let mut basis = self.basis;
        basis.column_mut(0).scale_mut(sigma);
        basis.column_mut(1).scale_mut(sigma);
        basis.column_mut(2).scale_mut(tau);
        Self { basis, ..self.clone() }
    }
}

/// Convenience wrapper over [`NormalFormChart::build`] with the origin taken
/// as the point the jet was expanded at (unknown to the jet itself).
pub fn build_chart(jet: &Jet2) -> Result<NormalFormChart> {
    NormalFormChart::build(jet, jet.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormCoeffs {
    pub a: f64,
    pub a1: f64,
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    LorenzAttractor,
    LorenzRepeller,
    Degenerate,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::LorenzAttractor => "lorenz-attractor",
            Classification::LorenzRepeller => "lorenz-repeller",
            Classification::Degenerate => "degenerate",
        }
    }
}

pub fn classify(c: &NormalFormCoeffs) -> Classification {
    let ab = c.a * c.b;
    if ab > CLASSIFY_TOL {
        Classification::LorenzAttractor
    } else if ab < -CLASSIFY_TOL {
        Classification::LorenzRepeller
    } else {
        Classification::Degenerate
    }
}

/// Quadratic monomials in the order used for coefficient vectors.
/// Pairs `(j, k)` stand for `u_j u_k`.
pub const MONOMIALS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Slots of the normal-form terms, as `(component, monomial index)`, in the
/// order `a, a1, b, b1, b2, b3`.
pub const RESONANT: [(usize, usize); 6] = [(1, 4), (1, 5), (2, 0), (2, 1), (2, 3), (2, 2)];

/// The Jordan block makes `u2^2` and `u1 u2` in the third component
/// removable, so only `a, a1, b, b3` (these positions in [`RESONANT`]) are
/// invariants of the quadratic part; `b1` and `b2` are reported as zero.
pub const ESSENTIAL: [usize; 4] = [0, 1, 2, 5];

/// Rank of the homological operator at the normal-form linear part.
pub const HOMOLOGICAL_RANK: usize = 14;

/// Quadratic vector field `q_i(u) = u^T S_i u` with symmetric `S_i`,
/// flattened to 18 monomial coefficients.
pub fn quad_to_coeffs(s: &[Mat3; 3]) -> DVector<f64> {
    let mut out = DVector::zeros(18);
    for (i, si) in s.iter().enumerate() {
        for (m, &(j, k)) in MONOMIALS.iter().enumerate() {
            out[6 * i + m] = if j == k { si[(j, j)] } else { 2.0 * si[(j, k)] };
        }
    }
    out
}

fn monomial_matrix(m: usize) -> Mat3 {
    let (j, k) = MONOMIALS[m];
    let mut e = Mat3::zeros();
    if j == k {
        e[(j, j)] = 1.0;
    } else {
        e[(j, k)] = 0.5;
        e[(k, j)] = 0.5;
    }
    e
}

/// Matrix of `h -> h(L u) - L h(u)` on the 18-dimensional space of quadratic fields.
pub fn homological_operator(l: &Mat3) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(18, 18);
    for i in 0..3 {
        for m in 0..6 {
            let e = monomial_matrix(m);
            let mut img = [Mat3::zeros(); 3];
            img[i] += l.transpose() * e * l;
            for (r, out) in img.iter_mut().enumerate() {
                *out -= e * l[(r, i)];
            }
            h.set_column(6 * i + m, &quad_to_coeffs(&img));
        }
    }
    h
}

fn essential_matrix() -> DMatrix<f64> {
    let mut s = DMatrix::zeros(18, ESSENTIAL.len());
    for (c, &k) in ESSENTIAL.iter().enumerate() {
        let (i, m) = RESONANT[k];
        s[(6 * i + m, c)] = 1.0;
    }
    s
}

/// Quadratic part of the map in chart coordinates, as symmetric matrices
/// `S_i` with `q_i(u) = u^T S_i u`.
pub fn chart_quadratic(jet: &Jet2, chart: &NormalFormChart) -> Result<[Mat3; 3]> {
    let p = chart.basis;
    let inv = p.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let pulled: Vec<Mat3> = jet.hess.iter().map(|h| p.transpose() * h * p).collect();
    let mut s = [Mat3::zeros(); 3];
    for (i, si) in s.iter_mut().enumerate() {
        for (l, hl) in pulled.iter().enumerate() {
            *si += hl * (0.5 * inv[(i, l)]);
        }
    }
    Ok(s)
}

/// Singular values of the homological operator at the normal-form linear
/// part, in descending order.
pub fn homological_singular_values() -> DVector<f64> {
    let sv = homological_operator(&normal_form_linear()).singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(v)
}

/// Splits the chart quadratic part into a removable part (range of the
/// homological operator) and the resonant normal-form terms.
///
/// The resonant coefficients are read off through the cokernel of the
/// homological operator, which pairs nondegenerately with the essential
/// resonant monomials.
pub fn reduce_quadratic(q: &DVector<f64>) -> Result<NormalFormCoeffs> {
    let h = homological_operator(&normal_form_linear());
    let svd = SVD::new(h.clone(), true, true);
    let mut idx: Vec<usize> = (0..18).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv = |k: usize| svd.singular_values[idx[k]];
    if !(sv(HOMOLOGICAL_RANK - 1) > 1e6 * sv(HOMOLOGICAL_RANK)) {
        return Err(Error::ResonanceRank(format!("no singular value gap at rank {HOMOLOGICAL_RANK}")));
    }
    let u = svd.u.as_ref().expect("requested");
    let coker = DMatrix::from_fn(18, 18 - HOMOLOGICAL_RANK, |r, c| u[(r, idx[HOMOLOGICAL_RANK + c])]);
    let s = essential_matrix();
    let pairing = coker.transpose() * &s;
    let cond = crate::newton::condition_number(&pairing);
    if !(cond < 1e8) {
        return Err(Error::ResonanceRank(format!(
            "resonant monomials meet the homological range (condition {cond:e})"
        )));
    }
    let r =
        pairing.lu().solve(&(coker.transpose() * q)).ok_or_else(|| Error::ResonanceRank("singular pairing".into()))?;

    let removable = q - &s * &r;
    let hsol = svd.solve(&removable, 1e-10 * sv(0)).map_err(|e| Error::ResonanceRank(e.to_string()))?;
    let resid = (&h * hsol - &removable).norm();
    if resid > 1e-8 * q.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::ResonanceRank(format!("projection residual {resid:e}")));
    }
    Ok(NormalFormCoeffs { a: r[0], a1: r[1], b: r[2], b1: 0.0, b2: 0.0, b3: r[3] })
}

/// Resonant quadratic coefficients of the map whose jet is `jet`, in the chart `chart`.
pub fn quadratic_reduce(jet: &Jet2, chart: &NormalFormChart) -> Result<NormalFormCoeffs> {
    let s = chart_quadratic(jet, chart)?;
    reduce_quadratic(&quad_to_coeffs(&s))
}

/// Full pipeline at a point: jet of `F^n`, chart, coefficients, class.
/// The chart is oriented so that `a <= 0`.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub chart: NormalFormChart,
    pub coeffs: NormalFormCoeffs,
    pub classification: Classification,
}

pub fn normal_form_at(map: &HenonMap, x0: &State3, n: usize) -> Result<NormalFormResult> {
    let jet = iterate_jet2(map, x0, n)?;
    let mut chart = NormalFormChart::build(&jet, *x0)?;
    let mut coeffs = quadratic_reduce(&jet, &chart)?;
    // Reversing v3 flips the sign of every coefficient; orient it so a <= 0.
    if coeffs.a > 0.0 {
        chart = chart.rescaled(1.0, -1.0);
        coeffs = quadratic_reduce(&jet, &chart)?;
    }
    Ok(NormalFormResult { classification: classify(&coeffs), chart, coeffs })
}
