//! Three-dimensional Hénon maps, their limit forms, the Belyakov block power
//! and the Shimizu–Morioka vector field.
//!
//! Every map here is a quadratic polynomial with constant Jacobian
//! determinant, so Jacobians and 2-jets are evaluated in closed form.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of phase space. Also used for limit-map coordinates
/// `(X1, X2, Y)` and Shimizu–Morioka states `(X, Y, Z)` by position.
pub type State3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Parameters `(M1, M2, B)` of the forward map
/// `(x, y, z) -> (y, z, M1 + B x + M2 y - z^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub m1: f64,
    pub m2: f64,
    pub b: f64,
}

/// Parameters `(M1^, M2^, B^)` of the inverse-type map
/// `(x, y, z) -> (y, z, M1^ + B^ x + M2^ z - y^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvParams {
    pub m1h: f64,
    pub m2h: f64,
    pub bh: f64,
}

fn check_triple(a: f64, b: f64, jac: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && jac.is_finite()) {
        return Err(Error::InvalidParameter("parameters must be finite".into()));
    }
    if jac == 0.0 {
        return Err(Error::InvalidParameter("Jacobian parameter must be nonzero".into()));
    }
    Ok(())
}

impl MapParams {
    pub const fn new(m1: f64, m2: f64, b: f64) -> Self {
        Self { m1, m2, b }
    }

    pub fn validate(&self) -> Result<()> {
        check_triple(self.m1, self.m2, self.b)
    }
}

impl InvParams {
    pub const fn new(m1h: f64, m2h: f64, bh: f64) -> Self {
        Self { m1h, m2h, bh }
    }

    pub fn validate(&self) -> Result<()> {
        check_triple(self.m1h, self.m2h, self.bh)
    }
}

/// The degenerate point where the forward map has a fixed point with
/// multipliers `(-1, -1, +1)`.
pub const CODIM3_ORIENTABLE: MapParams = MapParams::new(-0.25, 1.0, 1.0);
/// The point where the forward map has a fixed point with multipliers
/// `(i, -i, -1)`.
pub const CODIM3_NONORIENTABLE: MapParams = MapParams::new(1.75, -1.0, -1.0);

/// Which of the four maps to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Forward,
    Inverse,
    OrbitFlip,
    Generic,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Forward => "forward",
            MapKind::Inverse => "inverse",
            MapKind::OrbitFlip => "orbit-flip",
            MapKind::Generic => "generic",
        }
    }

    /// Delay-form maps shift coordinates, so a period-n orbit is fixed by n scalars.
    pub fn is_delay_form(self) -> bool {
        matches!(self, MapKind::Forward | MapKind::Inverse)
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(MapKind::Forward),
            "inverse" => Ok(MapKind::Inverse),
            "orbit-flip" | "limit-a" => Ok(MapKind::OrbitFlip),
            "generic" | "limit-b" => Ok(MapKind::Generic),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }
}

/// A map together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HenonMap {
    Forward(MapParams),
    Inverse(InvParams),
    /// `(X1, X2, Y) -> (-B X2 + M2 Y, Y, M1 - X1 - Y^2)`
    OrbitFlip(MapParams),
    /// `(X1, X2, Y) -> (Y, X1, M1 + M2 X1 + B X2 - Y^2)`
    Generic(MapParams),
}

impl HenonMap {
    /// Builds a map from its kind and the raw parameter triple
    /// `(M1, M2, B)` (or `(M1^, M2^, B^)` for the inverse map).
    pub fn from_triple(kind: MapKind, t: [f64; 3]) -> Self {
        let p = MapParams::new(t[0], t[1], t[2]);
        match kind {
            MapKind::Forward => HenonMap::Forward(p),
            MapKind::Inverse => HenonMap::Inverse(InvParams::new(t[0], t[1], t[2])),
            MapKind::OrbitFlip => HenonMap::OrbitFlip(p),
            MapKind::Generic => HenonMap::Generic(p),
        }
    }

    pub fn kind(&self) -> MapKind {
        match self {
            HenonMap::Forward(_) => MapKind::Forward,
            HenonMap::Inverse(_) => MapKind::Inverse,
            HenonMap::OrbitFlip(_) => MapKind::OrbitFlip,
            HenonMap::Generic(_) => MapKind::Generic,
        }
    }

    pub fn triple(&self) -> [f64; 3] {
        match *self {
            HenonMap::Inverse(q) => [q.m1h, q.m2h, q.bh],
            HenonMap::Forward(p) | HenonMap::OrbitFlip(p) | HenonMap::Generic(p) => [p.m1, p.m2, p.b],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b, c] = self.triple();
        check_triple(a, b, c)
    }

    /// The constant Jacobian determinant of the map.
    pub fn det(&self) -> f64 {
        self.triple()[2]
    }

    pub fn step(&self, s: &State3) -> State3 {
        match *self {
            HenonMap::Forward(p) => henon3d_step(s, &p),
            HenonMap::Inverse(q) => henon3d_inv_step(s, &q),
            HenonMap::OrbitFlip(p) => limit_map_step(LimitVariant::OrbitFlip, s, &p),
            HenonMap::Generic(p) => limit_map_step(LimitVariant::Generic, s, &p),
        }
    }

    pub fn jacobian(&self, s: &State3) -> Mat3 {
        match *self {
            HenonMap::Forward(p) => Mat3::new(
                0.0,
                1.0,
                0.0, //
                0.0,
                0.0,
                1.0, //
                p.b,
                p.m2,
                -2.0 * s.z,
            ),
            HenonMap::Inverse(q) => Mat3::new(
                0.0,
                1.0,
                0.0, //
                0.0,
                0.0,
                1.0, //
                q.bh,
                -2.0 * s.y,
                q.m2h,
            ),
            HenonMap::OrbitFlip(p) => Mat3::new(
                0.0,
                -p.b,
                p.m2, //
                0.0,
                0.0,
                1.0, //
                -1.0,
                0.0,
                -2.0 * s.z,
            ),
            HenonMap::Generic(p) => Mat3::new(
                0.0,
                0.0,
                1.0, //
                1.0,
                0.0,
                0.0, //
                p.m2,
                p.b,
                -2.0 * s.z,
            ),
        }
    }

    /// Exact 2-jet. The only second derivative is `-2` in the third
    /// component, with respect to `z` (or `y` for the inverse map).
    pub fn jet2(&self, s: &State3) -> Jet2 {
        let mut hess = [Mat3::zeros(); 3];
        match self {
            HenonMap::Inverse(_) => hess[2][(1, 1)] = -2.0,
            _ => hess[2][(2, 2)] = -2.0,
        }
        Jet2 { value: self.step(s), jac: self.jacobian(s), hess }
    }
}

pub fn henon3d_step(s: &State3, p: &MapParams) -> State3 {
    State3::new(s.y, s.z, p.m1 + p.b * s.x + p.m2 * s.y - s.z * s.z)
}

pub fn henon3d_inv_step(s: &State3, q: &InvParams) -> State3 {
    State3::new(s.y, s.z, q.m1h + q.bh * s.x + q.m2h * s.z - s.y * s.y)
}

/// Exact inverse of [`henon3d_step`].
pub fn henon3d_preimage(s: &State3, p: &MapParams) -> State3 {
    State3::new((s.z - p.m1 - p.m2 * s.x + s.y * s.y) / p.b, s.x, s.y)
}

/// `B^ = 1/B, M1^ = M1/B^2, M2^ = -M2/B`.
pub fn param_correspondence(p: &MapParams) -> Result<InvParams> {
    p.validate()?;
    Ok(InvParams::new(p.m1 / (p.b * p.b), -p.m2 / p.b, 1.0 / p.b))
}

/// Coordinate change conjugating the inverse of the forward map with the
/// inverse-type map: reverse the coordinates and scale by `-1/B`.
pub fn reversal_chart(s: &State3, p: &MapParams) -> State3 {
    let c = -1.0 / p.b;
    State3::new(c * s.z, c * s.y, c * s.x)
}

/// Euclidean distance between `C(H^-1(s))` and `H^_{p^}(C(s))`, where `C`
/// is [`reversal_chart`] and `p^` is [`param_correspondence`] of `p`.
pub fn inverse_conjugacy_defect(p: &MapParams, s: &State3) -> Result<f64> {
    let q = param_correspondence(p)?;
    let lhs = reversal_chart(&henon3d_preimage(s, p), p);
    let rhs = henon3d_inv_step(&reversal_chart(s, p), &q);
    Ok((lhs - rhs).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitVariant {
    OrbitFlip,
    Generic,
}

impl FromStr for LimitVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orbit-flip" => Ok(LimitVariant::OrbitFlip),
            "generic" => Ok(LimitVariant::Generic),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }
}

/// Limit return maps, in coordinates `(X1, X2, Y)`.
pub fn limit_map_step(variant: LimitVariant, s: &State3, p: &MapParams) -> State3 {
    let (x1, x2, y) = (s.x, s.y, s.z);
    match variant {
        LimitVariant::OrbitFlip => State3::new(-p.b * x2 + p.m2 * y, y, p.m1 - x1 - y * y),
        LimitVariant::Generic => State3::new(y, x1, p.m1 + p.b * x2 + p.m2 * x1 - y * y),
    }
}

/// Takes orbit-flip coordinates to generic-variant coordinates: with
/// `W = (X1 - M2 X2) / (-B)` the state becomes `(X2, W, Y)`, and the
/// orbit-flip map turns into the generic one with `M2` replaced by `-M2`.
pub fn orbit_flip_to_generic(s: &State3, p: &MapParams) -> State3 {
    State3::new(s.y, (s.x - p.m2 * s.y) / (-p.b), s.z)
}

/// Value, Jacobian and Hessians of a map at a point.
/// `hess[i][(j, k)]` is `d^2 F_i / dx_j dx_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: State3,
    pub jac: Mat3,
    pub hess: [Mat3; 3],
}

impl Jet2 {
    /// Jet of the identity at `x`.
    pub fn identity(x: State3) -> Self {
        Jet2 { value: x, jac: Mat3::identity(), hess: [Mat3::zeros(); 3] }
    }

    /// Second-order chain rule: the jet of `outer ∘ inner`, where `outer`
    /// is the jet of the outer map taken at `inner.value`.
    pub fn compose(outer: &Jet2, inner: &Jet2) -> Jet2 {
        let jac = outer.jac * inner.jac;
        let mut hess = [Mat3::zeros(); 3];
        for (i, h) in hess.iter_mut().enumerate() {
            let mut acc = inner.jac.transpose() * outer.hess[i] * inner.jac;
            for l in 0..3 {
                let d = outer.jac[(i, l)];
                if d != 0.0 {
                    acc += inner.hess[l] * d;
                }
            }
            *h = acc;
        }
        Jet2 { value: outer.value, jac, hess }
    }

    /// Second-order Taylor polynomial minus the constant term, evaluated at
    /// displacement `d`.
    pub fn taylor_increment(&self, d: &State3) -> State3 {
        let quad = State3::from_fn(|i, _| 0.5 * d.dot(&(self.hess[i] * d)));
        self.jac * d + quad
    }
}

/// The 2x2 linear part `[[lambda, 1], [mu2, lambda]]` of the Belyakov
/// transition between a saddle and a saddle-focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BelyakovBlock {
    pub lambda: f64,
    pub mu2: f64,
}

impl BelyakovBlock {
    /// Only `lambda > 0` is supported; the angle convention is not defined
    /// for a negative double multiplier.
    pub fn new(lambda: f64, mu2: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu2.is_finite()) || lambda <= 0.0 {
            return Err(Error::InvalidParameter("Belyakov block requires finite lambda > 0".into()));
        }
        if mu2.abs() >= lambda * lambda {
            return Err(Error::InvalidParameter(format!(
                "|mu2| = {} must be below lambda^2 = {}",
                mu2.abs(),
                lambda * lambda
            )));
        }
        Ok(Self { lambda, mu2 })
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.lambda, 1.0, self.mu2, self.lambda)
    }

    /// Hyperbolic (`mu2 > 0`) or trigonometric (`mu2 < 0`) angle.
    pub fn angle(&self) -> f64 {
        let s = self.mu2.abs().sqrt();
        if self.mu2 >= 0.0 {
            (s / self.lambda).atanh()
        } else {
            -(s / self.lambda).atan()
        }
    }

    /// Closed-form `A^k`. At `mu2 = 0` the off-diagonal factor takes its
    /// continuous limit `S_k = k / lambda`.
    pub fn power(&self, k: u32) -> Matrix2<f64> {
        if k == 0 {
            return Matrix2::identity();
        }
        let kf = f64::from(k);
        let lam = self.lambda;
        let phi = self.angle();
        let (c, s) = if self.mu2 > 0.0 {
            ((kf * phi).cosh(), (kf * phi).sinh() / self.mu2.sqrt())
        } else if self.mu2 < 0.0 {
            ((kf * phi).cos(), -(kf * phi).sin() / (-self.mu2).sqrt())
        } else {
            (1.0, kf / lam)
        };
        let scale = lam.powi(k as i32) * (1.0 - self.mu2 / (lam * lam)).powf(kf / 2.0);
        Matrix2::new(c, s, self.mu2 * s, c) * scale
    }
}

pub fn belyakov_power(blk: &BelyakovBlock, k: u32) -> Matrix2<f64> {
    blk.power(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SMParams {
    pub lambda: f64,
    pub alpha: f64,
}

impl SMParams {
    pub const fn new(lambda: f64, alpha: f64) -> Self {
        Self { lambda, alpha }
    }

    /// Nontrivial equilibria `(±sqrt(alpha), 0, 1)`.
    pub fn equilibria(&self) -> Option<[State3; 2]> {
        (self.alpha > 0.0).then(|| {
            let r = self.alpha.sqrt();
            [State3::new(r, 0.0, 1.0), State3::new(-r, 0.0, 1.0)]
        })
    }
}

/// Shimizu–Morioka vector field `(Y, X(1 - Z) - lambda Y, -alpha Z + X^2)`.
pub fn sm_field(s: &State3, q: &SMParams) -> State3 {
    State3::new(s.y, s.x * (1.0 - s.z) - q.lambda * s.y, -q.alpha * s.z + s.x * s.x)
}

pub fn sm_jacobian(s: &State3, q: &SMParams) -> Mat3 {
    Mat3::new(
        0.0,
        1.0,
        0.0, //
        1.0 - s.z,
        -q.lambda,
        -s.x, //
        2.0 * s.x,
        0.0,
        -q.alpha,
    )
}
