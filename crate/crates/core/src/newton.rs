//! Damped Newton iteration for small dense square systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub max_condition: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol_residual: 1e-12, tol_step: 1e-13, max_iter: 100, max_halvings: 20, max_condition: 1e14 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: DVector<f64>,
    pub iterations: usize,
}

/// Residual accepted when the step has stalled below `tol_step` but the
/// residual sits on its rounding floor above `tol_residual`.
const STALL_RESIDUAL: f64 = 1e-10;

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `f(x) = 0` from `x0`. `jac` must return the Jacobian of `f`.
pub fn solve<F, J>(x0: DVector<f64>, mut f: F, mut jac: J, opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
    J: FnMut(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = x0;
    let mut r = f(&x);
    let mut rn = inf_norm(&r);
    for it in 0..opts.max_iter {
        if rn < opts.tol_residual {
            return Ok(NewtonOutcome { x, residual: r, iterations: it });
        }
        let j = jac(&x);
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let cond = condition_number(&j);
        if !(cond <= opts.max_condition) {
            return Err(Error::SingularJacobian(cond));
        }
        let dx = j.lu().solve(&(-&r)).ok_or(Error::SingularJacobian(f64::INFINITY))?;

        let mut t = 1.0;
        let mut trial = &x + &dx;
        let mut tr = f(&trial);
        let mut trn = inf_norm(&tr);
        let mut halvings = 0;
        while !(trn < rn) && halvings < opts.max_halvings {
            t *= 0.5;
            trial = &x + &dx * t;
            tr = f(&trial);
            trn = inf_norm(&tr);
            halvings += 1;
        }
        if !trn.is_finite() {
            return Err(Error::NonFinite);
        }
        let step = inf_norm(&dx) * t;
        x = trial;
        r = tr;
        rn = trn;
        if step < opts.tol_step * inf_norm(&x).max(1.0) {
            if rn < STALL_RESIDUAL {
                return Ok(NewtonOutcome { x, residual: r, iterations: it + 1 });
            }
            break;
        }
    }
    if rn < opts.tol_residual {
        return Ok(NewtonOutcome { x, residual: r, iterations: opts.max_iter });
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: rn })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_circle_line_intersection() {
        // x^2 + y^2 = 2, x = y  -> (1, 1)
        let out = solve(
            DVector::from_vec(vec![2.0, 0.5]),
            |x| DVector::from_vec(vec![x[0] * x[0] + x[1] * x[1] - 2.0, x[0] - x[1]]),
            |x| DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 2.0 * x[1], 1.0, -1.0]),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12 && (out.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_singular_matrix() {
        let err = solve(
            DVector::from_vec(vec![0.0]),
            |x| DVector::from_vec(vec![x[0] * x[0] + 1.0]),
            |x| DMatrix::from_row_slice(1, 1, &[2.0 * x[0]]),
            &NewtonOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularJacobian(_)));
    }

    #[test]
    fn reports_non_convergence() {
        // x^2 + 1 = 0 has no real root.
        let err = solve(
            DVector::from_vec(vec![0.3]),
            |x| DVector::from_vec(vec![x[0] * x[0] + 1.0]),
            |x| DMatrix::from_row_slice(1, 1, &[2.0 * x[0]]),
            &NewtonOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. } | Error::SingularJacobian(_)));
    }
}
