//! Levenberg-Marquardt for small dense residual systems.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    /// Convergence threshold on the residual ∞-norm (and on the relative step).
    pub tol: f64,
    pub max_iter: usize,
    pub lambda0: f64,
    /// Factor applied to λ on a rejected step; its inverse on an accepted one.
    pub lambda_factor: f64,
    pub lambda_max: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            tol: 1e-10,
            max_iter: 200,
            lambda0: 1e-3,
            lambda_factor: 10.0,
            lambda_max: 1e16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// ∞-norm of the residual at `x`.
    pub residual_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LmError {
    #[error("no convergence after {} iterations (residual {:.3e})", .0.iterations, .0.residual_norm)]
    MaxIterExceeded(Box<LmOutcome>),
    #[error("damped normal matrix is singular")]
    SingularSystem,
    #[error("residual is not finite at the starting point")]
    NonFiniteStart,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimises `‖r(x)‖²` from `x0`. The best iterate is carried in
/// `MaxIterExceeded` when the iteration budget runs out.
pub fn levenberg_marquardt(
    residual: impl Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    x0: DVector<f64>,
    opts: &LmOptions,
) -> Result<LmOutcome, LmError> {
    let mut x = x0;
    let mut r = residual(&x);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(LmError::NonFiniteStart);
    }
    let mut lambda = opts.lambda0;
    let mut jac = jacobian(&x);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if inf_norm(&r) <= opts.tol {
            return Ok(LmOutcome {
                residual_norm: inf_norm(&r),
                x,
                iterations,
                converged: true,
            });
        }
        iterations += 1;
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &r;

        let step = loop {
            let mut damped = a.clone();
            for i in 0..damped.nrows() {
                let d = a[(i, i)].max(1e-300);
                damped[(i, i)] += lambda * d;
            }
            if let Some(ch) = damped.cholesky() {
                let s = ch.solve(&(-&g));
                if s.iter().all(|v| v.is_finite()) {
                    break s;
                }
            }
            lambda *= opts.lambda_factor;
            if lambda > opts.lambda_max {
                return Err(LmError::SingularSystem);
            }
        };

        let candidate = &x + &step;
        let r_new = residual(&candidate);
        let cost_new = r_new.norm_squared();
        let small_step = step.norm() <= opts.tol * (1.0 + x.norm());
        let accepted = cost_new.is_finite() && cost_new < cost;
        if accepted {
            x = candidate;
            r = r_new;
            cost = cost_new;
            jac = jacobian(&x);
            lambda = (lambda / opts.lambda_factor).max(1e-300);
        } else {
            lambda *= opts.lambda_factor;
        }
        // a damped step shrinks with λ, so after a rejection only the
        // undamped step says whether x is stationary
        let converged_by_step = if accepted {
            small_step
        } else {
            match a.clone().cholesky().map(|ch| ch.solve(&(-&g))) {
                Some(gn) if gn.norm() <= opts.tol * (1.0 + x.norm()) => {
                    // the cost can no longer resolve the step; take it as is
                    let polished = &x + &gn;
                    let r_pol = residual(&polished);
                    if r_pol.norm_squared() <= cost * (1.0 + 1e-12) {
                        x = polished;
                        r = r_pol;
                    }
                    true
                }
                _ => false,
            }
        };
        if converged_by_step {
            return Ok(LmOutcome {
                residual_norm: inf_norm(&r),
                x,
                iterations,
                converged: true,
            });
        }
        if lambda > opts.lambda_max {
            // stalled: no damping level reduces the cost any more
            break;
        }
    }

    let out = LmOutcome {
        residual_norm: inf_norm(&r),
        converged: inf_norm(&r) <= opts.tol,
        x,
        iterations,
    };
    if out.converged {
        Ok(out)
    } else {
        Err(LmError::MaxIterExceeded(Box::new(out)))
    }
}
