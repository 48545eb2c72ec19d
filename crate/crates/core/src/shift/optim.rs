//! Small dense BFGS quasi-Newton minimizer for the 2-D shift objective.

use crate::Result;
use nalgebra::{Matrix2, Vector2};

pub(crate) struct OptimOutcome {
    pub x: Vector2<f64>,
    pub value: f64,
    pub converged: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

/// Minimizes a twice-differentiable objective from `x0` using BFGS with a
/// backtracking line search. Convergence when the gradient infinity norm
/// drops below `grad_tol`. Objective errors during the line search are
/// treated as infinite values; an error at the start point propagates.
pub(crate) fn minimize_bfgs<F>(
    mut f: F,
    x0: Vector2<f64>,
    grad_tol: f64,
    max_iters: usize,
) -> Result<OptimOutcome>
where
    F: FnMut(&Vector2<f64>) -> Result<(f64, Vector2<f64>)>,
{
    let mut x = x0;
    let (mut value, mut grad) = f(&x)?;
    let mut h_inv = Matrix2::identity();

    for _ in 0..max_iters {
        if grad.amax() < grad_tol {
            return Ok(OptimOutcome {
                x,
                value,
                converged: true,
            });
        }
        let mut dir = -(h_inv * grad);
        if dir.dot(&grad) >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            h_inv = Matrix2::identity();
            dir = -grad;
        }

        let slope = grad.dot(&dir);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = x + dir * step;
            match f(&candidate) {
                Ok((v, g)) if v <= value + ARMIJO_C1 * step * slope => {
                    accepted = Some((candidate, v, g));
                    break;
                }
                _ => step *= 0.5,
            }
        }
        let Some((x_new, v_new, g_new)) = accepted else {
            // No acceptable step: treat the current point as the optimum.
            return Ok(OptimOutcome {
                x,
                value,
                converged: grad.amax() < grad_tol,
            });
        };

        let s = x_new - x;
        let y = g_new - grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let i = Matrix2::identity();
            let left = i - (s * y.transpose()) * rho;
            let right = i - (y * s.transpose()) * rho;
            h_inv = left * h_inv * right + (s * s.transpose()) * rho;
        }

        x = x_new;
        value = v_new;
        grad = g_new;
    }

    Ok(OptimOutcome {
        x,
        value,
        converged: grad.amax() < grad_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minimizes_shifted_quadratic() {
        let f = |x: &Vector2<f64>| {
            let dx = x[0] - 1.5;
            let dy = x[1] + 0.75;
            Ok((
                2.0 * dx * dx + 0.5 * dy * dy + dx * dy,
                Vector2::new(4.0 * dx + dy, dy + dx),
            ))
        };
        let out = minimize_bfgs(f, Vector2::new(5.0, -5.0), 1e-9, 100).unwrap();
        assert!(out.converged);
        assert_relative_eq!(out.x[0], 1.5, epsilon = 1e-6);
        assert_relative_eq!(out.x[1], -0.75, epsilon = 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock_like_valley() {
        let f = |x: &Vector2<f64>| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 10.0 * (b - a * a).powi(2);
            let g = Vector2::new(
                -2.0 * (1.0 - a) - 40.0 * a * (b - a * a),
                20.0 * (b - a * a),
            );
            Ok((v, g))
        };
        let out = minimize_bfgs(f, Vector2::new(-1.2, 1.0), 1e-8, 300).unwrap();
        assert_relative_eq!(out.x[0], 1.0, epsilon = 1e-4);
        assert_relative_eq!(out.x[1], 1.0, epsilon = 1e-4);
    }
}
