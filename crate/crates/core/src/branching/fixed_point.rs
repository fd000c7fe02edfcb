use serde::Serialize;

use super::pgf::OffspringPgf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Stop once the sup-norm step falls below this.
    pub step_tolerance: f64,
    /// Accept the limit only if `‖g(q) − q‖∞` is below this.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            step_tolerance: 1e-13,
            residual_tolerance: 1e-10,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub q: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Every iterate was componentwise no smaller than the last.
    pub monotone: bool,
}

/// Minimal fixed point of `g` in `[0, 1]^r`, by iterating from the origin.
pub fn minimal_fixed_point(g: &impl OffspringPgf, opts: FixedPointOptions) -> Result<FixedPointResult> {
    let r = g.dim();
    let mut q = vec![0.0; r];
    let mut next = vec![0.0; r];
    let mut monotone = true;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        g.eval_into(&q, &mut next);
        iterations += 1;
        let mut step = 0.0f64;
        for (x, y) in q.iter_mut().zip(next.iter_mut()) {
            *y = y.clamp(0.0, 1.0);
            if *y < *x - 4.0 * f64::EPSILON {
                monotone = false;
            }
            step = step.max((*y - *x).abs());
            *x = *y;
        }
        if step < opts.step_tolerance {
            break;
        }
    }
    g.eval_into(&q, &mut next);
    let residual = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if residual > opts.residual_tolerance {
        return Err(Error::Convergence { iterations, residual });
    }
    Ok(FixedPointResult { q, iterations, residual, monotone })
}
