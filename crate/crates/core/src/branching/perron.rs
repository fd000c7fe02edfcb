//! Dominant eigenvalue of small nonnegative matrices.

use super::MeanMatrix;

/// Coefficients `[1, c1, …, cr]` of `det(λI − M) = λ^r + c1 λ^(r−1) + … + cr`,
/// for `r ≤ 3`.
pub fn characteristic_polynomial(m: &MeanMatrix) -> Vec<f64> {
    let g = |i, j| m.get(i, j);
    match m.dim() {
        0 => vec![1.0],
        1 => vec![1.0, -g(0, 0)],
        2 => vec![1.0, -(g(0, 0) + g(1, 1)), g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)],
        3 => {
            let trace = g(0, 0) + g(1, 1) + g(2, 2);
            let minors = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) + g(0, 0) * g(2, 2)
                - g(0, 2) * g(2, 0)
                + g(1, 1) * g(2, 2)
                - g(1, 2) * g(2, 1);
            let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
            vec![1.0, -trace, minors, -det]
        }
        r => panic!("characteristic polynomial implemented for dimension ≤ 3, got {r}"),
    }
}

fn horner(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Largest real root of the monic cubic `x³ + a x² + b x + c`.
fn largest_cubic_root(a: f64, b: f64, c: f64) -> f64 {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let t = if disc > 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else if p == 0.0 {
        0.0
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        2.0 * r * (arg.acos() / 3.0).cos()
    };
    t - shift
}

/// Spectral radius of a nonnegative matrix of dimension at most 3.
pub fn perron_root(m: &MeanMatrix) -> f64 {
    let coeffs = characteristic_polynomial(m);
    let mut root = match coeffs.len() {
        1 => return 0.0,
        2 => return (-coeffs[1]).max(0.0),
        3 => {
            let (tr, det) = (-coeffs[1], coeffs[2]);
            let disc = (tr * tr - 4.0 * det).max(0.0);
            (tr + disc.sqrt()) / 2.0
        }
        _ => largest_cubic_root(coeffs[1], coeffs[2], coeffs[3]),
    };
    // Newton polish, kept only while the residual shrinks
    let (mut best, _) = horner(&coeffs, root);
    for _ in 0..8 {
        let (p, dp) = horner(&coeffs, root);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let next = root - p / dp;
        let (pn, _) = horner(&coeffs, next);
        if pn.abs() >= best.abs() {
            break;
        }
        best = pn;
        root = next;
    }
    root.max(0.0)
}
