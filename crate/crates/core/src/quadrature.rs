//! Adaptive Simpson quadrature for matrix-valued integrands.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Absolute tolerance on the operator norm of the accumulated error.
    pub tolerance: f64,
    /// Intervals are always split at least this many times.
    pub min_depth: u32,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tolerance: 1e-11, min_depth: 5, max_depth: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: CMat,
    /// Sum of the local Richardson error estimates (Frobenius norm).
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: CMat,
    fm: CMat,
    fb: CMat,
    whole: CMat,
}

fn simpson(a: f64, b: f64, fa: &CMat, fm: &CMat, fb: &CMat) -> CMat {
    (fa + fm * c(4.0, 0.0) + fb) * c((b - a) / 6.0, 0.0)
}

/// `∫_a^b f(x) dx` by adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> CMat,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut value = CMat::zeros(fa.nrows(), fa.ncols());
    let mut error_estimate = 0.0;
    let mut evaluations = 3;
    // explicit stack: (panel, tolerance, depth)
    let mut stack = vec![(Panel { a, b, fa, fm, fb, whole }, cfg.tolerance, 0u32)];
    while let Some((p, tol, depth)) = stack.pop() {
        let mid = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + mid));
        let frm = f(0.5 * (mid + p.b));
        evaluations += 2;
        let left = simpson(p.a, mid, &p.fa, &flm, &p.fm);
        let right = simpson(mid, p.b, &p.fm, &frm, &p.fb);
        let refined = &left + &right;
        let delta = &refined - &p.whole;
        let err = delta.norm() / 15.0;
        if depth >= cfg.min_depth && err <= tol {
            value += refined + delta * c(1.0 / 15.0, 0.0);
            error_estimate += err;
            continue;
        }
        if depth >= cfg.max_depth {
            return Err(Error::Numerical {
                message: format!("quadrature did not converge on [{}, {}]", p.a, p.b),
                residual: err,
            });
        }
        stack.push((
            Panel { a: mid, b: p.b, fa: p.fm.clone(), fm: frm, fb: p.fb, whole: right },
            0.5 * tol,
            depth + 1,
        ));
        stack.push((Panel { a: p.a, b: mid, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * tol, depth + 1));
    }
    Ok(QuadResult { value, error_estimate, evaluations })
}
