use ndarray::{Array1, Array2, Zip};

use super::{check_problem, finish, hamming_error, l2_norm, SparseEstimate};
use crate::error::{Error, Result};

/// Continuation schedule for the relaxed model
/// `min ‖s‖₁ + λ·Σ f((b∘As)_i)` on the unit sphere, `f(x) = x²/2` for `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpcConfig {
    pub lambda0: f64,
    pub lambda_growth: f64,
    pub stages: usize,
    pub inner_iters: usize,
    pub grad_step: f64,
    /// Inner loop stops once `‖s_new − s‖₂` drops below this.
    pub tol: f64,
}

impl Default for FpcConfig {
    fn default() -> Self {
        Self {
            lambda0: 1.0,
            lambda_growth: 2.0,
            stages: 10,
            inner_iters: 200,
            grad_step: 1.0,
            tol: 1e-6,
        }
    }
}

impl FpcConfig {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lambda0) || !positive(self.grad_step) || !positive(self.tol) {
            return Err(Error::invalid(
                "lambda0, grad_step and tol must be positive",
            ));
        }
        if !(self.lambda_growth > 1.0 && self.lambda_growth.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda_growth must exceed 1, got {}",
                self.lambda_growth
            )));
        }
        if self.stages == 0 || self.inner_iters == 0 {
            return Err(Error::invalid("stages and inner_iters must be at least 1"));
        }
        Ok(())
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// 1-bit fixed-point continuation.
///
/// Starts from the normalized back-projection `Aᵀb`. Each inner step takes a
/// gradient step on the one-sided penalty, `g = Aᵀ(b ∘ min(b∘As, 0))`, shrinks
/// by `grad_step/λ` and projects back onto the sphere. A stage ends early when
/// the iterate settles or the shrinkage wipes out every entry; `λ` then grows.
/// Returns the most consistent iterate seen (latest on ties).
pub fn fpc_1bit(a: &Array2<f64>, b: &[i8], cfg: &FpcConfig) -> Result<SparseEstimate> {
    let bf = check_problem(a, b)?;
    cfg.validate()?;
    let n = a.ncols();

    let mut s = a.t().dot(&bf);
    let norm = l2_norm(&s);
    if norm == 0.0 || !norm.is_finite() {
        return Ok(finish(a, b, Array1::zeros(n), n, 0, "fpc"));
    }
    s /= norm;

    let mut best_err = hamming_error(a, s.view(), b);
    let mut best = s.clone();
    let mut lambda = cfg.lambda0;
    let mut iterations = 0;
    for _ in 0..cfg.stages {
        let threshold = cfg.grad_step / lambda;
        for _ in 0..cfg.inner_iters {
            iterations += 1;
            let mut y = a.dot(&s);
            Zip::from(&mut y)
                .and(&bf)
                .for_each(|y, &bi| *y = bi * (bi * *y).min(0.0));
            let grad = a.t().dot(&y);

            let mut next = &s - &(grad * cfg.grad_step);
            next.mapv_inplace(|v| soft_threshold(v, threshold));
            let next_norm = l2_norm(&next);
            if next_norm == 0.0 {
                break;
            }
            next /= next_norm;

            let change = l2_norm(&(&next - &s));
            s = next;
            let err = hamming_error(a, s.view(), b);
            if err <= best_err {
                best_err = err;
                best.assign(&s);
            }
            if change < cfg.tol {
                break;
            }
        }
        lambda *= cfg.lambda_growth;
    }
    let support = best.iter().filter(|v| **v != 0.0).count();
    Ok(finish(a, b, best, support, iterations, "fpc"))
}
