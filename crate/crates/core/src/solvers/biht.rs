use ndarray::{Array1, Array2};

use super::{check_problem, finish, hamming_error, hard_threshold, SparseEstimate};
use crate::encoder::sign_f64;
use crate::error::{Error, Result};

/// Iteration schedule shared by BIHT and the blind sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihtSchedule {
    pub max_iters: usize,
    /// Step `τ`; the update adds `(τ/2)·Aᵀ(b − sign(A s))`.
    pub step_tau: f64,
}

impl Default for BihtSchedule {
    fn default() -> Self {
        Self {
            max_iters: 100,
            step_tau: 1.0,
        }
    }
}

impl BihtSchedule {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.step_tau > 0.0 && self.step_tau.is_finite()) {
            return Err(Error::invalid(format!(
                "step_tau must be positive, got {}",
                self.step_tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihtConfig {
    /// Target sparsity.
    pub k: usize,
    pub schedule: BihtSchedule,
}

impl BihtConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            schedule: BihtSchedule::default(),
        }
    }
}

/// Binary iterative hard thresholding with a known sparsity level.
///
/// Starts from `s = 0`. Since `A·0` carries no sign information, the first
/// update back-projects `b` itself; afterwards
/// `s ← H_k(s + (τ/2)·Aᵀ(b − sign(A s)))`. The iterate with the fewest sign
/// disagreements is kept (earliest on ties) and the loop stops as soon as one
/// is fully consistent.
pub fn biht(a: &Array2<f64>, b: &[i8], cfg: &BihtConfig) -> Result<SparseEstimate> {
    let bf = check_problem(a, b)?;
    let n = a.ncols();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::invalid(format!(
            "sparsity {} outside 1..={n}",
            cfg.k
        )));
    }
    cfg.schedule.validate()?;
    let half_tau = cfg.schedule.step_tau / 2.0;

    let mut s = Array1::<f64>::zeros(n);
    let mut best: Option<(Array1<f64>, usize)> = None;
    let mut iterations = 0;
    for _ in 0..cfg.schedule.max_iters {
        iterations += 1;
        let residual = if s.iter().all(|&v| v == 0.0) {
            bf.clone()
        } else {
            &bf - &a.dot(&s).mapv(sign_f64)
        };
        let step = a.t().dot(&residual) * half_tau;
        s = hard_threshold((&s + &step).view(), cfg.k)?;

        let err = hamming_error(a, s.view(), b);
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((s.clone(), err));
        }
        if err == 0 {
            break;
        }
    }
    let (best, _) = best.expect("at least one iteration");
    Ok(finish(a, b, best, cfg.k, iterations, "biht"))
}
