use ndarray::{Array2, Axis};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{biht, check_problem, sample_variance, BihtConfig, BihtSchedule, SparseEstimate};
use crate::error::{Error, Result};

/// How the row-variance scan picks the sparsity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Every row above the threshold overwrites the choice; the last one wins.
    #[default]
    Literal,
    /// Stop at the first row above the threshold.
    FirstExceed,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ScanMode::Literal),
            "first_exceed" | "first-exceed" => Ok(ScanMode::FirstExceed),
            other => Err(Error::Config(format!(
                "unknown scan mode {other:?}; expected literal or first_exceed"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbihtConfig {
    /// Fraction of `n` swept as candidate sparsity levels, in `(0, 1)`.
    pub d: f64,
    pub stop_var: f64,
    pub scan_mode: ScanMode,
    pub schedule: BihtSchedule,
}

impl Default for BbihtConfig {
    fn default() -> Self {
        Self {
            d: 0.1,
            stop_var: 0.01,
            scan_mode: ScanMode::Literal,
            schedule: BihtSchedule::default(),
        }
    }
}

impl BbihtConfig {
    fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(Error::invalid(format!(
                "d must lie in (0, 1), got {}",
                self.d
            )));
        }
        if !(self.stop_var > 0.0 && self.stop_var.is_finite()) {
            return Err(Error::invalid(format!(
                "stop_var must be positive, got {}",
                self.stop_var
            )));
        }
        self.schedule.validate()
    }
}

/// Number of sparsity levels swept: `round(d·n)`.
pub fn max_sparsity(n: usize, d: f64) -> Result<usize> {
    let max_k = (d * n as f64).round();
    if max_k < 1.0 {
        return Err(Error::invalid(format!(
            "d·n = {} rounds below 1",
            d * n as f64
        )));
    }
    Ok((max_k as usize).min(n))
}

/// The stacked BIHT solutions of a sweep and the statistics the selection reads.
#[derive(Debug, Clone)]
pub struct SparsityScan {
    /// `n × max_K`; column `k−1` is the unit-norm BIHT solution at sparsity `k`.
    pub columns: Array2<f64>,
    pub estimates: Vec<SparseEstimate>,
    /// Sample variance of rows `0..max_K` of `columns`. Empty when `max_K = 1`.
    pub row_variances: Vec<f64>,
}

impl SparsityScan {
    pub fn max_k(&self) -> usize {
        self.estimates.len()
    }

    /// Number of rows whose variance exceeds `stop_var`.
    pub fn crossings(&self, stop_var: f64) -> usize {
        self.row_variances.iter().filter(|&&v| v > stop_var).count()
    }
}

/// Runs BIHT for every `k = 1..=max_K` and computes the row variances.
pub fn bbiht_scan(a: &Array2<f64>, b: &[i8], cfg: &BbihtConfig) -> Result<SparsityScan> {
    check_problem(a, b)?;
    cfg.validate()?;
    let n = a.ncols();
    let max_k = max_sparsity(n, cfg.d)?;

    let solve = |k: usize| {
        biht(
            a,
            b,
            &BihtConfig {
                k,
                schedule: cfg.schedule,
            },
        )
    };
    #[cfg(feature = "parallel")]
    let estimates = (1..=max_k)
        .into_par_iter()
        .map(solve)
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let estimates = (1..=max_k).map(solve).collect::<Result<Vec<_>>>()?;

    let mut columns = Array2::zeros((n, max_k));
    for (mut col, est) in columns.axis_iter_mut(Axis(1)).zip(&estimates) {
        col.assign(&est.shat);
    }
    let row_variances = if max_k >= 2 {
        (0..max_k)
            .map(|i| sample_variance(&columns.row(i).to_vec()))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(SparsityScan {
        columns,
        estimates,
        row_variances,
    })
}

/// Picks the sparsity level from the row variances.
///
/// Row `i` (1-based) with variance above `stop_var` proposes `i − 1`. In
/// [`ScanMode::Literal`] the last proposal wins; in [`ScanMode::FirstExceed`]
/// the first. Starts at 1 and never returns less than 1.
pub fn select_sparsity(row_variances: &[f64], stop_var: f64, mode: ScanMode) -> usize {
    let mut best_k = 1;
    for (idx, &v) in row_variances.iter().enumerate() {
        if v > stop_var {
            best_k = idx; // (idx + 1) − 1
            if mode == ScanMode::FirstExceed {
                break;
            }
        }
    }
    best_k.max(1)
}

/// Blind BIHT: sweep sparsity levels and return the column picked by the
/// row-variance scan.
pub fn bbiht(a: &Array2<f64>, b: &[i8], cfg: &BbihtConfig) -> Result<SparseEstimate> {
    let scan = bbiht_scan(a, b, cfg)?;
    let best_k = select_sparsity(&scan.row_variances, cfg.stop_var, cfg.scan_mode);
    let total_iters: usize = scan.estimates.iter().map(|e| e.iterations).sum();
    let mut chosen = scan
        .estimates
        .into_iter()
        .nth(best_k - 1)
        .expect("best_k within sweep");
    if !chosen.is_zero_fallback() {
        chosen.k_used = best_k;
    }
    chosen.iterations = total_iters;
    chosen.solver_name = "bbiht";
    Ok(chosen)
}
