//! 1-bit reconstruction algorithms and the collector-side framework that maps a
//! unit-norm coefficient estimate back to readings.

mod bbiht;
mod biht;
mod fpc;

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1};

pub use bbiht::{
    bbiht, bbiht_scan, max_sparsity, select_sparsity, BbihtConfig, ScanMode, SparsityScan,
};
pub use biht::{biht, BihtConfig, BihtSchedule};
pub use fpc::{fpc_1bit, FpcConfig};

use crate::encoder::{sign_f64, SignMeasurements};
use crate::error::{Error, Result};
use crate::transform::{synthesize, SensingEnsemble};

/// A coefficient estimate on the unit sphere.
///
/// `k_used == 0` marks the zero fallback: the solver never left the origin, so
/// `shat` is all zeros and cannot be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    pub shat: Array1<f64>,
    pub k_used: usize,
    pub iterations: usize,
    /// Number of measurements where `sign((A·shat)_i) != b_i`.
    pub hamming_error: usize,
    /// Number of measurements `m` the estimate was checked against.
    pub measurement_count: usize,
    pub solver_name: &'static str,
}

impl SparseEstimate {
    pub fn is_zero_fallback(&self) -> bool {
        self.k_used == 0
    }

    pub fn hamming_fraction(&self) -> f64 {
        if self.measurement_count == 0 {
            0.0
        } else {
            self.hamming_error as f64 / self.measurement_count as f64
        }
    }
}

/// Keeps the `k` largest-magnitude entries of `v`; equal magnitudes keep the lower index.
pub fn hard_threshold(v: ArrayView1<'_, f64>, k: usize) -> Result<Array1<f64>> {
    let n = v.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sparsity {k} outside 1..={n}")));
    }
    if k == n {
        return Ok(v.to_owned());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.select_nth_unstable_by(k - 1, |&i, &j| {
        v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j))
    });
    let mut out = Array1::zeros(n);
    for &i in &order[..k] {
        out[i] = v[i];
    }
    Ok(out)
}

/// Unbiased sample variance (divisor `L − 1`).
pub fn sample_variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::invalid(format!(
            "variance needs at least 2 values, got {}",
            v.len()
        )));
    }
    let len = v.len() as f64;
    let mean = v.iter().sum::<f64>() / len;
    Ok(v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0))
}

/// Count of measurements inconsistent with `sign(A·s)`.
pub fn hamming_error(a: &Array2<f64>, s: ArrayView1<'_, f64>, b: &[i8]) -> usize {
    a.dot(&s)
        .iter()
        .zip(b)
        .filter(|(&y, &bi)| sign_f64(y) != f64::from(bi))
        .count()
}

pub(crate) fn check_problem(a: &Array2<f64>, b: &[i8]) -> Result<Array1<f64>> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty sensing matrix"));
    }
    if b.len() != m {
        return Err(Error::invalid(format!(
            "{} signs for a matrix with {m} rows",
            b.len()
        )));
    }
    if let Some(pos) = b.iter().position(|&v| v != 1 && v != -1) {
        return Err(Error::invalid(format!(
            "sign {pos} is {} (expected ±1)",
            b[pos]
        )));
    }
    Ok(b.iter().map(|&v| f64::from(v)).collect())
}

pub(crate) fn l2_norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Normalizes the chosen iterate, or returns the zero fallback.
pub(crate) fn finish(
    a: &Array2<f64>,
    b: &[i8],
    best: Array1<f64>,
    k: usize,
    iterations: usize,
    solver_name: &'static str,
) -> SparseEstimate {
    let norm = l2_norm(&best);
    let (shat, k_used) = if norm > 0.0 && norm.is_finite() {
        (best / norm, k)
    } else {
        (Array1::zeros(a.ncols()), 0)
    };
    let hamming_error = hamming_error(a, shat.view(), b);
    SparseEstimate {
        shat,
        k_used,
        iterations,
        hamming_error,
        solver_name,
        measurement_count: b.len(),
    }
}

/// Solver selection with its configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    Biht(BihtConfig),
    Bbiht(BbihtConfig),
    Fpc(FpcConfig),
}

impl SolverSpec {
    pub const NAMES: [&'static str; 3] = ["biht", "bbiht", "fpc"];

    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::Biht(_) => "biht",
            SolverSpec::Bbiht(_) => "bbiht",
            SolverSpec::Fpc(_) => "fpc",
        }
    }

    /// Default configuration for a solver name. `biht` needs the sparsity level.
    pub fn from_name(name: &str, k: Option<usize>) -> Result<Self> {
        match name {
            "biht" => {
                let k = k.ok_or_else(|| {
                    Error::Config("solver biht requires a sparsity level k".into())
                })?;
                Ok(SolverSpec::Biht(BihtConfig::new(k)))
            }
            "bbiht" => Ok(SolverSpec::Bbiht(BbihtConfig::default())),
            "fpc" | "fpc_1bit" => Ok(SolverSpec::Fpc(FpcConfig::default())),
            other => Err(Error::Config(format!(
                "unknown solver {other:?}; valid solvers: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn solve(&self, a: &Array2<f64>, b: &[i8]) -> Result<SparseEstimate> {
        match self {
            SolverSpec::Biht(cfg) => biht(a, b, cfg),
            SolverSpec::Bbiht(cfg) => bbiht(a, b, cfg),
            SolverSpec::Fpc(cfg) => fpc_1bit(a, b, cfg),
        }
    }
}

impl fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimated readings and the coefficient estimate they came from.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub xhat: Array1<f64>,
    pub estimate: SparseEstimate,
}

/// Collector side: solve for the unit-norm coefficients, synthesize and rescale
/// by the transmitted norm.
pub fn reconstruct(
    sm: &SignMeasurements,
    ensemble: &SensingEnsemble,
    solver: &SolverSpec,
) -> Result<Reconstruction> {
    if (sm.n(), sm.m(), sm.seed()) != (ensemble.n(), ensemble.m(), ensemble.seed()) {
        return Err(Error::EnsembleMismatch(format!(
            "measurements carry (n={}, m={}, seed={}) but ensemble is (n={}, m={}, seed={})",
            sm.n(),
            sm.m(),
            sm.seed(),
            ensemble.n(),
            ensemble.m(),
            ensemble.seed()
        )));
    }
    let estimate = solver.solve(ensemble.a(), sm.b())?;
    let norm_x = f64::from(sm.norm_x());
    let xhat = if norm_x == 0.0 {
        Array1::zeros(ensemble.n())
    } else {
        synthesize(estimate.shat.view(), ensemble.psi())? * norm_x
    };
    Ok(Reconstruction { xhat, estimate })
}
