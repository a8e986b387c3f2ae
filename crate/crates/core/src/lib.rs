//! 1-bit compressive data gathering for sensor readings.
//!
//! A sensor window `x` of length `n` is encoded as `m` sign bits of `Φx` plus
//! the scalar `‖x‖₂`. The collector rebuilds the shared Gaussian matrix from
//! `(n, m, seed)`, recovers a unit-norm DCT coefficient estimate with a 1-bit
//! solver and restores scale with the transmitted norm.
//!
//! Solvers:
//! - [`solvers::biht`]: binary iterative hard thresholding with known sparsity.
//! - [`solvers::bbiht`]: blind BIHT, sweeps sparsity levels and picks one from
//!   the row variances of the stacked solutions.
//! - [`solvers::fpc_1bit`]: fixed-point continuation on the relaxed
//!   ℓ1 + one-sided quadratic model.

pub mod datasets;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod solvers;
pub mod transform;
pub mod wire;

pub use encoder::{encode, sign_fn, SignMeasurements};
pub use error::{Error, Result};
pub use solvers::{reconstruct, SolverSpec, SparseEstimate};
pub use transform::{build_ensemble, SensingEnsemble};
