//! Measurement ensemble and sparsifying basis.
//!
//! `Ψ` is the synthesis matrix: a reading is `x = Ψs` and its coefficients are
//! `s = Ψᵀx`. With the DCT basis, `Ψ = Dᵀ` where `D` is the orthonormal DCT-II
//! analysis matrix.
//!
//! `Φ` entries are drawn i.i.d. from `N(0, 1/m)` using [`ChaCha8Rng`] seeded
//! with `seed_from_u64(seed)` and the ziggurat sampler of `rand_distr::Normal`,
//! filled row-major. Both crates document value stability within a release
//! line, so `(n, m, seed)` is enough for the collector to rebuild `Φ`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Largest accepted `m·n`; dense matrices beyond this are not what this crate is for.
const MAX_ENTRIES: usize = 1 << 28;

/// Sparsifying basis used by [`build_ensemble_with_basis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basis {
    #[default]
    Dct,
    /// `Ψ = I`, so `A = Φ`. Mostly useful for tests and canonical-domain signals.
    Identity,
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!(
            "dimensions must be positive, got m={m}, n={n}"
        )));
    }
    match m.checked_mul(n) {
        Some(total) if total <= MAX_ENTRIES => Ok(()),
        _ => Err(Error::invalid(format!(
            "matrix of {m}x{n} entries is too large"
        ))),
    }
}

/// Draws an `m×n` matrix with i.i.d. `N(0, 1/m)` entries. Pure function of its inputs.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<Array2<f64>> {
    check_dims(m, n)?;
    let normal = Normal::new(0.0, (1.0 / m as f64).sqrt())
        .map_err(|e| Error::invalid(format!("normal distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| normal.sample(&mut rng)).collect();
    Ok(Array2::from_shape_vec((m, n), data).expect("shape matches data length"))
}

/// Orthonormal DCT-II synthesis matrix `Ψ` (the transpose of the analysis matrix).
pub fn dct_synthesis_matrix(n: usize) -> Result<Array2<f64>> {
    check_dims(n, n)?;
    let nf = n as f64;
    let dc = (1.0 / nf).sqrt();
    let ac = (2.0 / nf).sqrt();
    // psi[j, i] = D[i, j]
    Ok(Array2::from_shape_fn((n, n), |(j, i)| {
        if i == 0 {
            dc
        } else {
            ac * (PI * (2 * j + 1) as f64 * i as f64 / (2.0 * nf)).cos()
        }
    }))
}

fn check_square_len(len: usize, psi: &Array2<f64>) -> Result<()> {
    let (rows, cols) = psi.dim();
    if rows != cols || rows != len {
        return Err(Error::invalid(format!(
            "vector of length {len} does not match basis of shape {rows}x{cols}"
        )));
    }
    Ok(())
}

/// Coefficients `s = Ψᵀx`.
pub fn analyze(x: ArrayView1<'_, f64>, psi: &Array2<f64>) -> Result<Array1<f64>> {
    check_square_len(x.len(), psi)?;
    Ok(psi.t().dot(&x))
}

/// Reading `x = Ψs`.
pub fn synthesize(s: ArrayView1<'_, f64>, psi: &Array2<f64>) -> Result<Array1<f64>> {
    check_square_len(s.len(), psi)?;
    Ok(psi.dot(&s))
}

/// The `(Φ, Ψ, A = ΦΨ)` triple shared by encoder and collector.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    n: usize,
    m: usize,
    seed: u64,
    phi: Array2<f64>,
    psi: Array2<f64>,
    a: Array2<f64>,
}

impl SensingEnsemble {
    /// Assembles an ensemble from explicit matrices. `phi` must be `m×n` and
    /// `psi` square `n×n`; orthonormality of `psi` is the caller's responsibility.
    pub fn from_parts(phi: Array2<f64>, psi: Array2<f64>, seed: u64) -> Result<Self> {
        let (m, n) = phi.dim();
        check_dims(m, n)?;
        if psi.dim() != (n, n) {
            return Err(Error::invalid(format!(
                "basis shape {:?} does not match Φ with {n} columns",
                psi.dim()
            )));
        }
        let a = phi.dot(&psi);
        Ok(Self {
            n,
            m,
            seed,
            phi,
            psi,
            a,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn phi(&self) -> &Array2<f64> {
        &self.phi
    }

    pub fn psi(&self) -> &Array2<f64> {
        &self.psi
    }

    /// Composite operator `A = ΦΨ`.
    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }
}

/// Builds the DCT ensemble for `(n, m, seed)`.
pub fn build_ensemble(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    build_ensemble_with_basis(n, m, seed, Basis::Dct)
}

pub fn build_ensemble_with_basis(
    n: usize,
    m: usize,
    seed: u64,
    basis: Basis,
) -> Result<SensingEnsemble> {
    let phi = gaussian_matrix(m, n, seed)?;
    let psi = match basis {
        Basis::Dct => dct_synthesis_matrix(n)?,
        Basis::Identity => Array2::eye(n),
    };
    SensingEnsemble::from_parts(phi, psi, seed)
}
