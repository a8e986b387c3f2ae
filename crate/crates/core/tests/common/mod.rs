#![allow(dead_code)]

use ndarray::Array1;
use onebit::transform::{build_ensemble, SensingEnsemble};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A planted sparse coefficient vector with its measurements.
pub struct Planted {
    pub ensemble: SensingEnsemble,
    pub truth: Array1<f64>,
    pub b: Vec<i8>,
}

pub fn signs(ensemble: &SensingEnsemble, s: &Array1<f64>) -> Vec<i8> {
    ensemble
        .a()
        .dot(s)
        .iter()
        .map(|&y| if y >= 0.0 { 1 } else { -1 })
        .collect()
}

/// Unit-norm `s*` on `support`, magnitudes uniform in [0.3, 1) with random signs.
pub fn planted(
    n: usize,
    m: usize,
    ensemble_seed: u64,
    value_seed: u64,
    support: &[usize],
) -> Planted {
    let ensemble = build_ensemble(n, m, ensemble_seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(value_seed);
    let mut truth = Array1::<f64>::zeros(n);
    for &i in support {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        truth[i] = sign * rng.random_range(0.3..1.0);
    }
    truth /= truth.dot(&truth).sqrt();
    let b = signs(&ensemble, &truth);
    Planted { ensemble, truth, b }
}

/// Planted vector with explicit coefficient values.
pub fn planted_values(n: usize, m: usize, ensemble_seed: u64, entries: &[(usize, f64)]) -> Planted {
    let ensemble = build_ensemble(n, m, ensemble_seed).unwrap();
    let mut truth = Array1::<f64>::zeros(n);
    for &(i, v) in entries {
        truth[i] = v;
    }
    truth /= truth.dot(&truth).sqrt();
    let b = signs(&ensemble, &truth);
    Planted { ensemble, truth, b }
}

pub fn support(v: &Array1<f64>) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] != 0.0).collect()
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn spearman_reference_values() {
    // scipy.stats.spearmanr reference values
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 5.0, 9.0]) - 1.0).abs() < 1e-12);
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    let x: Vec<f64> = (0..20).map(f64::from).collect();
    let mut y = vec![21.93, 21.86, 27.59, 34.35];
    y.extend([37.82; 16]);
    assert!((spearman(&x, &y) - 0.6969353719436839).abs() < 1e-12);
}
