//! Browser demo bindings. Each export returns a JSON string for `www/index.html`.

use onebit::datasets::{sparsity_report, Fixture};
use onebit::evaluation::{compression_ratio_1bit, compression_ratio_cs, snr_db};
use onebit::solvers::{bbiht_scan, select_sparsity, BbihtConfig, ScanMode, SolverSpec};
use onebit::transform::{build_ensemble, dct_synthesis_matrix, synthesize};
use onebit::{encode, reconstruct, wire};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct ReconstructionView {
    pub x: Vec<f64>,
    pub xhat: Vec<f64>,
    pub snr_db: f64,
    pub k_used: usize,
    pub hamming_fraction: f64,
    pub payload_bytes: usize,
    pub ratio_1bit: f64,
    pub ratio_cs: f64,
}

#[derive(Debug, Serialize)]
pub struct SparsityView {
    pub coefficients: Vec<f64>,
    pub energy_prefix: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ScanView {
    pub row_variances: Vec<f64>,
    pub stop_var: f64,
    pub k_literal: usize,
    pub k_first_exceed: usize,
    /// SNR of the reconstruction from each column of the sweep, indexed by `k − 1`.
    pub snr_by_k: Vec<f64>,
}

/// Encode a fixture window, reconstruct it and compare.
pub fn reconstruction_view(
    fixture: &str,
    n: usize,
    m: usize,
    seed: u64,
    solver: &str,
    k: usize,
) -> onebit::Result<ReconstructionView> {
    let x = Fixture::from_id(fixture)?.window(n)?.values;
    let ensemble = build_ensemble(n, m, seed)?;
    let sm = encode(x.view(), &ensemble)?;
    let spec = SolverSpec::from_name(solver, Some(k))?;
    let rec = reconstruct(&sm, &ensemble, &spec)?;
    Ok(ReconstructionView {
        snr_db: snr_db(x.view(), rec.xhat.view())?,
        x: x.to_vec(),
        xhat: rec.xhat.to_vec(),
        k_used: rec.estimate.k_used,
        hamming_fraction: rec.estimate.hamming_fraction(),
        payload_bytes: wire::payload_len(m),
        ratio_1bit: compression_ratio_1bit(m, n)?,
        ratio_cs: compression_ratio_cs(m, n)?,
    })
}

pub fn sparsity_view(fixture: &str, n: usize) -> onebit::Result<SparsityView> {
    let w = Fixture::from_id(fixture)?.window(n)?;
    let report = sparsity_report(&w, &dct_synthesis_matrix(n)?)?;
    Ok(SparsityView {
        coefficients: report.coefficients.to_vec(),
        energy_prefix: report.energy_prefix.to_vec(),
    })
}

/// The blind sweep's row variances and what each scan mode picks from them.
pub fn scan_view(
    fixture: &str,
    n: usize,
    m: usize,
    seed: u64,
    d: f64,
    stop_var: f64,
) -> onebit::Result<ScanView> {
    let x = Fixture::from_id(fixture)?.window(n)?.values;
    let ensemble = build_ensemble(n, m, seed)?;
    let sm = encode(x.view(), &ensemble)?;
    let cfg = BbihtConfig {
        d,
        stop_var,
        ..Default::default()
    };
    let scan = bbiht_scan(ensemble.a(), sm.b(), &cfg)?;
    let norm = f64::from(sm.norm_x());
    let snr_by_k = scan
        .estimates
        .iter()
        .map(|est| {
            let xhat = synthesize(est.shat.view(), ensemble.psi())? * norm;
            snr_db(x.view(), xhat.view())
        })
        .collect::<onebit::Result<Vec<_>>>()?;
    Ok(ScanView {
        k_literal: select_sparsity(&scan.row_variances, stop_var, ScanMode::Literal),
        k_first_exceed: select_sparsity(&scan.row_variances, stop_var, ScanMode::FirstExceed),
        row_variances: scan.row_variances,
        stop_var,
        snr_by_k,
    })
}

fn to_js<T: Serialize>(result: onebit::Result<T>) -> Result<String, JsValue> {
    result
        .map(|v| serde_json::to_string(&v).expect("view serializes"))
        .map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn reconstruct_fixture(
    fixture: &str,
    n: usize,
    m: usize,
    seed: u32,
    solver: &str,
    k: usize,
) -> Result<String, JsValue> {
    to_js(reconstruction_view(
        fixture,
        n,
        m,
        u64::from(seed),
        solver,
        k,
    ))
}

#[wasm_bindgen]
pub fn fixture_sparsity(fixture: &str, n: usize) -> Result<String, JsValue> {
    to_js(sparsity_view(fixture, n))
}

#[wasm_bindgen]
pub fn sparsity_scan(
    fixture: &str,
    n: usize,
    m: usize,
    seed: u32,
    d: f64,
    stop_var: f64,
) -> Result<String, JsValue> {
    to_js(scan_view(fixture, n, m, u64::from(seed), d, stop_var))
}
