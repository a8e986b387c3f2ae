//! Reconstruction metrics and the multi-trial experiment runner.

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::{Array1, ArrayView1};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::datasets::{Fixture, TraceWindow};
use crate::encoder::encode;
use crate::error::{Error, Result};
use crate::solvers::{reconstruct, SolverSpec};
use crate::transform::build_ensemble;

/// Returned by [`snr_db`] for an exact reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;

/// Bits the accounting charges per raw reading, per classical CS projection and
/// for the norm side channel.
pub const VALUE_BITS: f64 = 24.0;

/// `20·log10(‖x‖₂ / ‖x − x̂‖₂)`, capped at [`SNR_CAP_DB`].
pub fn snr_db(x: ArrayView1<'_, f64>, xhat: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::invalid(format!(
            "lengths differ: {} vs {}",
            x.len(),
            xhat.len()
        )));
    }
    let signal = x.dot(&x).sqrt();
    if signal == 0.0 {
        return Err(Error::invalid("SNR of an all-zero reference is undefined"));
    }
    let diff = &x - &xhat;
    let noise = diff.dot(&diff).sqrt();
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

fn check_ratio_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!(
            "dimensions must be positive, got m={m}, n={n}"
        )));
    }
    Ok(())
}

/// Classical CS: `m` projections of 24 bits against `n` readings of 24 bits.
pub fn compression_ratio_cs(m: usize, n: usize) -> Result<f64> {
    check_ratio_dims(m, n)?;
    Ok(m as f64 / n as f64)
}

/// 1-bit scheme: `m` sign bits plus a 24-bit norm against `n` readings of 24 bits.
pub fn compression_ratio_1bit(m: usize, n: usize) -> Result<f64> {
    check_ratio_dims(m, n)?;
    Ok((m as f64 + VALUE_BITS) / (VALUE_BITS * n as f64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the measurement matrix for one `(m, trial)` cell. Independent of
/// execution order, so concurrent and sequential runs agree.
pub fn trial_seed(master_seed: u64, m: usize, trial_index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ m as u64) ^ trial_index as u64)
}

/// Signal every trial encodes.
#[derive(Debug, Clone)]
pub enum SignalSource {
    Fixture(Fixture),
    Window(TraceWindow),
}

impl SignalSource {
    pub fn id(&self) -> String {
        match self {
            SignalSource::Fixture(f) => format!("fixture:{}", f.id()),
            SignalSource::Window(w) => format!("{}@{}", w.source_id, w.start_index),
        }
    }

    fn signal(&self, n: usize) -> Result<Array1<f64>> {
        match self {
            SignalSource::Fixture(f) => Ok(f.window(n)?.values),
            SignalSource::Window(w) if w.len() == n => Ok(w.values.clone()),
            SignalSource::Window(w) => Err(Error::Config(format!(
                "window has {} readings but experiment n is {n}",
                w.len()
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub source: SignalSource,
    pub solvers: Vec<SolverSpec>,
    /// Measure wall-clock time around each solver call. Off keeps every output
    /// field a pure function of the config; timings are then reported as 0.
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Default sweep `m = 25, 50, …, 500` at `n = 250`.
    pub fn default_m_grid() -> Vec<usize> {
        (1..=20).map(|i| 25 * i).collect()
    }

    pub fn new(source: SignalSource, solvers: Vec<SolverSpec>) -> Self {
        Self {
            n: 250,
            m_grid: Self::default_m_grid(),
            trials: 20,
            master_seed: 1,
            source,
            solvers,
            record_timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.m_grid.is_empty() {
            return Err(Error::Config("m grid is empty".into()));
        }
        if self.m_grid.contains(&0) {
            return Err(Error::Config("m grid contains 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trial count must be positive".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solvers selected".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub solver_name: String,
    pub m: usize,
    pub trial_index: usize,
    pub snr_db: f64,
    pub elapsed_seconds: f64,
    pub k_used: usize,
    pub hamming_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub solver: String,
    pub m: usize,
    pub trials: usize,
    pub mean_snr_db: f64,
    pub std_snr_db: f64,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub ratio_cs: f64,
    pub ratio_1bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub dataset: String,
    pub solvers: Vec<String>,
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub rows: Vec<ReportRow>,
    pub trials: Vec<TrialResult>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, var.sqrt())
}

fn run_cell(
    cfg: &ExperimentConfig,
    x: &Array1<f64>,
    m: usize,
    trial_index: usize,
) -> Result<Vec<TrialResult>> {
    let ensemble = build_ensemble(cfg.n, m, trial_seed(cfg.master_seed, m, trial_index))?;
    let sm = encode(x.view(), &ensemble)?;
    cfg.solvers
        .iter()
        .map(|solver| {
            let started = cfg.record_timing.then(Instant::now);
            let rec = reconstruct(&sm, &ensemble, solver)?;
            let elapsed_seconds = started.map_or(0.0, |t| t.elapsed().as_secs_f64());
            Ok(TrialResult {
                solver_name: solver.name().to_owned(),
                m,
                trial_index,
                snr_db: snr_db(x.view(), rec.xhat.view())?,
                elapsed_seconds,
                k_used: rec.estimate.k_used,
                hamming_fraction: rec.estimate.hamming_fraction(),
            })
        })
        .collect()
}

/// Runs every `(solver, m, trial)` combination. Each `(m, trial)` cell draws a
/// fresh `Φ` from [`trial_seed`]; the signal is the same in every cell and all
/// solvers see the same measurements within a cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let x = cfg.source.signal(cfg.n)?;
    let cells: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();

    // concurrent solves would distort wall-clock timings
    #[cfg(feature = "parallel")]
    let results: Vec<Vec<TrialResult>> = if cfg.record_timing {
        cells
            .iter()
            .map(|&(m, t)| run_cell(cfg, &x, m, t))
            .collect::<Result<_>>()?
    } else {
        cells
            .par_iter()
            .map(|&(m, t)| run_cell(cfg, &x, m, t))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Vec<TrialResult>> = cells
        .iter()
        .map(|&(m, t)| run_cell(cfg, &x, m, t))
        .collect::<Result<_>>()?;
    let trials: Vec<TrialResult> = results.into_iter().flatten().collect();

    let mut rows = Vec::with_capacity(cfg.solvers.len() * cfg.m_grid.len());
    for solver in &cfg.solvers {
        for &m in &cfg.m_grid {
            let cell: Vec<&TrialResult> = trials
                .iter()
                .filter(|t| t.solver_name == solver.name() && t.m == m)
                .collect();
            let snr: Vec<f64> = cell.iter().map(|t| t.snr_db).collect();
            let secs: Vec<f64> = cell.iter().map(|t| t.elapsed_seconds).collect();
            let (mean_snr_db, std_snr_db) = mean_std(&snr);
            let (mean_seconds, std_seconds) = mean_std(&secs);
            rows.push(ReportRow {
                solver: solver.name().to_owned(),
                m,
                trials: cell.len(),
                mean_snr_db,
                std_snr_db,
                mean_seconds,
                std_seconds,
                ratio_cs: compression_ratio_cs(m, cfg.n)?,
                ratio_1bit: compression_ratio_1bit(m, cfg.n)?,
            });
        }
    }

    let config = ConfigEcho {
        n: cfg.n,
        m_grid: cfg.m_grid.clone(),
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        dataset: cfg.source.id(),
        solvers: cfg.solvers.iter().map(|s| format!("{s:?}")).collect(),
        record_timing: cfg.record_timing,
    };
    Ok(ExperimentReport {
        config,
        rows,
        trials,
    })
}

impl ExperimentReport {
    pub const CSV_COLUMNS: [&'static str; 8] = [
        "solver",
        "m",
        "trials",
        "mean_snr_db",
        "std_snr_db",
        "mean_seconds",
        "ratio_cs",
        "ratio_1bit",
    ];

    /// Config echo as `#` comment lines, then one row per `(solver, m)`.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(
            out,
            "# n={} trials={} master_seed={} dataset={}",
            c.n, c.trials, c.master_seed, c.dataset
        )
        .expect("write to string");
        writeln!(out, "# m_grid={:?}", c.m_grid).expect("write to string");
        for s in &c.solvers {
            writeln!(out, "# solver {s}").expect("write to string");
        }
        out.push_str(&Self::CSV_COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.solver,
                r.m,
                r.trials,
                r.mean_snr_db,
                r.std_snr_db,
                r.mean_seconds,
                r.ratio_cs,
                r.ratio_1bit
            )
            .expect("write to string");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn row(&self, solver: &str, m: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.solver == solver && r.m == m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn snr_hand_values() {
        let x = array![1.0, 0.0];
        assert!((snr_db(x.view(), array![0.9, 0.0].view()).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(snr_db(x.view(), x.view()).unwrap(), SNR_CAP_DB);
        assert_eq!(snr_db(x.view(), array![0.0, 0.0].view()).unwrap(), 0.0);
        assert!(snr_db(array![0.0, 0.0].view(), x.view()).is_err());
        assert!(snr_db(x.view(), array![1.0].view()).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(compression_ratio_cs(25, 250).unwrap(), 0.1);
        assert_eq!(compression_ratio_cs(250, 250).unwrap(), 1.0);
        assert_eq!(compression_ratio_1bit(24, 250).unwrap(), 0.008);
        assert!((compression_ratio_1bit(25, 250).unwrap() - 49.0 / 6000.0).abs() < 1e-15);
        let r = compression_ratio_1bit(250, 250).unwrap();
        assert_eq!(format!("{r:.3}"), "0.046");
        assert!(compression_ratio_cs(0, 5).is_err());
        assert!(compression_ratio_1bit(5, 0).is_err());
        for m in 2..=1000 {
            assert!(
                compression_ratio_1bit(m, 250).unwrap() < compression_ratio_cs(m, 250).unwrap()
            );
        }
    }

    #[test]
    fn seeds_differ_per_cell() {
        let a = trial_seed(1, 25, 0);
        assert_eq!(a, trial_seed(1, 25, 0));
        assert_ne!(a, trial_seed(1, 25, 1));
        assert_ne!(a, trial_seed(1, 50, 0));
        assert_ne!(a, trial_seed(2, 25, 0));
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn config_errors() {
        let mut cfg = ExperimentConfig::new(
            SignalSource::Fixture(Fixture::Dc),
            vec![SolverSpec::from_name("bbiht", None).unwrap()],
        );
        cfg.m_grid.clear();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
        cfg.m_grid = vec![25];
        cfg.solvers.clear();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn small_run_aggregates() {
        let mut cfg = ExperimentConfig::new(
            SignalSource::Fixture(Fixture::LabLike),
            vec![
                SolverSpec::from_name("biht", Some(3)).unwrap(),
                SolverSpec::from_name("fpc", None).unwrap(),
            ],
        );
        cfg.n = 64;
        cfg.m_grid = vec![16, 48];
        cfg.trials = 3;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.trials.len(), 12);
        for row in &report.rows {
            let snr: Vec<f64> = report
                .trials
                .iter()
                .filter(|t| t.solver_name == row.solver && t.m == row.m)
                .map(|t| t.snr_db)
                .collect();
            assert_eq!(snr.len(), 3);
            let (mean, std) = mean_std(&snr);
            assert_eq!(row.mean_snr_db, mean);
            assert_eq!(row.std_snr_db, std);
        }
        assert!(report
            .trials
            .iter()
            .all(|t| (0.0..=1.0).contains(&t.hamming_fraction)));
        let csv = report.to_csv();
        assert!(csv.contains(
            "\nsolver,m,trials,mean_snr_db,std_snr_db,mean_seconds,ratio_cs,ratio_1bit\n"
        ));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["rows"].as_array().unwrap().len(), 4);
    }
}
