mod common;

use common::{planted, planted_values, support};
use ndarray::Array1;
use onebit::datasets::Fixture;
use onebit::evaluation::snr_db;
use onebit::solvers::*;
use onebit::transform::build_ensemble;
use onebit::{encode, reconstruct};

#[test]
fn biht_planted_three_sparse() {
    let p = planted(50, 200, 11, 1011, &[4, 17, 30]);
    let est = biht(p.ensemble.a(), &p.b, &BihtConfig::new(3)).unwrap();
    assert_eq!(support(&est.shat), vec![4, 17, 30]);
    let snr = snr_db(p.truth.view(), est.shat.view()).unwrap();
    assert!(snr >= 15.0, "snr {snr}");

    let flipped: Vec<i8> = p.b.iter().map(|v| -v).collect();
    let neg = biht(p.ensemble.a(), &flipped, &BihtConfig::new(3)).unwrap();
    assert_eq!(neg.shat, -&est.shat);
}

#[test]
fn fpc_planted_consistency() {
    for seed in 0..5 {
        let p = planted(50, 200, 11 + seed, 1011 + seed, &[4, 17, 30]);
        let est = fpc_1bit(p.ensemble.a(), &p.b, &FpcConfig::default()).unwrap();
        assert!(
            est.hamming_fraction() <= 0.05,
            "seed {seed}: {}",
            est.hamming_fraction()
        );
        assert!((est.shat.dot(&est.shat).sqrt() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bbiht_dc_window() {
    let n = 250;
    let x = Fixture::Dc.window(n).unwrap().values;
    let ens = build_ensemble(n, 250, 3).unwrap();
    let sm = encode(x.view(), &ens).unwrap();
    let cfg = BbihtConfig::default();
    let scan = bbiht_scan(ens.a(), sm.b(), &cfg).unwrap();
    assert_eq!(scan.columns.dim(), (250, 25));
    // no row crosses the threshold, so the initial best_k = 1 stands
    assert_eq!(scan.crossings(cfg.stop_var), 0);

    let rec = reconstruct(&sm, &ens, &SolverSpec::Bbiht(cfg)).unwrap();
    assert_eq!(rec.estimate.k_used, 1);
    assert!(snr_db(x.view(), rec.xhat.view()).unwrap() > 20.0);
}

#[test]
fn end_to_end_dc_all_solvers() {
    let n = 250;
    let x = Array1::from_elem(n, 17.0);
    let ens = build_ensemble(n, 250, 1).unwrap();
    let sm = encode(x.view(), &ens).unwrap();
    let rec = reconstruct(&sm, &ens, &SolverSpec::Bbiht(BbihtConfig::default())).unwrap();
    assert!(snr_db(x.view(), rec.xhat.view()).unwrap() > 20.0);
    let rec = reconstruct(&sm, &ens, &SolverSpec::Biht(BihtConfig::new(1))).unwrap();
    assert!(snr_db(x.view(), rec.xhat.view()).unwrap() > 20.0);
}

#[test]
fn best_iterate_never_worse_than_start() {
    for seed in 0..5u64 {
        let p = planted(60, 40, seed, seed, &[1, 5, 9, 20, 33]);
        let a = p.ensemble.a();
        // BIHT's first candidate is H_k((τ/2)·Aᵀb)
        let first = hard_threshold(
            (a.t()
                .dot(&p.b.iter().map(|&v| f64::from(v)).collect::<Array1<f64>>())
                * 0.5)
                .view(),
            5,
        )
        .unwrap();
        let start_err = hamming_error(a, first.view(), &p.b);
        let est = biht(a, &p.b, &BihtConfig::new(5)).unwrap();
        assert!(est.hamming_error <= start_err);

        // FPC starts from the normalized back-projection
        let bp = a
            .t()
            .dot(&p.b.iter().map(|&v| f64::from(v)).collect::<Array1<f64>>());
        let est = fpc_1bit(a, &p.b, &FpcConfig::default()).unwrap();
        assert!(est.hamming_error <= hamming_error(a, bp.view(), &p.b));
    }
}

#[test]
fn bbiht_sign_flip() {
    let p = planted(100, 80, 4, 4, &[0, 3, 7]);
    let cfg = BbihtConfig::default();
    let est = bbiht(p.ensemble.a(), &p.b, &cfg).unwrap();
    let flipped: Vec<i8> = p.b.iter().map(|v| -v).collect();
    let neg = bbiht(p.ensemble.a(), &flipped, &cfg).unwrap();
    assert_eq!(neg.shat, -&est.shat);
    assert_eq!(neg.hamming_error, est.hamming_error);
    assert_eq!(neg.k_used, est.k_used);
}

/// Blind selection against BIHT with the true sparsity. With a single planted
/// coefficient the sweep keeps k = 1 and matches BIHT exactly.
#[test]
fn blind_selection_one_sparse() {
    let (n, m) = (250, 250);
    let cfg = BbihtConfig {
        scan_mode: ScanMode::FirstExceed,
        ..Default::default()
    };
    for t in 0..20u64 {
        let position = (t as usize * 7) % 25;
        let p = planted_values(
            n,
            m,
            500 + t,
            &[(position, if t % 2 == 0 { 1.0 } else { -1.0 })],
        );
        let known = biht(p.ensemble.a(), &p.b, &BihtConfig::new(1)).unwrap();
        assert_eq!(known.hamming_error, 0);
        let blind = bbiht(p.ensemble.a(), &p.b, &cfg).unwrap();
        let x = p.ensemble.psi().dot(&p.truth);
        let snr_known = snr_db(x.view(), p.ensemble.psi().dot(&known.shat).view()).unwrap();
        let snr_blind = snr_db(x.view(), p.ensemble.psi().dot(&blind.shat).view()).unwrap();
        assert!(
            snr_blind >= snr_known - 3.0,
            "trial {t}: {snr_blind} vs {snr_known}"
        );
    }
}

/// Variance crossings land on the rows of planted coefficients. One crossing
/// means both scan modes agree; two crossings separate them.
#[test]
fn scan_crossings_follow_planted_rows() {
    let cfg = BbihtConfig::default();
    let single = planted_values(250, 250, 7, &[(0, 0.8), (9, 0.6)]);
    let scan = bbiht_scan(single.ensemble.a(), &single.b, &cfg).unwrap();
    assert_eq!(scan.crossings(cfg.stop_var), 1);
    let lit = select_sparsity(&scan.row_variances, cfg.stop_var, ScanMode::Literal);
    let first = select_sparsity(&scan.row_variances, cfg.stop_var, ScanMode::FirstExceed);
    assert_eq!((lit, first), (9, 9));
    assert!(support(&scan.estimates[lit - 1].shat).contains(&0));

    let multi = planted_values(250, 250, 7, &[(0, 0.7), (6, 0.5), (15, 0.5)]);
    let scan = bbiht_scan(multi.ensemble.a(), &multi.b, &cfg).unwrap();
    assert_eq!(scan.crossings(cfg.stop_var), 2);
    assert_eq!(
        select_sparsity(&scan.row_variances, cfg.stop_var, ScanMode::Literal),
        15
    );
    assert_eq!(
        select_sparsity(&scan.row_variances, cfg.stop_var, ScanMode::FirstExceed),
        6
    );
}
