use linksim_core::simulator::{
    db_to_linear, format_ber_csv, mrc_ber_oracle, rayleigh_ber_per_bit, run_point, run_sweep,
    BerPoint, InterferenceParams, Modulation, ReceiverKind, SimConfig, StoppingRule,
    TransmitScheme,
};
use proptest::prelude::*;

fn config(n_t: usize, n_r: usize, grid: &[f64], max_trials: u64) -> SimConfig {
    SimConfig {
        n_t,
        n_r,
        snr_grid_db: grid.to_vec(),
        stopping: StoppingRule {
            max_trials,
            ..StoppingRule::default()
        },
        seed: 20240611,
        ..SimConfig::default()
    }
}

/// Symbol SNR that gives mean per-bit SNR `gamma_b_db` for single-antenna QPSK.
fn snr_db_for_gamma_b(gamma_b_db: f64) -> f64 {
    gamma_b_db + 10.0 * 2f64.log10()
}

fn separated(better: &BerPoint, worse: &BerPoint) -> bool {
    better.ci_high < worse.ci_low
}

#[test]
fn single_antenna_rayleigh_matches_closed_form() {
    for (i, gb_db) in [0.0, 5.0, 10.0].into_iter().enumerate() {
        let snr_db = snr_db_for_gamma_b(gb_db);
        // untuned defaults: seed 1, standard stopping rule with a 500-error floor
        let mut cfg = SimConfig {
            n_t: 1,
            n_r: 1,
            snr_grid_db: vec![snr_db],
            ..SimConfig::default()
        };
        cfg.stopping.min_bit_errors = 500;
        let p = run_point::<f64>(&cfg, snr_db, i as u64).unwrap();
        let want = rayleigh_ber_per_bit(db_to_linear(gb_db));
        assert!(p.bit_errors >= 500);
        assert!(p.contains(want), "gamma_b {gb_db} dB: {p:?} vs {want}");
    }
}

#[test]
fn long_run_estimate_is_unbiased() {
    let snr_db = snr_db_for_gamma_b(0.0);
    let mut cfg = config(1, 1, &[snr_db], 400_000);
    cfg.stopping.min_bit_errors = u64::MAX;
    let p = run_point::<f64>(&cfg, snr_db, 0).unwrap();
    let want = rayleigh_ber_per_bit(1.0);
    assert!((p.ber - want).abs() < 3.0 * p.halfwidth(), "{p:?} vs {want}");
}

// With white noise each orthogonal design collapses to maximal-ratio
// combining over n_t * n_r branches; per-branch symbol SNR is the number of
// repetitions of each symbol times the per-antenna power.
#[test]
fn orthogonal_codes_match_mrc_closed_form() {
    let cases = [
        // (n_t, n_r, repetitions)
        (2, 1, 1.0),
        (2, 2, 1.0),
        (3, 1, 2.0),
        (4, 1, 2.0),
        (4, 2, 2.0),
    ];
    for (i, (n_t, n_r, reps)) in cases.into_iter().enumerate() {
        let snr_db = 4.0;
        let mut cfg = config(n_t, n_r, &[snr_db], 4_000_000);
        cfg.stopping.min_bit_errors = 400;
        let p = run_point::<f64>(&cfg, snr_db, i as u64).unwrap();
        let branch_snr = reps * db_to_linear(snr_db) / n_t as f64;
        let want = mrc_ber_oracle(branch_snr / 2.0, n_t * n_r);
        assert!(!p.saturated, "{n_t}x{n_r}: {p:?}");
        assert!(p.contains(want), "{n_t}x{n_r}: {p:?} vs {want}");
    }
}

#[test]
fn zf_and_mmse_agree_without_interference_for_orthogonal_codes() {
    let mut cfg = config(2, 2, &[6.0], 50_000);
    let mmse = run_sweep::<f64>(&cfg, 1).unwrap();
    cfg.receiver = ReceiverKind::Zf;
    let zf = run_sweep::<f64>(&cfg, 1).unwrap();
    // the decisions coincide trial by trial
    assert_eq!(mmse.points[0].bit_errors, zf.points[0].bit_errors);
    assert_eq!(mmse.points[0].trials, zf.points[0].trials);
}

#[test]
fn diversity_ordering_without_interference() {
    let grid = [5.0, 10.0];
    let curves: Vec<Vec<BerPoint>> = [(1, 1), (2, 2), (4, 4)]
        .into_iter()
        .map(|(n_t, n_r)| run_sweep::<f64>(&config(n_t, n_r, &grid, 300_000), 1).unwrap().points)
        .collect();
    for ((one, two), four) in curves[0].iter().zip(&curves[1]).zip(&curves[2]) {
        assert!(four.ber <= two.ber && two.ber <= one.ber);
        assert!(separated(two, one), "{two:?} / {one:?}");
        assert!(separated(four, two), "{four:?} / {two:?}");
    }
}

#[test]
fn interference_never_helps() {
    for (i, inr_db) in [-9.0, 0.0, 6.0].into_iter().enumerate() {
        let clean = config(2, 2, &[8.0], 400_000);
        let mut dirty = clean.clone();
        dirty.interference = InterferenceParams::common(1, inr_db);
        let a = run_point::<f64>(&clean, 8.0, i as u64).unwrap();
        let b = run_point::<f64>(&dirty, 8.0, i as u64).unwrap();
        assert!(b.ber + b.halfwidth() + a.halfwidth() >= a.ber, "INR {inr_db}: {a:?} {b:?}");
    }
}

#[test]
fn ber_falls_with_snr() {
    let mut cfg = config(2, 2, &[0.0, 4.0, 8.0, 12.0], 200_000);
    cfg.interference = InterferenceParams::common(4, 0.0);
    let pts = run_sweep::<f64>(&cfg, 1).unwrap().points;
    for w in pts.windows(2) {
        assert!(w[1].ber <= w[0].ber + w[0].halfwidth() + w[1].halfwidth(), "{w:?}");
    }
}

#[test]
fn halfwidth_scales_as_inverse_root_trials() {
    let mut cfg = config(1, 1, &[3.0], 8192);
    cfg.stopping.min_bit_errors = u64::MAX;
    let small = run_point::<f64>(&cfg, 3.0, 0).unwrap();
    cfg.stopping.max_trials *= 4;
    let large = run_point::<f64>(&cfg, 3.0, 0).unwrap();
    assert_eq!(large.trials, 4 * small.trials);
    assert!(small.saturated && large.saturated);
    let ratio = small.halfwidth() / large.halfwidth();
    assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
}

#[test]
fn ten_interferers_hurt_two_by_two_more_than_four_by_four() {
    let grid = [0.0, 5.0, 10.0, 15.0, 20.0];
    let run = |n: usize| {
        let mut cfg = config(n, n, &grid, 100_000);
        cfg.interference = InterferenceParams::common(10, 3.0);
        run_sweep::<f64>(&cfg, 1).unwrap().points
    };
    let two = run(2);
    let four = run(4);
    for (a, b) in four.iter().zip(&two) {
        assert!(a.ber <= b.ber);
        if a.snr_db >= 10.0 {
            assert!(separated(a, b));
        }
    }
}

#[test]
fn sixteen_qam_is_worse_than_qpsk_at_equal_snr() {
    let q = config(2, 2, &[10.0], 100_000);
    let mut m = q.clone();
    m.modulation = Modulation::Qam16;
    let a = run_point::<f64>(&q, 10.0, 0).unwrap();
    let b = run_point::<f64>(&m, 10.0, 0).unwrap();
    assert!(separated(&a, &b), "{a:?} {b:?}");
}

#[test]
fn multiplexing_and_rician_and_correlation_paths_run() {
    let mut cfg = config(4, 4, &[10.0], 20_000);
    cfg.scheme = TransmitScheme::Multiplexing;
    cfg.channel.k_factor = 3.0;
    cfg.channel.rx_correlation = 0.5;
    cfg.channel.tx_correlation = 0.3;
    cfg.interference = InterferenceParams {
        inr_db: vec![0.0, 3.0, f64::NEG_INFINITY],
        antennas: 2,
        k_factor: 1.0,
        tx_correlation: 0.2,
    };
    for kind in [ReceiverKind::Mmse, ReceiverKind::Zf] {
        cfg.receiver = kind;
        let p = run_point::<f64>(&cfg, 10.0, 0).unwrap();
        assert!(p.ber > 0.0 && p.ber < 0.5, "{kind:?} {p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn any_seed_is_worker_invariant(seed in any::<u64>(), workers in 2usize..6, snr in -5.0f64..15.0) {
        let mut cfg = config(2, 2, &[snr, snr + 3.0], 3000);
        cfg.seed = seed;
        cfg.interference = InterferenceParams::common(2, 1.0);
        let a = run_sweep::<f64>(&cfg, 1).unwrap();
        let b = run_sweep::<f64>(&cfg, workers).unwrap();
        prop_assert_eq!(format_ber_csv(&a), format_ber_csv(&b));
    }

    #[test]
    fn points_are_internally_consistent(seed in any::<u64>(), snr in -10.0f64..20.0) {
        let mut cfg = config(1, 2, &[snr], 2048);
        cfg.seed = seed;
        let p = run_point::<f64>(&cfg, snr, 0).unwrap();
        prop_assert!(p.ci_low <= p.ber && p.ber <= p.ci_high);
        prop_assert!(p.ci_low >= 0.0 && p.ci_high <= 1.0);
        prop_assert_eq!(p.ber, p.bit_errors as f64 / (p.trials * p.bits_per_trial) as f64);
        prop_assert!(p.trials <= 2048);
    }
}
