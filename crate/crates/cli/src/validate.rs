//! Oracle suite behind `linksim validate`.

use std::fmt::Write as _;

use linksim_core::antenna::{gain_cut, AntennaPattern};
use linksim_core::channel::{
    aggregate, expected_rx_power, gaussian_symbols, normalize, received_signal, sample_channel,
    ChannelSpec, InterfererSpec,
};
use linksim_core::matrixkit::{exponential_correlation, kronecker, ComplexMatrix, HermitianPsd};
use linksim_core::network::{assign_segments, DISTANCE_TOLERANCE};
use linksim_core::simulator::{
    db_to_linear, mrc_ber_oracle, rayleigh_ber_per_bit, run_point, BerPoint, SimConfig,
    StoppingRule,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{load_site_layout, profile};
use crate::config::Config;

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Transmit correlation with an off-diagonal of 1.5 (not PSD).
    NonPsdTxCorr,
}

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub observed: String,
    pub expected: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, observed: String, expected: String) -> Self {
        Self {
            name,
            passed,
            observed,
            expected,
        }
    }
}

fn kronecker_covariance(seed: u64, fault: Option<Fault>) -> Check {
    const NAME: &str = "kronecker_covariance";
    let expected = "max |sample - (T^T (x) R)| <= 0.02 over 1e5 draws".to_string();
    let tx = match fault {
        Some(Fault::NonPsdTxCorr) => {
            HermitianPsd::new(ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 1.5], &[1.5, 1.0]]).expect("2x2"))
        }
        None => exponential_correlation(2, 0.5),
    };
    let tx = match tx {
        Ok(t) => t,
        Err(e) => return Check::new(NAME, false, format!("tx_corr rejected: {e}"), expected),
    };
    let rx = exponential_correlation(2, 0.7).expect("valid coefficient");
    let spec = ChannelSpec::new(ComplexMatrix::zeros(2, 2), rx, tx, HermitianPsd::identity(2))
        .and_then(|s| normalize(&s));
    let spec = match spec {
        Ok(s) => s,
        Err(e) => return Check::new(NAME, false, format!("channel rejected: {e}"), expected),
    };
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = ComplexMatrix::<f64>::zeros(4, 4);
    for _ in 0..n {
        let v = sample_channel(&spec, &mut rng).h.vectorize();
        for i in 0..4 {
            for j in 0..4 {
                acc[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let cov = acc.scale(1.0 / n as f64);
    let want = kronecker(&spec.tx_corr().matrix().conj(), spec.rx_corr().matrix());
    let dev = cov.max_abs_diff(&want);
    Check::new(NAME, dev <= 0.02, format!("max deviation {dev:.4}"), expected)
}

fn power_identity(seed: u64) -> Check {
    let spec = normalize(&ChannelSpec::<f64>::rician(2, 2, 2.0, 0.5, 0.3, 1.5).expect("valid")).expect("valid");
    let itf: Vec<_> = (0..3)
        .map(|k| {
            let c = ChannelSpec::rician_steered(2, 1, 1.0, 0.5, 0.0, 0.8, 20.0 * k as f64, 0.0).expect("valid");
            InterfererSpec::new(format!("i{k}"), c)
        })
        .collect();
    let agg = aggregate(&itf).expect("shared receive correlation");
    let want = expected_rx_power(&spec, Some(&agg));
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut sum = 0.0;
    for _ in 0..n {
        let h = sample_channel(&spec, &mut rng);
        let hi = agg.sample(&mut rng);
        let x = gaussian_symbols(2, &mut rng);
        let xi = gaussian_symbols(agg.n_t(), &mut rng);
        let y = received_signal(&h, &x, Some((&hi, &xi)), &mut rng).expect("dimensions agree");
        sum += y.norm_sqr();
    }
    let got = sum / n as f64;
    let rel = (got - want).abs() / want;
    Check::new(
        "received_power_identity",
        rel <= 0.01,
        format!("E||y||^2 = {got:.4} ({:.3}% off)", 100.0 * rel),
        format!("{want:.4} within 1%"),
    )
}

fn sim(n: usize, seed: u64, max_trials: u64, min_errors: u64) -> SimConfig {
    SimConfig {
        n_t: n,
        n_r: n,
        snr_grid_db: vec![0.0],
        stopping: StoppingRule {
            max_trials,
            min_bit_errors: min_errors,
            ..StoppingRule::default()
        },
        seed,
        ..SimConfig::default()
    }
}

fn fmt_point(p: &BerPoint) -> String {
    format!("{:.4e} [{:.4e}, {:.4e}]", p.ber, p.ci_low, p.ci_high)
}

fn rayleigh_oracle(seed: u64) -> Check {
    let mut ok = true;
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    for (i, gb_db) in [0.0, 5.0, 10.0].into_iter().enumerate() {
        let snr_db = gb_db + 10.0 * 2f64.log10();
        let cfg = sim(1, seed, 10_000_000, 500);
        let p = run_point::<f64>(&cfg, snr_db, i as u64).expect("valid config");
        let want = rayleigh_ber_per_bit(db_to_linear(gb_db));
        ok &= p.contains(want) && p.bit_errors >= 500;
        observed.push(format!("{gb_db} dB: {}", fmt_point(&p)));
        expected.push(format!("{want:.4e}"));
    }
    Check::new(
        "rayleigh_ber_oracle",
        ok,
        observed.join("; "),
        format!("inside CI: {}", expected.join(", ")),
    )
}

fn orthogonal_code_oracle(seed: u64) -> Check {
    let snr_db = 4.0;
    let cfg = sim(2, seed, 4_000_000, 400);
    let p = run_point::<f64>(&cfg, snr_db, 0).expect("valid config");
    // two-antenna block code over 2 receive antennas = 4-branch combining at half power
    let want = mrc_ber_oracle(db_to_linear(snr_db) / 4.0, 4);
    Check::new(
        "block_code_mrc_oracle",
        p.contains(want),
        format!("2x2 at {snr_db} dB: {}", fmt_point(&p)),
        format!("inside CI: {want:.4e}"),
    )
}

fn diversity_ordering(seed: u64) -> Check {
    let snr_db = 10.0;
    let pts: Vec<BerPoint> = [1, 2, 4]
        .into_iter()
        .map(|n| run_point::<f64>(&sim(n, seed, 200_000, 100), snr_db, 0).expect("valid config"))
        .collect();
    let ok = pts[2].ber <= pts[1].ber
        && pts[1].ber <= pts[0].ber
        && pts[1].ci_high < pts[0].ci_low
        && pts[2].ci_high < pts[1].ci_low;
    Check::new(
        "diversity_ordering",
        ok,
        format!(
            "1x1 {}; 2x2 {}; 4x4 {}",
            fmt_point(&pts[0]),
            fmt_point(&pts[1]),
            fmt_point(&pts[2])
        ),
        format!("4x4 < 2x2 < 1x1 with disjoint CIs at {snr_db} dB"),
    )
}

fn antenna_formula() -> Check {
    let p = AntennaPattern::<f64>::default();
    let got = [0.0, 30.0, 180.0].map(|a| gain_cut(&p, a, p.theta_3db_h));
    let want = [18.0, 15.0, -12.0];
    let ok = got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 1e-12);
    Check::new(
        "antenna_formula",
        ok,
        format!("G(0, 30, 180) = {:?}", got),
        format!("{want:?} within 1e-12"),
    )
}

fn network_consistency(config: &Config) -> Check {
    const NAME: &str = "network_consistency";
    let expected = format!(
        "listed distances within {:.0}%, 10 co-channel interferers",
        100.0 * DISTANCE_TOLERANCE
    );
    let defaults = Config {
        antenna: config.antenna,
        ..Config::default()
    };
    let layout = match load_site_layout(&defaults) {
        Ok(l) => l,
        Err(e) => return Check::new(NAME, false, e.to_string(), expected),
    };
    let worst = layout
        .listed_pairs()
        .map(|(_, _, listed, placed)| ((placed - listed) / listed).abs())
        .fold(0.0, f64::max);
    let pairs = layout.listed_pairs().count();
    let segments = assign_segments(&layout).histogram();
    let count = match profile(&defaults, &layout) {
        Ok((_, e)) => e.len(),
        Err(e) => return Check::new(NAME, false, e.to_string(), expected),
    };
    Check::new(
        NAME,
        worst <= DISTANCE_TOLERANCE && count == 10,
        format!(
            "{pairs} pairs, worst deviation {:.3}%, segments {segments:?}, {count} interferers",
            100.0 * worst
        ),
        expected,
    )
}

pub fn run(config: &Config, fault: Option<Fault>) -> Vec<Check> {
    let seed = config.seed;
    vec![
        kronecker_covariance(seed, fault),
        power_identity(seed),
        rayleigh_oracle(seed),
        orthogonal_code_oracle(seed),
        diversity_ordering(seed),
        antenna_formula(),
        network_consistency(config),
    ]
}

pub fn report(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "{} {}: observed {}; expected {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.expected
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(out, "{} checks, {} failed", checks.len(), failed);
    out
}
