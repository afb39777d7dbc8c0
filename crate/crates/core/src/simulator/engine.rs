use std::fmt::Write as _;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modulation::{demodulate_into, Modulation};
use super::oracle::db_to_linear;
use super::receiver::{interference_plus_noise, BlockDetector, ReceiverKind};
use super::stats::ErrorTally;
use super::stbc::SpaceTimeCode;
use super::{SimConfig, SimError, TRIAL_BITS};
use crate::channel::{
    aggregate, normalize, sample_channel, AggregateInterferer, ChannelSpec, InterfererSpec,
    NormalizedChannelSpec,
};
use crate::matrixkit::{standard_complex_normal, ComplexMatrix};
use crate::scalar::Real;

/// Trials between stopping-rule checks. Fixed so that the set of simulated
/// trials never depends on scheduling.
const ROUND: u64 = 1024;
const CHUNK: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits_per_trial: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean of the per-trial error fraction (equals `ber`).
    pub mean: f64,
    /// Sample variance of the per-trial error fraction.
    pub variance: f64,
    pub saturated: bool,
}

impl BerPoint {
    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub config: SimConfig,
    pub points: Vec<BerPoint>,
}

struct Link<T: Real> {
    code: SpaceTimeCode,
    serving: NormalizedChannelSpec<T>,
    interferers: Option<AggregateInterferer<T>>,
    modulation: Modulation,
    receiver: ReceiverKind,
    blocks: usize,
}

impl<T: Real> Link<T> {
    fn build(cfg: &SimConfig, snr_db: f64) -> Result<Self, SimError> {
        let code = SpaceTimeCode::for_scheme(cfg.scheme, cfg.n_t)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        let ch = &cfg.channel;
        // per-antenna power so that (K + 1) n_t q equals the target SNR
        let q = db_to_linear(snr_db) / ((ch.k_factor + 1.0) * cfg.n_t as f64);
        let serving = normalize(&ChannelSpec::<T>::rician(
            cfg.n_r,
            cfg.n_t,
            ch.k_factor,
            ch.rx_correlation,
            ch.tx_correlation,
            q,
        )?)?;
        let itf = &cfg.interference;
        let active: Vec<(usize, f64)> = itf
            .inr_db
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, inr)| *inr > f64::NEG_INFINITY)
            .collect();
        let interferers = if active.is_empty() {
            None
        } else {
            let count = active.len();
            let specs = active
                .into_iter()
                .enumerate()
                .map(|(j, (i, inr))| {
                    let q_i = db_to_linear(inr) / ((itf.k_factor + 1.0) * itf.antennas as f64);
                    // spread LOS arrivals so LOS interferers are not collinear
                    let aoa = -60.0 + 120.0 * (j as f64 + 0.5) / count as f64;
                    let spec = ChannelSpec::<T>::rician_steered(
                        cfg.n_r,
                        itf.antennas,
                        itf.k_factor,
                        ch.rx_correlation,
                        itf.tx_correlation,
                        q_i,
                        aoa,
                        0.0,
                    )?;
                    Ok(InterfererSpec::new(format!("interferer {}", i + 1), spec))
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            Some(aggregate(&specs)?)
        };
        Ok(Self {
            code,
            serving,
            interferers,
            modulation: cfg.modulation,
            receiver: cfg.receiver,
            blocks: cfg.blocks_per_trial,
        })
    }

    fn bits_per_block(&self) -> usize {
        self.code.symbols() * self.modulation.bits_per_symbol()
    }

    /// Bit errors in one trial.
    fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let h = sample_channel(&self.serving, rng).h;
        let h_i = self.interferers.as_ref().map(|a| a.sample(rng).h);
        let r_inv = match (&h_i, self.receiver) {
            (Some(hi), ReceiverKind::Mmse) => Some(
                interference_plus_noise(hi)
                    .inverse()
                    .expect("interference-plus-noise covariance is positive definite"),
            ),
            _ => None,
        };
        let det = BlockDetector::new(&self.code, &h, r_inv.as_ref(), self.receiver);

        let (n_r, n_t) = h.shape();
        let ns = self.code.symbols();
        let bpb = self.bits_per_block();
        let bps = self.modulation.bits_per_symbol();
        let points: Vec<Complex<T>> = self.modulation.constellation();
        let mut ys = vec![vec![Complex::<T>::zero(); n_r]; self.code.slots().len()];
        let mut bits = vec![0u8; bpb];
        let mut sym = vec![Complex::<T>::zero(); ns];
        let mut x = vec![Complex::<T>::zero(); n_t];
        let mut xi = vec![Complex::<T>::zero(); h_i.as_ref().map_or(0, ComplexMatrix::cols)];
        let mut est = vec![Complex::<T>::zero(); ns];
        let mut decided = Vec::with_capacity(bpb);
        let mut errors = 0u64;

        for _ in 0..self.blocks {
            fill_bits(rng, &mut bits);
            for (k, s) in sym.iter_mut().enumerate() {
                let word = bits[k * bps..(k + 1) * bps]
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | b as usize);
                *s = points[word];
            }
            for (slot, y) in self.code.slots().iter().zip(ys.iter_mut()) {
                for (xa, tp) in x.iter_mut().zip(&slot.taps) {
                    *xa = match tp {
                        Some(tp) => {
                            let s = if slot.conjugate { sym[tp.symbol].conj() } else { sym[tp.symbol] };
                            if tp.negate {
                                -s
                            } else {
                                s
                            }
                        }
                        None => Complex::zero(),
                    };
                }
                mat_vec(&h, &x, y);
                if let Some(hi) = &h_i {
                    xi.iter_mut().for_each(|v| *v = standard_complex_normal(rng));
                    mat_vec_add(hi, &xi, y);
                }
                for v in y.iter_mut() {
                    *v += standard_complex_normal::<T, _>(rng);
                }
            }
            det.estimate_unbiased(&self.code, &ys, &mut est);
            decided.clear();
            demodulate_into(&est, self.modulation, &mut decided);
            errors += decided.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
        }
        errors
    }
}

fn fill_bits<R: Rng + ?Sized>(rng: &mut R, bits: &mut [u8]) {
    for chunk in bits.chunks_mut(64) {
        let word: u64 = rng.random();
        for (j, b) in chunk.iter_mut().enumerate() {
            *b = ((word >> j) & 1) as u8;
        }
    }
}

fn mat_vec<T: Real>(m: &ComplexMatrix<T>, x: &[Complex<T>], out: &mut [Complex<T>]) {
    out.iter_mut().for_each(|v| *v = Complex::zero());
    mat_vec_add(m, x, out);
}

fn mat_vec_add<T: Real>(m: &ComplexMatrix<T>, x: &[Complex<T>], out: &mut [Complex<T>]) {
    let cols = m.cols();
    for (row, o) in m.as_slice().chunks_exact(cols).zip(out.iter_mut()) {
        for (a, b) in row.iter().zip(x) {
            *o += a * b;
        }
    }
}

fn stream_id(point_index: u64, trial: u64) -> u64 {
    (point_index << TRIAL_BITS) | trial
}

/// Simulates one grid point. `point_index` selects the random streams and
/// must differ between points of the same sweep. Runs on the current rayon
/// pool; the result does not depend on its size.
pub fn run_point<T: Real>(cfg: &SimConfig, snr_db: f64, point_index: u64) -> Result<BerPoint, SimError> {
    cfg.validate()?;
    let link = Link::<T>::build(cfg, snr_db)?;
    let bits_per_trial = cfg.bits_per_trial()?;
    let rule = cfg.stopping;
    let z = rule.z();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut tally = ErrorTally::default();
    let mut converged = false;
    while tally.trials < rule.max_trials {
        let start = tally.trials;
        let end = start + ROUND.min(rule.max_trials - start);
        let chunks = (end - start).div_ceil(CHUNK);
        let round = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = start + c * CHUNK;
                let hi = (lo + CHUNK).min(end);
                let mut part = ErrorTally::default();
                for trial in lo..hi {
                    let mut rng = base.clone();
                    rng.set_stream(stream_id(point_index, trial));
                    part.record(link.trial(&mut rng));
                }
                part
            })
            .reduce(ErrorTally::default, ErrorTally::merge);
        tally = tally.merge(round);
        if tally.satisfies(&rule, bits_per_trial, z) {
            converged = true;
            break;
        }
    }

    let ber = tally.mean(bits_per_trial);
    let hw = tally.halfwidth(bits_per_trial, z);
    let ci_high = if tally.bit_errors == 0 {
        // the normal interval collapses to a point; use the exact
        // Clopper-Pearson upper bound for zero observed errors instead
        let n = (tally.trials * bits_per_trial) as f64;
        -((0.5 * (1.0 - rule.confidence)).ln() / n).exp_m1()
    } else {
        (ber + hw).min(1.0)
    };
    Ok(BerPoint {
        snr_db,
        trials: tally.trials,
        bit_errors: tally.bit_errors,
        bits_per_trial,
        ber,
        ci_low: (ber - hw).max(0.0),
        ci_high,
        mean: ber,
        variance: tally.variance(bits_per_trial),
        saturated: !converged,
    })
}

/// Runs every grid point on a pool of `workers` threads.
pub fn run_sweep<T: Real>(cfg: &SimConfig, workers: usize) -> Result<BerCurve, SimError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let points = pool.install(|| {
        cfg.snr_grid_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| run_point::<T>(cfg, snr, i as u64))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(BerCurve {
        config: cfg.clone(),
        points,
    })
}

pub const BER_CSV_HEADER: &str = "snr_db,trials,bit_errors,ber,ci_low,ci_high,saturated";

fn sci(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.5e}")
    }
}

pub fn format_ber_csv(curve: &BerCurve) -> String {
    let mut out = String::from(BER_CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sci(p.snr_db),
            p.trials,
            p.bit_errors,
            sci(p.ber),
            sci(p.ci_low),
            sci(p.ci_high),
            p.saturated
        );
    }
    out
}
