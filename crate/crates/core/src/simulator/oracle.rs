//! Closed-form bit-error rates for Gray QPSK over Rayleigh fading.

/// Single-antenna Rayleigh QPSK at symbol SNR `snr_linear`
/// (per-bit SNR `snr_linear / 2`).
pub fn rayleigh_ber_oracle(snr_linear: f64) -> f64 {
    rayleigh_ber_per_bit(snr_linear / 2.0)
}

/// `0.5 (1 - sqrt(g / (1 + g)))` for mean per-bit SNR `g`.
pub fn rayleigh_ber_per_bit(gamma_b: f64) -> f64 {
    mrc_ber_oracle(gamma_b, 1)
}

/// Maximal-ratio combining of `branches` i.i.d. Rayleigh branches, each
/// with mean per-bit SNR `gamma_b`.
///
/// With `mu = sqrt(g / (1 + g))`:
/// `P = ((1 - mu)/2)^L * sum_{k<L} C(L-1+k, k) ((1 + mu)/2)^k`.
pub fn mrc_ber_oracle(gamma_b: f64, branches: usize) -> f64 {
    assert!(branches >= 1, "at least one branch");
    if gamma_b <= 0.0 {
        return 0.5;
    }
    if gamma_b.is_infinite() {
        return 0.0;
    }
    let mu = (gamma_b / (1.0 + gamma_b)).sqrt();
    let lo = 0.5 * (1.0 - mu);
    let hi = 0.5 * (1.0 + mu);
    let l = branches as i32;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..branches {
        if k > 0 {
            binom *= (branches - 1 + k) as f64 / k as f64;
        }
        sum += binom * hi.powi(k as i32);
    }
    lo.powi(l) * sum
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
