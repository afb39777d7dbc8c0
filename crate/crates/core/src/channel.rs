//! Separately correlated Rician MIMO channel with co-channel interferers.
//!
//! A link is `H = M + R^{1/2} W T^{1/2}` where `M` is the line-of-sight mean,
//! `R` and `T` the receive and transmit correlation matrices and `W` has
//! i.i.d. `CN(0, 1)` entries. The transmit covariance `Q` of the signal is
//! folded into the channel by [`normalize`], after which transmitted vectors
//! are treated as white with unit power per antenna. Noise is `CN(0, I)`, so
//! every power below is relative to the per-antenna noise power.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::matrixkit::{
    direct_sum, exponential_correlation, sample_standard_complex_gaussian, standard_complex_normal,
    ComplexMatrix, HermitianPsd, MatrixError,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{which} correlation matrix must have a real unit diagonal")]
    NonUnitDiagonal { which: &'static str },
    #[error("heterogeneous receive correlation unsupported (interferer `{label}`)")]
    HeterogeneousReceiveCorrelation { label: String },
    #[error("pure LOS unsupported: diffuse power is zero")]
    PureLos,
    #[error("interferer list is empty")]
    NoInterferers,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

fn check_unit_diagonal<T: Real>(m: &HermitianPsd<T>, which: &'static str) -> Result<()> {
    let tol = T::of(1e-12);
    for i in 0..m.dim() {
        let d = m.matrix()[(i, i)];
        if (d.re - T::one()).abs() > tol || d.im.abs() > tol {
            return Err(ChannelError::NonUnitDiagonal { which });
        }
    }
    Ok(())
}

/// Raw statistics of one link before the transmit covariance is absorbed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec<T: Real> {
    mean: ComplexMatrix<T>,
    rx_corr: HermitianPsd<T>,
    tx_corr: HermitianPsd<T>,
    tx_cov: HermitianPsd<T>,
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(
        mean: ComplexMatrix<T>,
        rx_corr: HermitianPsd<T>,
        tx_corr: HermitianPsd<T>,
        tx_cov: HermitianPsd<T>,
    ) -> Result<Self> {
        let (n_r, n_t) = mean.shape();
        if rx_corr.dim() != n_r {
            return Err(ChannelError::Dimension(format!(
                "receive correlation is {0}x{0} but mean has {n_r} rows",
                rx_corr.dim()
            )));
        }
        if tx_corr.dim() != n_t || tx_cov.dim() != n_t {
            return Err(ChannelError::Dimension(format!(
                "transmit correlation/covariance must be {n_t}x{n_t}"
            )));
        }
        check_unit_diagonal(&rx_corr, "receive")?;
        check_unit_diagonal(&tx_corr, "transmit")?;
        Ok(Self {
            mean,
            rx_corr,
            tx_corr,
            tx_cov,
        })
    }

    /// Rician link with exponential correlations, a rank-one LOS component
    /// scaled to the requested K-factor, and `tx_cov = power_per_antenna * I`.
    pub fn rician(
        n_r: usize,
        n_t: usize,
        k_factor: f64,
        rx_correlation: f64,
        tx_correlation: f64,
        power_per_antenna: f64,
    ) -> Result<Self> {
        Self::rician_steered(
            n_r,
            n_t,
            k_factor,
            rx_correlation,
            tx_correlation,
            power_per_antenna,
            0.0,
            0.0,
        )
    }

    /// As [`ChannelSpec::rician`], with half-wavelength ULA steering vectors at
    /// the given arrival/departure angles (degrees from broadside).
    #[allow(clippy::too_many_arguments)]
    pub fn rician_steered(
        n_r: usize,
        n_t: usize,
        k_factor: f64,
        rx_correlation: f64,
        tx_correlation: f64,
        power_per_antenna: f64,
        aoa_deg: f64,
        aod_deg: f64,
    ) -> Result<Self> {
        if !(k_factor >= 0.0 && k_factor.is_finite()) {
            return Err(ChannelError::InvalidParameter(format!("K-factor {k_factor}")));
        }
        if !(power_per_antenna >= 0.0 && power_per_antenna.is_finite()) {
            return Err(ChannelError::InvalidParameter(format!(
                "transmit power {power_per_antenna}"
            )));
        }
        let rx_corr = exponential_correlation(n_r, rx_correlation)?;
        let tx_corr = exponential_correlation(n_t, tx_correlation)?;
        let mean = los_mean(n_r, n_t, k_factor, rx_corr.trace(), tx_corr.trace(), aoa_deg, aod_deg);
        let tx_cov = HermitianPsd::from_diag(&vec![T::of(power_per_antenna); n_t])?;
        Self::new(mean, rx_corr, tx_corr, tx_cov)
    }

    pub fn n_r(&self) -> usize {
        self.mean.rows()
    }

    pub fn n_t(&self) -> usize {
        self.mean.cols()
    }

    pub fn mean(&self) -> &ComplexMatrix<T> {
        &self.mean
    }

    pub fn rx_corr(&self) -> &HermitianPsd<T> {
        &self.rx_corr
    }

    pub fn tx_corr(&self) -> &HermitianPsd<T> {
        &self.tx_corr
    }

    pub fn tx_cov(&self) -> &HermitianPsd<T> {
        &self.tx_cov
    }
}

/// Rank-one LOS matrix `c * a_r a_t^H` with `||M||_F^2 = K * tr(R) * tr(T)`.
fn los_mean<T: Real>(
    n_r: usize,
    n_t: usize,
    k_factor: f64,
    tr_rx: T,
    tr_tx: T,
    aoa_deg: f64,
    aod_deg: f64,
) -> ComplexMatrix<T> {
    let steer = |n: usize, deg: f64| -> Vec<Complex<T>> {
        let phase = std::f64::consts::PI * deg.to_radians().sin();
        (0..n)
            .map(|i| {
                let (s, c) = (phase * i as f64).sin_cos();
                Complex::new(T::of(c), T::of(s))
            })
            .collect()
    };
    let a_r = steer(n_r, aoa_deg);
    let a_t = steer(n_t, aod_deg);
    let target = T::of(k_factor) * tr_rx * tr_tx;
    let scale = (target / T::of((n_r * n_t) as f64)).sqrt();
    ComplexMatrix::from_fn(n_r, n_t, |i, j| (a_r[i] * a_t[j].conj()).scale(scale))
}

/// Link statistics with the transmit covariance absorbed:
/// `M' = M Q^{1/2}`, `T' = T^{1/2} Q T^{1/2}`, `Q' = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedChannelSpec<T: Real> {
    mean: ComplexMatrix<T>,
    rx_corr: HermitianPsd<T>,
    tx_corr: HermitianPsd<T>,
    rx_sqrt: Option<ComplexMatrix<T>>,
    tx_sqrt: Option<ComplexMatrix<T>>,
}

impl<T: Real> NormalizedChannelSpec<T> {
    fn from_parts(mean: ComplexMatrix<T>, rx_corr: HermitianPsd<T>, tx_corr: HermitianPsd<T>) -> Self {
        let rx_sqrt = (!rx_corr.is_identity()).then(|| rx_corr.sqrt());
        let tx_sqrt = (!tx_corr.is_identity()).then(|| tx_corr.sqrt());
        Self {
            mean,
            rx_corr,
            tx_corr,
            rx_sqrt,
            tx_sqrt,
        }
    }

    pub fn n_r(&self) -> usize {
        self.mean.rows()
    }

    pub fn n_t(&self) -> usize {
        self.mean.cols()
    }

    pub fn mean(&self) -> &ComplexMatrix<T> {
        &self.mean
    }

    pub fn rx_corr(&self) -> &HermitianPsd<T> {
        &self.rx_corr
    }

    pub fn tx_corr(&self) -> &HermitianPsd<T> {
        &self.tx_corr
    }

    /// Always the identity once normalized.
    pub fn tx_cov(&self) -> HermitianPsd<T> {
        HermitianPsd::identity(self.n_t())
    }

    /// Copy with the LOS mean replaced; correlation factors are reused.
    pub fn with_mean(&self, mean: ComplexMatrix<T>) -> Result<Self> {
        if mean.shape() != self.mean.shape() {
            return Err(ChannelError::Dimension("replacement mean has a different shape".into()));
        }
        Ok(Self { mean, ..self.clone() })
    }

    /// `tr(R) * tr(T')`, the diffuse part of `E||H||_F^2`.
    pub fn diffuse_power(&self) -> T {
        self.rx_corr.trace() * self.tx_corr.trace()
    }
}

pub fn normalize<T: Real>(spec: &ChannelSpec<T>) -> Result<NormalizedChannelSpec<T>> {
    if spec.tx_cov.is_identity() {
        return Ok(NormalizedChannelSpec::from_parts(
            spec.mean.clone(),
            spec.rx_corr.clone(),
            spec.tx_corr.clone(),
        ));
    }
    let q_sqrt = spec.tx_cov.sqrt();
    let mean = &spec.mean * &q_sqrt;
    let t_sqrt = spec.tx_corr.sqrt();
    let t_prime = &(&t_sqrt * spec.tx_cov.matrix()) * &t_sqrt;
    let t_prime = ComplexMatrix::from_fn(t_prime.rows(), t_prime.cols(), |i, j| {
        (t_prime[(i, j)] + t_prime[(j, i)].conj()).scale(T::of(0.5))
    });
    Ok(NormalizedChannelSpec::from_parts(
        mean,
        spec.rx_corr.clone(),
        HermitianPsd::new(t_prime)?,
    ))
}

/// One draw of the channel matrix; held fixed for the duration of a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    pub h: ComplexMatrix<T>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn n_r(&self) -> usize {
        self.h.rows()
    }

    pub fn n_t(&self) -> usize {
        self.h.cols()
    }
}

fn color<T: Real>(
    w: &ComplexMatrix<T>,
    rx_sqrt: Option<&ComplexMatrix<T>>,
    tx_sqrt: Option<&ComplexMatrix<T>>,
) -> ComplexMatrix<T> {
    let left = match rx_sqrt {
        Some(r) => r * w,
        None => w.clone(),
    };
    match tx_sqrt {
        Some(t) => &left * t,
        None => left,
    }
}

/// Draws `H = M + R^{1/2} W T'^{1/2}`.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    spec: &NormalizedChannelSpec<T>,
    rng: &mut R,
) -> ChannelRealization<T> {
    let w = sample_standard_complex_gaussian(spec.n_r(), spec.n_t(), rng)
        .expect("spec dimensions are non-zero");
    sample_channel_with(spec, &w).expect("white matrix matches spec")
}

/// Deterministic core of [`sample_channel`] for a supplied white matrix `W`.
pub fn sample_channel_with<T: Real>(
    spec: &NormalizedChannelSpec<T>,
    w: &ComplexMatrix<T>,
) -> Result<ChannelRealization<T>> {
    if w.shape() != spec.mean.shape() {
        return Err(ChannelError::Dimension(format!(
            "white matrix is {}x{}, spec is {}x{}",
            w.rows(),
            w.cols(),
            spec.n_r(),
            spec.n_t()
        )));
    }
    let diffuse = color(w, spec.rx_sqrt.as_ref(), spec.tx_sqrt.as_ref());
    Ok(ChannelRealization {
        h: &spec.mean + &diffuse,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfererSpec<T: Real> {
    pub label: String,
    pub channel: ChannelSpec<T>,
}

impl<T: Real> InterfererSpec<T> {
    pub fn new(label: impl Into<String>, channel: ChannelSpec<T>) -> Self {
        Self {
            label: label.into(),
            channel,
        }
    }
}

/// All interferers stacked into one virtual transmitter:
/// `M_I = [M_1, ..., M_N]`, `T_I = T_1 (+) ... (+) T_N`, shared `R_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateInterferer<T: Real> {
    mean: ComplexMatrix<T>,
    rx_corr: HermitianPsd<T>,
    tx_corr: HermitianPsd<T>,
    blocks: Vec<NormalizedChannelSpec<T>>,
    labels: Vec<String>,
}

impl<T: Real> AggregateInterferer<T> {
    pub fn n_r(&self) -> usize {
        self.mean.rows()
    }

    /// Total number of interfering transmit antennas.
    pub fn n_t(&self) -> usize {
        self.mean.cols()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn mean(&self) -> &ComplexMatrix<T> {
        &self.mean
    }

    pub fn rx_corr(&self) -> &HermitianPsd<T> {
        &self.rx_corr
    }

    pub fn tx_corr(&self) -> &HermitianPsd<T> {
        &self.tx_corr
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn blocks(&self) -> &[NormalizedChannelSpec<T>] {
        &self.blocks
    }

    /// Aggregate K-factor `||M_I||^2 / (tr(R_I) tr(T_I))`.
    pub fn rician_factor(&self) -> Result<T> {
        let diffuse = self.rx_corr.trace() * self.tx_corr.trace();
        if diffuse <= T::zero() {
            return Err(ChannelError::PureLos);
        }
        Ok(self.mean.norm_sqr() / diffuse)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization<T> {
        let w = sample_standard_complex_gaussian(self.n_r(), self.n_t(), rng)
            .expect("aggregate dimensions are non-zero");
        self.sample_with(&w).expect("white matrix matches aggregate")
    }

    /// Colors `W = [W_1, ..., W_N]` block by block; equal to `M_I + R^{1/2} W T_I^{1/2}`.
    pub fn sample_with(&self, w: &ComplexMatrix<T>) -> Result<ChannelRealization<T>> {
        if w.shape() != self.mean.shape() {
            return Err(ChannelError::Dimension("white matrix does not match aggregate".into()));
        }
        let mut h = ComplexMatrix::zeros(self.n_r(), self.n_t());
        let mut c0 = 0;
        for b in &self.blocks {
            let wb = w.submatrix(0, c0, self.n_r(), b.n_t());
            h.set_block(0, c0, &sample_channel_with(b, &wb)?.h);
            c0 += b.n_t();
        }
        Ok(ChannelRealization { h })
    }

    /// Per-interferer column blocks of a realization.
    pub fn split(&self, h: &ChannelRealization<T>) -> Vec<ChannelRealization<T>> {
        let mut c0 = 0;
        self.blocks
            .iter()
            .map(|b| {
                let part = h.h.submatrix(0, c0, h.n_r(), b.n_t());
                c0 += b.n_t();
                ChannelRealization { h: part }
            })
            .collect()
    }
}

/// Stacks interferers that share one receive array and receive correlation.
pub fn aggregate<T: Real>(interferers: &[InterfererSpec<T>]) -> Result<AggregateInterferer<T>> {
    let first = interferers.first().ok_or(ChannelError::NoInterferers)?;
    let n_r = first.channel.n_r();
    let rx_ref = first.channel.rx_corr().matrix();
    let scale = rx_ref.max_abs();
    let mut blocks = Vec::with_capacity(interferers.len());
    for i in interferers {
        if i.channel.n_r() != n_r {
            return Err(ChannelError::Dimension(format!(
                "interferer `{}` has {} receive antennas, expected {n_r}",
                i.label,
                i.channel.n_r()
            )));
        }
        if i.channel.rx_corr().matrix().max_abs_diff(rx_ref) > scale * T::of(1e-12) {
            return Err(ChannelError::HeterogeneousReceiveCorrelation {
                label: i.label.clone(),
            });
        }
        blocks.push(normalize(&i.channel)?);
    }
    let means: Vec<&ComplexMatrix<T>> = blocks.iter().map(|b| &b.mean).collect();
    let mean = ComplexMatrix::hstack(&means)?;
    let tx_blocks: Vec<HermitianPsd<T>> = blocks.iter().map(|b| b.tx_corr.clone()).collect();
    let tx_corr = direct_sum(&tx_blocks)?;
    Ok(AggregateInterferer {
        mean,
        rx_corr: first.channel.rx_corr().clone(),
        tx_corr,
        blocks,
        labels: interferers.iter().map(|i| i.label.clone()).collect(),
    })
}

/// `K = ||M||_F^2 / (tr(R) tr(T'))`.
pub fn rician_factor<T: Real>(spec: &NormalizedChannelSpec<T>) -> Result<T> {
    let diffuse = spec.diffuse_power();
    if diffuse <= T::zero() {
        return Err(ChannelError::PureLos);
    }
    Ok(spec.mean.norm_sqr() / diffuse)
}

/// Linear SNR `(K + 1) tr(R) tr(T') / n_r`, i.e. mean received signal power per antenna.
///
/// Written as `(||M||^2 + tr(R) tr(T')) / n_r` so that it also holds with zero diffuse power.
pub fn snr<T: Real>(spec: &NormalizedChannelSpec<T>) -> T {
    (spec.mean.norm_sqr() + spec.diffuse_power()) / T::of(spec.n_r() as f64)
}

/// Linear INR `(K_I + 1) tr(R_I) tr(T_I) / n_r` for the aggregate interferer.
pub fn inr<T: Real>(agg: &AggregateInterferer<T>, k_i: T) -> T {
    (k_i + T::one()) * agg.rx_corr.trace() * agg.tx_corr.trace() / T::of(agg.n_r() as f64)
}

/// `E||y||^2 = ||M||^2 + tr(R)tr(T') + ||M_I||^2 + tr(R_I)tr(T_I) + n_r`.
pub fn expected_rx_power<T: Real>(
    spec: &NormalizedChannelSpec<T>,
    agg: Option<&AggregateInterferer<T>>,
) -> T {
    let signal = spec.mean.norm_sqr() + spec.diffuse_power();
    let interference = agg.map_or(T::zero(), |a| {
        a.mean.norm_sqr() + a.rx_corr.trace() * a.tx_corr.trace()
    });
    signal + interference + T::of(spec.n_r() as f64)
}

fn synthesize<T: Real>(
    h: &ChannelRealization<T>,
    tx: &[Complex<T>],
    interference: Option<(&ChannelRealization<T>, &[Complex<T>])>,
) -> Result<Vec<Complex<T>>> {
    if tx.len() != h.n_t() {
        return Err(ChannelError::Dimension(format!(
            "{} symbols for {} transmit antennas",
            tx.len(),
            h.n_t()
        )));
    }
    let n_r = h.n_r();
    let mut y: Vec<Complex<T>> = (0..n_r)
        .map(|i| {
            tx.iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (j, s)| acc + h.h[(i, j)] * *s)
        })
        .collect();
    if let Some((hi, xi)) = interference {
        if hi.n_r() != n_r || xi.len() != hi.n_t() {
            return Err(ChannelError::Dimension(
                "interference channel/symbols do not match the receive array".into(),
            ));
        }
        for (i, yi) in y.iter_mut().enumerate() {
            for (j, s) in xi.iter().enumerate() {
                *yi += hi.h[(i, j)] * *s;
            }
        }
    }
    Ok(y)
}

/// `y = H x + H_I x_I + z` with `z ~ CN(0, I)`.
pub fn received_signal<T: Real, R: Rng + ?Sized>(
    h: &ChannelRealization<T>,
    tx: &[Complex<T>],
    interference: Option<(&ChannelRealization<T>, &[Complex<T>])>,
    rng: &mut R,
) -> Result<ComplexMatrix<T>> {
    let mut y = synthesize(h, tx, interference)?;
    for yi in y.iter_mut() {
        *yi += standard_complex_normal::<T, _>(rng);
    }
    Ok(ComplexMatrix::column(y))
}

/// [`received_signal`] with the noise term suppressed.
pub fn received_signal_noiseless<T: Real>(
    h: &ChannelRealization<T>,
    tx: &[Complex<T>],
    interference: Option<(&ChannelRealization<T>, &[Complex<T>])>,
) -> Result<ComplexMatrix<T>> {
    Ok(ComplexMatrix::column(synthesize(h, tx, interference)?))
}

/// Draws `n` i.i.d. `CN(0, 1)` interferer symbols.
pub fn gaussian_symbols<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex<T>> {
    (0..n).map(|_| standard_complex_normal(rng)).collect()
}

/// Unit-diagonal matrix check exposed for configuration validation.
pub fn is_correlation_matrix<T: Real>(m: &HermitianPsd<T>) -> bool {
    check_unit_diagonal(m, "").is_ok()
}
