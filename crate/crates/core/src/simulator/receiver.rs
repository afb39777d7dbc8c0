//! Linear MIMO receivers.
//!
//! [`linear_receive`] is the textbook dense form. [`BlockDetector`] computes
//! the same estimate for a space-time block without building the stacked
//! effective channel: it factors the per-trial quantities once and then only
//! touches `A^H y_t` per slot.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::stbc::SpaceTimeCode;
use crate::channel::ChannelRealization;
use crate::matrixkit::{ComplexMatrix, HermitianPsd, MatrixError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    #[default]
    Mmse,
    Zf,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReceiveError {
    #[error("rank deficient channel: zero-forcing has no unique solution")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Matrix(MatrixError),
}

impl From<MatrixError> for ReceiveError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::RankDeficient => ReceiveError::RankDeficient,
            other => ReceiveError::Matrix(other),
        }
    }
}

/// MMSE: `(H^H R^-1 H + I)^-1 H^H R^-1 y`. ZF: `(H^H H)^-1 H^H y`, ignoring `R`.
pub fn linear_receive<T: Real>(
    y: &[Complex<T>],
    h: &ChannelRealization<T>,
    interference_covariance: &HermitianPsd<T>,
    kind: ReceiverKind,
) -> Result<Vec<Complex<T>>, ReceiveError> {
    let (n_r, n_t) = h.h.shape();
    if y.len() != n_r || interference_covariance.dim() != n_r {
        return Err(ReceiveError::Dimension(format!(
            "y has {} entries and R is {1}x{1} for a {n_r}x{n_t} channel",
            y.len(),
            interference_covariance.dim(),
        )));
    }
    let y = ComplexMatrix::column(y.to_vec());
    let hh = h.h.adjoint();
    let (gram, rhs) = match kind {
        ReceiverKind::Mmse => {
            let whitened = interference_covariance.matrix().solve(&h.h)?;
            let whitened_y = interference_covariance.matrix().solve(&y)?;
            let g = &(&hh * &whitened) + &ComplexMatrix::identity(n_t);
            (g, &hh * &whitened_y)
        }
        ReceiverKind::Zf => (&hh * &h.h, &hh * &y),
    };
    Ok(gram.solve(&rhs)?.into_vec())
}

/// Per-trial detector for one space-time code over a fixed channel.
#[derive(Debug, Clone)]
pub struct BlockDetector<T: Real> {
    kind: ReceiverKind,
    /// `W H` with `W = R^-1` (MMSE) or `I` (ZF); `n_r x n_t`, row-major.
    a: ComplexMatrix<T>,
    /// `(G + I)^-1` for MMSE, `G^-1` for ZF; `None` when ZF is singular.
    f: Option<ComplexMatrix<T>>,
    /// Per-symbol scale of the MMSE estimate, divided out before slicing.
    bias: Vec<T>,
}

impl<T: Real> BlockDetector<T> {
    /// `r_inv` is the inverse interference-plus-noise covariance, or `None`
    /// for white unit noise.
    pub fn new(
        code: &SpaceTimeCode,
        h: &ComplexMatrix<T>,
        r_inv: Option<&ComplexMatrix<T>>,
        kind: ReceiverKind,
    ) -> Self {
        let a = match (kind, r_inv) {
            (ReceiverKind::Mmse, Some(w)) => w * h,
            _ => h.clone(),
        };
        let c = &h.adjoint() * &a;
        let ns = code.symbols();
        let mut g = ComplexMatrix::zeros(ns, ns);
        for slot in code.slots() {
            for (ai, ti) in slot.taps.iter().enumerate() {
                let Some(ti) = ti else { continue };
                for (aj, tj) in slot.taps.iter().enumerate() {
                    let Some(tj) = tj else { continue };
                    let mut v = c[(ai, aj)];
                    if slot.conjugate {
                        v = v.conj();
                    }
                    if ti.negate != tj.negate {
                        v = -v;
                    }
                    g[(ti.symbol, tj.symbol)] += v;
                }
            }
        }
        let (f, bias) = match kind {
            ReceiverKind::Mmse => {
                let f = (&g + &ComplexMatrix::identity(ns))
                    .inverse()
                    .expect("MMSE Gram matrix is positive definite");
                let bias = (0..ns).map(|k| T::one() - f[(k, k)].re).collect();
                (Some(f), bias)
            }
            ReceiverKind::Zf => (g.inverse().ok(), vec![T::one(); ns]),
        };
        Self { kind, a, f, bias }
    }

    /// Returns `false` if the estimate is unavailable (singular ZF).
    pub fn is_solvable(&self) -> bool {
        self.f.is_some()
    }

    /// Combines the slot observations of one block into biased estimates,
    /// written to `out` (length = symbols per block). `ys[t]` holds the raw
    /// (unconjugated) observation of slot `t`.
    pub fn estimate(
        &self,
        code: &SpaceTimeCode,
        ys: &[Vec<Complex<T>>],
        out: &mut [Complex<T>],
    ) {
        let n_r = self.a.rows();
        let n_t = self.a.cols();
        let ns = code.symbols();
        let mut b = vec![Complex::<T>::zero(); ns];
        let mut u = vec![Complex::<T>::zero(); n_t];
        let a = self.a.as_slice();
        for (slot, y) in code.slots().iter().zip(ys) {
            for (j, uj) in u.iter_mut().enumerate() {
                let mut acc = Complex::zero();
                for i in 0..n_r {
                    acc += a[i * n_t + j].conj() * y[i];
                }
                *uj = if slot.conjugate { acc.conj() } else { acc };
            }
            for (ant, tp) in slot.taps.iter().enumerate() {
                if let Some(tp) = tp {
                    if tp.negate {
                        b[tp.symbol] -= u[ant];
                    } else {
                        b[tp.symbol] += u[ant];
                    }
                }
            }
        }
        match &self.f {
            Some(f) => {
                let fs = f.as_slice();
                for (k, o) in out.iter_mut().enumerate().take(ns) {
                    let mut acc = Complex::zero();
                    for (l, bl) in b.iter().enumerate() {
                        acc += fs[k * ns + l] * bl;
                    }
                    *o = acc;
                }
            }
            None => out[..ns].iter_mut().for_each(|o| *o = Complex::zero()),
        }
    }

    /// Estimates with the MMSE shrinkage removed; ZF output is unchanged.
    pub fn estimate_unbiased(
        &self,
        code: &SpaceTimeCode,
        ys: &[Vec<Complex<T>>],
        out: &mut [Complex<T>],
    ) {
        self.estimate(code, ys, out);
        if self.kind == ReceiverKind::Mmse {
            let floor = T::of(1e-12);
            for (o, &beta) in out.iter_mut().zip(&self.bias) {
                if beta > floor {
                    *o = o.unscale(beta);
                }
            }
        }
    }
}

/// `H_I H_I^H + I`.
pub fn interference_plus_noise<T: Real>(h_i: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let mut r = h_i * &h_i.adjoint();
    for k in 0..r.rows() {
        r[(k, k)] += Complex::one();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixkit::sample_standard_complex_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zf_identity_channel_recovers_symbols() {
        let h = ChannelRealization {
            h: ComplexMatrix::<f64>::identity(2),
        };
        let x = vec![c(0.5, -0.5), c(-0.7, 0.1)];
        let got = linear_receive(&x, &h, &HermitianPsd::identity(2), ReceiverKind::Zf).unwrap();
        assert_eq!(got, x);
    }

    #[test]
    fn mmse_with_white_noise_is_regularized_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = sample_standard_complex_gaussian::<f64, _>(2, 2, &mut rng).unwrap();
        let y = sample_standard_complex_gaussian::<f64, _>(2, 1, &mut rng).unwrap();
        let got = linear_receive(
            y.as_slice(),
            &ChannelRealization { h: h.clone() },
            &HermitianPsd::identity(2),
            ReceiverKind::Mmse,
        )
        .unwrap();
        // closed-form 2x2 inverse of H^H H + I
        let g = &(&h.adjoint() * &h) + &ComplexMatrix::identity(2);
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let inv = ComplexMatrix::new(
            2,
            2,
            vec![g[(1, 1)] / det, -g[(0, 1)] / det, -g[(1, 0)] / det, g[(0, 0)] / det],
        )
        .unwrap();
        let want = &(&inv * &h.adjoint()) * &y;
        for k in 0..2 {
            assert!((got[k] - want[(k, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn mmse_approaches_zf_at_high_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let h = sample_standard_complex_gaussian::<f64, _>(4, 3, &mut rng).unwrap();
            let y = sample_standard_complex_gaussian::<f64, _>(4, 1, &mut rng).unwrap();
            let real = ChannelRealization { h };
            let tiny = HermitianPsd::from_diag(&[1e-6; 4]).unwrap();
            let mmse = linear_receive(y.as_slice(), &real, &tiny, ReceiverKind::Mmse).unwrap();
            let zf = linear_receive(y.as_slice(), &real, &tiny, ReceiverKind::Zf).unwrap();
            for (a, b) in mmse.iter().zip(&zf) {
                assert!((a - b).norm() < 1e-3);
            }
        }
    }

    #[test]
    fn zf_rank_deficient_is_reported() {
        let h = ChannelRealization {
            h: ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap(),
        };
        let err = linear_receive(&[c(1.0, 0.0), c(0.0, 1.0)], &h, &HermitianPsd::identity(2), ReceiverKind::Zf)
            .unwrap_err();
        assert_eq!(err, ReceiveError::RankDeficient);
        assert!(err.to_string().contains("rank deficient"));
    }

    // Stacks the block into one tall system and solves it densely.
    fn dense_block(
        code: &SpaceTimeCode,
        h: &ComplexMatrix<f64>,
        r: &ComplexMatrix<f64>,
        ys: &[Vec<Complex<f64>>],
        kind: ReceiverKind,
    ) -> Vec<Complex<f64>> {
        let n_r = h.rows();
        let slots = code.slots().len();
        let mut he = ComplexMatrix::zeros(n_r * slots, code.symbols());
        let mut cov = ComplexMatrix::zeros(n_r * slots, n_r * slots);
        let mut y = Vec::new();
        for (t, slot) in code.slots().iter().enumerate() {
            for (a, tp) in slot.taps.iter().enumerate() {
                let tp = tp.unwrap();
                for i in 0..n_r {
                    let mut g = if slot.conjugate { h[(i, a)].conj() } else { h[(i, a)] };
                    if tp.negate {
                        g = -g;
                    }
                    he[(t * n_r + i, tp.symbol)] += g;
                }
            }
            let block = if slot.conjugate { r.conj() } else { r.clone() };
            cov.set_block(t * n_r, t * n_r, &block);
            y.extend(ys[t].iter().map(|v| if slot.conjugate { v.conj() } else { *v }));
        }
        linear_receive(&y, &ChannelRealization { h: he }, &HermitianPsd::new(cov).unwrap(), kind).unwrap()
    }

    #[test]
    fn block_detector_matches_dense_receiver() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (n_t, n_r) in [(1, 1), (2, 2), (3, 2), (4, 4), (2, 3)] {
            for scheme in [super::super::TransmitScheme::Diversity, super::super::TransmitScheme::Multiplexing] {
                let code = SpaceTimeCode::for_scheme(scheme, n_t).unwrap();
                let h = sample_standard_complex_gaussian::<f64, _>(n_r, n_t, &mut rng).unwrap();
                let hi = sample_standard_complex_gaussian::<f64, _>(n_r, 3, &mut rng).unwrap();
                let r = interference_plus_noise(&hi);
                let r_inv = r.inverse().unwrap();
                let ys: Vec<Vec<Complex<f64>>> = (0..code.slots().len())
                    .map(|_| sample_standard_complex_gaussian::<f64, _>(n_r, 1, &mut rng).unwrap().into_vec())
                    .collect();
                for kind in [ReceiverKind::Mmse, ReceiverKind::Zf] {
                    if kind == ReceiverKind::Zf && n_t > n_r && scheme == super::super::TransmitScheme::Multiplexing {
                        continue;
                    }
                    let det = BlockDetector::new(&code, &h, Some(&r_inv), kind);
                    let mut got = vec![Complex::new(0.0, 0.0); code.symbols()];
                    det.estimate(&code, &ys, &mut got);
                    let want = dense_block(&code, &h, &r, &ys, kind);
                    for (g, w) in got.iter().zip(&want) {
                        assert!((g - w).norm() < 1e-9, "{scheme:?} {n_t}x{n_r} {kind:?}: {g} vs {w}");
                    }
                }
            }
        }
    }
}
