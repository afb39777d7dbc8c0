//! Gray-coded QPSK and 16-QAM with unit average symbol energy.
//!
//! Bits are `u8` values 0 or 1, most significant bit of each symbol first.
//! QPSK maps `(b0, b1)` to `((1 - 2 b0) + i (1 - 2 b1)) / sqrt(2)`, so `00`
//! is `(1 + i) / sqrt(2)`. 16-QAM uses `(b0, b1)` for the in-phase level and
//! `(b2, b3)` for quadrature, each on the Gray ladder
//! `-3: 11, -1: 10, +1: 00, +3: 01`, scaled by `1 / sqrt(10)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{len} bits is not a multiple of {bits_per_symbol} bits per symbol")]
pub struct BitLengthError {
    pub len: usize,
    pub bits_per_symbol: usize,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
        }
    }

    /// All constellation points, indexed by the symbol's bit pattern (MSB first).
    pub fn constellation<T: Real>(self) -> Vec<Complex<T>> {
        let k = self.bits_per_symbol();
        (0..1usize << k)
            .map(|v| {
                let bits: Vec<u8> = (0..k).rev().map(|b| ((v >> b) & 1) as u8).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }

    fn map_symbol<T: Real>(self, bits: &[u8]) -> Complex<T> {
        match self {
            Modulation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex::new(T::of(s * axis_sign(bits[0])), T::of(s * axis_sign(bits[1])))
            }
            Modulation::Qam16 => {
                let s = 1.0 / 10f64.sqrt();
                Complex::new(
                    T::of(s * gray4_level(bits[0], bits[1])),
                    T::of(s * gray4_level(bits[2], bits[3])),
                )
            }
        }
    }
}

#[inline]
fn axis_sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn gray4_level(sign_bit: u8, outer_bit: u8) -> f64 {
    axis_sign(sign_bit) * if outer_bit == 0 { 1.0 } else { 3.0 }
}

pub fn modulate<T: Real>(bits: &[u8], m: Modulation) -> Result<Vec<Complex<T>>, BitLengthError> {
    let k = m.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(BitLengthError {
            len: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits.chunks_exact(k).map(|c| m.map_symbol(c)).collect())
}

/// Hard-decision demodulation, appending to `out`.
pub fn demodulate_into<T: Real>(symbols: &[Complex<T>], m: Modulation, out: &mut Vec<u8>) {
    let bit = |negative: bool| u8::from(negative);
    match m {
        Modulation::Qpsk => {
            for z in symbols {
                out.push(bit(z.re < T::zero()));
                out.push(bit(z.im < T::zero()));
            }
        }
        Modulation::Qam16 => {
            let threshold = T::of(2.0 / 10f64.sqrt());
            for z in symbols {
                for axis in [z.re, z.im] {
                    out.push(bit(axis < T::zero()));
                    out.push(bit(axis.abs() > threshold));
                }
            }
        }
    }
}

pub fn demodulate<T: Real>(symbols: &[Complex<T>], m: Modulation) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * m.bits_per_symbol());
    demodulate_into(symbols, m, &mut out);
    out
}
