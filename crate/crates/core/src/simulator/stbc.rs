//! Space-time mappings from a block of symbols to per-antenna transmissions.
//!
//! Each slot lists, for every transmit antenna, which symbol it sends and
//! with what sign. In a conjugated slot every antenna sends the conjugate of
//! its symbol, so the receiver works with `conj(y_t)`, which is linear in the
//! symbols again. This covers spatial multiplexing (one plain slot) and the
//! complex orthogonal designs for up to four antennas.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TransmitScheme {
    /// Orthogonal space-time block code: Alamouti for two antennas, the
    /// rate-1/2 complex orthogonal designs for three and four.
    #[default]
    Diversity,
    /// Independent symbol streams, one per transmit antenna.
    Multiplexing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tap {
    pub symbol: usize,
    pub negate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub conjugate: bool,
    /// Indexed by transmit antenna; `None` means the antenna is silent.
    pub taps: Vec<Option<Tap>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeCode {
    n_t: usize,
    symbols: usize,
    slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no orthogonal block code for {0} transmit antennas (supported: 1 to 4)")]
pub struct UnsupportedAntennas(pub usize);

const fn tap(symbol: usize, negate: bool) -> Option<Tap> {
    Some(Tap { symbol, negate })
}

/// First four rows of the rate-1/2 four-antenna design; the last four rows
/// repeat them conjugated.
const G4_ROWS: [[Option<Tap>; 4]; 4] = [
    [tap(0, false), tap(1, false), tap(2, false), tap(3, false)],
    [tap(1, true), tap(0, false), tap(3, true), tap(2, false)],
    [tap(2, true), tap(3, false), tap(0, false), tap(1, true)],
    [tap(3, true), tap(2, true), tap(1, false), tap(0, false)],
];

impl SpaceTimeCode {
    pub fn for_scheme(scheme: TransmitScheme, n_t: usize) -> Result<Self, UnsupportedAntennas> {
        match scheme {
            TransmitScheme::Multiplexing => {
                if n_t == 0 {
                    return Err(UnsupportedAntennas(0));
                }
                Ok(Self::multiplexing(n_t))
            }
            TransmitScheme::Diversity => Self::orthogonal(n_t),
        }
    }

    pub fn multiplexing(n_t: usize) -> Self {
        let taps = (0..n_t).map(|a| tap(a, false)).collect();
        Self {
            n_t,
            symbols: n_t,
            slots: vec![Slot {
                conjugate: false,
                taps,
            }],
        }
    }

    pub fn orthogonal(n_t: usize) -> Result<Self, UnsupportedAntennas> {
        let slots = match n_t {
            1 => vec![Slot {
                conjugate: false,
                taps: vec![tap(0, false)],
            }],
            2 => vec![
                Slot {
                    conjugate: false,
                    taps: vec![tap(0, false), tap(1, false)],
                },
                Slot {
                    conjugate: true,
                    taps: vec![tap(1, true), tap(0, false)],
                },
            ],
            3 | 4 => [false, true]
                .into_iter()
                .flat_map(|conjugate| {
                    G4_ROWS.iter().map(move |row| Slot {
                        conjugate,
                        taps: row[..n_t].to_vec(),
                    })
                })
                .collect(),
            other => return Err(UnsupportedAntennas(other)),
        };
        let symbols = if n_t <= 2 { n_t } else { 4 };
        Ok(Self { n_t, symbols, slots })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Symbols carried per block.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Symbols per channel use.
    pub fn rate(&self) -> f64 {
        self.symbols as f64 / self.slots.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixkit::{sample_standard_complex_gaussian, ComplexMatrix};
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Stacked effective matrix over all slots, built directly from the
    // transmitted-signal definition rather than from the tap tables.
    fn effective(code: &SpaceTimeCode, h: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let n_r = h.rows();
        let mut out = ComplexMatrix::zeros(n_r * code.slots().len(), code.symbols());
        for (t, slot) in code.slots().iter().enumerate() {
            for k in 0..code.symbols() {
                // response of the slot observation to a unit symbol k
                for i in 0..n_r {
                    let mut acc = Complex::new(0.0, 0.0);
                    for (a, tp) in slot.taps.iter().enumerate() {
                        if let Some(tp) = tp {
                            if tp.symbol == k {
                                let s = if tp.negate { -1.0 } else { 1.0 };
                                let g = if slot.conjugate { h[(i, a)].conj() } else { h[(i, a)] };
                                acc += g * s;
                            }
                        }
                    }
                    out[(t * n_r + i, k)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn orthogonal_designs_decouple_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n_t in 1..=4 {
            let code = SpaceTimeCode::orthogonal(n_t).unwrap();
            let h = sample_standard_complex_gaussian::<f64, _>(3, n_t, &mut rng).unwrap();
            let he = effective(&code, &h);
            let gram = &he.adjoint() * &he;
            let repeats = if n_t <= 2 { 1.0 } else { 2.0 };
            let expected = h.norm_sqr() * repeats;
            for i in 0..code.symbols() {
                for j in 0..code.symbols() {
                    let want = if i == j { expected } else { 0.0 };
                    assert!((gram[(i, j)] - Complex::new(want, 0.0)).norm() < 1e-12, "n_t={n_t}");
                }
            }
        }
    }

    #[test]
    fn every_antenna_sends_every_slot() {
        for n_t in 1..=4 {
            let code = SpaceTimeCode::orthogonal(n_t).unwrap();
            assert!(code.slots().iter().all(|s| s.taps.iter().all(Option::is_some)));
        }
        assert_eq!(SpaceTimeCode::orthogonal(2).unwrap().rate(), 1.0);
        assert_eq!(SpaceTimeCode::orthogonal(4).unwrap().rate(), 0.5);
        assert_eq!(SpaceTimeCode::orthogonal(3).unwrap().rate(), 0.5);
        assert_eq!(SpaceTimeCode::orthogonal(5), Err(UnsupportedAntennas(5)));
    }

    #[test]
    fn multiplexing_is_identity() {
        let code = SpaceTimeCode::multiplexing(3);
        assert_eq!(code.slots().len(), 1);
        assert_eq!(code.symbols(), 3);
        let h = ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(effective(&code, &h), h);
    }
}
