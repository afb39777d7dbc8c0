//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the channel and receiver math is written against: `f32` or `f64`.
///
/// The associated tolerances scale the structural checks (Hermitian symmetry,
/// PSD eigenvalue floor, multiply-back accuracy) to the precision of the type.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance for `m == m^H`.
    const HERMITIAN_TOL: f64;
    /// Eigenvalues down to `-PSD_TOL * lambda_max` are accepted (and clamped to zero).
    const PSD_TOL: f64;
    /// Relative accuracy expected of `sqrt(m) * sqrt(m) == m`.
    const SQRT_TOL: f64;

    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-12;
    const PSD_TOL: f64 = 1e-10;
    const SQRT_TOL: f64 = 1e-9;

    #[inline]
    fn of(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-5;
    const PSD_TOL: f64 = 1e-5;
    const SQRT_TOL: f64 = 1e-4;

    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
}
