//! Sector antenna pattern: parabolic main lobe with a front-to-back floor,
//! electrical downtilt and a single parameterized upper sidelobe.
//!
//! Angles are degrees everywhere. Elevation is measured downward from the
//! horizon (positive = toward the ground), matching the sign of downtilt, so
//! the tilted main lobe peaks at `elevation == downtilt`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AntennaError {
    #[error("antenna.{field} = {value}: {reason}")]
    InvalidField {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("pattern step {0} deg must satisfy 0 < step <= 180")]
    InvalidStep(f64),
}

/// Rows of the datasheet that do not influence far-field gain; carried along for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetadata {
    pub frequency_range_mhz: (f64, f64),
    pub vswr_max: f64,
    pub input_impedance_ohm: f64,
    pub polarization: String,
    pub port_isolation_db: f64,
    pub cross_polarization_ratio_db: f64,
    pub null_fill_db: f64,
    pub max_power_w: f64,
}

impl Default for PatternMetadata {
    fn default() -> Self {
        Self {
            frequency_range_mhz: (2300.0, 2700.0),
            vswr_max: 1.5,
            input_impedance_ohm: 50.0,
            polarization: "+/-45".into(),
            port_isolation_db: 30.0,
            cross_polarization_ratio_db: 18.0,
            null_fill_db: 18.0,
            max_power_w: 250.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPattern<T: Real> {
    /// Boresight gain, dBi.
    pub g_max: T,
    pub theta_3db_h: T,
    pub theta_3db_v: T,
    /// Front-to-back ratio, dB (positive); also the attenuation floor.
    pub g_fb: T,
    pub downtilt: T,
    /// Upper sidelobe level below `g_max`, dB. `+inf` removes the sidelobe.
    pub sidelobe_suppression: T,
    pub metadata: PatternMetadata,
}

impl<T: Real> Default for AntennaPattern<T> {
    fn default() -> Self {
        Self {
            g_max: T::of(18.0),
            theta_3db_h: T::of(60.0),
            theta_3db_v: T::of(7.0),
            g_fb: T::of(30.0),
            downtilt: T::of(2.0),
            sidelobe_suppression: T::of(18.0),
            metadata: PatternMetadata::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cut {
    Horizontal,
    Vertical,
}

impl<T: Real> AntennaPattern<T> {
    pub fn validate(&self) -> Result<(), AntennaError> {
        let check = |field: &'static str, v: T, ok: bool, reason: &'static str| {
            if ok && !v.is_nan() {
                Ok(())
            } else {
                Err(AntennaError::InvalidField {
                    field,
                    value: v.to_f64_lossy(),
                    reason,
                })
            }
        };
        check("g_max", self.g_max, self.g_max.is_finite(), "must be finite")?;
        check(
            "theta_3db_h",
            self.theta_3db_h,
            self.theta_3db_h > T::zero() && self.theta_3db_h.is_finite(),
            "must be > 0",
        )?;
        check(
            "theta_3db_v",
            self.theta_3db_v,
            self.theta_3db_v > T::zero() && self.theta_3db_v.is_finite(),
            "must be > 0",
        )?;
        check("g_fb", self.g_fb, self.g_fb > T::zero() && self.g_fb.is_finite(), "must be > 0")?;
        check(
            "downtilt",
            self.downtilt,
            self.downtilt.abs() <= T::of(90.0),
            "must lie in [-90, 90]",
        )?;
        check(
            "sidelobe_suppression",
            self.sidelobe_suppression,
            self.sidelobe_suppression >= T::zero(),
            "must be >= 0",
        )?;
        Ok(())
    }

    /// Parabolic attenuation `12 (theta / bw)^2` capped at the front-to-back floor.
    fn attenuation(&self, theta: T, beamwidth: T) -> T {
        let x = theta / beamwidth;
        (T::of(12.0) * x * x).min(self.g_fb)
    }

    fn vertical_attenuation(&self, elevation: T) -> T {
        let main = self.attenuation(elevation - self.downtilt, self.theta_3db_v);
        if !self.sidelobe_suppression.is_finite() {
            return main;
        }
        let offset = elevation - self.downtilt + T::of(2.0) * self.theta_3db_v;
        let side = (self.sidelobe_suppression + self.attenuation(offset, self.theta_3db_v)).min(self.g_fb);
        main.min(side)
    }

    /// Elevation (degrees) and gain (dBi) at the peak of the upper sidelobe, if modeled.
    pub fn upper_sidelobe_peak(&self) -> Option<(T, T)> {
        self.sidelobe_suppression.is_finite().then(|| {
            let el = self.downtilt - T::of(2.0) * self.theta_3db_v;
            (el, self.composite_gain(T::zero(), el))
        })
    }
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees<T: Real>(theta: T) -> T {
    let full = T::of(360.0);
    let half = T::of(180.0);
    let mut t = theta % full;
    if t > half {
        t -= full;
    } else if t <= -half {
        t += full;
    }
    t
}

/// Single-cut gain `g_max + max(-12 (theta / beamwidth)^2, -g_fb)`.
pub fn gain_cut<T: Real>(p: &AntennaPattern<T>, theta: T, beamwidth: T) -> T {
    let theta = wrap_degrees(theta);
    let x = theta / beamwidth;
    p.g_max + (-(T::of(12.0) * x * x)).max(-p.g_fb)
}

/// Gain toward (azimuth, elevation) relative to the sector boresight.
///
/// Horizontal and vertical attenuations add, with the sum capped at the
/// front-to-back ratio. The vertical attenuation is the smaller of the
/// tilted main lobe and the upper sidelobe, which sits two vertical
/// beamwidths above the main lobe at `g_max - sidelobe_suppression`.
pub fn composite_gain<T: Real>(p: &AntennaPattern<T>, azimuth: T, elevation: T) -> T {
    p.composite_gain(azimuth, elevation)
}

impl<T: Real> AntennaPattern<T> {
    pub fn composite_gain(&self, azimuth: T, elevation: T) -> T {
        let h = self.attenuation(wrap_degrees(azimuth), self.theta_3db_h);
        let v = self.vertical_attenuation(elevation);
        self.g_max - (h + v).min(self.g_fb)
    }
}

/// Maps an angle along a cut onto (azimuth, elevation).
///
/// The horizontal cut runs through the tilted main lobe (`elevation ==
/// downtilt`). The vertical cut walks the boresight plane: `|angle| <= 90` is the front
/// half (azimuth 0), beyond that the back half (azimuth 180) with the
/// elevation folded back into `[-90, 90]`.
fn cut_direction<T: Real>(cut: Cut, angle: T, downtilt: T) -> (T, T) {
    match cut {
        Cut::Horizontal => (angle, downtilt),
        Cut::Vertical => {
            let right = T::of(90.0);
            if angle.abs() <= right {
                (T::zero(), angle)
            } else {
                let folded = if angle > T::zero() {
                    T::of(180.0) - angle
                } else {
                    -T::of(180.0) - angle
                };
                (T::of(180.0), folded)
            }
        }
    }
}

/// Samples a cut at multiples of `step` in `(-180, 180]`, ascending.
pub fn sample_pattern<T: Real>(
    p: &AntennaPattern<T>,
    cut: Cut,
    step: T,
) -> Result<Vec<(T, T)>, AntennaError> {
    let s = step.to_f64_lossy();
    if !(s > 0.0 && s <= 180.0) {
        return Err(AntennaError::InvalidStep(s));
    }
    let k_min = (-180.0 / s).floor() as i64 + 1;
    let k_max = (180.0 / s + 1e-9).floor() as i64;
    Ok((k_min..=k_max)
        .map(|k| {
            let angle = T::of(k as f64 * s);
            let (az, el) = cut_direction(cut, angle, p.downtilt);
            (angle, p.composite_gain(az, el))
        })
        .collect())
}

/// Pattern export: header `angle_deg,gain_dbi`, four decimals.
pub fn format_pattern_table<T: Real>(rows: &[(T, T)]) -> String {
    let mut out = String::from("angle_deg,gain_dbi\n");
    for (a, g) in rows {
        let _ = writeln!(out, "{:.4},{:.4}", a.to_f64_lossy(), g.to_f64_lossy());
    }
    out
}

/// Local maxima of a sampled cut, strongest first.
///
/// A sample counts when it rises strictly above its left neighbour and is not
/// exceeded by its right neighbour; plateaus at the floor never qualify.
pub fn lobe_peaks<T: Real>(rows: &[(T, T)]) -> Vec<(T, T)> {
    let mut peaks: Vec<(T, T)> = rows
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| w[1])
        .collect();
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    peaks
}
