//! Piecewise off-axis gain masks for satellite and gateway antennas.
//!
//! A mask is a parabolic main lobe `peak - 3 (phi / phi_3dB)^2` followed by an
//! ordered list of rolloff segments (constant or log-slope) and clamped below
//! by a sidelobe floor. Two presets approximate the shapes of the ITU
//! satellite (S.1528-like) and gateway (S.1428-like) envelopes; exact ITU
//! coefficients can be supplied through the scenario config instead.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const BOUNDARY_TOL_DB: f64 = 1e-9;

/// One rolloff segment; it applies from `from_deg` up to the next segment's start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RolloffSegment {
    /// Flat plateau at `gain_db`.
    Constant { from_deg: f64, gain_db: f64 },
    /// `intercept_db - slope_db * log10(phi)`.
    LogSlope {
        from_deg: f64,
        intercept_db: f64,
        slope_db: f64,
    },
}

impl RolloffSegment {
    pub fn from_deg(&self) -> f64 {
        match *self {
            RolloffSegment::Constant { from_deg, .. } | RolloffSegment::LogSlope { from_deg, .. } => {
                from_deg
            }
        }
    }

    fn value(&self, phi_deg: f64) -> f64 {
        match *self {
            RolloffSegment::Constant { gain_db, .. } => gain_db,
            RolloffSegment::LogSlope {
                intercept_db,
                slope_db,
                ..
            } => intercept_db - slope_db * phi_deg.log10(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainMask {
    pub peak_gain_db: f64,
    /// Off-axis angle at which the main lobe is 3 dB below peak.
    pub half_beamwidth_deg: f64,
    pub sidelobe_floor_db: f64,
    #[serde(default)]
    pub rolloff: Vec<RolloffSegment>,
}

impl GainMask {
    pub fn new(
        peak_gain_db: f64,
        half_beamwidth_deg: f64,
        sidelobe_floor_db: f64,
        rolloff: Vec<RolloffSegment>,
    ) -> Result<Self> {
        let mask = GainMask {
            peak_gain_db,
            half_beamwidth_deg,
            sidelobe_floor_db,
            rolloff,
        };
        mask.validate()?;
        Ok(mask)
    }

    /// Satellite transmit mask in the style of ITU-R S.1528 (rec. 1.2,
    /// `L_s = -25 dB`, `b = 6.32`, far-sidelobe floor 0 dBi).
    ///
    /// The 3 dB half-beamwidth follows `theta_3dB^2 ~ 27000 / G` for the full
    /// beamwidth in degrees; 35 dBi gives about 1.46 deg.
    pub fn s1528_like(peak_gain_db: f64) -> Self {
        const NEAR_SIDELOBE_DB: f64 = -25.0;
        const B: f64 = 6.32;
        let half_bw = 0.5 * (27_000.0 / 10f64.powf(peak_gain_db / 10.0)).sqrt();
        let main_edge = half_bw * (-NEAR_SIDELOBE_DB / 3.0).sqrt();
        let plateau = peak_gain_db + NEAR_SIDELOBE_DB;
        let slope_start = B * half_bw;
        let floor = 0.0f64.min(plateau);
        GainMask {
            peak_gain_db,
            half_beamwidth_deg: half_bw,
            sidelobe_floor_db: floor,
            rolloff: vec![
                RolloffSegment::Constant {
                    from_deg: main_edge,
                    gain_db: plateau,
                },
                RolloffSegment::LogSlope {
                    from_deg: slope_start,
                    intercept_db: plateau + 25.0 * slope_start.log10(),
                    slope_db: 25.0,
                },
            ],
        }
    }

    /// Gateway receive mask in the style of ITU-R S.1428 for `25 < D/lambda <= 100`.
    ///
    /// `D/lambda` is recovered from `G_max = 20 log10(D/lambda) + 8.4`; the main
    /// lobe `G_max - 2.5e-3 (D/lambda * phi)^2` is expressed through the
    /// equivalent 3 dB half-beamwidth `sqrt(1200) / (D/lambda)`. The first
    /// sidelobe plateau `G_1 = 29 - 25 log10(95 lambda/D)` runs to
    /// `phi_r = 95 lambda/D`, then `29 - 25 log10(phi)` down to a -10 dBi floor.
    pub fn s1428_like(peak_gain_db: f64) -> Self {
        let d_over_lambda = 10f64.powf((peak_gain_db - 8.4) / 20.0);
        let half_bw = 1200f64.sqrt() / d_over_lambda;
        let g1 = (29.0 - 25.0 * (95.0 / d_over_lambda).log10()).min(peak_gain_db);
        let phi_m = 20.0 / d_over_lambda * (peak_gain_db - g1).max(0.0).sqrt();
        let phi_r = (95.0 / d_over_lambda).max(phi_m);
        GainMask {
            peak_gain_db,
            half_beamwidth_deg: half_bw,
            sidelobe_floor_db: -10.0,
            rolloff: vec![
                RolloffSegment::Constant {
                    from_deg: phi_m,
                    gain_db: g1,
                },
                RolloffSegment::LogSlope {
                    from_deg: phi_r,
                    intercept_db: 29.0,
                    slope_db: 25.0,
                },
            ],
        }
    }

    /// Look up a preset by name (`"s1528-like"` or `"s1428-like"`).
    pub fn preset(name: &str, peak_gain_db: f64) -> Result<Self> {
        match name {
            "s1528-like" => Ok(Self::s1528_like(peak_gain_db)),
            "s1428-like" => Ok(Self::s1428_like(peak_gain_db)),
            other => Err(Error::invalid(format!("unknown antenna preset `{other}`"))),
        }
    }

    fn main_lobe(&self, phi_deg: f64) -> f64 {
        let x = phi_deg / self.half_beamwidth_deg;
        self.peak_gain_db - 3.0 * x * x
    }

    /// Checks that the envelope is non-increasing and bounded below by the floor.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.peak_gain_db,
            self.half_beamwidth_deg,
            self.sidelobe_floor_db,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("antenna", "mask parameters must be finite"));
        }
        if self.half_beamwidth_deg <= 0.0 {
            return Err(Error::config(
                "antenna.half_beamwidth_deg",
                "must be positive",
            ));
        }
        if self.sidelobe_floor_db > self.peak_gain_db {
            return Err(Error::config(
                "antenna.sidelobe_floor_db",
                "floor exceeds peak gain",
            ));
        }
        let mut prev_end = 0.0;
        let prev_value_at = |phi: f64, idx: usize| -> f64 {
            if idx == 0 {
                self.main_lobe(phi)
            } else {
                self.rolloff[idx - 1].value(phi)
            }
        };
        for (i, seg) in self.rolloff.iter().enumerate() {
            let from = seg.from_deg();
            if !(from > prev_end) || from > 180.0 {
                return Err(Error::config(
                    "antenna.rolloff",
                    format!("segment {i} start {from} is not increasing in (0, 180]"),
                ));
            }
            if let RolloffSegment::LogSlope { slope_db, .. } = *seg {
                if slope_db < 0.0 {
                    return Err(Error::config(
                        "antenna.rolloff",
                        format!("segment {i} has a rising log slope"),
                    ));
                }
            }
            let left = prev_value_at(from, i);
            let right = seg.value(from);
            if right > left + BOUNDARY_TOL_DB {
                return Err(Error::config(
                    "antenna.rolloff",
                    format!(
                        "segment {i} jumps up at {from} deg ({left:.3} -> {right:.3} dB)"
                    ),
                ));
            }
            prev_end = from;
        }
        Ok(())
    }

    /// Gain in dBi at an off-axis angle in degrees, `0 <= phi <= 180`.
    pub fn gain_db(&self, off_axis_deg: f64) -> Result<f64> {
        if !(0.0..=180.0).contains(&off_axis_deg) {
            return Err(Error::invalid(format!(
                "off-axis angle {off_axis_deg} outside [0, 180] deg"
            )));
        }
        Ok(self.gain_db_unchecked(off_axis_deg))
    }

    /// [`gain_db`](Self::gain_db) without range checking; angles are clamped into `[0, 180]`.
    pub fn gain_db_unchecked(&self, off_axis_deg: f64) -> f64 {
        let phi = off_axis_deg.clamp(0.0, 180.0);
        let raw = match self.rolloff.iter().rposition(|s| phi >= s.from_deg()) {
            Some(i) => self.rolloff[i].value(phi),
            None => self.main_lobe(phi),
        };
        raw.max(self.sidelobe_floor_db)
    }

    pub fn gain_linear(&self, off_axis_deg: f64) -> f64 {
        10f64.powf(self.gain_db_unchecked(off_axis_deg) / 10.0)
    }
}

/// Transmit (satellite) and receive (gateway) masks used in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPair {
    pub satellite: GainMask,
    pub gateway: GainMask,
}
