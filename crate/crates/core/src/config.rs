//! Run configuration: the full physical, drive and detector
//! parameterization of a simulated run.
//!
//! A [`RunConfig`] maps field-for-field onto the JSON run document accepted
//! by the CLI. Keys are snake_case and carry their unit as a suffix
//! (`pair_rate_hz`, `window_ps`, ...). Unknown keys are rejected so a typo
//! cannot silently fall back to a default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Harmonic, ModulatorParams};

/// Drive waveform applied to the modulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveShape {
    /// 50% duty-cycle square wave.
    Square,
    /// Constant bias; `freq_hz` is ignored.
    Dc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveWaveform {
    pub shape: DriveShape,
    /// Drive frequency Omega, Hz.
    pub freq_hz: f64,
    /// Peak-to-peak voltage, volts.
    pub vpp_volts: f64,
    /// DC bias, volts.
    pub vdc_volts: f64,
    /// Trigger offset between drive and tagger. `None` reproduces the
    /// unknown-offset condition: a seed-derived uniform draw over one
    /// half-period either side of zero. Pin to `Some(0)` for oracle tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0_ps: Option<i64>,
}

impl DriveWaveform {
    /// Drive period in integer picoseconds (rounded).
    pub fn period_ps(&self) -> i64 {
        (1e12 / self.freq_hz).round() as i64
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape == DriveShape::Square
            && !(self.freq_hz.is_finite() && self.freq_hz > 0.0)
        {
            return Err(Error::InvalidParameter {
                name: "freq_hz",
                reason: format!("square drive needs freq_hz > 0, got {}", self.freq_hz),
            });
        }
        if !self.vpp_volts.is_finite() || self.vpp_volts < 0.0 {
            return Err(Error::InvalidParameter {
                name: "vpp_volts",
                reason: format!("peak-to-peak voltage must be >= 0, got {}", self.vpp_volts),
            });
        }
        if !self.vdc_volts.is_finite() {
            return Err(Error::InvalidParameter {
                name: "vdc_volts",
                reason: format!("DC bias must be finite, got {}", self.vdc_volts),
            });
        }
        if self.shape == DriveShape::Square && self.period_ps() < 2 {
            return Err(Error::InvalidParameter {
                name: "freq_hz",
                reason: format!(
                    "drive period rounds to {} ps; need >= 2 ps",
                    self.period_ps()
                ),
            });
        }
        Ok(())
    }
}

/// Detector response: efficiency thinning, dark counts, Gaussian timing
/// jitter and non-paralyzable dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub jitter_sigma_ps: f64,
    pub dead_time_ps: i64,
}

impl DetectorModel {
    pub fn validate(&self, which: &'static str) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: format!(
                    "{which} detector efficiency must be in [0, 1], got {}",
                    self.efficiency
                ),
            });
        }
        if !self.dark_rate_hz.is_finite() || self.dark_rate_hz < 0.0 {
            return Err(Error::InvalidParameter {
                name: "dark_rate_hz",
                reason: format!(
                    "{which} detector dark rate must be >= 0, got {}",
                    self.dark_rate_hz
                ),
            });
        }
        if !self.jitter_sigma_ps.is_finite() || self.jitter_sigma_ps < 0.0 {
            return Err(Error::InvalidParameter {
                name: "jitter_sigma_ps",
                reason: format!(
                    "{which} detector jitter must be >= 0, got {}",
                    self.jitter_sigma_ps
                ),
            });
        }
        if self.dead_time_ps < 0 {
            return Err(Error::InvalidParameter {
                name: "dead_time_ps",
                reason: format!(
                    "{which} detector dead time must be >= 0, got {}",
                    self.dead_time_ps
                ),
            });
        }
        Ok(())
    }
}

/// Static transmission losses around the interferometer, dB magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Losses {
    /// One entry per source spiral.
    pub spiral_db: [f64; 2],
    pub routing_db: f64,
    pub coupling_db: f64,
}

/// Asymmetric MZI add-drop filter parameters. Geometry is metadata; the
/// extinction feeds the accidental floor as a pump-leak rate proportional to
/// the pair rate, `pair_rate_hz * 10^(-extinction_db / 10)` per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmziParams {
    pub delta_l_um: f64,
    pub fsr_nm: f64,
    pub extinction_db: f64,
}

/// Slow phenomenological phase drift standing in for thermal crosstalk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drift {
    /// Pump-path phase ramp, radians per second.
    pub rad_per_s: f64,
}

/// Complete parameterization of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Pump wavelength, metadata only.
    pub pump_wavelength_nm: f64,
    /// Pair emission rate at the fringe maximum, Hz.
    pub pair_rate_hz: f64,
    /// Ratio of pair-production probabilities of the two sources.
    pub ratio_r: f64,
    /// Fringe harmonic: 2 for the nonlinear-interferometer configuration,
    /// 1 for the classical Mach-Zehnder comparison configuration.
    pub harmonic_n: Harmonic,
    pub modulator: ModulatorParams,
    pub drive: DriveWaveform,
    /// Static pump-path phase from the thermo-optic shifter, radians.
    pub tps_offset_rad: f64,
    pub losses: Losses,
    pub amzi: AmziParams,
    /// Signal and idler detectors, in channel order.
    pub detectors: [DetectorModel; 2],
    /// Coincidence window used when counting pairs, ps.
    pub window_ps: i64,
    pub duration_s: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Drift>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.pair_rate_hz.is_finite() || self.pair_rate_hz < 0.0 {
            return Err(Error::InvalidParameter {
                name: "pair_rate_hz",
                reason: format!("pair rate must be >= 0, got {}", self.pair_rate_hz),
            });
        }
        if !self.ratio_r.is_finite() || self.ratio_r < 0.0 {
            return Err(Error::InvalidParameter {
                name: "ratio_r",
                reason: format!("source ratio must be >= 0, got {}", self.ratio_r),
            });
        }
        if !self.tps_offset_rad.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tps_offset_rad",
                reason: "TPS phase must be finite".into(),
            });
        }
        if self.window_ps <= 0 {
            return Err(Error::InvalidParameter {
                name: "window_ps",
                reason: format!("coincidence window must be > 0, got {}", self.window_ps),
            });
        }
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "duration_s",
                reason: format!("duration must be > 0, got {}", self.duration_s),
            });
        }
        if let Some(d) = &self.drift {
            if !d.rad_per_s.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "rad_per_s",
                    reason: "drift rate must be finite".into(),
                });
            }
        }
        self.modulator.validate()?;
        self.drive.validate()?;
        self.detectors[0].validate("signal")?;
        self.detectors[1].validate("idler")?;
        Ok(())
    }

    /// Run duration in integer picoseconds.
    pub fn duration_ps(&self) -> i64 {
        (self.duration_s * 1e12).round() as i64
    }

    /// Uncorrelated background rate per channel: detector dark counts plus
    /// pump leakage surviving the AMZI extinction.
    pub fn background_rate_hz(&self, channel: usize) -> f64 {
        let leak = self.pair_rate_hz * 10f64.powf(-self.amzi.extinction_db / 10.0);
        self.detectors[channel].dark_rate_hz + leak
    }

    /// Parse and validate a JSON run document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example() -> RunConfig {
        RunConfig {
            pump_wavelength_nm: 1544.61,
            pair_rate_hz: 100.0,
            ratio_r: 1.0,
            harmonic_n: Harmonic::Two,
            modulator: ModulatorParams {
                vpi_volts: 7.99,
                alpha_db_per_pi: 0.0,
                base_loss_db: 0.0,
            },
            drive: DriveWaveform {
                shape: DriveShape::Square,
                freq_hz: 1e7,
                vpp_volts: 4.0,
                vdc_volts: 2.1,
                t0_ps: Some(0),
            },
            tps_offset_rad: 0.0,
            losses: Losses {
                spiral_db: [6.5, 6.5],
                routing_db: 0.3,
                coupling_db: 0.2,
            },
            amzi: AmziParams {
                delta_l_um: 90.0,
                fsr_nm: 6.4,
                extinction_db: 60.0,
            },
            detectors: [
                DetectorModel {
                    efficiency: 0.85,
                    dark_rate_hz: 100.0,
                    jitter_sigma_ps: 30.0,
                    dead_time_ps: 10_000,
                },
                DetectorModel {
                    efficiency: 0.85,
                    dark_rate_hz: 100.0,
                    jitter_sigma_ps: 30.0,
                    dead_time_ps: 10_000,
                },
            ],
            window_ps: 1000,
            duration_s: 30.0,
            seed: 7,
            drift: None,
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = example();
        let parsed = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(&example().to_json()).unwrap();
        doc["not_a_key"] = 1.into();
        assert!(RunConfig::from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn missing_seed_names_the_key() {
        let mut doc: serde_json::Value = serde_json::from_str(&example().to_json()).unwrap();
        doc.as_object_mut().unwrap().remove("seed");
        let err = RunConfig::from_json(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("seed"), "got: {err}");
    }

    #[test]
    fn zero_duration_is_rejected() {
        let mut cfg = example();
        cfg.duration_s = 0.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("duration_s"));
    }

    #[test]
    fn harmonic_must_be_one_or_two() {
        let mut doc: serde_json::Value = serde_json::from_str(&example().to_json()).unwrap();
        doc["harmonic_n"] = 3.into();
        assert!(RunConfig::from_json(&doc.to_string()).is_err());
        doc["harmonic_n"] = 1.into();
        let cfg = RunConfig::from_json(&doc.to_string()).unwrap();
        assert_eq!(cfg.harmonic_n, Harmonic::One);
    }

    #[test]
    fn period_rounds_to_integer_ps() {
        let cfg = example();
        assert_eq!(cfg.drive.period_ps(), 100_000);
    }

    #[test]
    fn background_rate_includes_pump_leak() {
        let mut cfg = example();
        cfg.amzi.extinction_db = 10.0;
        // 100 Hz pair rate leaking at -10 dB adds 10 Hz to the 100 Hz dark rate.
        assert!((cfg.background_rate_hz(0) - 110.0).abs() < 1e-9);
    }
}
