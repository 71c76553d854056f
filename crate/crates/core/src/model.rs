//! Closed-form physics of the two-source nonlinear interferometer.
//!
//! Two photon-pair sources in series interfere in their pair-generation
//! amplitudes rather than in classical fields. The coincidence fringe is
//!
//! ```text
//! f(phi_p) = 1/2 (1 + v(R) cos(n phi_p + Phi0))
//! ```
//!
//! with `n = 2` because degenerate-pump four-wave mixing imprints twice the
//! pump phase on the biphoton (`phi = 2 phi_p + phi_i + phi_s`), while a
//! classical Mach-Zehnder fringe has the same form with `n = 1`. The
//! visibility depends only on the ratio `R` of pair-production probabilities
//! of the two sources, `v(R) = 2R / (1 + R^2)`.
//!
//! Everything in this module is a pure function of its arguments and safe to
//! call from any number of threads.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce an angle to the interval `[0, 2*pi)`.
///
/// Phases are stored unreduced everywhere; reduction happens only where two
/// angles are compared.
pub fn reduce_angle(rad: f64) -> f64 {
    rad.rem_euclid(TAU)
}

/// Fringe harmonic: `Two` for nonlinear (pair) interference, `One` for a
/// classical Mach-Zehnder fringe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Harmonic {
    One,
    Two,
}

impl Harmonic {
    /// Multiplier applied to the pump phase, 1.0 or 2.0.
    pub fn factor(self) -> f64 {
        match self {
            Harmonic::One => 1.0,
            Harmonic::Two => 2.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Harmonic::One => 1,
            Harmonic::Two => 2,
        }
    }
}

impl TryFrom<u8> for Harmonic {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        match n {
            1 => Ok(Harmonic::One),
            2 => Ok(Harmonic::Two),
            other => Err(format!("harmonic must be 1 or 2, got {other}")),
        }
    }
}

impl From<Harmonic> for u8 {
    fn from(h: Harmonic) -> u8 {
        h.as_u8()
    }
}

/// Phases of the pump, signal and idler paths plus the aggregate constant
/// offset `Phi0` that absorbs every other static phase term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    /// Phase applied by a shifter in the pump path, radians.
    pub phi_p_applied: f64,
    /// Signal-path phase, radians (0 reference in this device).
    pub phi_s: f64,
    /// Idler-path phase, radians (0 reference in this device).
    pub phi_i: f64,
    /// Aggregate constant offset, radians.
    pub phi0: f64,
}

impl PhaseState {
    pub fn new(phi_p_applied: f64, phi_s: f64, phi_i: f64, phi0: f64) -> Result<Self> {
        for (name, value) in [
            ("phi_p_applied", phi_p_applied),
            ("phi_s", phi_s),
            ("phi_i", phi_i),
            ("phi0", phi0),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("phase must be finite, got {value}"),
                });
            }
        }
        Ok(Self {
            phi_p_applied,
            phi_s,
            phi_i,
            phi0,
        })
    }

    /// Total biphoton phase `2 phi_p + phi_i + phi_s` from the SFWM
    /// phase-matching condition for a degenerate pump.
    pub fn biphoton_phase(&self) -> f64 {
        pump_phase_transfer(self.phi_p_applied) + self.phi_i + self.phi_s
    }
}

/// Parameters of the interference fringe `1/2 (1 + v cos(n phi + Phi0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeParams {
    /// Visibility, dimensionless in `[0, 1]`.
    pub v: f64,
    /// Fringe harmonic.
    pub n: Harmonic,
    /// Constant phase offset, radians.
    pub phi0: f64,
}

impl FringeParams {
    pub fn new(v: f64, n: Harmonic, phi0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: format!("visibility must be in [0, 1], got {v}"),
            });
        }
        if !phi0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi0",
                reason: format!("phase offset must be finite, got {phi0}"),
            });
        }
        Ok(Self { v, n, phi0 })
    }
}

/// Ratio `R = P2 / P1` of pair-production probabilities of the two sources.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SourceRatio(f64);

impl SourceRatio {
    pub fn new(ratio: f64) -> Result<Self> {
        if !ratio.is_finite() || ratio < 0.0 {
            return Err(Error::InvalidParameter {
                name: "ratio_r",
                reason: format!("source ratio must be finite and >= 0, got {ratio}"),
            });
        }
        Ok(Self(ratio))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Carrier-depletion modulator: linear voltage-to-phase transfer plus a
/// phenomenological phase-correlated parasitic loss.
///
/// Free-carrier depletion changes both the real and the imaginary part of the
/// refractive index, so applied phase comes with excess absorption. The loss
/// model here is linear in applied phase on a dB scale, which is the simplest
/// monotone choice; device reports quote only a typical range of a few dB/mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorParams {
    /// Voltage for a pi phase shift, volts.
    pub vpi_volts: f64,
    /// Excess loss per pi of applied phase, dB.
    pub alpha_db_per_pi: f64,
    /// Static insertion loss, dB.
    pub base_loss_db: f64,
}

impl ModulatorParams {
    pub fn new(vpi_volts: f64, alpha_db_per_pi: f64, base_loss_db: f64) -> Result<Self> {
        let m = Self {
            vpi_volts,
            alpha_db_per_pi,
            base_loss_db,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.vpi_volts.is_finite() || self.vpi_volts <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "vpi_volts",
                reason: format!("V_pi must be finite and > 0, got {}", self.vpi_volts),
            });
        }
        if !self.alpha_db_per_pi.is_finite() || self.alpha_db_per_pi < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha_db_per_pi",
                reason: format!("loss slope must be >= 0, got {}", self.alpha_db_per_pi),
            });
        }
        if !self.base_loss_db.is_finite() || self.base_loss_db < 0.0 {
            return Err(Error::InvalidParameter {
                name: "base_loss_db",
                reason: format!("insertion loss must be >= 0, got {}", self.base_loss_db),
            });
        }
        Ok(())
    }
}

/// Per-source pair-generation amplitude scale, proportional to pump power.
///
/// Must be small enough that the pair probability per coincidence window
/// stays far below one, so higher-order Fock terms can be neglected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PumpPower(f64);

impl PumpPower {
    pub fn new(scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::InvalidParameter {
                name: "pump_power",
                reason: format!("pump power scale must be finite and >= 0, got {scale}"),
            });
        }
        Ok(Self(scale))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Squared modulus of `(1 + e^{i theta}) / 2`: the interference weight of the
/// two-source pair state, `(1 + cos theta) / 2`.
pub fn interference_weight(theta: f64) -> f64 {
    debug_assert!(theta.is_finite());
    0.5 * (1.0 + theta.cos())
}

/// Coincidence fringe `1/2 (1 + v cos(n phi_p + Phi0))`.
pub fn fringe(phi_p: f64, params: &FringeParams) -> f64 {
    0.5 * (1.0 + params.v * (params.n.factor() * phi_p + params.phi0).cos())
}

/// Visibility of the two-source fringe in terms of the pair-production ratio:
/// `v(R) = 2R / (1 + R^2)`. Symmetric under `R -> 1/R`, equal to 1 only at
/// `R = 1`.
pub fn visibility_from_ratio(r: SourceRatio) -> f64 {
    let r = r.get();
    2.0 * r / (1.0 + r * r)
}

/// Biphoton phase picked up from a pump-path shifter: twice the applied
/// phase, from the SFWM phase-matching condition for degenerate pump photons.
/// This doubling is what halves the fringe period relative to a classical
/// interferometer. Shifters on the signal or idler paths would contribute
/// once, but this device has none.
pub fn pump_phase_transfer(phi_p_applied: f64) -> f64 {
    debug_assert!(phi_p_applied.is_finite());
    2.0 * phi_p_applied
}

/// Phase applied by the modulator at a given drive voltage, assuming the
/// linear voltage-phase relationship used for the small-signal V_pi estimate.
pub fn phase_from_voltage(v_applied: f64, m: &ModulatorParams) -> f64 {
    PI * v_applied / m.vpi_volts
}

/// Power transmission of the modulator at an applied phase:
/// `10^(-(base_loss_db + alpha_db_per_pi * phi / pi) / 10)`.
///
/// Negative phases contribute no excess loss (the slope models carrier
/// absorption that grows with the magnitude of the applied shift).
pub fn cdm_transmission(phi: f64, m: &ModulatorParams) -> f64 {
    let excess_db = m.alpha_db_per_pi * phi.max(0.0) / PI;
    10f64.powf(-(m.base_loss_db + excess_db) / 10.0)
}

/// Probability of exactly one coincidence in an interval with mean
/// coincidence number `mean_n`: the Poisson term `<n> e^{-<n>}`.
///
/// For the small rates of interest this is within a fraction of a percent of
/// `<n>` itself; it peaks at `mean_n = 1`.
pub fn coincidence_probability(mean_n: f64) -> f64 {
    debug_assert!(mean_n >= 0.0);
    mean_n * (-mean_n).exp()
}

/// Total transmission implied by a singles-fringe visibility, in dB
/// (negative). A singles visibility of 4.41% corresponds to about -13.6 dB.
pub fn loss_from_singles_visibility(v_singles: f64) -> Result<f64> {
    if !(v_singles > 0.0 && v_singles <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "v_singles",
            reason: format!("singles visibility must be in (0, 1], got {v_singles}"),
        });
    }
    Ok(10.0 * v_singles.log10())
}

/// Peak-to-peak drive voltage spanning one full fringe period: `vpi / n`.
///
/// The doubled harmonic needs half the voltage swing of a classical fringe,
/// so the `V^2` drive power drops by a factor of four.
pub fn full_swing_vpp(m: &ModulatorParams, n: Harmonic) -> f64 {
    m.vpi_volts / n.factor()
}
