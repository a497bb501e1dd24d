//! Shockley junction diode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BOLTZMANN: f64 = 1.380649e-23;
const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Exponent argument above which the exponential is continued linearly.
pub const EXP_CLAMP: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiodeParams {
    /// Saturation current IS, A.
    pub saturation_current: f64,
    /// Ideality factor N.
    pub ideality: f64,
    /// Junction temperature, K.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_temperature() -> f64 {
    300.0
}

impl DiodeParams {
    pub fn new(saturation_current: f64, ideality: f64) -> Self {
        Self {
            saturation_current,
            ideality,
            temperature: default_temperature(),
        }
    }

    /// Low-threshold device for sub-200 mV rectification: 1 µA at ~0.12 V.
    pub fn low_threshold() -> Self {
        Self::new(1e-8, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.saturation_current > 0.0 && self.saturation_current.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "diode IS must be > 0, got {}",
                self.saturation_current
            )));
        }
        if !(self.ideality > 0.0 && self.ideality.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "diode N must be > 0, got {}",
                self.ideality
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "diode T must be > 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// kB·T/q, V.
    pub fn thermal_voltage(&self) -> f64 {
        BOLTZMANN * self.temperature / ELEMENTARY_CHARGE
    }

    /// N·VT, V.
    pub fn emission_voltage(&self) -> f64 {
        self.ideality * self.thermal_voltage()
    }

    /// Voltage above which Newton steps are damped.
    pub(crate) fn critical_voltage(&self) -> f64 {
        let nvt = self.emission_voltage();
        nvt * (nvt / (std::f64::consts::SQRT_2 * self.saturation_current)).ln()
    }
}

/// Diode current and small-signal conductance at junction voltage `v`.
///
/// Beyond an exponent of [`EXP_CLAMP`] the exponential is replaced by its
/// tangent so the Jacobian stays finite.
pub fn diode_current(v: f64, p: &DiodeParams) -> (f64, f64) {
    let nvt = p.emission_voltage();
    let u = v / nvt;
    if u <= EXP_CLAMP {
        let e = u.exp();
        (
            p.saturation_current * (e - 1.0),
            p.saturation_current * e / nvt,
        )
    } else {
        let e = EXP_CLAMP.exp();
        (
            p.saturation_current * (e * (1.0 + u - EXP_CLAMP) - 1.0),
            p.saturation_current * e / nvt,
        )
    }
}

/// Damps a Newton update of the junction voltage from `v_old` to `v_new`.
///
/// A forward step past the critical voltage is pulled back to the voltage
/// at which the diode would carry the linearised current
/// `i(v_old) + g(v_old)·(v_new − v_old)`.
pub(crate) fn limit_junction(v_new: f64, v_old: f64, p: &DiodeParams) -> f64 {
    let nvt = p.emission_voltage();
    let v_crit = p.critical_voltage();
    if v_new <= v_crit || (v_new - v_old).abs() <= 2.0 * nvt {
        return v_new;
    }
    let (i_old, g_old) = diode_current(v_old, p);
    let i_guess = i_old + g_old * (v_new - v_old);
    if i_guess > 0.0 {
        let limited = nvt * (i_guess / p.saturation_current + 1.0).ln();
        limited.min(v_new)
    } else {
        v_crit
    }
}
