//! Single-degree-of-freedom electromechanical generator model.
//!
//! A seismic mass on a spring and viscous damper, excited through its base,
//! coupled to a piezoelectric capacitance:
//!
//! ```text
//! M·ẅ + D·ẇ + K·w + Θ·v = −M·ÿ(t)
//! Cp·v̇ + v/R          =  Θ·ẇ
//! ```
//!
//! `w` is the mass displacement relative to the base, `v` the electrode
//! voltage and `ÿ` the base acceleration. An open electrical port drops the
//! `v/R` term.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Effective parameters of the single-DOF model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LumpedParams {
    /// Effective mass M, kg.
    pub mass: f64,
    /// Stiffness K, N/m.
    pub stiffness: f64,
    /// Viscous damping D, N·s/m.
    pub damping: f64,
    /// Electromechanical coupling Θ, N/V (= C/m). Any sign.
    pub coupling: f64,
    /// Clamped capacitance Cp, F.
    pub capacitance: f64,
}

impl LumpedParams {
    /// Builds parameters with the damping given as a ratio ζ, D = 2ζ√(KM).
    pub fn with_damping_ratio(
        mass: f64,
        stiffness: f64,
        zeta: f64,
        coupling: f64,
        capacitance: f64,
    ) -> Self {
        Self {
            mass,
            stiffness,
            damping: damping_from_ratio(zeta, stiffness, mass),
            coupling,
            capacitance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParams(format!("{what} = {v}")));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("mass must be > 0, got M", self.mass);
        }
        if !(self.stiffness > 0.0 && self.stiffness.is_finite()) {
            return bad("stiffness must be > 0, got K", self.stiffness);
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return bad("damping must be >= 0, got D", self.damping);
        }
        if !self.coupling.is_finite() {
            return bad("coupling must be finite, got Θ", self.coupling);
        }
        if !(self.capacitance > 0.0 && self.capacitance.is_finite()) {
            return bad("capacitance must be > 0, got Cp", self.capacitance);
        }
        Ok(())
    }

    /// Damping ratio ζ = D / (2√(KM)).
    pub fn damping_ratio(&self) -> f64 {
        self.damping / (2.0 * (self.stiffness * self.mass).sqrt())
    }
}

/// D = 2ζ√(KM).
pub fn damping_from_ratio(zeta: f64, stiffness: f64, mass: f64) -> f64 {
    2.0 * zeta * (stiffness * mass).sqrt()
}

/// Stiffness of a block compressed through its thickness, K = c33·A/H.
pub fn thickness_mode_stiffness(c33: f64, area: f64, height: f64) -> f64 {
    c33 * area / height
}

/// Sinusoidal base acceleration ÿ(t) = a·sin(2πft + φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    /// m/s²
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
    /// rad
    #[serde(default)]
    pub phase: f64,
}

impl Drive {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "drive frequency must be > 0, got {}",
                self.frequency
            )));
        }
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidParams(
                "drive amplitude and phase must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        self.amplitude * (self.omega() * t + self.phase).sin()
    }
}

/// Electrical termination of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Open,
    Resistor(f64),
}

impl Load {
    fn conductance(self) -> f64 {
        match self {
            Load::Open => 0.0,
            Load::Resistor(r) => 1.0 / r,
        }
    }

    pub(crate) fn validate(self) -> Result<()> {
        match self {
            Load::Resistor(r) if !(r > 0.0) => Err(Error::InvalidParams(format!(
                "load resistance must be > 0, got {r}"
            ))),
            _ => Ok(()),
        }
    }
}

/// State (w, ẇ, v) at t = 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InitialState {
    pub w: f64,
    pub wdot: f64,
    pub v: f64,
}

/// Validated governing equations of the single-DOF generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedModel {
    params: LumpedParams,
}

pub fn build_lumped(p: LumpedParams) -> Result<LumpedModel> {
    p.validate()?;
    Ok(LumpedModel { params: p })
}

impl LumpedModel {
    pub fn params(&self) -> &LumpedParams {
        &self.params
    }

    /// Stored energy ½Mẇ² + ½Kw² + ½Cp·v².
    pub fn energy(&self, w: f64, wdot: f64, v: f64) -> f64 {
        let p = &self.params;
        0.5 * (p.mass * wdot * wdot + p.stiffness * w * w + p.capacitance * v * v)
    }

    fn state_matrix(&self, load: Load) -> Matrix3<f64> {
        let p = &self.params;
        Matrix3::new(
            0.0,
            1.0,
            0.0,
            -p.stiffness / p.mass,
            -p.damping / p.mass,
            -p.coupling / p.mass,
            0.0,
            p.coupling / p.capacitance,
            -load.conductance() / p.capacitance,
        )
    }

    /// Fixed-step trapezoidal integration of (w, ẇ, v) from `ic`.
    ///
    /// Returns columns `w` (m), `wdot` (m/s) and `v` (V) sampled every `dt`
    /// from 0 to `t_stop` inclusive.
    pub fn transient(
        &self,
        drive: &Drive,
        load: Load,
        dt: f64,
        t_stop: f64,
        ic: InitialState,
    ) -> Result<TimeSeries> {
        drive.validate()?;
        load.validate()?;
        if !(dt > 0.0 && t_stop > dt) {
            return Err(Error::InvalidParams(format!(
                "need 0 < dt < t_stop, got dt = {dt}, t_stop = {t_stop}"
            )));
        }
        let steps = (t_stop / dt).round() as usize;
        let a = self.state_matrix(load);
        let half = 0.5 * dt;
        let lhs = Matrix3::identity() - a * half;
        let rhs = Matrix3::identity() + a * half;
        let lhs_inv = lhs
            .try_inverse()
            .ok_or_else(|| Error::Singular("trapezoidal step matrix".into()))?;
        let propagate = lhs_inv * rhs;

        let mut x = Vector3::new(ic.w, ic.wdot, ic.v);
        let mut w = Vec::with_capacity(steps + 1);
        let mut wdot = Vec::with_capacity(steps + 1);
        let mut v = Vec::with_capacity(steps + 1);
        w.push(x[0]);
        wdot.push(x[1]);
        v.push(x[2]);

        let mut forcing_prev = -drive.acceleration(0.0);
        for k in 1..=steps {
            let forcing = -drive.acceleration(k as f64 * dt);
            let b = Vector3::new(0.0, half * (forcing_prev + forcing), 0.0);
            x = propagate * x + lhs_inv * b;
            if !x.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite { step: k });
            }
            w.push(x[0]);
            wdot.push(x[1]);
            v.push(x[2]);
            forcing_prev = forcing;
        }

        let mut ts = TimeSeries::new(dt)?;
        ts.push_column("w", "m", w)?;
        ts.push_column("wdot", "m/s", wdot)?;
        ts.push_column("v", "V", v)?;
        Ok(ts)
    }

    /// Closed-form steady-state phasors (W, V) for a base acceleration of
    /// amplitude `accel` at angular frequency `omega`.
    ///
    /// Phasors are sine-referenced: w(t) = |W|·sin(ωt + arg W) for a drive
    /// a·sin(ωt).
    pub fn steady_state_response(
        &self,
        omega: f64,
        accel: f64,
        load: Load,
    ) -> (Complex64, Complex64) {
        let p = &self.params;
        let j = Complex64::i();
        let force = Complex64::from(-p.mass * accel);
        match load {
            Load::Open => {
                let z = p.stiffness + p.coupling * p.coupling / p.capacitance
                    - p.mass * omega * omega
                    + j * omega * p.damping;
                let w = force / z;
                (w, w * p.coupling / p.capacitance)
            }
            Load::Resistor(r) => {
                let elec = 1.0 + j * omega * r * p.capacitance;
                let z = p.stiffness - p.mass * omega * omega
                    + j * omega * p.damping
                    + j * omega * p.coupling * p.coupling * r / elec;
                let w = force / z;
                (w, j * omega * p.coupling * r * w / elec)
            }
        }
    }

    /// Short-circuit and open-circuit resonance frequencies in Hz.
    pub fn resonance_frequencies(&self) -> (f64, f64) {
        let p = &self.params;
        let f_sc = (p.stiffness / p.mass).sqrt() / (2.0 * PI);
        let k_oc = p.stiffness + p.coupling * p.coupling / p.capacitance;
        let f_oc = (k_oc / p.mass).sqrt() / (2.0 * PI);
        (f_sc, f_oc)
    }

    /// Mean power |V|²/(2R) delivered into a resistive load `r` (> 0).
    pub fn average_power(&self, omega: f64, accel: f64, r: f64) -> f64 {
        let (_, v) = self.steady_state_response(omega, accel, Load::Resistor(r));
        v.norm_sqr() / (2.0 * r)
    }
}
