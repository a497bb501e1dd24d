//! Canonical generator and multiplier circuits.

use super::{DiodeParams, Netlist, Waveform, GROUND};
use crate::error::{Error, Result};
use crate::lumped::{Drive, Load, LumpedParams};

/// Output node of [`structural_generator`] and [`functional_generator`].
pub const STRUCTURAL_OUTPUT: &str = "out";
/// Input node of [`voltage_multiplier`].
pub const MULTIPLIER_INPUT: &str = "in";
/// Output node of [`voltage_multiplier`].
pub const MULTIPLIER_OUTPUT: &str = "out";

/// Sinusoidal current source in parallel with the piezo capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalParams {
    /// Current amplitude, A.
    pub current: f64,
    /// Hz
    pub frequency: f64,
    /// F
    pub capacitance: f64,
}

impl FunctionalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance > 0.0 && self.current >= 0.0 && self.frequency > 0.0) {
            return Err(Error::InvalidParams(
                "functional generator needs Cp > 0, i_p >= 0 and f > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Equivalent circuit of the generator under the force–voltage analogy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralParams {
    /// Inertia, H.
    pub lm: f64,
    /// Compliance, F.
    pub ck: f64,
    /// Mechanical damping, Ω.
    pub rb: f64,
    /// Transformer ratio (coupling).
    pub n: f64,
    /// Piezo capacitance, F.
    pub cb: f64,
    /// Amplitude of the inertial force source, V.
    pub sigma: f64,
    /// Hz
    pub frequency: f64,
    pub phase_deg: f64,
}

impl StructuralParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lm > 0.0 && self.ck > 0.0 && self.cb > 0.0) {
            return Err(Error::InvalidParams(
                "structural model needs Lm, Ck, Cb > 0".into(),
            ));
        }
        if !(self.rb >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "Rb must be >= 0, got {}",
                self.rb
            )));
        }
        if self.n == 0.0 || !self.n.is_finite() {
            return Err(Error::InvalidParams(
                "transformer ratio n must be nonzero".into(),
            ));
        }
        if !(self.frequency > 0.0) || !self.sigma.is_finite() || !self.phase_deg.is_finite() {
            return Err(Error::InvalidParams(
                "source needs f > 0 and finite amplitude".into(),
            ));
        }
        Ok(())
    }
}

pub fn lumped_to_structural(lp: &LumpedParams, drive: &Drive) -> StructuralParams {
    StructuralParams {
        lm: lp.mass,
        ck: 1.0 / lp.stiffness,
        rb: lp.damping,
        n: lp.coupling,
        cb: lp.capacitance,
        sigma: lp.mass * drive.amplitude,
        frequency: drive.frequency,
        phase_deg: drive.phase.to_degrees(),
    }
}

pub fn structural_to_lumped(sp: &StructuralParams) -> (LumpedParams, Drive) {
    let lp = LumpedParams {
        mass: sp.lm,
        stiffness: 1.0 / sp.ck,
        damping: sp.rb,
        coupling: sp.n,
        capacitance: sp.cb,
    };
    let drive = Drive {
        amplitude: sp.sigma / sp.lm,
        frequency: sp.frequency,
        phase: sp.phase_deg.to_radians(),
    };
    (lp, drive)
}

fn add_load(n: &mut Netlist, name: &str, node: &str, load: Load) -> Result<()> {
    load.validate()?;
    if let Load::Resistor(r) = load {
        n.resistor(name, node, GROUND, r)?;
    }
    Ok(())
}

/// `ip` driving `cp ∥ load` at node `out`.
pub fn functional_generator(p: &FunctionalParams, load: Load) -> Result<Netlist> {
    p.validate()?;
    let mut n = Netlist::new();
    n.current_source(
        "ip",
        GROUND,
        STRUCTURAL_OUTPUT,
        Waveform::Sin {
            offset: 0.0,
            amplitude: p.current,
            frequency: p.frequency,
            phase_deg: 0.0,
        },
    )?;
    n.capacitor("cp", STRUCTURAL_OUTPUT, GROUND, p.capacitance)?;
    add_load(&mut n, "rload", STRUCTURAL_OUTPUT, load)?;
    Ok(n)
}

/// Series loop `vsigma – lm – ck – rb` into the primary of `t1`, with
/// `cb ∥ load` on the secondary. The source is reversed so that the loop is
/// driven by the inertial force −M·ÿ.
pub fn structural_generator(p: &StructuralParams, load: Load) -> Result<Netlist> {
    structural_generator_at(p, load, STRUCTURAL_OUTPUT)
}

pub(crate) fn structural_generator_at(
    p: &StructuralParams,
    load: Load,
    output: &str,
) -> Result<Netlist> {
    p.validate()?;
    let mut n = Netlist::new();
    n.voltage_source(
        "vsigma",
        GROUND,
        "in",
        Waveform::Sin {
            offset: 0.0,
            amplitude: p.sigma,
            frequency: p.frequency,
            phase_deg: p.phase_deg,
        },
    )?;
    n.inductor("lm", "in", "m1", p.lm)?;
    if p.rb > 0.0 {
        n.capacitor("ck", "m1", "m2", p.ck)?;
        n.resistor("rb", "m2", "p", p.rb)?;
    } else {
        n.capacitor("ck", "m1", "p", p.ck)?;
    }
    n.transformer("t1", ["p", GROUND, output, GROUND], p.n)?;
    n.capacitor("cb", output, GROUND, p.cb)?;
    add_load(&mut n, "rload", output, load)?;
    Ok(n)
}

/// Villard cascade: `stages` pump/hold capacitor pairs and diode pairs
/// between `MULTIPLIER_INPUT` and `MULTIPLIER_OUTPUT`. The input is left
/// undriven.
pub fn voltage_multiplier(
    stages: usize,
    d: DiodeParams,
    c_stage: f64,
    load: Load,
) -> Result<Netlist> {
    let mut n = Netlist::new();
    attach_multiplier(&mut n, MULTIPLIER_INPUT, stages, d, c_stage, load)?;
    Ok(n)
}

pub(crate) fn attach_multiplier(
    n: &mut Netlist,
    input: &str,
    stages: usize,
    d: DiodeParams,
    c_stage: f64,
    load: Load,
) -> Result<()> {
    if stages == 0 {
        return Err(Error::InvalidParams(
            "multiplier needs at least one stage".into(),
        ));
    }
    d.validate()?;
    if !(c_stage > 0.0) {
        return Err(Error::InvalidParams(format!(
            "stage capacitance must be > 0, got {c_stage}"
        )));
    }
    let pump = |k: usize| {
        if k == 0 {
            input.to_string()
        } else {
            format!("a{k}")
        }
    };
    let hold = |k: usize| match k {
        0 => GROUND.to_string(),
        k if k == stages => MULTIPLIER_OUTPUT.to_string(),
        k => format!("b{k}"),
    };
    for k in 1..=stages {
        let (a0, a1, b0, b1) = (pump(k - 1), pump(k), hold(k - 1), hold(k));
        n.capacitor(&format!("cp{k}"), &a0, &a1, c_stage)?;
        n.diode(&format!("dp{k}"), &b0, &a1, d)?;
        n.diode(&format!("dh{k}"), &a1, &b1, d)?;
        n.capacitor(&format!("cs{k}"), &b0, &b1, c_stage)?;
    }
    add_load(n, "rl", MULTIPLIER_OUTPUT, load)
}
