//! Circuit descriptions: data model, text parser and builders for the
//! generator and multiplier circuits.
//!
//! Names are case-insensitive and stored lowercase. The ground node is `0`
//! (`gnd` is accepted as an alias).

mod builders;
mod parser;

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

pub use crate::circuit::DiodeParams;
use crate::error::{Error, Result};

pub(crate) use builders::{attach_multiplier, structural_generator_at};
pub use builders::{
    functional_generator, lumped_to_structural, structural_generator, structural_to_lumped,
    voltage_multiplier, FunctionalParams, StructuralParams, MULTIPLIER_INPUT, MULTIPLIER_OUTPUT,
    STRUCTURAL_OUTPUT,
};
pub use parser::{parse_netlist, parse_value};

pub const GROUND: &str = "0";

/// Source waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// offset + amplitude·sin(2πf·t + phase), phase in degrees.
    Sin {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        phase_deg: f64,
    },
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::Dc(v) => v,
            Waveform::Sin {
                offset,
                amplitude,
                frequency,
                phase_deg,
            } => offset + amplitude * (2.0 * PI * frequency * t + phase_deg.to_radians()).sin(),
        }
    }

    /// Small-signal phasor (sine reference). DC sources contribute nothing.
    pub fn phasor(&self) -> Complex64 {
        match *self {
            Waveform::Dc(_) => Complex64::new(0.0, 0.0),
            Waveform::Sin {
                amplitude,
                phase_deg,
                ..
            } => Complex64::from_polar(amplitude, phase_deg.to_radians()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    Resistor {
        resistance: f64,
    },
    Capacitor {
        capacitance: f64,
        ic: Option<f64>,
    },
    Inductor {
        inductance: f64,
        ic: Option<f64>,
    },
    VoltageSource(Waveform),
    CurrentSource(Waveform),
    /// Ideal transformer, v_primary = ratio · v_secondary.
    Transformer {
        ratio: f64,
    },
    Diode(DiodeParams),
}

impl ElementKind {
    fn terminal_count(&self) -> usize {
        match self {
            ElementKind::Transformer { .. } => 4,
            _ => 2,
        }
    }

    fn prefix(&self) -> char {
        match self {
            ElementKind::Resistor { .. } => 'r',
            ElementKind::Capacitor { .. } => 'c',
            ElementKind::Inductor { .. } => 'l',
            ElementKind::VoltageSource(_) => 'v',
            ElementKind::CurrentSource(_) => 'i',
            ElementKind::Transformer { .. } => 't',
            ElementKind::Diode(_) => 'd',
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, ElementKind::Diode(_))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be positive, got {v}"))
            }
        };
        let finite_wave = |w: &Waveform| match *w {
            Waveform::Dc(v) if v.is_finite() => Ok(()),
            Waveform::Sin {
                offset,
                amplitude,
                frequency,
                phase_deg,
            } if offset.is_finite() && amplitude.is_finite() && phase_deg.is_finite() => {
                positive("SIN frequency", frequency)
            }
            _ => Err("source values must be finite".to_string()),
        };
        match self {
            ElementKind::Resistor { resistance } => positive("resistance", *resistance),
            ElementKind::Capacitor { capacitance, .. } => positive("capacitance", *capacitance),
            ElementKind::Inductor { inductance, .. } => positive("inductance", *inductance),
            ElementKind::VoltageSource(w) | ElementKind::CurrentSource(w) => finite_wave(w),
            ElementKind::Transformer { ratio } => {
                if *ratio != 0.0 && ratio.is_finite() {
                    Ok(())
                } else {
                    Err(format!(
                        "transformer ratio must be finite and nonzero, got {ratio}"
                    ))
                }
            }
            ElementKind::Diode(p) => p.validate().map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    /// Terminal nodes: (n+, n−), or (p+, p−, s+, s−) for a transformer.
    pub nodes: Vec<String>,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Tran {
        step: f64,
        stop: f64,
    },
    Ac {
        points: usize,
        f_start: f64,
        f_stop: f64,
    },
    Probe(Vec<String>),
}

/// Elements over named nodes plus analysis cards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    elements: Vec<Element>,
    analyses: Vec<Analysis>,
}

pub(crate) fn canonical_node(name: &str) -> String {
    let n = name.to_lowercase();
    if n == "gnd" {
        GROUND.to_string()
    } else {
        n
    }
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an element after checking its name, terminal count and values.
    pub fn add(&mut self, name: &str, nodes: &[&str], kind: ElementKind) -> Result<()> {
        let name = name.to_lowercase();
        if !name.starts_with(kind.prefix()) {
            return Err(Error::InvalidParams(format!(
                "element '{name}' must start with '{}'",
                kind.prefix()
            )));
        }
        if nodes.len() != kind.terminal_count() {
            return Err(Error::InvalidParams(format!(
                "element '{name}' needs {} terminals, got {}",
                kind.terminal_count(),
                nodes.len()
            )));
        }
        kind.validate()
            .map_err(|m| Error::InvalidParams(format!("{name}: {m}")))?;
        if self.element(&name).is_some() {
            return Err(Error::DuplicateElement(name));
        }
        self.elements.push(Element {
            name,
            nodes: nodes.iter().map(|n| canonical_node(n)).collect(),
            kind,
        });
        Ok(())
    }

    pub fn add_analysis(&mut self, analysis: Analysis) {
        self.analyses.push(analysis);
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn analyses(&self) -> &[Analysis] {
        &self.analyses
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        let name = name.to_lowercase();
        self.elements.iter().find(|e| e.name == name)
    }

    /// Non-ground nodes in order of first appearance.
    pub fn nodes(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for n in self.elements.iter().flat_map(|e| e.nodes.iter()) {
            if n != GROUND && seen.insert(n.as_str()) {
                out.push(n.clone());
            }
        }
        out
    }

    pub fn tran(&self) -> Option<(f64, f64)> {
        self.analyses.iter().find_map(|a| match *a {
            Analysis::Tran { step, stop } => Some((step, stop)),
            _ => None,
        })
    }

    pub fn ac(&self) -> Option<(usize, f64, f64)> {
        self.analyses.iter().find_map(|a| match *a {
            Analysis::Ac {
                points,
                f_start,
                f_stop,
            } => Some((points, f_start, f_stop)),
            _ => None,
        })
    }

    pub fn probes(&self) -> Vec<String> {
        self.analyses
            .iter()
            .filter_map(|a| match a {
                Analysis::Probe(p) => Some(p.iter().cloned()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn has_nonlinear(&self) -> bool {
        self.elements.iter().any(|e| e.kind.is_nonlinear())
    }

    // Convenience adders used by the builders and tests.

    pub fn resistor(&mut self, name: &str, a: &str, b: &str, resistance: f64) -> Result<()> {
        self.add(name, &[a, b], ElementKind::Resistor { resistance })
    }

    pub fn capacitor(&mut self, name: &str, a: &str, b: &str, capacitance: f64) -> Result<()> {
        self.add(
            name,
            &[a, b],
            ElementKind::Capacitor {
                capacitance,
                ic: None,
            },
        )
    }

    pub fn inductor(&mut self, name: &str, a: &str, b: &str, inductance: f64) -> Result<()> {
        self.add(
            name,
            &[a, b],
            ElementKind::Inductor {
                inductance,
                ic: None,
            },
        )
    }

    pub fn voltage_source(&mut self, name: &str, a: &str, b: &str, w: Waveform) -> Result<()> {
        self.add(name, &[a, b], ElementKind::VoltageSource(w))
    }

    pub fn current_source(&mut self, name: &str, a: &str, b: &str, w: Waveform) -> Result<()> {
        self.add(name, &[a, b], ElementKind::CurrentSource(w))
    }

    pub fn transformer(&mut self, name: &str, nodes: [&str; 4], ratio: f64) -> Result<()> {
        self.add(name, &nodes, ElementKind::Transformer { ratio })
    }

    pub fn diode(&mut self, name: &str, anode: &str, cathode: &str, p: DiodeParams) -> Result<()> {
        self.add(name, &[anode, cathode], ElementKind::Diode(p))
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Waveform::Dc(v) => write!(f, "DC {}", num(v)),
            Waveform::Sin {
                offset,
                amplitude,
                frequency,
                phase_deg,
            } => write!(
                f,
                "SIN({} {} {} {})",
                num(offset),
                num(amplitude),
                num(frequency),
                num(phase_deg)
            ),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.nodes.join(" "))?;
        match self.kind {
            ElementKind::Resistor { resistance } => write!(f, " {}", num(resistance)),
            ElementKind::Capacitor { capacitance: v, ic }
            | ElementKind::Inductor { inductance: v, ic } => {
                write!(f, " {}", num(v))?;
                match ic {
                    Some(ic) => write!(f, " ic={}", num(ic)),
                    None => Ok(()),
                }
            }
            ElementKind::VoltageSource(w) | ElementKind::CurrentSource(w) => write!(f, " {w}"),
            ElementKind::Transformer { ratio } => write!(f, " {}", num(ratio)),
            ElementKind::Diode(p) => write!(
                f,
                " IS={} N={} T={}",
                num(p.saturation_current),
                num(p.ideality),
                num(p.temperature)
            ),
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analysis::Tran { step, stop } => write!(f, ".tran {} {}", num(*step), num(*stop)),
            Analysis::Ac {
                points,
                f_start,
                f_stop,
            } => write!(f, ".ac lin {points} {} {}", num(*f_start), num(*f_stop)),
            Analysis::Probe(nodes) => write!(f, ".probe {}", nodes.join(" ")),
        }
    }
}

/// Canonical netlist text; parsing it yields an identical netlist.
impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        for a in &self.analyses {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_validates() {
        let mut n = Netlist::new();
        n.resistor("R1", "A", "gnd", 1e3).unwrap();
        assert_eq!(n.elements()[0].name, "r1");
        assert_eq!(n.elements()[0].nodes, vec!["a", "0"]);
        assert!(matches!(
            n.resistor("r1", "a", "0", 1.0),
            Err(Error::DuplicateElement(_))
        ));
        assert!(n.resistor("r2", "a", "0", 0.0).is_err());
        assert!(
            n.capacitor("r3", "a", "0", 1e-9).is_err(),
            "prefix must match kind"
        );
        assert!(n.transformer("t1", ["a", "0", "b", "0"], 0.0).is_err());
        assert_eq!(n.nodes(), vec!["a"]);
    }

    #[test]
    fn sine_phasor_and_value() {
        let w = Waveform::Sin {
            offset: 0.5,
            amplitude: 2.0,
            frequency: 50.0,
            phase_deg: 90.0,
        };
        assert!((w.value(0.0) - 2.5).abs() < 1e-12);
        let p = w.phasor();
        assert!((p - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert_eq!(Waveform::Dc(3.0).phasor(), Complex64::new(0.0, 0.0));
    }
}
