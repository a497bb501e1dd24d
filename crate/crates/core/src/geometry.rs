//! Effective lumped parameters from cantilever and seismic-mass geometry.
//!
//! The beam is a layered composite cantilever clamped at `x = 0`. A rigid
//! seismic mass is bonded to its free end with its centre of gravity
//! `L_M/2` beyond the tip. The structure is reduced to two generalised
//! coordinates, the mass-centre deflection `w_c` and the tip slope `θ`:
//!
//! * stiffness: inverse of the static tip compliance, mapped through
//!   `δ_tip = w_c − (L_M/2)·θ`;
//! * mass: the rigid mass (`m`, rotary inertia `J` about its centre) plus the
//!   beam's consistent mass on the tip DOFs, using the cubic static shapes;
//! * forcing: base acceleration acting on the seismic mass.
//!
//! The lowest generalised eigenpair gives the resonance and the mode used
//! to collapse everything onto one DOF ([`LumpedParams`]).

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lumped::{build_lumped, damping_from_ratio, LumpedParams};
use crate::materials::MaterialDb;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub material: String,
    /// m
    pub thickness: f64,
}

/// Cantilever beam; `layers` are listed bottom to top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beam {
    /// L_p, m
    pub length: f64,
    /// B_p, m
    pub width: f64,
    /// H_p, m; must equal the sum of layer thicknesses.
    pub thickness: f64,
    pub layers: Vec<Layer>,
    /// Index into `layers` of the electroded piezoelectric layer.
    pub piezo_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeismicMass {
    /// L_M, along the beam axis, m
    pub length: f64,
    /// B_M, m
    pub width: f64,
    /// H_M, m
    pub thickness: f64,
    #[serde(default = "default_mass_material")]
    pub material: String,
}

fn default_mass_material() -> String {
    "si".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub beam: Beam,
    pub mass: SeismicMass,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let b = &self.beam;
        let m = &self.mass;
        for (what, v) in [
            ("beam.length", b.length),
            ("beam.width", b.width),
            ("beam.thickness", b.thickness),
            ("mass.length", m.length),
            ("mass.width", m.width),
            ("mass.thickness", m.thickness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{what} must be > 0, got {v}")));
            }
        }
        if b.layers.is_empty() {
            return Err(Error::InvalidParams("beam has no layers".into()));
        }
        if let Some((i, l)) = b
            .layers
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.thickness > 0.0 && l.thickness.is_finite()))
        {
            return Err(Error::InvalidParams(format!(
                "layer {i} ({}) has non-positive thickness {}",
                l.material, l.thickness
            )));
        }
        if b.piezo_layer >= b.layers.len() {
            return Err(Error::InvalidParams(format!(
                "piezo_layer {} out of range for {} layers",
                b.piezo_layer,
                b.layers.len()
            )));
        }
        let total: f64 = b.layers.iter().map(|l| l.thickness).sum();
        if (total - b.thickness).abs() > 1e-9 * b.thickness {
            return Err(Error::InvalidParams(format!(
                "layer thicknesses sum to {total}, beam thickness is {}",
                b.thickness
            )));
        }
        Ok(())
    }

    /// Same geometry with the piezoelectric layer made of `material`.
    pub fn with_piezo_material(&self, material: &str) -> Geometry {
        let mut g = self.clone();
        if let Some(l) = g.beam.layers.get_mut(g.beam.piezo_layer) {
            l.material = material.to_string();
        }
        g
    }

    /// Same geometry with the mass length and width multiplied by `factor`.
    pub fn with_scaled_mass_footprint(&self, factor: f64) -> Geometry {
        let mut g = self.clone();
        g.mass.length *= factor;
        g.mass.width *= factor;
        g
    }
}

/// Transformed-section properties of the layered beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSection {
    /// Neutral axis height above the bottom face, m.
    pub neutral_axis: f64,
    /// EI, N·m²
    pub bending_stiffness: f64,
    /// Piezo layer mid-plane minus neutral axis, m.
    pub piezo_offset: f64,
    /// Electrode capacitance of the piezo layer, F.
    pub capacitance: f64,
    /// Mass per unit length ρA, kg/m.
    pub line_density: f64,
}

pub fn beam_section(g: &Geometry, mats: &MaterialDb) -> Result<BeamSection> {
    g.validate()?;
    let b = &g.beam;

    let mut z = 0.0;
    let mut ea = 0.0;
    let mut ea_z = 0.0;
    let mut line_density = 0.0;
    let mut rows = Vec::with_capacity(b.layers.len());
    for layer in &b.layers {
        let mat = mats.get(&layer.material)?;
        let area = b.width * layer.thickness;
        let centroid = z + 0.5 * layer.thickness;
        ea += mat.youngs_modulus * area;
        ea_z += mat.youngs_modulus * area * centroid;
        line_density += mat.density * area;
        rows.push((mat.youngs_modulus, area, centroid, layer.thickness));
        z += layer.thickness;
    }
    let neutral_axis = ea_z / ea;
    let bending_stiffness: f64 = rows
        .iter()
        .map(|&(e, area, zc, t)| {
            let d = zc - neutral_axis;
            e * (b.width * t.powi(3) / 12.0 + area * d * d)
        })
        .sum();

    let piezo = &b.layers[b.piezo_layer];
    let piezo_mat = mats.get(&piezo.material)?;
    if !piezo_mat.is_piezoelectric {
        return Err(Error::InvalidParams(format!(
            "piezo layer material '{}' is not piezoelectric",
            piezo.material
        )));
    }
    let (_, _, piezo_mid, _) = rows[b.piezo_layer];

    Ok(BeamSection {
        neutral_axis,
        bending_stiffness,
        piezo_offset: piezo_mid - neutral_axis,
        capacitance: piezo_mat.eps33 * b.width * b.length / piezo.thickness,
        line_density,
    })
}

/// Static tip compliance of a clamped-free beam: (δ, θ) = C·(F, M).
pub fn tip_compliance(length: f64, ei: f64) -> Matrix2<f64> {
    let l = length;
    Matrix2::new(
        l.powi(3) / (3.0 * ei),
        l * l / (2.0 * ei),
        l * l / (2.0 * ei),
        l / ei,
    )
}

/// Rigid body attached to the beam tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMass {
    /// kg
    pub mass: f64,
    /// Rotary inertia about the centre of gravity, kg·m².
    pub rotary_inertia: f64,
    /// Distance from the beam tip to the centre of gravity, m.
    pub offset: f64,
}

/// Fundamental mode of the beam + rigid mass in (w_c, θ) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipMassMode {
    pub stiffness: Matrix2<f64>,
    pub mass: Matrix2<f64>,
    /// rad/s
    pub omega: f64,
    /// Mode slope θ per unit mass-centre deflection.
    pub mode_slope: f64,
    /// Static tip slope per unit mass-centre deflection under a force at the
    /// mass centre.
    pub static_slope: f64,
    /// φᵀ·M·φ with φ = (1, mode_slope).
    pub modal_mass: f64,
    /// φᵀ·f for unit base acceleration.
    pub participation: f64,
}

impl TipMassMode {
    /// Mass of the single-DOF equivalent, participation² / modal mass.
    pub fn effective_mass(&self) -> f64 {
        self.participation * self.participation / self.modal_mass
    }

    /// Mass-centre deflection per unit single-DOF coordinate.
    pub fn displacement_scale(&self) -> f64 {
        self.participation / self.modal_mass
    }
}

/// Two-DOF modal reduction of a clamped beam (`ei`, mass per length
/// `line_density`) carrying a rigid mass.
pub fn tip_mass_mode(
    length: f64,
    ei: f64,
    line_density: f64,
    body: &RigidMass,
) -> Result<TipMassMode> {
    if !(length > 0.0 && ei > 0.0 && line_density >= 0.0 && body.mass > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need L > 0, EI > 0, ρA >= 0, m > 0; got {length}, {ei}, {line_density}, {}",
            body.mass
        )));
    }
    if !(body.rotary_inertia >= 0.0 && body.offset >= 0.0) {
        return Err(Error::InvalidParams(
            "rotary inertia and offset must be >= 0".into(),
        ));
    }
    let l = length;
    let r = body.offset;
    // (w_c, θ) -> (δ_tip, θ)
    let to_tip = Matrix2::new(1.0, -r, 0.0, 1.0);

    let tip_stiffness = tip_compliance(l, ei)
        .try_inverse()
        .ok_or_else(|| Error::Singular("tip compliance".into()))?;
    let stiffness = to_tip.transpose() * tip_stiffness * to_tip;

    let beam_tip_mass =
        Matrix2::new(156.0, -22.0 * l, -22.0 * l, 4.0 * l * l) * (line_density * l / 420.0);
    let mass = to_tip.transpose() * beam_tip_mass * to_tip
        + Matrix2::new(body.mass, 0.0, 0.0, body.rotary_inertia);

    let k_det = stiffness.determinant();
    if !(stiffness[(0, 0)] > 0.0 && k_det > 0.0) {
        return Err(Error::InvalidParams(
            "stiffness matrix is not positive definite".into(),
        ));
    }
    let m_det = mass.determinant();
    if !(mass[(0, 0)] > 0.0 && m_det >= 0.0 && mass[(1, 1)] >= 0.0) {
        return Err(Error::InvalidParams(
            "mass matrix is not positive semi-definite".into(),
        ));
    }

    // det(K − λM) = a·λ² − b·λ + c
    let (k11, k12, k22) = (stiffness[(0, 0)], stiffness[(0, 1)], stiffness[(1, 1)]);
    let (m11, m12, m22) = (mass[(0, 0)], mass[(0, 1)], mass[(1, 1)]);
    let a = m_det;
    let b = k11 * m22 + k22 * m11 - 2.0 * k12 * m12;
    let c = k_det;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let lambda = 2.0 * c / (b + disc.sqrt());

    let mode_slope = -(k12 - lambda * m12) / (k22 - lambda * m22);
    let phi = Vector2::new(1.0, mode_slope);
    let modal_mass = (phi.transpose() * mass * phi)[(0, 0)];
    let participation = body.mass;

    // Unit force at the mass centre.
    let flex = stiffness
        .try_inverse()
        .ok_or_else(|| Error::Singular("reduced stiffness".into()))?;
    let static_slope = flex[(1, 0)] / flex[(0, 0)];

    Ok(TipMassMode {
        stiffness,
        mass,
        omega: lambda.sqrt(),
        mode_slope,
        static_slope,
        modal_mass,
        participation,
    })
}

/// Everything computed on the way from geometry to [`LumpedParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub section: BeamSection,
    pub body: RigidMass,
    pub mode: TipMassMode,
    /// Rayleigh translational beam mass (33/140)·ρA·L, for reference.
    pub beam_mass_rayleigh: f64,
    pub params: LumpedParams,
}

/// Rigid seismic mass of the geometry, with its centre `L_M/2` beyond the tip.
pub fn seismic_body(g: &Geometry, mats: &MaterialDb) -> Result<RigidMass> {
    let m = &g.mass;
    let rho = mats.get(&m.material)?.density;
    let mass = rho * m.length * m.width * m.thickness;
    Ok(RigidMass {
        mass,
        rotary_inertia: mass * (m.length * m.length + m.thickness * m.thickness) / 12.0,
        offset: 0.5 * m.length,
    })
}

pub fn reduce(g: &Geometry, mats: &MaterialDb, zeta: f64) -> Result<Reduction> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "damping ratio must be >= 0, got {zeta}"
        )));
    }
    let section = beam_section(g, mats)?;
    let body = seismic_body(g, mats)?;
    let mode = tip_mass_mode(
        g.beam.length,
        section.bending_stiffness,
        section.line_density,
        &body,
    )?;

    let piezo = mats.get(&g.beam.layers[g.beam.piezo_layer].material)?;
    // Electrode charge e31·B·z_p·θ_tip (full-length electrode), per unit w_c.
    let coupling_per_wc = piezo.e31 * g.beam.width * section.piezo_offset * mode.static_slope;

    let mass = mode.effective_mass();
    let stiffness = mode.omega * mode.omega * mass;
    let params = LumpedParams {
        mass,
        stiffness,
        damping: damping_from_ratio(zeta, stiffness, mass),
        coupling: coupling_per_wc * mode.displacement_scale(),
        capacitance: section.capacitance,
    };
    build_lumped(params)?;

    Ok(Reduction {
        section,
        body,
        mode,
        beam_mass_rayleigh: 33.0 / 140.0 * section.line_density * g.beam.length,
        params,
    })
}

/// Single-DOF parameters of the geometry with damping ratio `zeta`.
pub fn effective_params(g: &Geometry, mats: &MaterialDb, zeta: f64) -> Result<LumpedParams> {
    reduce(g, mats, zeta).map(|r| r.params)
}

/// Short-circuit resonance frequency in Hz.
pub fn resonance_estimate(g: &Geometry, mats: &MaterialDb) -> Result<f64> {
    Ok(reduce(g, mats, 0.0)?.mode.omega / (2.0 * PI))
}
