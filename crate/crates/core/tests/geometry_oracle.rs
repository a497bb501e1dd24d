//! Geometry reduction against a discretised beam.

use piezo_core::geometry::{
    beam_section, effective_params, resonance_estimate, seismic_body, tip_mass_mode, Beam,
    Geometry, Layer, RigidMass, SeismicMass,
};
use piezo_core::materials::MaterialDb;
use std::f64::consts::PI;

mod common;
use common::fem_omega;

const SHIPPED: &str = include_str!("../data/materials.toml");

fn soi() -> Geometry {
    Geometry {
        beam: Beam {
            length: 1e-3,
            width: 800e-6,
            thickness: 6e-6,
            layers: vec![
                Layer {
                    material: "si".into(),
                    thickness: 5e-6,
                },
                Layer {
                    material: "aln".into(),
                    thickness: 1e-6,
                },
            ],
            piezo_layer: 1,
        },
        mass: SeismicMass {
            length: 400e-6,
            width: 400e-6,
            thickness: 525e-6,
            material: "proof".into(),
        },
    }
}

/// Shipped materials plus a "proof" material of the given density.
fn db_with_proof(density: f64) -> MaterialDb {
    let extra = format!(
        "\n[proof]\nname = \"Proof\"\ndensity = {density:e}\nyoungs_modulus = 169e9\nc33 = 165.7e9\n\
         e31 = 0.0\ne33 = 0.0\neps33 = 1e-10\nis_piezoelectric = false\n"
    );
    MaterialDb::from_toml_str(&format!("{SHIPPED}{extra}")).unwrap()
}

#[test]
fn reduction_matches_discrete_beam_across_mass_ratios() {
    let g = soi();
    let section = beam_section(&g, MaterialDb::builtin()).unwrap();
    let beam_mass = section.line_density * g.beam.length;
    let volume = g.mass.length * g.mass.width * g.mass.thickness;

    for ratio in [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0] {
        let db = db_with_proof(ratio * beam_mass / volume);
        let body = seismic_body(&g, &db).unwrap();
        assert!((body.mass / beam_mass - ratio).abs() < 1e-9 * ratio);

        let f = resonance_estimate(&g, &db).unwrap();
        let f_fem = fem_omega(
            g.beam.length,
            section.bending_stiffness,
            section.line_density,
            &body,
            200,
        ) / (2.0 * PI);
        let err = (f - f_fem).abs() / f_fem;
        assert!(
            err < 0.02,
            "ratio {ratio}: reduced {f} Hz vs discrete {f_fem} Hz ({err:.2e})"
        );

        let p = effective_params(&g, &db, 0.0).unwrap();
        let f_params = (p.stiffness / p.mass).sqrt() / (2.0 * PI);
        assert!((f_params - f).abs() < 1e-9 * f);
    }
}

#[test]
fn discrete_oracle_is_converged() {
    let g = soi();
    let section = beam_section(&g, MaterialDb::builtin()).unwrap();
    let body = seismic_body(&g, &db_with_proof(2329.0)).unwrap();
    let coarse = fem_omega(
        g.beam.length,
        section.bending_stiffness,
        section.line_density,
        &body,
        100,
    );
    let fine = fem_omega(
        g.beam.length,
        section.bending_stiffness,
        section.line_density,
        &body,
        200,
    );
    assert!((coarse - fine).abs() < 1e-8 * fine);
}

#[test]
fn discrete_oracle_reproduces_bare_cantilever() {
    // First root of 1 + cos·cosh = 0.
    let beta = 1.875_104_068_711_961;
    let (l, ei, rho_a): (f64, f64, f64) = (1e-3, 2e-9, 1e-5);
    let body = RigidMass {
        mass: 1e-15,
        rotary_inertia: 0.0,
        offset: 0.0,
    };
    let exact = beta * beta * (ei / (rho_a * l.powi(4))).sqrt();
    let fem = fem_omega(l, ei, rho_a, &body, 200);
    assert!((fem - exact).abs() < 1e-6 * exact);
}

#[test]
fn point_mass_limit_is_exact() {
    let (l, ei, m): (f64, f64, f64) = (1.3e-3, 4.7e-9, 2.1e-7);
    let body = RigidMass {
        mass: m,
        rotary_inertia: 0.0,
        offset: 0.0,
    };
    let mode = tip_mass_mode(l, ei, 0.0, &body).unwrap();
    let exact = (3.0 * ei / (l.powi(3) * m)).sqrt();
    assert!((mode.omega - exact).abs() <= 1e-10 * exact);
    assert!((mode.effective_mass() - m).abs() <= 1e-10 * m);
    let k = mode.omega * mode.omega * mode.effective_mass();
    assert!((k - 3.0 * ei / l.powi(3)).abs() <= 1e-10 * k);
}

#[test]
fn bending_stiffness_matches_strip_integration() {
    let g = soi();
    let db = MaterialDb::builtin();
    let section = beam_section(&g, db).unwrap();

    // Slice every layer into thin strips and integrate E·z over the stack.
    let strips = 1000;
    let mut rows = Vec::new();
    let mut z0 = 0.0;
    for layer in &g.beam.layers {
        let e = db.get(&layer.material).unwrap().youngs_modulus;
        let dz = layer.thickness / strips as f64;
        for s in 0..strips {
            rows.push((e, z0 + (s as f64 + 0.5) * dz, dz));
        }
        z0 += layer.thickness;
    }
    let b = g.beam.width;
    let ea: f64 = rows.iter().map(|&(e, _, dz)| e * b * dz).sum();
    let na = rows.iter().map(|&(e, z, dz)| e * b * dz * z).sum::<f64>() / ea;
    let ei: f64 = rows
        .iter()
        .map(|&(e, z, dz)| e * b * dz * (z - na).powi(2))
        .sum();

    assert!((section.neutral_axis - na).abs() < 1e-9 * na);
    assert!((section.bending_stiffness - ei).abs() < 1e-5 * ei);
}
