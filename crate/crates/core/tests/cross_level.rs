//! Equivalent circuit, ODE and phasor solution of the same generator.

use piezo_core::circuit::SolveConfig;
use piezo_core::harness::compare_levels;
use piezo_core::lumped::{build_lumped, Drive, Load, LumpedParams};
use piezo_core::STANDARD_GRAVITY;
use proptest::prelude::*;

fn reference() -> LumpedParams {
    LumpedParams {
        mass: 1e-6,
        stiffness: 100.0,
        damping: 2e-4,
        coupling: 1e-4,
        capacitance: 1e-9,
    }
}

fn at_f_oc(p: &LumpedParams) -> Drive {
    let (_, f_oc) = build_lumped(*p).unwrap().resonance_frequencies();
    Drive::new(STANDARD_GRAVITY, f_oc)
}

#[test]
fn levels_agree_once_settled() {
    let p = reference();
    let drive = at_f_oc(&p);
    let t = drive.period();
    let cmp = compare_levels(
        &p,
        &drive,
        Load::Open,
        t / 500.0,
        300.0 * t,
        &SolveConfig::default(),
    )
    .unwrap();
    let s = cmp.settled;
    assert!(s.structural_lumped <= 0.02, "{s:?}");
    assert!(s.structural_analytic <= 0.02, "{s:?}");
    assert!(s.lumped_analytic <= 0.02, "{s:?}");
    assert!(cmp.early.lumped_analytic > s.lumped_analytic);
    assert!(cmp.early.structural_analytic > s.structural_analytic);
}

#[test]
fn levels_agree_into_a_resistive_load() {
    let p = reference();
    let drive = at_f_oc(&p);
    let t = drive.period();
    let cmp = compare_levels(
        &p,
        &drive,
        Load::Resistor(1e5),
        t / 500.0,
        300.0 * t,
        &SolveConfig::default(),
    )
    .unwrap();
    assert!(cmp.settled.structural_lumped <= 0.02);
    assert!(cmp.settled.structural_analytic <= 0.02);
    assert!(cmp.amplitude > 0.0);
}

#[test]
fn halving_the_step_shrinks_the_settled_mismatch() {
    let p = reference();
    let drive = at_f_oc(&p);
    let t = drive.period();
    let run = |steps: f64| {
        compare_levels(
            &p,
            &drive,
            Load::Open,
            t / steps,
            300.0 * t,
            &SolveConfig::default(),
        )
        .unwrap()
        .settled
    };
    let (coarse, fine) = (run(100.0), run(200.0));
    assert!(
        coarse.lumped_analytic >= 2.0 * fine.lumped_analytic,
        "{} -> {}",
        coarse.lumped_analytic,
        fine.lumped_analytic
    );
    assert!(coarse.structural_analytic >= 2.0 * fine.structural_analytic);
}

#[test]
fn circuit_and_ode_share_a_discretisation() {
    let p = reference();
    let drive = at_f_oc(&p);
    let t = drive.period();
    let cmp = compare_levels(
        &p,
        &drive,
        Load::Open,
        t / 50.0,
        40.0 * t,
        &SolveConfig::default(),
    )
    .unwrap();
    assert!(cmp.settled.structural_lumped < 1e-6, "{:?}", cmp.settled);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn random_generators_settle_onto_the_phasor(
        mass in 1e-7..1e-5f64,
        f_sc in 200.0..3000.0f64,
        zeta in 0.01..0.02f64,
        k2 in 0.001..0.2f64,
        capacitance in 1e-10..1e-8f64,
    ) {
        let stiffness = mass * (2.0 * std::f64::consts::PI * f_sc).powi(2);
        // Θ from the coupling factor k² = Θ²/(K·Cp).
        let coupling = (k2 * stiffness * capacitance).sqrt();
        let p = LumpedParams::with_damping_ratio(mass, stiffness, zeta, coupling, capacitance);
        let drive = at_f_oc(&p);
        let t = drive.period();
        let cmp = compare_levels(&p, &drive, Load::Open, t / 200.0, 200.0 * t, &SolveConfig::default()).unwrap();
        prop_assert!(cmp.settled.structural_lumped <= 0.02);
        prop_assert!(cmp.settled.structural_analytic <= 0.02);
        prop_assert!(cmp.early.structural_analytic > cmp.settled.structural_analytic);
    }
}
