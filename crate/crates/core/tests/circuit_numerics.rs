//! Transient, DC and AC behaviour of the circuit engine against closed forms
//! and independent solvers.

use num_complex::Complex64;
use piezo_core::circuit::{
    ac_analysis, dc_operating_point, diode_current, transient, transient_detailed, DiodeParams,
    Method, SolveConfig,
};
use piezo_core::harness::{refine_peak, Sweep};
use piezo_core::lumped::{build_lumped, Drive, InitialState, Load, LumpedParams};
use piezo_core::netlist::{
    functional_generator, lumped_to_structural, structural_generator, ElementKind,
    FunctionalParams, Netlist, Waveform, STRUCTURAL_OUTPUT,
};
use proptest::prelude::*;
use std::f64::consts::PI;

mod common;
use common::{network, nodal_oracle, node, to_netlist};

const R: f64 = 1e3;
const C: f64 = 1e-6;
const TAU: f64 = R * C;

fn sine(amplitude: f64, frequency: f64) -> Waveform {
    Waveform::Sin {
        offset: 0.0,
        amplitude,
        frequency,
        phase_deg: 0.0,
    }
}

fn rc_step() -> Netlist {
    let mut n = Netlist::new();
    n.voltage_source("v1", "in", "0", Waveform::Dc(1.0))
        .unwrap();
    n.resistor("r1", "in", "out", R).unwrap();
    n.add(
        "c1",
        &["out", "0"],
        ElementKind::Capacitor {
            capacitance: C,
            ic: Some(0.0),
        },
    )
    .unwrap();
    n
}

fn cfg(method: Method) -> SolveConfig {
    SolveConfig {
        method,
        ..SolveConfig::default()
    }
}

/// |v_out(τ) − (1 − e⁻¹)| for the RC step at step size `dt`.
fn rc_error_at_tau(method: Method, dt: f64) -> f64 {
    let ts = transient(&rc_step(), dt, TAU, &cfg(method)).unwrap();
    let v = ts.column("v(out)").unwrap();
    (v[v.len() - 1] - (1.0 - (-1.0f64).exp())).abs()
}

#[test]
fn rc_step_within_a_tenth_of_a_percent() {
    let dt = TAU / 1000.0;
    let ts = transient(&rc_step(), dt, 5.0 * TAU, &cfg(Method::Trapezoidal)).unwrap();
    let v = ts.column("v(out)").unwrap();
    let worst = v
        .iter()
        .enumerate()
        .map(|(k, &x)| (x - (1.0 - (-(k as f64) * dt / TAU).exp())).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "max error {worst}");
}

fn observed_order(method: Method) -> f64 {
    let coarse = rc_error_at_tau(method, TAU / 50.0);
    let fine = rc_error_at_tau(method, TAU / 100.0);
    (coarse / fine).log2()
}

#[test]
fn trapezoidal_is_second_order() {
    let order = observed_order(Method::Trapezoidal);
    assert!((order - 2.0).abs() <= 0.2, "order {order}");
}

#[test]
fn backward_euler_is_first_order() {
    let order = observed_order(Method::BackwardEuler);
    assert!((order - 1.0).abs() <= 0.2, "order {order}");
}

#[test]
fn lc_tank_conserves_energy() {
    let (l, c): (f64, f64) = (1e-3, 1e-6);
    let mut n = Netlist::new();
    n.add(
        "c1",
        &["a", "0"],
        ElementKind::Capacitor {
            capacitance: c,
            ic: Some(1.0),
        },
    )
    .unwrap();
    n.add(
        "l1",
        &["a", "0"],
        ElementKind::Inductor {
            inductance: l,
            ic: Some(0.0),
        },
    )
    .unwrap();
    let period = 2.0 * PI * (l * c).sqrt();
    let ts = transient(
        &n,
        period / 200.0,
        100.0 * period,
        &cfg(Method::Trapezoidal),
    )
    .unwrap();
    let v = ts.column("v(a)").unwrap();
    let i = ts.column("i(l1)").unwrap();
    let energy = |k: usize| 0.5 * c * v[k] * v[k] + 0.5 * l * i[k] * i[k];
    let e0 = energy(0);
    assert!((e0 - 0.5e-6).abs() < 1e-15);
    let drift = (0..v.len())
        .map(|k| (energy(k) - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift < 1e-3, "drift {drift}");
}

#[test]
fn undamped_mechanics_conserve_energy() {
    let p = LumpedParams {
        mass: 1e-6,
        stiffness: 100.0,
        damping: 0.0,
        coupling: 1e-4,
        capacitance: 1e-9,
    };
    let model = build_lumped(p).unwrap();
    let (_, f_oc) = model.resonance_frequencies();
    let period = 1.0 / f_oc;
    let ic = InitialState {
        w: 1e-6,
        wdot: 0.0,
        v: 0.0,
    };
    let ts = model
        .transient(
            &Drive::new(0.0, f_oc),
            Load::Open,
            period / 200.0,
            100.0 * period,
            ic,
        )
        .unwrap();
    let (w, wdot, v) = (
        ts.column("w").unwrap(),
        ts.column("wdot").unwrap(),
        ts.column("v").unwrap(),
    );
    let e0 = model.energy(w[0], wdot[0], v[0]);
    let drift = (0..w.len())
        .map(|k| (model.energy(w[k], wdot[k], v[k]) - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift < 1e-3, "drift {drift}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_networks_match_nodal_oracle(net in network()) {
        let op = dc_operating_point(&to_netlist(&net), &SolveConfig::default()).unwrap();
        let expected = nodal_oracle(&net);
        let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, want) in expected.iter().enumerate() {
            let got = op.voltage(&node(k + 1)).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * scale.max(1e-300), "node {}: {} vs {}", k + 1, got, want);
        }
    }
}

fn half_wave() -> Netlist {
    let mut n = Netlist::new();
    n.voltage_source("v1", "in", "0", sine(1.0, 1e3)).unwrap();
    n.diode("d1", "in", "out", DiodeParams::new(1e-14, 1.0))
        .unwrap();
    n.capacitor("c1", "out", "0", 1e-6).unwrap();
    n.resistor("r1", "out", "0", 10e3).unwrap();
    n
}

#[test]
fn half_wave_rectifier_matches_fine_reference() {
    let (dt, t_stop) = (1e-3 / 200.0, 5e-3);
    let run = transient_detailed(&half_wave(), dt, t_stop, &cfg(Method::Trapezoidal)).unwrap();
    let reference = transient(
        &half_wave(),
        dt / 100.0,
        t_stop,
        &cfg(Method::BackwardEuler),
    )
    .unwrap();
    let v = run.series.column("v(out)").unwrap();
    let v_ref = reference.column("v(out)").unwrap();
    let peak = v_ref.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(peak > 0.2);
    let worst = v
        .iter()
        .enumerate()
        .map(|(k, x)| (x - v_ref[100 * k]).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.02 * peak, "worst {worst} against peak {peak}");
    assert!(
        run.max_kcl_residual < 1e-9,
        "KCL residual {}",
        run.max_kcl_residual
    );
    assert!(run.consistent_start);
}

#[test]
fn diode_conductance_is_the_derivative() {
    let p = DiodeParams::new(1e-12, 1.3);
    for v in [-1.0, -0.1, 0.0, 0.2, 0.5, 0.7] {
        let h = 1e-7;
        let (_, g) = diode_current(v, &p);
        let fd = (diode_current(v + h, &p).0 - diode_current(v - h, &p).0) / (2.0 * h);
        assert!(
            (g - fd).abs() <= 1e-5 * g.abs().max(1e-15),
            "v = {v}: g {g} vs {fd}"
        );
    }
}

#[test]
fn transformer_is_lossless() {
    let mut n = Netlist::new();
    n.voltage_source("v1", "a", "0", sine(2.0, 50.0)).unwrap();
    n.resistor("rs", "a", "p", 10.0).unwrap();
    n.transformer("t1", ["p", "0", "s", "0"], 3.0).unwrap();
    n.resistor("rl", "s", "0", 100.0).unwrap();
    n.capacitor("cl", "s", "0", 1e-6).unwrap();
    let ts = transient(&n, 1e-4, 0.04, &SolveConfig::default()).unwrap();
    let (vp, vs) = (ts.column("v(p)").unwrap(), ts.column("v(s)").unwrap());
    let (ip, is) = (ts.column("i(t1.p)").unwrap(), ts.column("i(t1.s)").unwrap());
    let scale = vp
        .iter()
        .zip(ip)
        .fold(0.0f64, |m, (v, i)| m.max((v * i).abs()));
    assert!(scale > 1e-3);
    for k in 0..vp.len() {
        assert!(
            (vp[k] * ip[k] + vs[k] * is[k]).abs() <= 1e-9 * scale,
            "step {k}"
        );
        assert!((vp[k] - 3.0 * vs[k]).abs() <= 1e-9);
    }
}

#[test]
fn transformer_reflects_impedance() {
    let mut n = Netlist::new();
    n.voltage_source("v1", "p", "0", sine(1.0, 1e3)).unwrap();
    n.transformer("t1", ["p", "0", "s", "0"], 4.0).unwrap();
    n.resistor("rl", "s", "0", 50.0).unwrap();
    let fr = ac_analysis(&n, &[1e3, 1e4]).unwrap();
    for i in fr.column("i(v1)").unwrap() {
        let z = Complex64::from(1.0) / (-i);
        assert!(
            (z - Complex64::from(16.0 * 50.0)).norm() < 1e-9 * 800.0,
            "{z}"
        );
    }
}

#[test]
fn structural_ac_peak_sits_at_open_circuit_resonance() {
    let p = LumpedParams::with_damping_ratio(1e-6, 100.0, 0.01, 1e-4, 1e-9);
    let model = build_lumped(p).unwrap();
    let (f_sc, f_oc) = model.resonance_frequencies();
    assert!(f_oc > f_sc);
    let sp = lumped_to_structural(&p, &Drive::new(9.80665, f_oc));
    let n = structural_generator(&sp, Load::Open).unwrap();
    let sweep = Sweep::linear(0.9 * f_oc, 1.1 * f_oc, 2000);
    let fr = ac_analysis(&n, &sweep.frequencies()).unwrap();
    let mag = fr.magnitude(&format!("v({STRUCTURAL_OUTPUT})")).unwrap();
    let (f_peak, _) = refine_peak(&sweep, &mag);
    let step = 0.2 * f_oc / 1999.0;
    // The damped peak sits a hair below f_oc.
    assert!((f_peak - f_oc).abs() <= step, "{f_peak} vs {f_oc}");
}

#[test]
fn functional_model_amplitude() {
    let fp = FunctionalParams {
        current: 2e-6,
        frequency: 800.0,
        capacitance: 2e-9,
    };
    let r = 50e3;
    let n = functional_generator(&fp, Load::Resistor(r)).unwrap();
    let fr = ac_analysis(&n, &[fp.frequency]).unwrap();
    let v = fr.magnitude("v(out)").unwrap()[0];
    let w = 2.0 * PI * fp.frequency;
    let expected = fp.current * r / (1.0 + (w * r * fp.capacitance).powi(2)).sqrt();
    assert!((v - expected).abs() <= 1e-9 * expected);

    // Transient settles to the same amplitude.
    let ts = transient(
        &n,
        1.0 / (fp.frequency * 400.0),
        40.0 / fp.frequency,
        &SolveConfig::default(),
    )
    .unwrap();
    let tail = &ts.column("v(out)").unwrap()[ts.len() - 400..];
    let peak = tail.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(
        (peak - expected).abs() <= 1e-3 * expected,
        "{peak} vs {expected}"
    );
}
