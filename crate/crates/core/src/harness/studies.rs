use serde::{Deserialize, Serialize};

use super::{refine_peak, relative_rms, windows, Sweep, WINDOW_PERIODS};
use crate::circuit::{transient, DiodeParams, SolveConfig};
use crate::error::{Error, Result};
use crate::geometry::{effective_params, Geometry};
use crate::lumped::{build_lumped, Drive, InitialState, Load, LumpedParams};
use crate::materials::MaterialDb;
use crate::netlist::{
    attach_multiplier, lumped_to_structural, structural_generator, structural_generator_at,
    voltage_multiplier, Waveform, GROUND, MULTIPLIER_INPUT, MULTIPLIER_OUTPUT, STRUCTURAL_OUTPUT,
};
use crate::series::{format_number, FreqResponse, SummaryTable, TimeSeries};

/// Relative RMS differences between the three output waveforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseRms {
    /// Circuit against ODE, relative to the ODE.
    pub structural_lumped: f64,
    /// Circuit against the phasor waveform, relative to the phasor.
    pub structural_analytic: f64,
    /// ODE against the phasor waveform, relative to the phasor.
    pub lumped_analytic: f64,
}

#[derive(Debug, Clone)]
pub struct LevelComparison {
    /// Columns `v_structural`, `v_lumped`, `v_analytic`.
    pub series: TimeSeries,
    pub settled: PairwiseRms,
    pub early: PairwiseRms,
    /// Steady-state output amplitude, V.
    pub amplitude: f64,
}

impl LevelComparison {
    pub fn summary(&self) -> SummaryTable {
        let row = |w: &str, p: &PairwiseRms| {
            vec![
                w.to_string(),
                format_number(p.structural_lumped),
                format_number(p.structural_analytic),
                format_number(p.lumped_analytic),
            ]
        };
        SummaryTable {
            header: vec![
                "window".into(),
                "structural_vs_lumped".into(),
                "structural_vs_analytic".into(),
                "lumped_vs_analytic".into(),
            ],
            rows: vec![row("early", &self.early), row("settled", &self.settled)],
        }
    }
}

/// Output voltage of the generator from the equivalent circuit, the ODE and
/// the phasor solution, all started at rest.
pub fn compare_levels(
    lp: &LumpedParams,
    drive: &Drive,
    load: Load,
    dt: f64,
    t_stop: f64,
    cfg: &SolveConfig,
) -> Result<LevelComparison> {
    let model = build_lumped(*lp)?;
    let lumped = model.transient(drive, load, dt, t_stop, InitialState::default())?;
    let v_lumped = lumped.column("v").expect("lumped v").to_vec();

    let netlist = structural_generator(&lumped_to_structural(lp, drive), load)?;
    let circuit = transient(&netlist, dt, t_stop, cfg)?;
    let v_struct = circuit
        .column(&format!("v({STRUCTURAL_OUTPUT})"))
        .expect("structural output")
        .to_vec();

    let (_, v) = model.steady_state_response(drive.omega(), drive.amplitude, load);
    let v_analytic: Vec<f64> = (0..v_lumped.len())
        .map(|k| v.norm() * (drive.omega() * k as f64 * dt + drive.phase + v.arg()).sin())
        .collect();

    let (early, settled) = windows(v_lumped.len(), dt, drive.period());
    let pair = |r: std::ops::Range<usize>| PairwiseRms {
        structural_lumped: relative_rms(&v_struct, &v_lumped, r.clone()),
        structural_analytic: relative_rms(&v_struct, &v_analytic, r.clone()),
        lumped_analytic: relative_rms(&v_lumped, &v_analytic, r),
    };
    let (early, settled) = (pair(early), pair(settled));

    let mut series = TimeSeries::new(dt)?;
    series.push_column("v_structural", "V", v_struct)?;
    series.push_column("v_lumped", "V", v_lumped)?;
    series.push_column("v_analytic", "V", v_analytic)?;
    Ok(LevelComparison {
        series,
        settled,
        early,
        amplitude: v.norm(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialPeak {
    pub material: String,
    pub params: LumpedParams,
    pub f_sc: f64,
    pub f_oc: f64,
    /// Refined peak of the open-circuit sweep.
    pub f_peak: f64,
    pub v_peak: f64,
}

#[derive(Debug, Clone)]
pub struct MaterialStudy {
    /// One column `v(<material>)` per material.
    pub response: FreqResponse,
    pub peaks: Vec<MaterialPeak>,
}

impl MaterialStudy {
    pub fn summary(&self) -> SummaryTable {
        SummaryTable {
            header: [
                "material",
                "f_sc[Hz]",
                "f_oc[Hz]",
                "f_peak[Hz]",
                "v_peak[V]",
            ]
            .map(String::from)
            .to_vec(),
            rows: self
                .peaks
                .iter()
                .map(|p| {
                    vec![
                        p.material.clone(),
                        format_number(p.f_sc),
                        format_number(p.f_oc),
                        format_number(p.f_peak),
                        format_number(p.v_peak),
                    ]
                })
                .collect(),
        }
    }
}

/// Open-circuit |V| sweeps of the same geometry with each piezoelectric
/// material. Without an explicit sweep the grid spans 0.8–1.2 times the
/// open-circuit resonances with 2001 points.
pub fn material_study(
    g: &Geometry,
    mats: &MaterialDb,
    materials: &[&str],
    acceleration: f64,
    zeta: f64,
    sweep: Option<Sweep>,
) -> Result<MaterialStudy> {
    if materials.is_empty() {
        return Err(Error::InvalidParams(
            "material study needs at least one material".into(),
        ));
    }
    let mut models = Vec::new();
    for name in materials {
        let geom = g.with_piezo_material(name);
        let lp = effective_params(&geom, mats, zeta)?;
        models.push((mats.get(name)?.name.clone(), build_lumped(lp)?));
    }
    let sweep = match sweep {
        Some(s) => s,
        None => {
            let foc: Vec<f64> = models
                .iter()
                .map(|(_, m)| m.resonance_frequencies().1)
                .collect();
            let lo = foc.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = foc.iter().cloned().fold(0.0, f64::max);
            Sweep::linear(0.8 * lo, 1.2 * hi, 2001)
        }
    };
    sweep.validate()?;
    let mut response = FreqResponse::new(sweep.frequencies());
    let mut peaks = Vec::new();
    for (name, model) in &models {
        let sub = super::freq_sweep(
            super::SweepSubject::Lumped {
                model,
                acceleration,
                load: Load::Open,
            },
            &sweep,
            "v",
        )?;
        let col = sub.columns()[0].values.clone();
        let mags: Vec<f64> = col.iter().map(|c| c.norm()).collect();
        let (f_peak, v_peak) = refine_peak(&sweep, &mags);
        let (f_sc, f_oc) = model.resonance_frequencies();
        response.push_column(format!("v({name})"), "V", col)?;
        peaks.push(MaterialPeak {
            material: name.clone(),
            params: *model.params(),
            f_sc,
            f_oc,
            f_peak,
            v_peak,
        });
    }
    Ok(MaterialStudy { response, peaks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCase {
    pub label: String,
    pub params: LumpedParams,
    /// Seismic mass, kg.
    pub seismic_mass: f64,
    pub f_sc: f64,
    /// Open-circuit resonance, where the case is driven.
    pub f_oc: f64,
    /// Largest |v| over the settled window, V.
    pub v_settled: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryStudy {
    pub cases: Vec<GeometryCase>,
}

impl GeometryStudy {
    pub fn summary(&self) -> SummaryTable {
        SummaryTable {
            header: ["case", "mass[kg]", "f_sc[Hz]", "f_oc[Hz]", "v_settled[V]"]
                .map(String::from)
                .to_vec(),
            rows: self
                .cases
                .iter()
                .map(|c| {
                    vec![
                        c.label.clone(),
                        format_number(c.seismic_mass),
                        format_number(c.f_sc),
                        format_number(c.f_oc),
                        format_number(c.v_settled),
                    ]
                })
                .collect(),
        }
    }
}

/// Open-circuit transient at resonance for the base geometry and for the
/// geometry with the mass footprint scaled by `scale`.
pub fn geometry_study(
    base: &Geometry,
    mats: &MaterialDb,
    scale: f64,
    acceleration: f64,
    zeta: f64,
    periods: usize,
    steps_per_period: usize,
) -> Result<GeometryStudy> {
    if !(scale > 0.0) || periods < 2 * WINDOW_PERIODS || steps_per_period < 4 {
        return Err(Error::InvalidParams(format!(
            "geometry study needs scale > 0, periods >= {} and steps_per_period >= 4",
            2 * WINDOW_PERIODS
        )));
    }
    let mut cases = Vec::new();
    for (label, g) in [
        ("base".to_string(), base.clone()),
        (
            format!("scaled x{scale}"),
            base.with_scaled_mass_footprint(scale),
        ),
    ] {
        let lp = effective_params(&g, mats, zeta)?;
        let model = build_lumped(lp)?;
        let (f_sc, f_oc) = model.resonance_frequencies();
        let drive = Drive::new(acceleration, f_oc);
        let dt = drive.period() / steps_per_period as f64;
        let ts = model.transient(
            &drive,
            Load::Open,
            dt,
            periods as f64 * drive.period(),
            InitialState::default(),
        )?;
        let v = ts.column("v").expect("v");
        let (_, settled) = windows(v.len(), dt, drive.period());
        let v_settled = v[settled].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let body = crate::geometry::seismic_body(&g, mats)?;
        cases.push(GeometryCase {
            label,
            params: lp,
            seismic_mass: body.mass,
            f_sc,
            f_oc,
            v_settled,
        });
    }
    Ok(GeometryStudy { cases })
}

/// Voltage multiplier settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierSpec {
    pub stages: usize,
    pub diode: DiodeParams,
    /// Capacitance of every pump and hold capacitor, F.
    pub c_stage: f64,
    /// Output load, Ω; open when absent.
    #[serde(default)]
    pub load: Option<f64>,
}

impl MultiplierSpec {
    pub fn load(&self) -> Load {
        self.load.map_or(Load::Open, Load::Resistor)
    }
}

#[derive(Debug, Clone)]
pub struct GlobalSim {
    pub params: LumpedParams,
    /// All circuit node voltages and branch currents.
    pub series: TimeSeries,
    /// Open-circuit generator amplitude at the drive, V.
    pub generator_amplitude: f64,
    /// Mean output over the settled window, V.
    pub dc: f64,
    /// Peak-to-peak output over the settled window, V.
    pub ripple: f64,
}

impl GlobalSim {
    pub fn summary(&self) -> SummaryTable {
        SummaryTable {
            header: ["generator_amplitude[V]", "dc[V]", "ripple[V]"]
                .map(String::from)
                .to_vec(),
            rows: vec![vec![
                format_number(self.generator_amplitude),
                format_number(self.dc),
                format_number(self.ripple),
            ]],
        }
    }
}

/// Name of the node joining the generator to the multiplier.
pub const GENERATOR_NODE: &str = "gen";

/// Generator equivalent circuit driving a voltage multiplier.
#[allow(clippy::too_many_arguments)]
pub fn global_sim(
    g: &Geometry,
    mats: &MaterialDb,
    multiplier: &MultiplierSpec,
    drive: &Drive,
    zeta: f64,
    dt: f64,
    t_stop: f64,
    cfg: &SolveConfig,
) -> Result<GlobalSim> {
    let lp = effective_params(g, mats, zeta)?;
    global_sim_params(&lp, multiplier, drive, dt, t_stop, cfg)
}

pub(crate) fn global_sim_params(
    lp: &LumpedParams,
    multiplier: &MultiplierSpec,
    drive: &Drive,
    dt: f64,
    t_stop: f64,
    cfg: &SolveConfig,
) -> Result<GlobalSim> {
    if t_stop < (WINDOW_PERIODS as f64) * drive.period() {
        return Err(Error::InvalidParams(format!(
            "run must cover at least {WINDOW_PERIODS} drive periods"
        )));
    }
    let model = build_lumped(*lp)?;
    let (_, v_open) = model.steady_state_response(drive.omega(), drive.amplitude, Load::Open);
    let mut netlist =
        structural_generator_at(&lumped_to_structural(lp, drive), Load::Open, GENERATOR_NODE)?;
    attach_multiplier(
        &mut netlist,
        GENERATOR_NODE,
        multiplier.stages,
        multiplier.diode,
        multiplier.c_stage,
        multiplier.load(),
    )?;
    let series = transient(&netlist, dt, t_stop, cfg)?;
    let out = series
        .column(&format!("v({MULTIPLIER_OUTPUT})"))
        .expect("multiplier output");
    let (dc, ripple) = settled_dc(out, dt, drive.period());
    Ok(GlobalSim {
        params: *lp,
        series,
        generator_amplitude: v_open.norm(),
        dc,
        ripple,
    })
}

/// Voltage multiplier driven straight from a sine source.
#[derive(Debug, Clone)]
pub struct MultiplierRun {
    pub stages: usize,
    /// All circuit node voltages and branch currents.
    pub series: TimeSeries,
    /// Mean output over the settled window, V.
    pub dc: f64,
    /// Peak-to-peak output over the settled window, V.
    pub ripple: f64,
}

impl MultiplierRun {
    pub fn summary(&self) -> SummaryTable {
        SummaryTable {
            header: vec!["stages".into(), "dc[V]".into(), "ripple[V]".into()],
            rows: vec![vec![
                self.stages.to_string(),
                format_number(self.dc),
                format_number(self.ripple),
            ]],
        }
    }
}

/// `multiplier` fed by `amplitude·sin(2πf·t)` at its input for `periods`
/// periods of `steps_per_period` steps.
pub fn multiplier_run(
    multiplier: &MultiplierSpec,
    amplitude: f64,
    frequency: f64,
    periods: usize,
    steps_per_period: usize,
    cfg: &SolveConfig,
) -> Result<MultiplierRun> {
    if !(frequency > 0.0 && frequency.is_finite())
        || periods < WINDOW_PERIODS
        || steps_per_period < 4
    {
        return Err(Error::InvalidParams(format!(
            "need frequency > 0, periods >= {WINDOW_PERIODS} and steps_per_period >= 4"
        )));
    }
    let mut n = voltage_multiplier(
        multiplier.stages,
        multiplier.diode,
        multiplier.c_stage,
        multiplier.load(),
    )?;
    n.voltage_source(
        "vin",
        MULTIPLIER_INPUT,
        GROUND,
        Waveform::Sin {
            offset: 0.0,
            amplitude,
            frequency,
            phase_deg: 0.0,
        },
    )?;
    let period = 1.0 / frequency;
    let dt = period / steps_per_period as f64;
    let series = transient(&n, dt, periods as f64 * period, cfg)?;
    let out = series
        .column(&format!("v({MULTIPLIER_OUTPUT})"))
        .expect("multiplier output");
    let (dc, ripple) = settled_dc(out, dt, period);
    Ok(MultiplierRun {
        stages: multiplier.stages,
        series,
        dc,
        ripple,
    })
}

/// Mean and peak-to-peak of `v` over the settled window.
pub(crate) fn settled_dc(v: &[f64], dt: f64, period: f64) -> (f64, f64) {
    let (_, settled) = windows(v.len(), dt, period);
    let w = &v[settled];
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, hi - lo)
}
