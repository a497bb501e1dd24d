//! TOML configuration: geometry files and study specifications.
//!
//! A geometry file mirrors [`Geometry`]:
//!
//! ```toml
//! [beam]
//! length = 1e-3
//! width = 800e-6
//! thickness = 6e-6
//! piezo_layer = 1
//! layers = [
//!     { material = "si", thickness = 5e-6 },
//!     { material = "aln", thickness = 1e-6 },
//! ]
//!
//! [mass]
//! length = 400e-6
//! width = 400e-6
//! thickness = 525e-6
//! ```
//!
//! A study file names its `kind` and the inputs of that study; geometry may
//! be inline or a path relative to the study file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::SolveConfig;
use crate::error::{Error, Result};
use crate::geometry::{effective_params, Geometry};
use crate::harness::{
    compare_levels, freq_sweep, geometry_study, global_sim, material_study, MultiplierSpec, Sweep,
    SweepSubject,
};
use crate::lumped::{build_lumped, Drive, Load, LumpedParams};
use crate::materials::MaterialDb;
use crate::netlist::parse_netlist;
use crate::series::{FreqResponse, SummaryTable, Tabular, TimeSeries};
use crate::STANDARD_GRAVITY;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn config_error(path: Option<&Path>, e: toml::de::Error) -> Error {
    let msg = e.to_string();
    match path {
        Some(p) => Error::Config(format!("{}: {}", p.display(), msg.trim_end())),
        None => Error::Config(msg.trim_end().to_string()),
    }
}

pub fn geometry_from_str(text: &str) -> Result<Geometry> {
    let g: Geometry = toml::from_str(text).map_err(|e| config_error(None, e))?;
    g.validate()?;
    Ok(g)
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<Geometry> {
    let path = path.as_ref();
    let g: Geometry = toml::from_str(&read(path)?).map_err(|e| config_error(Some(path), e))?;
    g.validate()?;
    Ok(g)
}

/// Geometry given inline or as a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySource {
    File(PathBuf),
    Inline(Geometry),
}

impl GeometrySource {
    fn resolve(&self, base: &Path) -> Result<Geometry> {
        match self {
            GeometrySource::Inline(g) => {
                g.validate()?;
                Ok(g.clone())
            }
            GeometrySource::File(p) => load_geometry(base.join(p)),
        }
    }
}

/// Base excitation of a study; without a frequency the generator is driven
/// at its open-circuit resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDrive {
    /// m/s²
    #[serde(default = "one_g")]
    pub amplitude: f64,
    /// Hz
    #[serde(default)]
    pub frequency: Option<f64>,
    /// rad
    #[serde(default)]
    pub phase: f64,
}

impl Default for StudyDrive {
    fn default() -> Self {
        Self {
            amplitude: STANDARD_GRAVITY,
            frequency: None,
            phase: 0.0,
        }
    }
}

impl StudyDrive {
    fn resolve(&self, lp: &LumpedParams) -> Result<Drive> {
        let frequency = match self.frequency {
            Some(f) => f,
            None => build_lumped(*lp)?.resonance_frequencies().1,
        };
        let d = Drive {
            amplitude: self.amplitude,
            frequency,
            phase: self.phase,
        };
        d.validate()?;
        Ok(d)
    }
}

fn one_g() -> f64 {
    STANDARD_GRAVITY
}
fn default_zeta() -> f64 {
    0.01
}
fn default_periods() -> usize {
    300
}
fn default_steps() -> usize {
    200
}
fn default_compare_steps() -> usize {
    500
}
fn default_scale() -> f64 {
    2.0
}
fn default_materials() -> Vec<String> {
    vec!["pzt".into(), "aln".into()]
}
fn default_probe() -> String {
    "v".into()
}

fn load_of(r: Option<f64>) -> Load {
    r.map_or(Load::Open, Load::Resistor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StudySpec {
    CompareLevels {
        params: LumpedParams,
        #[serde(default)]
        drive: StudyDrive,
        /// Ω; open when absent.
        #[serde(default)]
        load: Option<f64>,
        #[serde(default = "default_periods")]
        periods: usize,
        #[serde(default = "default_compare_steps")]
        steps_per_period: usize,
        #[serde(default)]
        solver: SolveConfig,
    },
    MaterialStudy {
        geometry: GeometrySource,
        #[serde(default = "default_materials")]
        materials: Vec<String>,
        #[serde(default = "one_g")]
        acceleration: f64,
        #[serde(default = "default_zeta")]
        zeta: f64,
        #[serde(default)]
        sweep: Option<Sweep>,
    },
    GeometryStudy {
        geometry: GeometrySource,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "one_g")]
        acceleration: f64,
        #[serde(default = "default_zeta")]
        zeta: f64,
        #[serde(default = "default_periods")]
        periods: usize,
        #[serde(default = "default_steps")]
        steps_per_period: usize,
    },
    GlobalSim {
        geometry: GeometrySource,
        multiplier: MultiplierSpec,
        #[serde(default)]
        drive: StudyDrive,
        #[serde(default = "default_zeta")]
        zeta: f64,
        #[serde(default = "default_periods")]
        periods: usize,
        #[serde(default = "default_steps")]
        steps_per_period: usize,
        #[serde(default)]
        solver: SolveConfig,
    },
    /// Exactly one of `params`, `geometry` and `netlist` is the subject.
    FreqSweep {
        #[serde(default)]
        params: Option<LumpedParams>,
        #[serde(default)]
        geometry: Option<GeometrySource>,
        #[serde(default)]
        netlist: Option<PathBuf>,
        #[serde(default = "one_g")]
        acceleration: f64,
        #[serde(default = "default_zeta")]
        zeta: f64,
        #[serde(default)]
        load: Option<f64>,
        sweep: Sweep,
        #[serde(default = "default_probe")]
        probe: String,
    },
}

pub fn study_from_str(text: &str) -> Result<StudySpec> {
    toml::from_str(text).map_err(|e| config_error(None, e))
}

pub fn load_study(path: impl AsRef<Path>) -> Result<StudySpec> {
    let path = path.as_ref();
    toml::from_str(&read(path)?).map_err(|e| config_error(Some(path), e))
}

/// Main data of a study run.
#[derive(Debug, Clone)]
pub enum StudyData {
    Series(TimeSeries),
    Response(FreqResponse),
    Table(SummaryTable),
}

impl Tabular for StudyData {
    fn header(&self) -> Vec<String> {
        match self {
            StudyData::Series(s) => s.header(),
            StudyData::Response(r) => r.header(),
            StudyData::Table(t) => t.header(),
        }
    }

    fn rows(&self) -> Vec<Vec<String>> {
        match self {
            StudyData::Series(s) => s.rows(),
            StudyData::Response(r) => r.rows(),
            StudyData::Table(t) => t.rows(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub data: StudyData,
    pub summary: SummaryTable,
}

/// Runs `spec`; relative paths inside it resolve against `base_dir`.
pub fn run_study(spec: &StudySpec, base_dir: &Path, mats: &MaterialDb) -> Result<StudyOutput> {
    match spec {
        StudySpec::CompareLevels {
            params,
            drive,
            load,
            periods,
            steps_per_period,
            solver,
        } => {
            let drive = drive.resolve(params)?;
            let dt = drive.period() / *steps_per_period as f64;
            let r = compare_levels(
                params,
                &drive,
                load_of(*load),
                dt,
                *periods as f64 * drive.period(),
                solver,
            )?;
            Ok(StudyOutput {
                summary: r.summary(),
                data: StudyData::Series(r.series),
            })
        }
        StudySpec::MaterialStudy {
            geometry,
            materials,
            acceleration,
            zeta,
            sweep,
        } => {
            let g = geometry.resolve(base_dir)?;
            let names: Vec<&str> = materials.iter().map(String::as_str).collect();
            let r = material_study(&g, mats, &names, *acceleration, *zeta, *sweep)?;
            Ok(StudyOutput {
                summary: r.summary(),
                data: StudyData::Response(r.response),
            })
        }
        StudySpec::GeometryStudy {
            geometry,
            scale,
            acceleration,
            zeta,
            periods,
            steps_per_period,
        } => {
            let g = geometry.resolve(base_dir)?;
            let r = geometry_study(
                &g,
                mats,
                *scale,
                *acceleration,
                *zeta,
                *periods,
                *steps_per_period,
            )?;
            let summary = r.summary();
            Ok(StudyOutput {
                data: StudyData::Table(summary.clone()),
                summary,
            })
        }
        StudySpec::GlobalSim {
            geometry,
            multiplier,
            drive,
            zeta,
            periods,
            steps_per_period,
            solver,
        } => {
            let g = geometry.resolve(base_dir)?;
            let lp = effective_params(&g, mats, *zeta)?;
            let drive = drive.resolve(&lp)?;
            let dt = drive.period() / *steps_per_period as f64;
            let r = global_sim(
                &g,
                mats,
                multiplier,
                &drive,
                *zeta,
                dt,
                *periods as f64 * drive.period(),
                solver,
            )?;
            Ok(StudyOutput {
                summary: r.summary(),
                data: StudyData::Series(r.series),
            })
        }
        StudySpec::FreqSweep {
            params,
            geometry,
            netlist,
            acceleration,
            zeta,
            load,
            sweep,
            probe,
        } => {
            let response = match (params, geometry, netlist) {
                (Some(lp), None, None) => lumped_sweep(lp, *acceleration, *load, sweep, probe)?,
                (None, Some(g), None) => {
                    let lp = effective_params(&g.resolve(base_dir)?, mats, *zeta)?;
                    lumped_sweep(&lp, *acceleration, *load, sweep, probe)?
                }
                (None, None, Some(path)) => {
                    let path = base_dir.join(path);
                    let n = parse_netlist(&read(&path)?)?;
                    freq_sweep(SweepSubject::Netlist(&n), sweep, probe)?
                }
                _ => {
                    return Err(Error::Config(
                        "freq_sweep needs exactly one of params, geometry or netlist".into(),
                    ))
                }
            };
            let col = &response.columns()[0];
            let mags: Vec<f64> = col.values.iter().map(|c| c.norm()).collect();
            let (f_peak, peak) = crate::harness::refine_peak(sweep, &mags);
            let summary = SummaryTable {
                header: vec!["probe".into(), "f_peak[Hz]".into(), "peak".into()],
                rows: vec![vec![
                    col.name.clone(),
                    crate::series::format_number(f_peak),
                    crate::series::format_number(peak),
                ]],
            };
            Ok(StudyOutput {
                data: StudyData::Response(response),
                summary,
            })
        }
    }
}

fn lumped_sweep(
    lp: &LumpedParams,
    acceleration: f64,
    load: Option<f64>,
    sweep: &Sweep,
    probe: &str,
) -> Result<FreqResponse> {
    let model = build_lumped(*lp)?;
    freq_sweep(
        SweepSubject::Lumped {
            model: &model,
            acceleration,
            load: load_of(load),
        },
        sweep,
        probe,
    )
}
