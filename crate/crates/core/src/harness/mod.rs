//! Studies built on the models: cross-level comparison, material and
//! geometry studies, generator + multiplier runs, frequency sweeps and CSV
//! export.
//!
//! Waveform windows are counted in drive periods: the settled window is the
//! last [`WINDOW_PERIODS`] periods of a run and the early window the first
//! [`WINDOW_PERIODS`].

mod studies;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::ac_analysis;
use crate::error::{Error, Result};
use crate::lumped::{Load, LumpedModel};
use crate::netlist::Netlist;
use crate::series::{FreqResponse, Tabular};

pub use studies::{
    compare_levels, geometry_study, global_sim, material_study, multiplier_run, GeometryCase,
    GeometryStudy, GlobalSim, LevelComparison, MaterialPeak, MaterialStudy, MultiplierRun,
    MultiplierSpec, PairwiseRms, GENERATOR_NODE,
};

pub const WINDOW_PERIODS: usize = 10;

/// Frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Hz
    pub f_start: f64,
    /// Hz
    pub f_stop: f64,
    pub points: usize,
    /// Geometric instead of linear spacing.
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub fn linear(f_start: f64, f_stop: f64, points: usize) -> Self {
        Self {
            f_start,
            f_stop,
            points,
            log: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_start > 0.0 && self.f_stop > self.f_start && self.f_stop.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sweep needs 0 < f_start < f_stop, got {} and {}",
                self.f_start, self.f_stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidParams("sweep needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let u = i as f64 / last;
                if self.log {
                    self.f_start * (self.f_stop / self.f_start).powf(u)
                } else {
                    self.f_start + (self.f_stop - self.f_start) * u
                }
            })
            .collect()
    }

    /// Frequency at fractional grid index `x`.
    fn at(&self, x: f64) -> f64 {
        let u = x / (self.points - 1) as f64;
        if self.log {
            self.f_start * (self.f_stop / self.f_start).powf(u)
        } else {
            self.f_start + (self.f_stop - self.f_start) * u
        }
    }
}

/// Maximum of `values` on the grid, refined with a parabola through the
/// largest sample and its neighbours. Returns (frequency, value).
pub fn refine_peak(sweep: &Sweep, values: &[f64]) -> (f64, f64) {
    let (i, &y1) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty sweep");
    if i == 0 || i + 1 == values.len() {
        return (sweep.at(i as f64), y1);
    }
    let (y0, y2) = (values[i - 1], values[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (sweep.at(i as f64), y1);
    }
    let delta = 0.5 * (y0 - y2) / denom;
    (sweep.at(i as f64 + delta), y1 - 0.25 * (y0 - y2) * delta)
}

/// What a frequency sweep is run on.
#[derive(Debug, Clone, Copy)]
pub enum SweepSubject<'a> {
    /// Generator phasors for a base acceleration amplitude, m/s². Probes
    /// are `v` and `w`.
    Lumped {
        model: &'a LumpedModel,
        acceleration: f64,
        load: Load,
    },
    /// Linear circuit; probes are node names or branch names.
    Netlist(&'a Netlist),
}

/// Response of one probe across the sweep, as a single complex column.
pub fn freq_sweep(subject: SweepSubject, sweep: &Sweep, probe: &str) -> Result<FreqResponse> {
    sweep.validate()?;
    let freqs = sweep.frequencies();
    let probe = probe.to_lowercase();
    match subject {
        SweepSubject::Lumped {
            model,
            acceleration,
            load,
        } => {
            load.validate()?;
            let pick_v = match probe.as_str() {
                "v" => true,
                "w" => false,
                other => {
                    return Err(Error::InvalidParams(format!(
                        "lumped sweep probes are 'v' and 'w', got '{other}'"
                    )))
                }
            };
            let values: Vec<Complex64> = freqs
                .par_iter()
                .map(|f| {
                    let (w, v) = model.steady_state_response(
                        2.0 * std::f64::consts::PI * f,
                        acceleration,
                        load,
                    );
                    if pick_v {
                        v
                    } else {
                        w
                    }
                })
                .collect();
            let mut r = FreqResponse::new(freqs);
            r.push_column(probe, if pick_v { "V" } else { "m" }, values)?;
            Ok(r)
        }
        SweepSubject::Netlist(n) => {
            let full = ac_analysis(n, &freqs)?;
            let candidates = [format!("v({probe})"), format!("i({probe})"), probe.clone()];
            let col = full
                .columns()
                .iter()
                .find(|c| candidates.contains(&c.name))
                .ok_or_else(|| Error::InvalidParams(format!("no probe '{probe}' in circuit")))?;
            let mut r = FreqResponse::new(freqs);
            r.push_column(col.name.clone(), col.unit.clone(), col.values.clone())?;
            Ok(r)
        }
    }
}

/// Writes a header row and one row per sample to `path`.
pub fn export_csv(table: &dyn Tabular, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(table, file, path)
}

/// Same as [`export_csv`] into any writer; `label` names it in errors.
pub fn write_csv(table: &dyn Tabular, out: impl Write, label: impl AsRef<Path>) -> Result<()> {
    let label = label.as_ref();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.header())
        .map_err(|e| csv_error(label, e))?;
    for row in table.rows() {
        w.write_record(&row).map_err(|e| csv_error(label, e))?;
    }
    w.flush().map_err(|e| Error::io(label, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Root-mean-square of `a − b` over `range`, relative to the RMS of `b`.
pub fn relative_rms(a: &[f64], b: &[f64], range: std::ops::Range<usize>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for k in range {
        let d = a[k] - b[k];
        num += d * d;
        den += b[k] * b[k];
    }
    (num / den).sqrt()
}

/// Sample ranges of the early and settled windows for a run of `len`
/// samples at `dt` with drive `period`.
pub fn windows(
    len: usize,
    dt: f64,
    period: f64,
) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let n = ((WINDOW_PERIODS as f64 * period / dt).round() as usize).min(len);
    (0..n, len - n..len)
}
