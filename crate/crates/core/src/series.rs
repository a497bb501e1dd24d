//! Sampled waveforms and complex frequency responses.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

/// Uniformly sampled waveforms; sample `k` is at `t = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    columns: Vec<Column>,
}

impl TimeSeries {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            dt,
            columns: Vec::new(),
        })
    }

    /// Appends a column; every column must have the same length.
    pub fn push_column(
        &mut self,
        name: impl Into<String>,
        unit: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<()> {
        let name = name.into();
        if let Some(first) = self.columns.first() {
            if first.values.len() != values.len() {
                return Err(Error::InvalidParams(format!(
                    "column '{name}' has {} samples, expected {}",
                    values.len(),
                    first.values.len()
                )));
            }
        }
        self.columns.push(Column {
            name,
            unit: unit.into(),
            values,
        });
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of samples per column.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<TimeSeries> {
        let mut out = TimeSeries::new(self.dt)?;
        for name in names {
            let col = self
                .columns
                .iter()
                .find(|c| c.name == *name)
                .ok_or_else(|| Error::InvalidParams(format!("no column '{name}'")))?;
            out.columns.push(col.clone());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexColumn {
    pub name: String,
    pub unit: String,
    pub values: Vec<Complex64>,
}

/// Complex phasors sampled on a frequency grid (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponse {
    freqs: Vec<f64>,
    columns: Vec<ComplexColumn>,
}

impl FreqResponse {
    pub fn new(freqs: Vec<f64>) -> Self {
        Self {
            freqs,
            columns: Vec::new(),
        }
    }

    pub fn push_column(
        &mut self,
        name: impl Into<String>,
        unit: impl Into<String>,
        values: Vec<Complex64>,
    ) -> Result<()> {
        let name = name.into();
        if values.len() != self.freqs.len() {
            return Err(Error::InvalidParams(format!(
                "column '{name}' has {} points, expected {}",
                values.len(),
                self.freqs.len()
            )));
        }
        self.columns.push(ComplexColumn {
            name,
            unit: unit.into(),
            values,
        });
        Ok(())
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn columns(&self) -> &[ComplexColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[Complex64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Magnitudes of one column.
    pub fn magnitude(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)
            .map(|v| v.iter().map(|z| z.norm()).collect())
    }
}

/// Anything that can be written as a CSV table.
pub trait Tabular {
    /// Column headers, including units.
    fn header(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

/// Locale-free, round-trip exact number formatting used for all CSV output.
pub fn format_number(x: f64) -> String {
    format!("{x:e}")
}

impl Tabular for TimeSeries {
    fn header(&self) -> Vec<String> {
        std::iter::once("t[s]".to_string())
            .chain(
                self.columns
                    .iter()
                    .map(|c| format!("{}[{}]", c.name, c.unit)),
            )
            .collect()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        (0..self.len())
            .map(|k| {
                std::iter::once(format_number(self.time(k)))
                    .chain(self.columns.iter().map(|c| format_number(c.values[k])))
                    .collect()
            })
            .collect()
    }
}

impl Tabular for FreqResponse {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["f[Hz]".to_string()];
        for c in &self.columns {
            h.push(format!("|{}|[{}]", c.name, c.unit));
            h.push(format!("arg({})[deg]", c.name));
        }
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        (0..self.freqs.len())
            .map(|k| {
                let mut row = vec![format_number(self.freqs[k])];
                for c in &self.columns {
                    row.push(format_number(c.values[k].norm()));
                    row.push(format_number(c.values[k].arg().to_degrees()));
                }
                row
            })
            .collect()
    }
}

/// A small named table of mixed text and numbers, used for study summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Tabular for SummaryTable {
    fn header(&self) -> Vec<String> {
        self.header.clone()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows.clone()
    }
}
