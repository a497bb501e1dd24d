//! Modified nodal analysis engine: DC operating point, fixed-step transient
//! and small-signal AC analysis.
//!
//! The unknown vector holds the non-ground node voltages followed by one
//! branch current per voltage source and inductor and two per transformer.

mod ac;
mod dc;
mod diode;
mod mna;
mod transient;

use nalgebra::{ComplexField, DMatrix, DVector, FullPivLU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ac::ac_analysis;
pub use dc::{dc_operating_point, OperatingPoint};
pub use diode::{diode_current, DiodeParams, EXP_CLAMP};
pub use mna::{assemble_mna, MnaSystem};
pub use transient::{transient, transient_detailed, TransientResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Trapezoidal,
    BackwardEuler,
}

/// Newton and integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub reltol: f64,
    /// Residual tolerance on KCL rows, A.
    pub abstol_i: f64,
    /// Residual tolerance on branch rows, V.
    pub abstol_v: f64,
    pub max_iterations: usize,
    pub method: Method,
    /// Conductance across every junction, and from every node to ground
    /// when the DC matrix is singular without it, S.
    pub gmin: f64,
    /// Skip the DC operating point and start from element initial
    /// conditions (zero where none is given).
    pub uic: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            reltol: 1e-6,
            abstol_i: 1e-9,
            abstol_v: 1e-6,
            max_iterations: 100,
            method: Method::Trapezoidal,
            gmin: 1e-12,
            uic: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.reltol, self.abstol_i, self.abstol_v]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.max_iterations == 0 || !(self.gmin >= 0.0) {
            return Err(Error::InvalidParams(
                "solver tolerances must be positive and max_iterations >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest pivot, relative to the largest, accepted after equilibration.
const PIVOT_RATIO: f64 = 1e-14;

/// Row/column equilibrated full-pivot LU of a dense system.
pub(crate) struct DenseSolver<T: ComplexField<RealField = f64>> {
    lu: FullPivLU<T, nalgebra::Dyn, nalgebra::Dyn>,
    row_scale: DVector<f64>,
    col_scale: DVector<f64>,
}

impl<T: ComplexField<RealField = f64>> DenseSolver<T> {
    pub(crate) fn factor(a: &DMatrix<T>, what: &str) -> Result<Self> {
        let n = a.nrows();
        let mut m = a.clone();
        let mut row_scale = DVector::from_element(n, 1.0);
        let mut col_scale = DVector::from_element(n, 1.0);
        for i in 0..n {
            let big = m
                .row(i)
                .iter()
                .map(|v| v.clone().modulus())
                .fold(0.0, f64::max);
            if !big.is_finite() {
                return Err(Error::Singular(format!("{what}: non-finite entry")));
            }
            if big == 0.0 {
                return Err(Error::Singular(format!("{what}: empty row {i}")));
            }
            row_scale[i] = 1.0 / big;
            m.row_mut(i).scale_mut(1.0 / big);
        }
        for j in 0..n {
            let big = m
                .column(j)
                .iter()
                .map(|v| v.clone().modulus())
                .fold(0.0, f64::max);
            if big == 0.0 {
                return Err(Error::Singular(format!("{what}: empty column {j}")));
            }
            col_scale[j] = 1.0 / big;
            m.column_mut(j).scale_mut(1.0 / big);
        }
        let lu = m.full_piv_lu();
        let diag = lu.u().diagonal();
        let pivots: Vec<f64> = diag.iter().map(|v| v.clone().modulus()).collect();
        let largest = pivots.iter().cloned().fold(0.0, f64::max);
        let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smallest > PIVOT_RATIO * largest) {
            return Err(Error::Singular(format!(
                "{what}: pivot ratio {:e}",
                smallest / largest
            )));
        }
        Ok(Self {
            lu,
            row_scale,
            col_scale,
        })
    }

    pub(crate) fn solve(&self, b: &DVector<T>, what: &str) -> Result<DVector<T>> {
        let mut rb = b.clone();
        for (v, s) in rb.iter_mut().zip(self.row_scale.iter()) {
            *v = v.clone().scale(*s);
        }
        let mut y = self
            .lu
            .solve(&rb)
            .ok_or_else(|| Error::Singular(what.to_string()))?;
        for (v, s) in y.iter_mut().zip(self.col_scale.iter()) {
            *v = v.clone().scale(*s);
        }
        Ok(y)
    }
}

pub(crate) fn solve_dense<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    what: &str,
) -> Result<DVector<T>> {
    DenseSolver::factor(a, what)?.solve(b, what)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolveConfig::default();
        assert_eq!(c.reltol, 1e-6);
        assert_eq!(c.abstol_i, 1e-9);
        assert_eq!(c.abstol_v, 1e-6);
        assert_eq!(c.max_iterations, 100);
        assert_eq!(c.method, Method::Trapezoidal);
        c.validate().unwrap();
        let bad = SolveConfig {
            max_iterations: 0,
            ..c
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn badly_scaled_but_regular() {
        let a = DMatrix::from_row_slice(2, 2, &[1e-12, 0.0, 1.0, 5e4]);
        let b = DVector::from_vec(vec![1e-12, 5e4 + 1.0]);
        let x = solve_dense(&a, &b, "test").unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(solve_dense(&a, &b, "t"), Err(Error::Singular(_))));
    }
}
