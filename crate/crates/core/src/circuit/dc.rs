//! Newton–Raphson solve shared by all real-valued analyses, and the DC
//! operating point.

use nalgebra::{DMatrix, DVector};

use super::diode::limit_junction;
use super::mna::{assemble_mna, Companion, MnaSystem, StampInput};
use super::{solve_dense, DenseSolver, SolveConfig};
use crate::error::{Error, Result};
use crate::netlist::Netlist;

pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Largest KCL residual over node rows at `x`, A.
    pub kcl_residual: f64,
}

fn node_residual(sys: &MnaSystem, a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let r = a * x - b;
    r.rows(0, sys.node_count()).amax()
}

/// Solves the system described by `inp` starting from `x0`.
///
/// Linear circuits take a single solve and reuse the factorisation held in
/// `cache` when one is given.
pub(crate) fn newton(
    sys: &MnaSystem,
    inp: &StampInput,
    cfg: &SolveConfig,
    x0: &DVector<f64>,
    step: Option<usize>,
    cache: Option<&mut Option<DenseSolver<f64>>>,
) -> Result<NewtonOutcome> {
    let n = sys.system_size(inp.companion);
    let nn = sys.node_count();
    let regular = sys.size();
    let what = match step {
        Some(k) => format!("time step {k}"),
        None => "operating point".to_string(),
    };
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);

    if sys.diodes == 0 {
        sys.stamp(inp, &[], &mut a, &mut b);
        let x = match cache {
            Some(slot) => {
                if slot.is_none() {
                    *slot = Some(DenseSolver::factor(&a, &what)?);
                }
                slot.as_ref().expect("factorised").solve(&b, &what)?
            }
            None => solve_dense(&a, &b, &what)?,
        };
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                step: step.unwrap_or(0),
            });
        }
        let kcl_residual = node_residual(sys, &a, &b, &x);
        return Ok(NewtonOutcome {
            x,
            iterations: 1,
            kcl_residual,
        });
    }

    let params = sys.diode_params();
    let mut x = DVector::zeros(n);
    let copy = x0.len().min(n);
    x.rows_mut(0, copy).copy_from(&x0.rows(0, copy));
    let mut junction = sys.junction_voltages(&x);
    let mut delta_ok = false;
    let mut worst = f64::INFINITY;
    for iter in 0..cfg.max_iterations {
        let raw = sys.junction_voltages(&x);
        let mut limited = false;
        for k in 0..raw.len() {
            let v = if iter == 0 {
                raw[k]
            } else {
                limit_junction(raw[k], junction[k], &params[k])
            };
            limited |= v != raw[k];
            junction[k] = v;
        }
        sys.stamp(inp, &junction, &mut a, &mut b);
        if !limited {
            let r = &a * &x - &b;
            worst = r.rows(0, nn).amax();
            let residual_ok = r.iter().enumerate().all(|(i, v)| {
                let tol = if i < nn { cfg.abstol_i } else { cfg.abstol_v };
                v.abs() < tol
            });
            if residual_ok && delta_ok {
                return Ok(NewtonOutcome {
                    x,
                    iterations: iter,
                    kcl_residual: worst,
                });
            }
        }
        let x_new = solve_dense(&a, &b, &what)?;
        if !x_new.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                step: step.unwrap_or(0),
            });
        }
        delta_ok = x_new
            .iter()
            .zip(x.iter())
            .enumerate()
            .all(|(i, (new, old))| {
                let abstol = if i < nn { cfg.abstol_v } else { cfg.abstol_i };
                let _ = regular;
                (new - old).abs() <= cfg.reltol * new.abs() + abstol
            });
        x = x_new;
    }
    Err(Error::NonConvergence {
        step,
        iterations: cfg.max_iterations,
        residual: worst,
    })
}

/// Node voltages and branch currents of a DC solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    names: Vec<String>,
    values: Vec<f64>,
}

impl OperatingPoint {
    /// Voltage of `node`; ground reads 0.
    pub fn voltage(&self, node: &str) -> Option<f64> {
        let node = crate::netlist::canonical_node(node);
        if node == crate::netlist::GROUND {
            return Some(0.0);
        }
        self.get(&format!("v({node})"))
    }

    /// Branch current, e.g. `v1` or `t1.s`.
    pub fn current(&self, branch: &str) -> Option<f64> {
        self.get(&format!("i({})", branch.to_lowercase()))
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Capacitors open, inductors shorted, sources at their t = 0 value. A
/// matrix that is singular on its own is retried with `gmin` from every node
/// to ground.
pub(crate) fn dc_solve(sys: &MnaSystem, cfg: &SolveConfig) -> Result<DVector<f64>> {
    let mut inp = StampInput {
        t: 0.0,
        companion: Companion::Dc,
        cap_state: &[],
        ind_state: &[],
        junction_gmin: cfg.gmin,
        node_gmin: 0.0,
    };
    let x0 = DVector::zeros(sys.size());
    match newton(sys, &inp, cfg, &x0, None, None) {
        Err(Error::Singular(_)) => {
            inp.node_gmin = cfg.gmin.max(1e-12);
            newton(sys, &inp, cfg, &x0, None, None).map(|o| o.x)
        }
        other => other.map(|o| o.x),
    }
}

pub fn dc_operating_point(netlist: &Netlist, cfg: &SolveConfig) -> Result<OperatingPoint> {
    cfg.validate()?;
    let sys = assemble_mna(netlist)?;
    let x = dc_solve(&sys, cfg)?;
    Ok(OperatingPoint {
        names: sys.unknown_names(),
        values: x.iter().cloned().collect(),
    })
}
