//! Fixed-step transient analysis with companion models.

use nalgebra::DVector;

use super::dc::{dc_solve, newton};
use super::mna::{assemble_mna, voltage, Companion, MnaSystem, StampInput};
use super::{DenseSolver, Method, SolveConfig};
use crate::error::{Error, Result};
use crate::netlist::{ElementKind, Netlist};
use crate::series::TimeSeries;

/// Transient waveforms plus solver statistics.
#[derive(Debug, Clone)]
pub struct TransientResult {
    /// `v(node)` for every node, then `i(name)` for every voltage source and
    /// inductor and `i(name.p)`, `i(name.s)` for every transformer.
    pub series: TimeSeries,
    /// Largest KCL residual over all accepted steps, A.
    pub max_kcl_residual: f64,
    /// Most Newton iterations taken by a single step.
    pub max_step_iterations: usize,
    /// False when the t = 0 state could not be made consistent and the first
    /// step fell back to backward Euler.
    pub consistent_start: bool,
}

pub fn transient(
    netlist: &Netlist,
    t_step: f64,
    t_stop: f64,
    cfg: &SolveConfig,
) -> Result<TimeSeries> {
    transient_detailed(netlist, t_step, t_stop, cfg).map(|r| r.series)
}

struct Storage {
    /// Per capacitor: (capacitance, p, q).
    caps: Vec<(f64, Option<usize>, Option<usize>)>,
    /// Per inductor: (branch, p, q).
    inds: Vec<(usize, Option<usize>, Option<usize>)>,
    cap_ic: Vec<Option<f64>>,
    ind_ic: Vec<Option<f64>>,
}

fn storage(sys: &MnaSystem) -> Storage {
    let mut s = Storage {
        caps: vec![(0.0, None, None); sys.capacitors],
        inds: vec![(0, None, None); sys.inductors],
        cap_ic: vec![None; sys.capacitors],
        ind_ic: vec![None; sys.inductors],
    };
    for (e, m) in sys.netlist.elements().iter().zip(&sys.maps) {
        match e.kind {
            ElementKind::Capacitor { capacitance, ic } => {
                s.caps[m.slot] = (capacitance, m.nodes[0], m.nodes[1]);
                s.cap_ic[m.slot] = ic;
            }
            ElementKind::Inductor { ic, .. } => {
                s.inds[m.slot] = (m.branch.expect("inductor branch"), m.nodes[0], m.nodes[1]);
                s.ind_ic[m.slot] = ic;
            }
            _ => {}
        }
    }
    s
}

pub fn transient_detailed(
    netlist: &Netlist,
    t_step: f64,
    t_stop: f64,
    cfg: &SolveConfig,
) -> Result<TransientResult> {
    cfg.validate()?;
    if !(t_step > 0.0 && t_stop > t_step && t_step.is_finite() && t_stop.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 < t_step < t_stop, got {t_step} and {t_stop}"
        )));
    }
    let sys = assemble_mna(netlist)?;
    let st = storage(&sys);
    let size = sys.size();

    let explicit = st.cap_ic.iter().chain(&st.ind_ic).any(Option::is_some);
    let (cap_v0, ind_i0, guess): (Vec<f64>, Vec<f64>, DVector<f64>) = if cfg.uic || explicit {
        (
            st.cap_ic.iter().map(|v| v.unwrap_or(0.0)).collect(),
            st.ind_ic.iter().map(|v| v.unwrap_or(0.0)).collect(),
            DVector::zeros(size),
        )
    } else {
        let x = dc_solve(&sys, cfg)?;
        (
            st.caps
                .iter()
                .map(|&(_, p, q)| voltage(&x, p) - voltage(&x, q))
                .collect(),
            st.inds.iter().map(|&(k, _, _)| x[k]).collect(),
            x,
        )
    };

    let init_caps: Vec<(f64, f64)> = cap_v0.iter().map(|&v| (v, 0.0)).collect();
    let init_inds: Vec<(f64, f64)> = ind_i0.iter().map(|&i| (i, 0.0)).collect();
    let init = StampInput {
        t: 0.0,
        companion: Companion::Initial,
        cap_state: &init_caps,
        ind_state: &init_inds,
        junction_gmin: cfg.gmin,
        node_gmin: 0.0,
    };
    let (mut x, mut cap_state, mut ind_state, consistent) =
        match newton(&sys, &init, cfg, &guess, Some(0), None) {
            Ok(out) => {
                let x = out.x.rows(0, size).into_owned();
                let caps = (0..st.caps.len())
                    .map(|k| (cap_v0[k], out.x[size + k]))
                    .collect();
                let inds = st
                    .inds
                    .iter()
                    .zip(&ind_i0)
                    .map(|(&(_, p, q), &i)| (i, voltage(&x, p) - voltage(&x, q)))
                    .collect();
                (x, caps, inds, true)
            }
            Err(Error::Singular(_)) => (
                guess,
                cap_v0.iter().map(|&v| (v, 0.0)).collect::<Vec<_>>(),
                ind_i0.iter().map(|&i| (i, 0.0)).collect::<Vec<_>>(),
                false,
            ),
            Err(e) => return Err(e),
        };

    let steps = (t_stop / t_step).round() as usize;
    let mut columns: Vec<Vec<f64>> = (0..size).map(|_| Vec::with_capacity(steps + 1)).collect();
    let record = |columns: &mut Vec<Vec<f64>>, x: &DVector<f64>| {
        for (c, v) in columns.iter_mut().zip(x.iter()) {
            c.push(*v);
        }
    };
    record(&mut columns, &x);

    let mut cache_trap: Option<DenseSolver<f64>> = None;
    let mut cache_be: Option<DenseSolver<f64>> = None;
    let mut max_kcl: f64 = 0.0;
    let mut max_iter = 0;
    for k in 1..=steps {
        let method = if k == 1 && !consistent {
            Method::BackwardEuler
        } else {
            cfg.method
        };
        let inp = StampInput {
            t: k as f64 * t_step,
            companion: Companion::Step { h: t_step, method },
            cap_state: &cap_state,
            ind_state: &ind_state,
            junction_gmin: cfg.gmin,
            node_gmin: 0.0,
        };
        let cache = match method {
            Method::Trapezoidal => &mut cache_trap,
            Method::BackwardEuler => &mut cache_be,
        };
        let out = newton(&sys, &inp, cfg, &x, Some(k), Some(cache))?;
        x = out.x;
        max_kcl = max_kcl.max(out.kcl_residual);
        max_iter = max_iter.max(out.iterations);

        for (slot, &(c, p, q)) in st.caps.iter().enumerate() {
            let (v_n, i_n) = cap_state[slot];
            let v = voltage(&x, p) - voltage(&x, q);
            let i = match method {
                Method::Trapezoidal => 2.0 * c / t_step * (v - v_n) - i_n,
                Method::BackwardEuler => c / t_step * (v - v_n),
            };
            cap_state[slot] = (v, i);
        }
        for (slot, &(br, p, q)) in st.inds.iter().enumerate() {
            ind_state[slot] = (x[br], voltage(&x, p) - voltage(&x, q));
        }
        record(&mut columns, &x);
    }

    let mut series = TimeSeries::new(t_step)?;
    for (name, values) in sys.unknown_names().into_iter().zip(columns) {
        let unit = if name.starts_with("v(") { "V" } else { "A" };
        series.push_column(name, unit, values)?;
    }
    Ok(TransientResult {
        series,
        max_kcl_residual: max_kcl,
        max_step_iterations: max_iter,
        consistent_start: consistent,
    })
}
