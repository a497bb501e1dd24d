//! Small-signal AC analysis of linear circuits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::mna::MnaSystem;
use super::solve_dense;
use crate::error::{Error, Result};
use crate::netlist::Netlist;
use crate::series::FreqResponse;

/// Complex node voltages and branch currents at each frequency (Hz).
///
/// Sine sources contribute their amplitude at their phase; DC sources are
/// zeroed. Columns are named as in transient analysis.
pub fn ac_analysis(netlist: &Netlist, freqs: &[f64]) -> Result<FreqResponse> {
    if let Some(e) = netlist.elements().iter().find(|e| e.kind.is_nonlinear()) {
        return Err(Error::NonlinearInAc(e.name.clone()));
    }
    if let Some(f) = freqs.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidParams(format!(
            "AC frequencies must be > 0, got {f}"
        )));
    }
    let sys = MnaSystem::layout(netlist)?;
    sys.check_connectivity(true)?;
    let n = sys.size();
    let solutions = freqs
        .par_iter()
        .map(|&f| {
            let mut a = DMatrix::zeros(n, n);
            let mut b = DVector::zeros(n);
            sys.stamp_ac(2.0 * std::f64::consts::PI * f, &mut a, &mut b);
            solve_dense(&a, &b, &format!("AC at {f} Hz"))
        })
        .collect::<Result<Vec<DVector<Complex64>>>>()?;

    let mut resp = FreqResponse::new(freqs.to_vec());
    for (i, name) in sys.unknown_names().into_iter().enumerate() {
        let unit = if name.starts_with("v(") { "V" } else { "A" };
        resp.push_column(name, unit, solutions.iter().map(|x| x[i]).collect())?;
    }
    Ok(resp)
}
