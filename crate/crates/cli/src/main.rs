//! `piezosim`: command-line front end to the generator models, the circuit
//! engine and the studies.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input, 3 solver failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use piezo_core::circuit::{self, DiodeParams, Method, SolveConfig};
use piezo_core::config::{load_geometry, load_study, run_study};
use piezo_core::geometry::effective_params;
use piezo_core::harness::{
    freq_sweep, multiplier_run, write_csv, MultiplierSpec, Sweep, SweepSubject,
};
use piezo_core::lumped::build_lumped;
use piezo_core::materials::{coupling_coefficient, MaterialDb};
use piezo_core::netlist::{parse_netlist, parse_value, Netlist};
use piezo_core::series::{format_number, SummaryTable, Tabular};
use piezo_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "piezosim",
    version,
    about = "Piezoelectric micro-generator simulator"
)]
struct Cli {
    /// Material database to use instead of the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    materials: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List or show materials.
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
    /// Derive lumped parameters from a geometry file.
    Derive {
        #[arg(long, value_name = "FILE")]
        geometry: PathBuf,
        /// Mechanical damping ratio.
        #[arg(long, default_value_t = 0.01)]
        zeta: f64,
    },
    /// Transient analysis of a netlist.
    Simulate(SimulateArgs),
    /// AC sweep of a linear netlist.
    Sweep(SweepArgs),
    /// Run a study described in a TOML file.
    Study {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: Option<PathBuf>,
    },
    /// Voltage multiplier driven by a sine source.
    Multiplier(MultiplierArgs),
}

#[derive(Subcommand)]
enum MaterialsAction {
    List,
    Show { name: String },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    netlist: PathBuf,
    /// Step and stop time; overrides the netlist's .tran card.
    #[arg(long, num_args = 2, value_names = ["TSTEP", "TSTOP"], value_parser = eng)]
    tran: Option<Vec<f64>>,
    /// Start from element initial conditions instead of the DC solution.
    #[arg(long)]
    uic: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Trapezoidal)]
    method: MethodArg,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MethodArg {
    Trapezoidal,
    BackwardEuler,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    netlist: PathBuf,
    /// `lin N F_START F_STOP`; overrides the netlist's .ac card.
    #[arg(long, num_args = 4, value_names = ["lin", "N", "F_START", "F_STOP"])]
    ac: Option<Vec<String>>,
    /// Node or branch to report; defaults to the first .probe node.
    #[arg(long)]
    probe: Option<String>,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MultiplierArgs {
    #[arg(long)]
    stages: usize,
    /// Diode saturation current, A.
    #[arg(long = "is", value_parser = eng)]
    saturation_current: f64,
    /// Diode ideality factor.
    #[arg(long = "n", value_parser = eng)]
    ideality: f64,
    /// Capacitance of each stage capacitor, F.
    #[arg(long, value_parser = eng)]
    cstage: f64,
    /// Load resistance, Ω; open when omitted.
    #[arg(long, value_parser = eng)]
    rload: Option<f64>,
    /// Source amplitude (V) and frequency (Hz), e.g. `0.15,815`.
    #[arg(long, value_name = "AMPL,FREQ")]
    drive: String,
    #[arg(long, default_value_t = 300)]
    periods: usize,
    #[arg(long, default_value_t = 200)]
    steps_per_period: usize,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

fn eng(s: &str) -> std::result::Result<f64, String> {
    parse_value(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let owned;
    let mats = match &cli.materials {
        Some(p) => {
            owned = MaterialDb::from_path(p)?;
            &owned
        }
        None => MaterialDb::builtin(),
    };
    match cli.command {
        Command::Materials { action } => materials(mats, action),
        Command::Derive { geometry, zeta } => derive(mats, &geometry, zeta),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Study { spec, out } => {
            let s = load_study(&spec)?;
            let base = spec.parent().unwrap_or(Path::new("."));
            let r = run_study(&s, base, mats)?;
            emit(&r.data, out.as_deref(), Some(&r.summary))
        }
        Command::Multiplier(a) => multiplier(a),
    }
}

/// Data goes to `out` (plus the summary on stdout), or to stdout alone.
fn emit(data: &dyn Tabular, out: Option<&Path>, summary: Option<&SummaryTable>) -> Result<()> {
    match out {
        Some(path) => {
            piezo_core::harness::export_csv(data, path)?;
            if let Some(s) = summary {
                write_csv(s, std::io::stdout().lock(), "<stdout>")?;
            }
            Ok(())
        }
        None => write_csv(data, std::io::stdout().lock(), "<stdout>"),
    }
}

fn read_netlist(path: &Path) -> Result<Netlist> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_netlist(&text)
}

fn materials(mats: &MaterialDb, action: MaterialsAction) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let w = |out: &mut std::io::StdoutLock, s: String| {
        writeln!(out, "{s}").map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })
    };
    match action {
        MaterialsAction::List => {
            for m in mats.iter() {
                w(&mut out, m.name.to_lowercase())?;
            }
        }
        MaterialsAction::Show { name } => {
            let m = mats.get(&name)?;
            w(&mut out, format!("name = \"{}\"", m.name))?;
            for (k, v) in [
                ("density", m.density),
                ("youngs_modulus", m.youngs_modulus),
                ("c33", m.c33),
                ("e31", m.e31),
                ("e33", m.e33),
                ("eps33", m.eps33),
            ] {
                w(&mut out, format!("{k} = {}", format_number(v)))?;
            }
            w(
                &mut out,
                format!("is_piezoelectric = {}", m.is_piezoelectric),
            )?;
            w(
                &mut out,
                format!("k31_squared = {}", format_number(coupling_coefficient(m))),
            )?;
        }
    }
    Ok(())
}

fn derive(mats: &MaterialDb, geometry: &Path, zeta: f64) -> Result<()> {
    let g = load_geometry(geometry)?;
    let lp = effective_params(&g, mats, zeta)?;
    let (f_sc, f_oc) = build_lumped(lp)?.resonance_frequencies();
    let rows = [
        ("mass", lp.mass),
        ("stiffness", lp.stiffness),
        ("damping", lp.damping),
        ("coupling", lp.coupling),
        ("capacitance", lp.capacitance),
    ];
    let mut text = String::from("[params]\n");
    for (k, v) in rows {
        text += &format!("{k} = {}\n", format_number(v));
    }
    text += &format!(
        "\n[resonance]\nf_sc = {}\nf_oc = {}\n",
        format_number(f_sc),
        format_number(f_oc)
    );
    print!("{text}");
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let n = read_netlist(&a.netlist)?;
    let (step, stop) = match (&a.tran, n.tran()) {
        (Some(t), _) => (t[0], t[1]),
        (None, Some(t)) => t,
        (None, None) => {
            return Err(Error::InvalidParams(
                "no --tran given and the netlist has no .tran card".into(),
            ))
        }
    };
    let cfg = SolveConfig {
        uic: a.uic,
        method: match a.method {
            MethodArg::Trapezoidal => Method::Trapezoidal,
            MethodArg::BackwardEuler => Method::BackwardEuler,
        },
        ..SolveConfig::default()
    };
    let ts = circuit::transient(&n, step, stop, &cfg)?;
    let probes = n.probes();
    let ts = if probes.is_empty() {
        ts
    } else {
        let names: Vec<String> = probes.iter().map(|p| format!("v({p})")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        ts.select(&refs)?
    };
    emit(&ts, a.out.as_deref(), None)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let n = read_netlist(&a.netlist)?;
    let sweep = match (&a.ac, n.ac()) {
        (Some(v), _) => {
            if !v[0].eq_ignore_ascii_case("lin") {
                return Err(Error::InvalidParams(format!(
                    "unsupported sweep type '{}'",
                    v[0]
                )));
            }
            let points = v[1]
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("bad point count '{}'", v[1])))?;
            let f0 = parse_value(&v[2]).map_err(Error::InvalidParams)?;
            let f1 = parse_value(&v[3]).map_err(Error::InvalidParams)?;
            Sweep::linear(f0, f1, points)
        }
        (None, Some((points, f0, f1))) => Sweep::linear(f0, f1, points),
        (None, None) => {
            return Err(Error::InvalidParams(
                "no --ac given and the netlist has no .ac card".into(),
            ))
        }
    };
    let probe = match a.probe.or_else(|| n.probes().into_iter().next()) {
        Some(p) => p,
        None => {
            return Err(Error::InvalidParams(
                "no --probe given and no .probe card".into(),
            ))
        }
    };
    let r = freq_sweep(SweepSubject::Netlist(&n), &sweep, &probe)?;
    emit(&r, a.out.as_deref(), None)
}

fn multiplier(a: MultiplierArgs) -> Result<()> {
    let (amplitude, frequency) = a
        .drive
        .split_once(',')
        .and_then(|(x, f)| Some((parse_value(x.trim()).ok()?, parse_value(f.trim()).ok()?)))
        .ok_or_else(|| {
            Error::InvalidParams(format!("--drive expects AMPL,FREQ, got '{}'", a.drive))
        })?;
    let spec = MultiplierSpec {
        stages: a.stages,
        diode: DiodeParams::new(a.saturation_current, a.ideality),
        c_stage: a.cstage,
        load: a.rload,
    };
    let run = multiplier_run(
        &spec,
        amplitude,
        frequency,
        a.periods,
        a.steps_per_period,
        &SolveConfig::default(),
    )?;
    let summary = run.summary();
    match a.out {
        Some(path) => emit(&run.series, Some(&path), Some(&summary)),
        None => emit(&summary, None, None),
    }
}
