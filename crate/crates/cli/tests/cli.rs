use std::path::PathBuf;
use std::process::{Command, Output};

use piezo_core::config::load_geometry;
use piezo_core::geometry::effective_params;
use piezo_core::lumped::build_lumped;
use piezo_core::materials::MaterialDb;

fn piezosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piezosim"))
        .args(args)
        .output()
        .expect("run piezosim")
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn materials_list_names_the_shipped_set() {
    let o = piezosim(&["materials", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert!(names.len() >= 3);
    for m in ["si", "pzt", "aln"] {
        assert!(names.iter().any(|n| n == m), "{m} missing from {names:?}");
    }
}

#[test]
fn materials_show_and_unknown() {
    let o = piezosim(&["materials", "show", "AlN"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("name = \"AlN\""));

    let o = piezosim(&["materials", "show", "unobtainium"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: unknown material"));
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_netlist_is_an_input_error() {
    let o = piezosim(&["simulate", "--netlist", "missing.cir"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(stderr(&o).contains("missing.cir"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(piezosim(&[]).status.code(), Some(1));
    assert_eq!(piezosim(&["simulate"]).status.code(), Some(1));
    assert_eq!(piezosim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        piezosim(&["simulate", "--netlist", "x.cir", "--tran", "1u"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(piezosim(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_errors_name_the_line() {
    let o = piezosim(&[
        "simulate",
        "--netlist",
        &data("netlists/malformed/unknown_card.cir"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn derive_matches_the_library() {
    let path = data("configs/soi_base.toml");
    let o = piezosim(&["derive", "--geometry", &path, "--zeta", "0.02"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let field = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("no {key} in {text}"))
            .parse()
            .unwrap()
    };

    let lp = effective_params(&load_geometry(&path).unwrap(), MaterialDb::builtin(), 0.02).unwrap();
    let (f_sc, f_oc) = build_lumped(lp).unwrap().resonance_frequencies();
    assert_eq!(field("mass"), lp.mass);
    assert_eq!(field("stiffness"), lp.stiffness);
    assert_eq!(field("damping"), lp.damping);
    assert_eq!(field("coupling"), lp.coupling);
    assert_eq!(field("capacitance"), lp.capacitance);
    assert_eq!(field("f_sc"), f_sc);
    assert_eq!(field("f_oc"), f_oc);
}

#[test]
fn simulate_writes_probe_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rc.csv");
    let o = piezosim(&[
        "simulate",
        "--netlist",
        &data("netlists/rc_step.cir"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t[s],v("), "{header}");
    assert!(csv.lines().count() > 10);
}

#[test]
fn sweep_to_stdout() {
    let o = piezosim(&[
        "sweep",
        "--netlist",
        &data("netlists/rc_lowpass.cir"),
        "--ac",
        "lin",
        "5",
        "10",
        "1k",
        "--probe",
        "out",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next(),
        Some("f[Hz],|v(out)|[V],arg(v(out))[deg]")
    );
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn study_writes_data_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("materials.csv");
    let o = piezosim(&[
        "study",
        "--spec",
        &data("configs/material_study.toml"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("f[Hz],|v(PZT)|[V]"), "{}", &csv[..80]);
    assert_eq!(csv.lines().count(), 2002);
    let summary = stdout(&o);
    assert!(summary.starts_with("material,"));
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn output_is_byte_stable() {
    let args = ["study", "--spec", &data("configs/geometry_study.toml")];
    let first = piezosim(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, piezosim(&args).stdout);

    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = piezosim(&[
            "multiplier",
            "--stages",
            "2",
            "--is",
            "1e-8",
            "--n",
            "1",
            "--cstage",
            "10n",
            "--rload",
            "100meg",
            "--drive",
            "0.15,815",
            "--periods",
            "40",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (o.stdout, std::fs::read(out).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn multiplier_summary_without_out() {
    let o = piezosim(&[
        "multiplier",
        "--stages",
        "1",
        "--is",
        "1e-9",
        "--n",
        "0.05",
        "--cstage",
        "100n",
        "--rload",
        "1g",
        "--drive",
        "1,815",
        "--periods",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("stages,dc[V],ripple[V]"));
    let dc: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((dc - 2.0).abs() < 0.1, "{dc}");
}

#[test]
fn solver_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clash.cir");
    // Two ideal sources fighting over one node.
    std::fs::write(&path, "V1 a 0 1\nV2 a 0 2\nR1 a 0 1k\n.tran 1u 10u\n.end\n").unwrap();
    let o = piezosim(&["simulate", "--netlist", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn bad_drive_is_an_input_error() {
    let o = piezosim(&[
        "multiplier",
        "--stages",
        "1",
        "--is",
        "1e-9",
        "--n",
        "1",
        "--cstage",
        "1n",
        "--drive",
        "fast",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
