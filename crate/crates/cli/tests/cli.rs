use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_passmod"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn passmod")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Resistive toy link: two sensors, carriers at 20 and 50 MHz unless overridden.
fn toy_scenario(dir: &Path, z_l: &str, sda_freq: &str, requests: &str) -> PathBuf {
    let text = format!(
        r#"
clock = "100kHz"
sim_rate = "5MHz"
requests = """{requests}"""

[[carriers]]
channel = "scl"
frequency = "20MHz"
v0 = "50mV"
pullup = "1kOhm"

[[carriers]]
channel = "sda"
frequency = "{sda_freq}"
v0 = "50mV"
pullup = "1kOhm"

[ports.fixed]
z_h = "4.4kOhm"
z_l = "{z_l}"

[[nodes]]
role = "master"

[[nodes]]
role = "temp_sensor"
address = "0x18"
temperature_c = 25.0

[[nodes]]
role = "temp_sensor"
address = "0x19"
temperature_c = 26.0
"#
    );
    let p = dir.join("toy.toml");
    std::fs::write(&p, text).unwrap();
    p
}

const POLL: &str = "WR 0x18 2 0x05\nWR 0x19 2 0x05\n";

fn component(doc: &Value, name: &str) -> (f64, f64) {
    let c = doc["design"]["components"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no {name}"));
    (c["exact"].as_f64().unwrap(), c["snapped"].as_f64().unwrap())
}

fn three_sig(a: f64, b: f64) -> bool {
    let digits = |x: f64| {
        let e = x.abs().log10().floor() - 2.0;
        (x / 10f64.powf(e)).round()
    };
    digits(a) == digits(b)
}

#[test]
fn design_reproduces_component_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "design",
        data("filter_a.toml").to_str().unwrap(),
        data("filter_b.toml").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = json_file(&dir.path().join("filter_a.design.json"));
    let b = json_file(&dir.path().join("filter_b.design.json"));
    assert_eq!(a["schema_version"], 1);
    for (doc, name, want) in [
        (&a, "L1", 1.33e-6),
        (&a, "C1", 7.64e-12),
        (&a, "C2", 53.6e-12),
        (&b, "L1", 1.10e-6),
        (&b, "C1", 57.3e-12),
        (&b, "L2", 0.267e-6),
    ] {
        let (exact, _) = component(doc, name);
        assert!(three_sig(exact, want), "{name}: {exact:e} vs {want:e}");
    }
    assert_eq!(a["exact"]["passed"], true);
    assert_eq!(b["snapped"]["passed"], true);
}

#[test]
fn design_csv_has_schema_line() {
    let o = run(&["design", data("filter_b.toml").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.starts_with("# schema_version: 1\ncomponent,unit,exact,snapped\n"),
        "{text}"
    );
    assert!(text.contains("L2,H,2.66"));
}

#[test]
fn zero_mutual_arm_is_rejected_as_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.toml");
    std::fs::write(
        &p,
        "f_mod = \"20MHz\"\nf_stop = \"50MHz\"\nc_io = \"8pF\"\nlm = \"0H\"\n",
    )
    .unwrap();
    let o = run(&["design", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("configuration (e)"));
    assert!(stderr(&o).contains("is inappropriate and is therefore excluded"));
}

#[test]
fn unitless_quantity_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.toml");
    std::fs::write(&p, "f_mod = \"20\"\nf_stop = \"50MHz\"\nc_io = \"8pF\"\n").unwrap();
    assert_eq!(code(&run(&["design", p.to_str().unwrap()])), 2);
}

#[test]
fn missing_file_is_invalid_input() {
    assert_eq!(code(&run(&["design", "/nonexistent/spec.toml"])), 2);
    assert_eq!(code(&run(&["simulate", "/nonexistent/scenario.toml"])), 2);
}

#[test]
fn sweep_summary_reports_ratio_above_100() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        data("filter_a.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("at f_mod")).unwrap();
    let ratio: f64 = line
        .split("= ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 100.0, "{line}");
    let doc = json_file(&dir.path().join("filter_a.sweep.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["sweep"]["frequencies"].as_array().unwrap().len(), 801);
}

#[test]
fn two_point_sweep_has_two_rows() {
    let o = run(&[
        "sweep",
        data("filter_a.toml").to_str().unwrap(),
        "--points",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2, "{text}");
}

fn first_row(args: &[&str]) -> Vec<f64> {
    let o = run(args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap().to_string();
    row.split(',').take(5).map(|c| c.parse().unwrap()).collect()
}

#[test]
fn lossless_and_lossy_agree_off_resonance() {
    for spec in ["filter_a.toml"] {
        let p = data(spec);
        let base = [
            "sweep",
            p.to_str().unwrap(),
            "--f-lo",
            "1MHz",
            "--f-hi",
            "2MHz",
            "--points",
            "2",
            "--format",
            "csv",
        ];
        let lossy = first_row(&base);
        let ideal = first_row(&[&base[..], &["--lossless"]].concat());
        for col in [1, 3] {
            assert!(
                (lossy[col] / ideal[col] - 1.0).abs() < 0.05,
                "{spec} col {col}: {lossy:?} {ideal:?}"
            );
        }
    }
}

#[test]
fn lossless_conflicts_with_q() {
    let o = run(&[
        "sweep",
        data("filter_a.toml").to_str().unwrap(),
        "--lossless",
        "--q",
        "30",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn budget_rows_are_non_increasing() {
    let o = run(&[
        "budget",
        data("filter_a.toml").to_str().unwrap(),
        "--nodes",
        "20",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 20);
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn shipped_scenario_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        data("demo_scenario.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json_file(&dir.path().join("demo_scenario.metrics.json"));
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["success_rate"], 1.0);
    assert_eq!(m["transactions_attempted"], 11);
}

#[test]
fn demo_matches_shipped_scenario_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}"));
        let o = run(&["demo", "--seed", "7", "--noise", "20uV", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        bytes.push(std::fs::read(out.join("demo.metrics.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn design_and_sweep_rerun_identically() {
    for args in [
        vec!["design", "--format", "json"],
        vec!["sweep", "--points", "64", "--format", "csv"],
        vec!["budget", "--format", "json"],
    ] {
        let mut a = args.clone();
        let p = data("filter_b.toml");
        a.push(p.to_str().unwrap());
        assert_eq!(run(&a).stdout, run(&a).stdout, "{args:?}");
    }
}

#[test]
fn noise_sweep_ber_is_non_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    let sc = toy_scenario(dir.path(), "300Ohm", "50MHz", POLL);
    let o = run(&[
        "simulate",
        sc.to_str().unwrap(),
        "--noise-sweep",
        "0V,1mV,2mV,4mV,8mV",
        "--seeds",
        "10",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let ber: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ber.len(), 5);
    assert!(ber.windows(2).all(|w| w[1] >= w[0]), "{ber:?}");
    assert!(ber[4] > 0.0);
}

#[test]
fn failed_transactions_exit_with_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    // No modulation depth: nothing decodes.
    let sc = toy_scenario(dir.path(), "4.4kOhm", "50MHz", POLL);
    let o = run(&["simulate", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("transactions failed"));
}

#[test]
fn strict_mode_turns_warnings_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    // 40 MHz is an exact harmonic of the 20 MHz carrier.
    let sc = toy_scenario(dir.path(), "300Ohm", "40MHz", POLL);
    let lenient = run(&["simulate", sc.to_str().unwrap()]);
    assert_eq!(code(&lenient), 0, "{}", stderr(&lenient));
    assert!(String::from_utf8(lenient.stdout)
        .unwrap()
        .contains("\"warnings\": [\n    \""));
    let strict = run(&["simulate", sc.to_str().unwrap(), "--strict"]);
    assert_eq!(code(&strict), 1);
}

#[test]
fn malformed_script_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let sc = toy_scenario(dir.path(), "300Ohm", "50MHz", "WR 0x18 2 0x05\nXX 0x18\n");
    let o = run(&["simulate", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn traces_need_an_output_directory() {
    assert_eq!(code(&run(&["demo", "--traces"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "demo",
        "--traces",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let traces = std::fs::read_to_string(dir.path().join("demo.traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 2 + 54_900);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(
        code(&run(&[
            "sweep",
            data("filter_a.toml").to_str().unwrap(),
            "--points",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&run(&["sweep", data("filter_a.toml").to_str().unwrap(), "--f-lo", "5"])),
        2
    );
}
