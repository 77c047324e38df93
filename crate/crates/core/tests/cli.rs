use std::path::PathBuf;
use std::process::Command;

use clap::Parser;
use decoy_qkd::cli::{execute, run, Cli, RunConfig, CSV_HEADER};
use decoy_qkd::Error;

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("decoy-qkd").chain(args.iter().copied()))
        .expect("arguments parse")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn rows(csv: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv.as_bytes())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn field<'a>(row: &'a csv::StringRecord, name: &str) -> &'a str {
    let i = CSV_HEADER.iter().position(|h| *h == name).unwrap();
    &row[i]
}

#[test]
fn evaluate_reference_configs() {
    let four = configs().join("reference_four.cfg");
    let out = execute(&cli(&[
        "evaluate",
        "--config",
        four.to_str().unwrap(),
        "--protocol",
        "four",
        "--distance",
        "100",
    ]))
    .unwrap();
    let header = out.csv.lines().next().unwrap();
    assert_eq!(header, CSV_HEADER.join(","));
    let r = rows(&out.csv);
    assert_eq!(r.len(), 1);
    let rate: f64 = field(&r[0], "rate").parse().unwrap();
    assert!((rate / 1.53e-5 - 1.0).abs() < 0.2, "rate {rate}");
    assert_eq!(field(&r[0], "protocol"), "four");
    assert_eq!(field(&r[0], "v"), "");
    assert_eq!(field(&r[0], "feasible"), "true");

    let both = configs().join("reference.cfg");
    let out = execute(&cli(&["evaluate", "--config", both.to_str().unwrap()])).unwrap();
    let r = rows(&out.csv);
    assert_eq!(
        r.iter()
            .map(|r| field(r, "protocol").to_string())
            .collect::<Vec<_>>(),
        ["three", "four"]
    );
    let three = execute(&cli(&[
        "evaluate",
        "--config",
        configs().join("reference_three.cfg").to_str().unwrap(),
        "--protocol",
        "three",
    ]))
    .unwrap();
    assert_eq!(rows(&three.csv)[0], r[0]);
}

#[test]
fn bundled_configs_parse() {
    for name in ["reference.cfg", "reference_four.cfg", "reference_three.cfg"] {
        let cfg = RunConfig::load(&configs().join(name)).unwrap();
        assert_eq!(cfg.sys.n_pulses, 1_000_000_000, "{name}");
    }
    let both = RunConfig::load(&configs().join("reference.cfg")).unwrap();
    assert_eq!(
        both.four,
        RunConfig::load(&configs().join("reference_four.cfg"))
            .unwrap()
            .four
    );
    assert_eq!(
        both.three,
        RunConfig::load(&configs().join("reference_three.cfg"))
            .unwrap()
            .three
    );
}

#[test]
fn scan_is_byte_identical_and_sorted() {
    let args = [
        "scan",
        "--distances",
        "40:60:10",
        "--omega",
        "1e-4,2e-4",
        "--restarts",
        "2",
        "--seed",
        "3",
    ];
    let a = execute(&cli(&args)).unwrap();
    let b = execute(&cli(&args)).unwrap();
    assert_eq!(a, b);
    let r = rows(&a.csv);
    assert_eq!(r.len(), 2 * 3 * 2);
    let keys: Vec<(String, f64, f64)> = r
        .iter()
        .map(|r| {
            (
                field(r, "protocol").to_string(),
                field(r, "distance_km").parse().unwrap(),
                field(r, "omega").parse().unwrap(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| {
        let p = |s: &str| if s == "three" { 0 } else { 1 };
        p(&x.0)
            .cmp(&p(&y.0))
            .then(x.1.total_cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    assert_eq!(keys, sorted);
    assert_eq!(a.manifest["restarts"], 2);
    assert_eq!(a.manifest["omegas"]["four"].as_array().unwrap().len(), 2);
}

#[test]
fn numeric_fields_round_trip() {
    let out = execute(&cli(&[
        "optimize",
        "--protocol",
        "four",
        "--distance",
        "30",
        "--restarts",
        "2",
    ]))
    .unwrap();
    let r = &rows(&out.csv)[0];
    for name in ["rate", "mu", "v1", "p_z", "e1_pz", "s_z1"] {
        let text = field(r, name);
        let x: f64 = text.parse().unwrap();
        assert_eq!(format!("{x:e}"), text);
    }
    let l: u64 = field(r, "key_length").parse().unwrap();
    let rate: f64 = field(r, "rate").parse().unwrap();
    assert_eq!(rate, l as f64 / 1e9);
}

#[test]
fn infeasible_points_become_zero_rows() {
    let out = execute(&cli(&["evaluate", "--distance", "400"])).unwrap();
    for r in rows(&out.csv) {
        assert_eq!(field(&r, "rate"), "0e0");
        assert_eq!(field(&r, "key_length"), "0");
    }
}

#[test]
fn run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let manifest_path = dir.path().join("run.json");
    let c = cli(&[
        "evaluate",
        "--out",
        csv_path.to_str().unwrap(),
        "--manifest",
        manifest_path.to_str().unwrap(),
        "--pulses",
        "1e10",
    ]);
    run(&c).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv, execute(&c).unwrap().csv);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["system"]["n_pulses"], 10_000_000_000u64);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["security"]["three"]["error_terms"], 21);
    let text = manifest.to_string();
    assert!(!text.contains("time") && !text.contains("date"));
}

#[test]
fn mc_validate_reports_every_bound() {
    let out = execute(&cli(&[
        "mc-validate",
        "--protocol",
        "four",
        "--trials",
        "200",
        "--seed",
        "5",
    ]))
    .unwrap();
    let r = rows(&out.csv);
    assert_eq!(r.len(), 5);
    for row in &r {
        assert_eq!(&row[1], "200");
        assert_eq!(&row[6], "true");
    }
    assert_eq!(out.manifest["system"]["n_pulses"], 1_000_000);
    assert!(matches!(
        execute(&cli(&["mc-validate", "--trials", "10"])),
        Err(Error::Config(_))
    ));
}

#[test]
fn bad_inputs_are_usage_errors() {
    assert!(matches!(
        execute(&cli(&["scan", "--distances", "0:10"])),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        execute(&cli(&["evaluate", "--distance=-5"])),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        execute(&cli(&["evaluate", "--config", "/nonexistent/x.cfg"])),
        Err(Error::Config(_))
    ));
    assert!(Cli::try_parse_from(["decoy-qkd", "evaluate", "--pulses", "1.5"]).is_err());
    assert!(Cli::try_parse_from(["decoy-qkd", "frobnicate"]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "mu = 0.5\nwhat = 1\n").unwrap();
    assert!(matches!(
        execute(&cli(&["evaluate", "--config", bad.to_str().unwrap()])),
        Err(Error::Parse { line: 2, .. })
    ));
    std::fs::write(&bad, "four.mu = 0.1\n").unwrap();
    assert!(matches!(
        execute(&cli(&[
            "evaluate",
            "--config",
            bad.to_str().unwrap(),
            "--protocol",
            "four"
        ])),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_decoy-qkd");
    let ok = Command::new(bin)
        .args(["evaluate", "--protocol", "three"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout)
        .unwrap()
        .starts_with("distance_km,protocol"));
    let bad = Command::new(bin)
        .args(["scan", "--distances", "x"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("error:"));
    let usage = Command::new(bin)
        .args(["evaluate", "--bogus"])
        .output()
        .unwrap();
    assert!(!usage.status.success());
}
