use std::process::{Command, Output};

use serde_json::Value;

fn binsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binsplit"))
        .args(args)
        .env_remove("BINSPLIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = binsplit(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_one_third_at_two() {
    let out = binsplit(&["exact", "--p", "1/3", "--model", "X", "--n", "2"]);
    assert_eq!(stdout(&out), "n,k,probability\n2,1,0.6\n2,2,0.4\n");
    let j = json(&["exact", "--p", "1/3", "--n", "2"]);
    assert_eq!(j["rows"][0]["probability"], "3/5");
    assert_eq!(j["rows"][1]["probability"], "2/5");
}

#[test]
fn exact_trivial_and_parking_rows() {
    assert_eq!(
        csv_rows(&binsplit(&[
            "exact", "--p", "1/2", "--model", "X", "--n", "1"
        ])),
        [["1", "1", "1.0"]]
    );
    let y = csv_rows(&binsplit(&[
        "exact", "--model", "Y", "--m", "3", "--n", "3",
    ]));
    let x = csv_rows(&binsplit(&[
        "exact", "--p", "1/4", "--model", "X", "--n", "3",
    ]));
    assert_eq!(y, x);
    assert_eq!(y.len(), 3);
}

#[test]
fn exact_ranges_and_models() {
    let rows = csv_rows(&binsplit(&["exact", "--p", "1/3", "--n", "3..5"]));
    let ns: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns.first(), Some(&"3"));
    assert_eq!(ns.last(), Some(&"5"));
    let z = json(&["exact", "--p", "2/3", "--model", "z", "--n", "4"]);
    assert_eq!(z["p"], "2/3");
    assert_eq!(z["model"], "Z");
}

#[test]
fn exit_codes() {
    let out = binsplit(&["exact", "--p", "2/3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must satisfy p ≤ 1/2 for model X"));
    assert_eq!(
        binsplit(&["exact", "--p", "0.3", "--n", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(binsplit(&["exact", "--n", "5..2"]).status.code(), Some(2));
    assert_eq!(binsplit(&["exact", "--n", "300"]).status.code(), Some(3));
    assert_eq!(binsplit(&["bogus"]).status.code(), Some(2));
    assert_eq!(binsplit(&["--help"]).status.code(), Some(0));
}

#[test]
fn asympt_mean_reports_constant() {
    let rows = csv_rows(&binsplit(&[
        "asympt",
        "--p",
        "1/3",
        "--quantity",
        "mean",
        "--n",
        "729",
    ]));
    let c: f64 = rows[0][5].parse().unwrap();
    assert!((c - 0.554_535_330_802_526_966).abs() < 1e-10);
    let residual: f64 = rows[0][4].parse().unwrap();
    assert!(residual.abs() < 1e-3);
}

#[test]
fn asympt_variance_half_is_one() {
    let rows = csv_rows(&binsplit(&[
        "asympt",
        "--p",
        "1/2",
        "--quantity",
        "var",
        "--n",
        "4096",
    ]));
    assert_eq!(rows[0][3], "1.0");
    let j = json(&["asympt", "--p", "1/3", "--quantity", "var", "--n", "729"]);
    assert_eq!(j["evaluation_path"], "series");
    let r = j["rows"][0]["residual"].as_f64().unwrap();
    assert!(r.abs() <= 0.01);
}

#[test]
fn asympt_pmf_sums_to_one() {
    let rows = csv_rows(&binsplit(&[
        "asympt",
        "--p",
        "1/3",
        "--quantity",
        "pmf",
        "--n",
        "729",
    ]));
    let total: f64 = rows.iter().map(|r| r[4].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-6, "{total}");
    let worst = rows
        .iter()
        .map(|r| r[5].parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.01);
    let cdf = csv_rows(&binsplit(&[
        "asympt",
        "--p",
        "1/3",
        "--quantity",
        "cdf",
        "--n",
        "729",
    ]));
    let last: f64 = cdf.last().unwrap()[4].parse().unwrap();
    assert!((last - 1.0).abs() <= 1e-6);
}

#[test]
fn figures_emit_both_curves() {
    let f3 = json(&["figure", "fig3"]);
    assert_eq!(f3["rows"].as_array().unwrap().len(), 2187 - 81 + 1);
    assert_eq!(f3["summary"]["within_envelope"], true);
    assert_eq!(f3["truncation"]["harmonics"], 5);
    let f4 = json(&["figure", "fig4", "--n", "81..729"]);
    assert_eq!(f4["truncation"]["harmonics"], 4);
    assert_eq!(f4["summary"]["within_envelope"], true);
    let half = json(&["figure", "fig3", "--p", "1/2", "--n", "64..1024"]);
    assert!(half["summary"]["max_gap"].as_f64().unwrap() < 1e-4);
}

#[test]
fn simulate_parking_frequencies() {
    let rows = csv_rows(&binsplit(&[
        "simulate", "--model", "parking", "--n", "2", "--m", "2", "--trials", "100000", "--seed",
        "7",
    ]));
    let f1: f64 = rows[0][2].parse().unwrap();
    let se = (0.6f64 * 0.4 / 1e5).sqrt();
    assert!((f1 - 0.6).abs() <= 3.0 * se, "{f1}");
}

#[test]
fn simulate_urn_single_ball() {
    let rows = csv_rows(&binsplit(&[
        "simulate", "--model", "urn", "--p", "1/2", "--n", "1", "--trials", "10",
    ]));
    assert_eq!(rows, [["1", "10", "1.0", "1.0"]]);
}

#[test]
fn simulate_fit_pass_and_fail() {
    let ok = binsplit(&[
        "simulate",
        "--model",
        "patricia-arm",
        "--p",
        "1/2",
        "--n",
        "16",
        "--trials",
        "100000",
        "--assert-fit",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let strict = binsplit(&[
        "simulate",
        "--model",
        "geometric",
        "--p",
        "1/3",
        "--n",
        "16",
        "--trials",
        "20000",
        "--assert-fit",
        "--alpha",
        "0.999",
    ]);
    assert_eq!(strict.status.code(), Some(5));
}

#[test]
fn seed_from_environment_and_stable_output() {
    let args = [
        "simulate", "--model", "patricia", "--p", "1/3", "--n", "9", "--trials", "3000",
    ];
    let with_flag = binsplit(&[&args[..], &["--seed", "42"]].concat());
    let with_env = Command::new(env!("CARGO_BIN_EXE_binsplit"))
        .args(args)
        .env("BINSPLIT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
    let again = binsplit(&[&args[..], &["--seed", "42"]].concat());
    assert_eq!(with_flag.stdout, again.stdout);
    let other = binsplit(&[&args[..], &["--seed", "43"]].concat());
    assert_ne!(with_flag.stdout, other.stdout);
}

#[test]
fn json_reports_carry_metadata() {
    for args in [
        vec!["exact", "--n", "3"],
        vec!["asympt", "--p", "1/3", "--quantity", "mean", "--n", "100"],
        vec!["figure", "fig3", "--n", "81..100"],
        vec![
            "simulate", "--model", "urn", "--n", "5", "--trials", "100", "--seed", "3",
        ],
    ] {
        let j = json(&args);
        assert_eq!(j["schema"], "binsplit/1");
        for key in ["p", "seed", "tolerances", "truncation", "rows"] {
            assert!(j.get(key).is_some(), "{args:?} lacks {key}");
        }
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("binsplit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("exact.csv");
    let out = binsplit(&[
        "--output",
        path.to_str().unwrap(),
        "exact",
        "--p",
        "1/3",
        "--n",
        "1..6",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let direct = binsplit(&["exact", "--p", "1/3", "--n", "1..6"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn validate_default_passes() {
    let out = binsplit(&["validate", "--trials", "5000"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains(",fail,"));
}

#[test]
fn validate_names_injected_fault() {
    let out = binsplit(&[
        "validate",
        "--p",
        "1/3",
        "--trials",
        "2000",
        "--inject-fault",
        "q1-sign",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Q real-valuedness"));
    assert!(stdout(&out).contains("Q real-valuedness,1/3,fail,"));
}

#[test]
fn validate_rejects_large_p() {
    let out = binsplit(&["validate", "--p", "2/3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must satisfy p ≤ 1/2 for model X"));
}
