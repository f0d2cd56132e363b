use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cmip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The JSON block of a report.
fn json(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    let (_, block) = text
        .split_once("--- json\n")
        .expect("report has a JSON block");
    serde_json::from_str(block).unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares with the stored file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[test]
fn golden_reports() {
    let cases: [(&str, &[&str]); 4] = [
        (
            "run_chsh_classical_exact.txt",
            &[
                "run",
                "--game",
                "chsh",
                "--strategy",
                "classical_best",
                "--exact",
            ],
        ),
        (
            "run_toy_shots.txt",
            &[
                "run",
                "--game",
                "two_round_toy",
                "--strategy",
                "plain",
                "--shots",
                "2000",
                "--seed",
                "9",
            ],
        ),
        (
            "verify_chsh_self.txt",
            &[
                "verify",
                "--game",
                "chsh",
                "--strategy",
                "clifford_only",
                "--against",
                "clifford_only",
                "--exact",
            ],
        ),
        (
            "declifford_toy_trace.txt",
            &[
                "declifford",
                "--game",
                "two_round_toy",
                "--strategy",
                "delegating",
                "--trace",
                "--seed",
                "4",
            ],
        ),
    ];
    for (name, args) in cases {
        let o = cmip(args);
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        check_golden(name, &stdout(&o));
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "run",
        "--game",
        "ghz3",
        "--strategy",
        "quantum_perfect",
        "--shots",
        "3000",
        "--seed",
        "77",
    ];
    let (a, b) = (cmip(&args), cmip(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = cmip(&[
        "run",
        "--game",
        "ghz3",
        "--strategy",
        "classical_best",
        "--shots",
        "3000",
        "--seed",
        "78",
    ]);
    assert_ne!(a.stdout, other.stdout);

    let trace = [
        "declifford",
        "--game",
        "chsh",
        "--strategy",
        "clifford_only",
        "--trace",
        "--seed",
        "3",
    ];
    assert_eq!(cmip(&trace).stdout, cmip(&trace).stdout);
}

#[test]
fn exact_values_of_bundled_strategies() {
    let v = json(&cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "classical_best",
        "--exact",
    ]));
    assert_eq!(v["value"], 0.75);
    let v = json(&cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--exact",
    ]));
    let target = (std::f64::consts::PI / 8.0).cos().powi(2);
    assert!((v["value"].as_f64().unwrap() - target).abs() < 1e-6);
    assert!(
        v.get("std_error").is_none(),
        "exact mode has no sampling error"
    );
}

#[test]
fn shots_agree_with_exact_within_three_sigma() {
    let exact = json(&cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--exact",
    ]));
    let o = cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--shots",
        "100000",
        "--seed",
        "12",
    ]);
    assert!(o.status.success());
    let shots = json(&o);
    let (v, rate, se) = (
        exact["value"].as_f64().unwrap(),
        shots["win_rate"].as_f64().unwrap(),
        shots["std_error"].as_f64().unwrap(),
    );
    assert!((v - rate).abs() <= 3.0 * se, "{rate} vs {v} (se {se})");
    assert!(shots["chi_square"]["p_value"].as_f64().unwrap() > 1e-3);
}

#[test]
fn verify_distinguishes_strategies() {
    let same = cmip(&[
        "verify",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--against",
        "quantum_optimal",
        "--exact",
    ]);
    assert!(same.status.success());
    assert_eq!(json(&same)["tv"], 0.0);

    let constant = cmip(&[
        "verify",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--against",
        "classical_best",
        "--exact",
    ]);
    assert_eq!(constant.status.code(), Some(1));
    let v = json(&constant);
    assert!(v["tv"].as_f64().unwrap() > 0.1);
    assert_eq!(v["verdict"], "FAIL");

    let sampled = cmip(&[
        "verify",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--against",
        "classical_best",
        "--shots",
        "20000",
    ]);
    assert_eq!(sampled.status.code(), Some(1));
}

#[test]
fn declifford_output_is_equivalent() {
    let dir = tempfile::tempdir().unwrap();
    for (game, strategy, extra) in [
        ("chsh", "clifford_only", vec![]),
        (
            "two_round_toy",
            "delegating",
            vec!["--lambda", "table", "--hardcoded-q", "1,0;0,1"],
        ),
        ("chsh", "one_nonclifford", vec!["--mostly"]),
    ] {
        let out = dir.path().join(format!("{game}_{strategy}.json"));
        let mut args = vec![
            "declifford",
            "--game",
            game,
            "--strategy",
            strategy,
            "--check",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        let o = cmip(&args);
        assert!(
            o.status.success(),
            "{game}/{strategy}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(json(&o)["tv"].as_f64().unwrap() <= 1e-9);

        let v = cmip(&[
            "verify",
            "--game",
            game,
            "--strategy",
            strategy,
            "--against",
            out.to_str().unwrap(),
            "--exact",
        ]);
        assert!(v.status.success());
        assert!(json(&v)["tv"].as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn declifford_refuses_non_clifford_provers() {
    let o = cmip(&[
        "declifford",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prover"));
}

#[test]
fn exact_mode_refuses_above_the_cap() {
    let o = cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "quantum_optimal",
        "--exact",
        "--cap",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--shots"));
}

#[test]
fn reports_are_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = cmip(&[
        "run",
        "--game",
        "ghz3",
        "--strategy",
        "quantum_perfect",
        "--exact",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file, json(&o));
    assert_eq!(file["value"], 1.0);
}

#[test]
fn timing_is_opt_in() {
    let plain = json(&cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "classical_best",
        "--exact",
    ]));
    assert!(plain.get("wall_time_s").is_none());
    let timed = json(&cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        "classical_best",
        "--exact",
        "--timing",
    ]));
    assert!(timed["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn malformed_files_report_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"kind\": \"quantum\",\n \"shared_state\": 5\n}\n").unwrap();
    let o = cmip(&[
        "run",
        "--game",
        "chsh",
        "--strategy",
        path.to_str().unwrap(),
        "--exact",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn bench_reports_agreement() {
    let o = cmip(&["bench", "--qubits", "32", "--gates", "4000", "--reps", "1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["tableau_matches_replay"], true);
}
