use std::process::{Command, Output};

use cavity_zeno::cli::TrajectoryRecord;
use cavity_zeno::{OutcomeLabel, ProtocolKind};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-zeno"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// `(N, source, value, std_error)` rows of each CSV block.
fn csv_blocks(text: &str) -> Vec<Vec<(u32, String, f64, String)>> {
    text.split("\n\n")
        .map(|block| {
            let mut lines = block.lines().filter(|l| !l.starts_with('#'));
            assert_eq!(lines.next(), Some("N,source,value,std_error"));
            lines
                .map(|l| {
                    let f: Vec<&str> = l.split(',').collect();
                    assert_eq!(f.len(), 4, "{l}");
                    (
                        f[0].parse().unwrap(),
                        f[1].to_string(),
                        f[2].parse().unwrap(),
                        f[3].to_string(),
                    )
                })
                .collect()
        })
        .collect()
}

#[test]
fn fig4_preset_has_two_series() {
    let out = run(&["curve", "--preset", "fig4", "--n", "1..20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let blocks = csv_blocks(&text);
    assert_eq!(blocks.len(), 2);
    for k in ["# k = 1000", "# k = 10"] {
        assert!(text.lines().any(|l| l == k), "missing {k}");
    }
    for line in ["# omega0 = 100000", "# p_e = 1", "# g = 1000"] {
        assert_eq!(text.lines().filter(|l| *l == line).count(), 2, "{line}");
    }
    let at10 = blocks[1].iter().find(|r| r.0 == 10).unwrap();
    assert!((at10.2 - 0.7517).abs() < 1e-3);
    assert!(at10.3.is_empty());
}

#[test]
fn fig1_preset_has_three_series() {
    let out = run(&["curve", "--preset", "fig1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(csv_blocks(&text).len(), 3);
    for p in ["# p_g = 1", "# p_g = 0.9", "# p_g = 0.5"] {
        assert!(text.lines().any(|l| l == p), "missing {p}");
    }
}

#[test]
fn lossy_curve_without_loss_is_the_ideal_curve() {
    let lossy = run(&["curve", "--kind", "no-intermediate-lossy", "--k", "0", "--n-max", "40"]);
    let ideal = run(&["curve", "--kind", "no-intermediate-ideal", "--n-max", "40"]);
    let (a, b) = (csv_blocks(&stdout(&lossy)), csv_blocks(&stdout(&ideal)));
    assert_eq!(a[0].len(), 40);
    for (x, y) in a[0].iter().zip(&b[0]) {
        assert_eq!(x.0, y.0);
        assert!((x.2 - y.2).abs() <= 1e-12, "N={}: {} vs {}", x.0, x.2, y.2);
    }
}

#[test]
fn all_sources_share_a_block() {
    let out = run(&[
        "curve",
        "--kind",
        "perfect-detectors",
        "--n",
        "2,4",
        "--source",
        "all",
        "--runs",
        "2000",
    ]);
    let rows = &csv_blocks(&stdout(&out))[0];
    let sources: Vec<&str> = rows.iter().map(|r| r.1.as_str()).collect();
    assert_eq!(sources, ["closed-form", "state-machine", "monte-carlo"].repeat(2));
    assert!(rows.iter().filter(|r| r.1 == "monte-carlo").all(|r| !r.3.is_empty()));
}

#[test]
fn json_curve_parses() {
    let out = run(&["curve", "--preset", "fig2", "--n", "1,2,3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let series = doc["series"].as_array().unwrap();
    assert_eq!(series.len(), 3);
    let p2 = &series[2]["curves"][0]["points"][1];
    assert_eq!(p2["n"], 2);
    assert!((p2["value"].as_f64().unwrap() - 0.625).abs() < 1e-12);
}

#[test]
fn trajectories_are_reproducible_and_parse() {
    let args = [
        "trajectories",
        "--kind",
        "only-de-no-click",
        "--n",
        "6",
        "--p-e",
        "0.7",
        "--runs",
        "3",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let records: Vec<TrajectoryRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.run_index, i as u64);
        assert_eq!(r.seed, 11);
        assert_eq!(r.kind, ProtocolKind::OnlyDeNoClick);
        assert_eq!(r.outcomes.len(), 6);
        assert_eq!(serde_json::to_string(r).unwrap(), text.lines().nth(i).unwrap());
    }
}

#[test]
fn single_perfect_atom_always_absorbs() {
    let out = run(&[
        "trajectories",
        "--kind",
        "perfect-detectors",
        "--n",
        "1",
        "--runs",
        "20",
    ]);
    for line in stdout(&out).lines() {
        let r: TrajectoryRecord = serde_json::from_str(line).unwrap();
        assert_eq!(r.outcomes[0], OutcomeLabel::ClickE);
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"kind": "only-de-no-click", "params": {"p_e": 0.5}, "n": [2], "seed": 4}"#,
    )
    .unwrap();
    let out_path = dir.path().join("curve.csv");
    let out = run(&[
        "curve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = csv_blocks(&std::fs::read_to_string(&out_path).unwrap()).remove(0);
    assert!((rows[0].2 - 0.625).abs() < 1e-12);

    let out = run(&["curve", "--config", cfg.to_str().unwrap(), "--p-e", "1"]);
    let rows = csv_blocks(&stdout(&out)).remove(0);
    assert!((rows[0].2 - 0.25).abs() < 1e-12);
}

#[test]
fn check_passes_and_reports() {
    let out = run(&["check", "--k", "10", "--n", "1,2,5", "--runs", "4000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(
        report["closed_form_vs_state_machine"]["max_deviation"]
            .as_f64()
            .unwrap()
            <= 1e-10
    );
    assert!(report["lindblad_vs_closed_form"]["max_deviation"].as_f64().unwrap() <= 1e-7);
    assert_eq!(report["monte_carlo"]["cells"].as_array().unwrap().len(), 15);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["curve", "--p-e", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["curve", "--n", "3,2"]).status.code(), Some(1));
    assert_eq!(run(&["curve", "--unknown"]).status.code(), Some(1));
    assert_eq!(
        run(&["curve", "--preset", "fig1", "--kind", "perfect-detectors"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["check", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(run(&["trajectories", "--n", "1,2"]).status.code(), Some(1));
    assert_eq!(
        run(&["curve", "--out", "/nonexistent-dir/x.csv"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["curve", "--config", "/nonexistent-dir/c.json"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
