use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-extend"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], dir: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-extend"))
        .args(args)
        .current_dir(dir)
        .env("FRAME_EXTEND_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const APPROX: [&str; 15] = [
    "approx",
    "--domain",
    "disk",
    "--nlambda",
    "9",
    "--nr",
    "36",
    "--function",
    "exp_xy",
    "--eps",
    "1e-14",
    "--seed",
    "7",
    "--out",
    "run1",
];

#[test]
fn approx_writes_coefficients_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&APPROX, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let coeffs = fs::read_to_string(dir.path().join("run1.coeffs.csv")).unwrap();
    let mut lines = coeffs.lines();
    assert_eq!(lines.next(), Some("l1,l2,re,im"));
    assert_eq!(lines.count(), 81);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run1.report.json")).unwrap())
            .unwrap();
    assert!(report["residual"].as_f64().unwrap() < 0.1);
    assert!(report["rank"].as_u64().unwrap() > 0);
    assert!(report["report"]["timings"]["total"].as_f64().is_some());

    let first = coeffs.clone();
    assert!(run(&APPROX, dir.path()).status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("run1.coeffs.csv")).unwrap(),
        first
    );
}

#[test]
fn coefficients_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = run_env(&APPROX, dir.path(), threads);
        assert!(o.status.success());
        outputs.push(fs::read_to_string(dir.path().join("run1.coeffs.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_flags_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["approx", "--domain", "disk", "--nlambda", "9", "--nr", "4"],
        &["approx", "--domain", "blob"],
        &["approx", "--function", "expr:x*"],
        &["approx", "--eps", "2"],
        &["approx", "--nlambda", "many"],
        &["experiment", "bogus"],
    ];
    for args in cases {
        assert_eq!(run(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(
        run_env(&["approx"], dir.path(), "zero").status.code(),
        Some(2)
    );
}

#[test]
fn solver_failure_exits_with_three() {
    // A tiny mask cannot carry the plunge rank of a large frequency set.
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("MASK 16 16\n");
    for r in 0..16 {
        let row: String = (0..16)
            .map(|c| {
                if r == 8 && (7..9).contains(&c) {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        text.push_str(&row);
        text.push('\n');
    }
    fs::write(dir.path().join("tiny.mask"), text).unwrap();
    let o = run(
        &["approx", "--mask", "tiny.mask", "--nlambda", "8"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn io_failure_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["approx", "--out", "missing/dir/run"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = run(
        &["approx", "--mask", "nope.mask", "--nlambda", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn expression_targets_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "approx",
            "--function",
            "expr:x*y+1",
            "--nlambda",
            "7",
            "--out",
            "e",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(dir.path().join("e.report.json").exists());
}

#[test]
fn mask_files_drive_the_grid_size() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("MASK 20 20\n");
    for r in 0..20i32 {
        let row: String = (0..20i32)
            .map(|c| {
                if (r - 10).pow(2) + (c - 10).pow(2) <= 25 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        text.push_str(&row);
        text.push('\n');
    }
    fs::write(dir.path().join("d.mask"), text).unwrap();
    let o = run(&["topology", "--mask", "d.mask"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("n_r=20"));
    assert!(stdout(&o).contains("components=1 holes=0"));
}

#[test]
fn spectrum_reports_plunge_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "spectrum",
            "--domain",
            "disk",
            "--nlambda",
            "9",
            "--nr",
            "36",
            "--eps",
            "1e-14",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("index,sigma")));
    assert!(text.lines().last().unwrap().contains("eta="));
}

#[test]
fn ring_topology() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "topology",
            "--domain",
            "ring",
            "--nr",
            "128",
            "--out",
            "layers.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("components=1 holes=1"));
    let csv = fs::read_to_string(dir.path().join("layers.csv")).unwrap();
    assert!(csv.starts_with("i,size\n1,"));
}

#[test]
fn experiment_from_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("conv.json"),
        r#"{"kind": "convergence", "domains": ["disk"], "functions": ["exp_xy"], "n_lambda": [5, 9], "n_samples": 200, "seed": 3}"#,
    )
    .unwrap();
    let args = ["experiment", "convergence", "--config", "conv.json"];
    let a = run(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert!(text.starts_with("# frame-extend v1, config_hash="));
    assert!(text.contains("seed=3"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("disk,exp_xy,"))
            .count(),
        2
    );
    assert_eq!(stdout(&run(&args, dir.path())), text);

    let o = run(
        &["experiment", "plunge", "--config", "conv.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    fs::write(
        dir.path().join("bad.json"),
        r#"{"kind": "convergence", "n_lambda": [9, 5]}"#,
    )
    .unwrap();
    let o = run(
        &["experiment", "convergence", "--config", "bad.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["approx", "--help"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for flag in [
        "--domain",
        "--mask",
        "--nlambda",
        "--nr",
        "--T",
        "--eps",
        "--seed",
        "--function",
        "--out",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
    for default in [
        "[default: disk]",
        "[default: 9]",
        "[default: 2]",
        "[default: 1e-14]",
        "[default: 0]",
        "[default: exp_xy]",
    ] {
        assert!(text.contains(default), "{default}");
    }
}
