use std::path::Path;
use std::process::{Command, Output};

use vsi_achieve_cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vsi-achieve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn origin_is_achievable_under_every_checker() {
    for checker in ["certificate", "steady-state", "trajectory"] {
        let o = run(&["check", "--p", "0", "--q", "0", "--checker", checker]);
        assert_eq!(
            code(&o),
            0,
            "{checker}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["achievable"], true);
        assert_eq!(v["checker"], checker);
    }
}

#[test]
fn huge_setpoint_is_unachievable() {
    for checker in ["certificate", "steady-state", "trajectory"] {
        let o = run(&["check", "--p", "1e9", "--q", "0", "--checker", checker]);
        assert_eq!(code(&o), 1, "{checker}");
    }
}

#[test]
fn capped_multiplier_range_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"search": {"lambda_max": 0.5}}"#);
    let o = run(&[
        "check",
        "--config",
        &cfg,
        "--checker",
        "certificate",
        "--p",
        "0",
        "--q",
        "0",
    ]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["inconclusive"], true);
}

#[test]
fn malformed_config_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"plant\": ");
    let out = dir.path().join("out");
    for cmd in ["map", "optimize"] {
        let o = run(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 3);
        assert!(!o.stderr.is_empty());
    }
    let o = run(&[
        "simulate",
        "--p",
        "1",
        "--q",
        "1",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn argument_errors_are_config_errors() {
    assert_eq!(code(&run(&["check", "--p", "1"])), 3);
    assert_eq!(code(&run(&["--bogus"])), 3);
    assert_eq!(
        code(&run(&[
            "check",
            "--p",
            "0",
            "--q",
            "0",
            "--checker",
            "nope"
        ])),
        3
    );
    assert_eq!(
        code(&run(&["check", "--p", "0", "--q", "0", "--threads", "0"])),
        3
    );
    assert_eq!(
        code(&run(&["check", "--p", "0", "--q", "0", "--gain", "1,2"])),
        3
    );
    // The reported gain is not Hurwitz, which the certificate refuses.
    let o = run(&[
        "check",
        "--p",
        "0",
        "--q",
        "0",
        "--checker",
        "certificate",
        "--gain=-0.08,-0.06,0.02,-0.16",
    ]);
    assert_eq!(code(&o), 3);
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("dump-config"));
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = file.join("sub");
    let o = run(&[
        "map",
        "--checker",
        "steady-state",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn dump_config_round_trips_with_overrides() {
    let o = run(&[
        "dump-config",
        "--seed",
        "7",
        "--checker",
        "steady-state",
        "--out",
        "elsewhere",
        "--gain=0.1,0,0,0.1",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg = RunConfig::from_json(&text).unwrap();
    assert_eq!(cfg.sampling.seed, 7);
    assert_eq!(cfg.output_dir, Path::new("elsewhere"));
    // Feeding the echo back reproduces it exactly.
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &text);
    let again = run(&["dump-config", "--config", &path]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn map_writes_region_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"p_min": 0, "p_max": 4000, "q_min": -1000, "q_max": 200, "n_p": 8, "n_q": 4}}"#,
    );
    let out = dir.path().join("m");
    let o = run(&[
        "map",
        "--config",
        &cfg,
        "--checker",
        "certificate",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("region.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("p_ref_w,q_ref_var,achievable,margin,checker")
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.ends_with(",certificate")));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "map");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config"]["grid"]["n_p"], 8);
    // Nothing but the declared outputs is left behind.
    let mut names: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["manifest.json", "region.csv"]);
}

#[test]
fn optimize_writes_sweep_and_best_gain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sampling": {"n_setpoints": 30, "n_gains": 12}}"#,
    );
    let out = dir.path().join("o");
    let o = run(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = std::fs::read_to_string(out.join("sweep.jsonl")).unwrap();
    let entries: Vec<serde_json::Value> = sweep
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(entries.len(), 12);
    for (i, e) in entries.iter().enumerate() {
        assert_eq!(e["index"], i as u64);
        assert_eq!(e["n_total"], 30);
    }
    let best: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("best_gain.json")).unwrap())
            .unwrap();
    assert_eq!(best["checker"], "trajectory");
    assert!(best["rate"].as_f64().unwrap() >= best["open_loop_rate"].as_f64().unwrap());
}

#[test]
fn simulate_at_origin_holds_zero_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = run(&[
        "simulate",
        "--p",
        "0",
        "--q",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let labels: Vec<_> = summary["profiles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["label"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        labels,
        ["const-lo", "const-hi", "const-mid", "sine", "walk"]
    );
    for label in labels {
        let csv = std::fs::read_to_string(out.join(format!("trajectory_{label}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("t_s,p_w,q_var,u_p,u_q,vg_v,norm_u,lb,ub,lb_v2,ub_v2,violation")
        );
        let mut n = 0;
        for line in lines {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!((f[1], f[2]), (0.0, 0.0), "{label}: {line}");
            let d = f[5] * f[5];
            assert!((f[6] - d).abs() <= 1e-9 * d, "{label}: {line}");
            assert_eq!(f[11], 0.0);
            n += 1;
        }
        assert_eq!(n, 5001);
    }
}

#[test]
fn check_with_out_records_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run(&[
        "check",
        "--p",
        "900",
        "--q",
        "100",
        "--checker",
        "steady-state",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["achievable"], false);
    assert!(out.join("manifest.json").exists());
}
