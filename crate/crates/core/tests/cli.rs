use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use rotstar::cli::{run, CliError, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rotstar"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const LANE_EMDEN_NU1: &str = "command = \"lane-emden\"\n[eos]\nkind = \"polytrope\"\nnu = 1.0\n";

#[test]
fn lane_emden_nu_one_gives_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "le.toml", LANE_EMDEN_NU1);
    let out = dir.path().join("out");
    let status = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("lane_emden.json")).unwrap()).unwrap();
    assert!((v["xi1"].as_f64().unwrap() - PI).abs() < 1e-8);
    assert!((v["mu1"].as_f64().unwrap() - PI).abs() < 1e-8);
    let csv = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 100);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["profile.csv", "lane_emden.json"]);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn negative_tol_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "command = \"solve\"\n[solver]\ntol = -1.0\n",
    );
    let o = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["error"], "ConfigError");
    assert_eq!(report["parameter"], "solver.tol");
}

#[test]
fn unknown_keys_are_rejected() {
    let p = Path::new("x.toml");
    match RunConfig::parse("command = \"solve\"\n[grid]\nnr = 3\n", p) {
        Err(CliError::Config { field, .. }) => assert_eq!(field, "grid.nr"),
        other => panic!("{other:?}"),
    }
    assert!(RunConfig::parse("command = \"solve\"\nextra = 1\n", p).is_err());
    assert!(RunConfig::parse(
        "{\"command\": \"solve\", \"solver\": {\"tolx\": 1}}",
        Path::new("x.json")
    )
    .is_err());
}

#[test]
fn field_validation_covers_every_section() {
    let p = Path::new("x.toml");
    let cases = [
        (
            "[eos]\nkind = \"polytrope\"\nnu = 1.5\ngamma = 1.6\n",
            "eos",
        ),
        ("[grid]\nl_max = 7\n", "grid.l_max"),
        ("[solver]\ndamping = 1.5\n", "solver.damping"),
        (
            "[solver]\nbeta_schedule = [0.0, 0.0]\n",
            "solver.beta_schedule",
        ),
        ("[physics]\nu_o = 0.0\n", "physics.u_o"),
        (
            "[rotation]\nkind = \"beta\"\nbeta = -1.0\n",
            "rotation.beta",
        ),
        ("[oblateness]\nzeta = [2.0]\n", "oblateness.zeta"),
    ];
    for (body, want) in cases {
        match RunConfig::parse(&format!("command = \"solve\"\n{body}"), p) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, want, "{body}"),
            other => panic!("{body}: {other:?}"),
        }
    }
    match RunConfig::parse("command = \"mass-curve\"\n", p) {
        Err(CliError::Config { field, .. }) => assert_eq!(field, "mass"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn json_and_toml_encode_the_same_schema() {
    let a = RunConfig::parse(LANE_EMDEN_NU1, Path::new("a.toml")).unwrap();
    let b = RunConfig::parse(
        "{\"command\": \"lane-emden\", \"eos\": {\"kind\": \"polytrope\", \"nu\": 1.0}}",
        Path::new("a.json"),
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn solve_is_admissible_and_deterministic() {
    let body = "command = \"solve\"\n[eos]\nkind = \"polytrope\"\nnu = 1.5\n[rotation]\nkind = \"beta\"\nbeta = 1e-3\n[grid]\nn_r = 128\n";
    let cfg = RunConfig::parse(body, Path::new("s.toml")).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let m1 = run(&cfg, body.as_bytes(), d1.path()).unwrap();
    let m2 = run(&cfg, body.as_bytes(), d2.path()).unwrap();
    let h1: Vec<&str> = m1.files.iter().map(|f| f.sha256.as_str()).collect();
    let h2: Vec<&str> = m2.files.iter().map(|f| f.sha256.as_str()).collect();
    assert_eq!(h1, h2);
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d1.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["admissible"], true);
    for flag in ["a1", "a2", "monotone"] {
        assert_eq!(s["admissibility"][flag], true, "{flag}");
    }
    assert!(s["oblateness"].as_f64().unwrap() > 0.0);
    assert!(!fs::read_dir(d1.path()).unwrap().any(|e| e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".tmp")));
}

#[test]
fn continuation_schedule_writes_one_row_per_step() {
    let body = "command = \"solve\"\n[grid]\nn_r = 96\nn_zeta = 16\n[solver]\nbeta_schedule = [0.0, 1e-4, 1e-3]\n";
    let cfg = RunConfig::parse(body, Path::new("s.toml")).unwrap();
    let d = tempfile::tempdir().unwrap();
    run(&cfg, body.as_bytes(), d.path()).unwrap();
    let csv = fs::read_to_string(d.path().join("continuation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn solver_failures_carry_the_error_kind() {
    let body = "command = \"solve\"\n[grid]\nn_r = 64\nn_zeta = 16\n[solver]\nmax_iter = 1\nnewton = false\ncertify = false\n[rotation]\nkind = \"beta\"\nbeta = 1e-2\n";
    let cfg = RunConfig::parse(body, Path::new("s.toml")).unwrap();
    let d = tempfile::tempdir().unwrap();
    let e = run(&cfg, body.as_bytes(), d.path()).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert_eq!(e.report()["kind"], "NoConvergence");
}
