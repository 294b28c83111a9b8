use std::path::Path;
use std::process::{Command, Output};

use dgl::output::{parse_series, SERIES_HEADER};

fn dgl(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgl"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("DGL_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const FREE: &str = r#"
[grid]
sites = 3

[time]
t_end = 1.0
dt = 1e-2
snapshot_every = 50
"#;

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn free_run_writes_zero_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = dgl(&["evolve"], &write_config(tmp.path(), FREE), &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let text = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(text.starts_with(SERIES_HEADER));
    assert!(!text.contains('\r') && text.ends_with('\n'));
    let rows = parse_series(&text).unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]);
    assert!(rows.iter().all(|r| r[2].abs() < 1e-12 && r[3].abs() < 1e-12));
    let first = text.lines().nth(1).unwrap();
    let mantissa = first.split(',').nth(1).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);

    let s = summary(&out);
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["experiment"], "evolve");
    assert_eq!(s["pass"], true);
    assert_eq!(s["config"]["grid"]["sites"], 3);
    assert!(s["checks"].as_array().unwrap().iter().any(|c| c["name"] == "total_charge"));
}

#[test]
fn zero_chi_gauge_check_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{FREE}\n[chi]\ngenerator = \"terms\"\nterms = []\n").replace("sites = 3", "sites = 9");
    let out = tmp.path().join("out");
    let res = dgl(&["gauge-check"], &write_config(tmp.path(), &cfg), &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    assert_eq!(s["details"]["comparison"]["max_dj"], 0.0);
    assert_eq!(s["details"]["comparison"]["max_drho"], 0.0);
    assert_eq!(s["details"]["comparison"]["phase_residual"], 0.0);
    assert_eq!(
        std::fs::read(out.join("series_base.csv")).unwrap(),
        std::fs::read(out.join("series_transformed.csv")).unwrap()
    );
}

#[test]
fn tolerance_failure_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{FREE}\n[potential]\nkind = \"explicit\"\nfield = {{ generator = \"reference_pulse\" }}\n[tolerances]\ncontinuity = 1e-30\n"
    )
    .replace("sites = 3", "sites = 9")
    .replace("snapshot_every = 50", "snapshot_every = 1");
    let out = tmp.path().join("out");
    let res = dgl(&["evolve"], &write_config(tmp.path(), &cfg), &out);
    assert_eq!(res.status.code(), Some(1));
    let s = summary(&out);
    assert_eq!(s["pass"], false);
    let row = s["checks"].as_array().unwrap().iter().find(|c| c["name"] == "continuity").unwrap().clone();
    assert_eq!(row["pass"], false);
    assert!((row["tolerance"].as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12);
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        (FREE.replace("dt = 1e-2", "dt = 1e-2\nstep = 3"), "step"),
        (FREE.replace("sites = 3", "sites = 4"), "grid"),
        (FREE.replace("dt = 1e-2", "dt = 0.3"), "time"),
        (format!("{FREE}\n[tolerances]\nnot_a_check = 1.0\n"), "tolerances.not_a_check"),
        (format!("{FREE}\n[potential]\nkind = \"pure_gauge\"\n"), "chi"),
        (format!("experiment = \"identities\"\n{FREE}"), "experiment"),
        (FREE.replace("[time]", "[time]\nt0 = \"zero\""), "t0"),
    ];
    for (text, key) in cases {
        let res = dgl(&["evolve"], &write_config(tmp.path(), &text), &out);
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert_eq!(res.status.code(), Some(2), "{key}: {stderr}");
        assert!(stderr.contains(key), "{key} not named in: {stderr}");
    }
    let wide = format!("{FREE}\n[chi]\ngenerator = \"ramped_sine\"\nk = 2\n").replace("sites = 3", "sites = 5");
    let res = dgl(&["gauge-check"], &write_config(tmp.path(), &wide), &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.join("summary.json").exists());

    let res = Command::new(env!("CARGO_BIN_EXE_dgl"))
        .args(["evolve", "--config"])
        .arg(write_config(tmp.path(), FREE))
        .arg("--out")
        .arg(&out)
        .env("DGL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("DGL_THREADS"));
}

#[test]
fn runtime_abort_exits_three_with_failure_record() {
    let tmp = tempfile::tempdir().unwrap();
    // Two finite amplitudes whose sum overflows at the pulse peak.
    let cfg = format!(
        "{FREE}
[potential]
kind = \"explicit\"

[potential.field]
generator = \"terms\"

[[potential.field.terms]]
component = \"scalar\"
amplitude = 1.5e308
profile = {{ kind = \"uniform\" }}
envelope = {{ kind = \"pulse\", start = 0.0, duration = 1.0 }}

[[potential.field.terms]]
component = \"scalar\"
amplitude = 1.5e308
profile = {{ kind = \"uniform\" }}
envelope = {{ kind = \"pulse\", start = 0.0, duration = 1.0 }}
"
    );
    let out = tmp.path().join("out");
    let res = dgl(&["evolve"], &write_config(tmp.path(), &cfg), &out);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    assert_eq!(s["pass"], false);
    assert_eq!(s["failure"]["kind"], "runtime_abort");
    assert!(s["failure"]["message"].as_str().unwrap().contains("not finite"));
}

#[test]
fn output_dir_falls_back_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("from-config");
    let cfg = format!("{FREE}\n[output]\ndir = {:?}\nseries = false\n", dir.to_str().unwrap());
    let res = Command::new(env!("CARGO_BIN_EXE_dgl"))
        .args(["evolve", "--config"])
        .arg(write_config(tmp.path(), &cfg))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(dir.join("summary.json").exists());
    assert!(!dir.join("series.csv").exists());
}
