use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypocal::config::{Mode, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_hypocal");

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn run(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("HYPOCAL_SEED");
    if let Some(s) = seed_env {
        cmd.env("HYPOCAL_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PARAMS: &str = r#"
[params]
phi_c_deg = 33.0
h_s_kPa = 1.0e6
n = 0.25
e_d0 = 0.55
e_c0 = 0.95
e_i0 = 1.05
alpha = 0.25
beta = 1.5
"#;

const SMALL_GA: &str = r#"
[ga]
n_individuals = 12
n_iterations = 2
seed = 1

[bounds]
min = { phi_c_deg = 25.0, h_s_kPa = 1.0e6, n = 0.25, e_c0 = 0.6, alpha = 0.05, beta = 1.0 }
max = { phi_c_deg = 40.0, h_s_kPa = 9.0e6, n = 0.40, e_c0 = 1.1, alpha = 0.20, beta = 2.0 }
"#;

fn tests_with_data(dir: &str) -> String {
    let d = data_dir().join(dir);
    let mut out = String::new();
    for (name, kind, t1, t2, e, end) in [
        ("TxD1", "triaxial", -50.0, -50.0, 0.524, "eps_fin = 0.20"),
        ("EDO1", "oedometer", -8.0, -4.0, 0.784, "e_fin = 0.72"),
    ] {
        out.push_str(&format!(
            "[[test]]\nname = \"{name}\"\nkind = \"{kind}\"\nT1_kPa = {t1:?}\nT2_kPa = {t2:?}\ne = {e}\n{end}\ndata = {:?}\n\n",
            d.join(format!("{name}.csv")).display().to_string()
        ));
    }
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = run(&["calibrate"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = run(&["frobnicate", "--config", "x"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_triaxial_writes_101_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = data_dir().join("validation/validate.toml");
    let out = tmp.path().join("out");
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("TxD.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,T1_kPa,T2_kPa,e,eps_a,q_kPa,eps_v");
    assert_eq!(lines.len(), 102);
    assert!(lines[101].starts_with("0.11,"));
    assert!(out.join("summary.json").exists() && out.join("report.txt").exists());
}

#[test]
fn empty_data_file_is_a_parse_error_at_line_one() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(tmp.path(), "empty.csv", "");
    let cfg = format!(
        "{SMALL_GA}\n{}[[test]]\nname = \"E\"\nkind = \"oedometer\"\nT1_kPa = -8.0\nT2_kPa = -4.0\ne = 0.784\ne_fin = 0.72\ndata = {:?}\n",
        tests_with_data("synthetic"),
        empty.display().to_string()
    );
    let cfg = write(tmp.path(), "c.toml", &cfg);
    let o = run(
        &[
            "calibrate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(
        err.starts_with("error kind=parse") && err.contains("line=1"),
        "{err}"
    );
}

#[test]
fn loosening_oedometer_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.csv", "T1_kPa,e\n-8,0.784\n-20,0.79\n");
    let cfg = format!(
        "{SMALL_GA}\n{}[[test]]\nname = \"B\"\nkind = \"oedometer\"\nT1_kPa = -8.0\nT2_kPa = -4.0\ne = 0.784\ne_fin = 0.72\ndata = {:?}\n",
        tests_with_data("synthetic"),
        bad.display().to_string()
    );
    let cfg = write(tmp.path(), "c.toml", &cfg);
    let o = run(
        &[
            "calibrate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(
        stderr(&o).starts_with("error kind=validation"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn rejected_candidates_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    // looser than any admissible maximum void ratio
    let cfg = format!(
        "{PARAMS}\n[[test]]\nname = \"L\"\nkind = \"triaxial\"\nT1_kPa = -100.0\nT2_kPa = -100.0\ne = 2.0\neps_fin = 0.1\n"
    );
    let cfg = write(tmp.path(), "c.toml", &cfg);
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error kind=rejected"));

    let data = data_dir().join("synthetic");
    let cfg = format!(
        "{SMALL_GA}\n[[test]]\nname = \"TxD1\"\nkind = \"triaxial\"\nT1_kPa = -50.0\nT2_kPa = -50.0\ne = 2.0\neps_fin = 0.2\ndata = {:?}\n\n[[test]]\nname = \"EDO1\"\nkind = \"oedometer\"\nT1_kPa = -8.0\nT2_kPa = -4.0\ne = 2.0\ne_fin = 0.72\ndata = {:?}\n",
        data.join("TxD1.csv").display().to_string(),
        data.join("EDO1.csv").display().to_string()
    );
    let cfg = write(tmp.path(), "g.toml", &cfg);
    let o = run(
        &[
            "calibrate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

fn seed_of(summary: &Path) -> u64 {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(summary).unwrap()).unwrap();
    v["seed"].as_u64().unwrap()
}

#[test]
fn seed_flag_beats_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &format!("{SMALL_GA}\n{}", tests_with_data("synthetic")),
    );
    let c = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let d = tmp.path().join("d");
    assert!(run(
        &["calibrate", "--config", c, "--out", a.to_str().unwrap()],
        Some("77")
    )
    .status
    .success());
    assert!(run(
        &[
            "calibrate",
            "--config",
            c,
            "--out",
            b.to_str().unwrap(),
            "--seed",
            "5"
        ],
        Some("77")
    )
    .status
    .success());
    assert!(run(
        &["calibrate", "--config", c, "--out", d.to_str().unwrap()],
        None
    )
    .status
    .success());
    assert_eq!(seed_of(&a.join("summary.json")), 77);
    assert_eq!(seed_of(&b.join("summary.json")), 5);
    assert_eq!(seed_of(&d.join("summary.json")), 1);
    let o = run(
        &["calibrate", "--config", c, "--out", d.to_str().unwrap()],
        Some("abc"),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &format!("{SMALL_GA}\n{}", tests_with_data("synthetic")),
    );
    let c = cfg.to_str().unwrap();
    for mode in ["calibrate", "ensemble"] {
        let mut snapshots = Vec::new();
        for (k, threads) in ["1", "2"].iter().enumerate() {
            let out = tmp.path().join(format!("{mode}{k}"));
            let o = run(
                &[
                    mode,
                    "--config",
                    c,
                    "--out",
                    out.to_str().unwrap(),
                    "--seed",
                    "9",
                    "--trials",
                    "3",
                    "--threads",
                    threads,
                ],
                None,
            );
            assert!(o.status.success(), "{}", stderr(&o));
            snapshots.push(read_dir_bytes(&out));
        }
        assert!(snapshots[0].len() >= 3);
        assert_eq!(snapshots[0], snapshots[1], "{mode}");
    }
}

#[test]
fn curve_file_round_trips_to_zero_cost() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let cfg = data_dir().join("validation/validate.toml");
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            sim.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace(
            "e_fin = 0.68\n",
            &format!(
                "e_fin = 0.68\ndata = {:?}\n",
                sim.join("EDO.csv").display().to_string()
            ),
        )
        .replace(
            "eps_fin = 0.11\n",
            &format!(
                "eps_fin = 0.11\ndata = {:?}\n",
                sim.join("TxD.csv").display().to_string()
            ),
        );
    let cfg2 = write(tmp.path(), "round.toml", &text);
    let again = tmp.path().join("again");
    let o = run(
        &[
            "simulate",
            "--config",
            cfg2.to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(again.join("summary.json")).unwrap()).unwrap();
    let cost = v["cost"].as_f64().unwrap();
    assert!(cost <= 1e-10, "{cost}");
}

#[test]
fn lab_convention_data_load() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(data_dir().join("synthetic/EDO1.csv")).unwrap();
    let flipped: String = src
        .lines()
        .enumerate()
        .map(|(k, l)| {
            if k == 0 {
                format!("{l}\n")
            } else {
                format!("{}\n", l.trim_start_matches('-'))
            }
        })
        .collect();
    let edo = write(tmp.path(), "EDO1.csv", &flipped);
    let tx = data_dir().join("synthetic/TxD1.csv");
    let cfg = format!(
        "stress_convention = \"compression_positive\"\n{PARAMS}\n[[test]]\nname = \"TxD1\"\nkind = \"triaxial\"\nT1_kPa = 50.0\nT2_kPa = 50.0\ne = 0.524\neps_fin = 0.2\ndata = {:?}\n\n[[test]]\nname = \"EDO1\"\nkind = \"oedometer\"\nT1_kPa = 8.0\nT2_kPa = 4.0\ne = 0.784\ne_fin = 0.72\ndata = {:?}\n",
        tx.display().to_string(),
        edo.display().to_string()
    );
    let cfg = write(tmp.path(), "c.toml", &cfg);
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn hochstetten_programme_loads() {
    let cfg = RunConfig::from_file(
        &data_dir().join("hochstetten/calibrate.toml"),
        Mode::Calibrate,
    )
    .unwrap();
    let init: Vec<(f64, f64, f64)> = cfg
        .tests
        .iter()
        .map(|t| (t.spec.initial.t1, t.spec.initial.t2, t.spec.initial.e))
        .collect();
    assert_eq!(
        init,
        vec![
            (-100.0, -100.0, 0.690),
            (-200.0, -200.0, 0.670),
            (-300.0, -300.0, 0.660),
            (-25.0, -12.5, 0.730),
            (-25.0, -12.5, 0.695)
        ]
    );
    assert_eq!(cfg.references.len(), 2);
    let data = hypocal::data::load_dataset(&cfg.tests, cfg.convention).unwrap();
    assert_eq!(data.tests().len(), 5);
}

#[test]
fn committed_benchmark_files_match_generators() {
    use hypocal_core::benchmark::{hochstetten_surrogate, synthetic_dataset};
    for (dir, expected) in [
        ("synthetic", synthetic_dataset()),
        ("hochstetten", hochstetten_surrogate()),
    ] {
        let mode = Mode::Calibrate;
        let cfg = RunConfig::from_file(&data_dir().join(dir).join("calibrate.toml"), mode).unwrap();
        let loaded = hypocal::data::load_dataset(&cfg.tests, cfg.convention).unwrap();
        assert_eq!(loaded, expected, "{dir}");
    }
}
