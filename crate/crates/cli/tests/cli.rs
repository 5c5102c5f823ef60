use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baker-fr"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            files.insert(
                entry.file_name().to_string_lossy().into_owned(),
                std::fs::read(entry.path()).unwrap(),
            );
        }
    }
    files
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir.join(name))).unwrap()
}

#[test]
fn density_files_hold_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let o = run(&["density", "--family", "map2", "--l", "1/8"], &out);
    assert!(o.status.success());
    assert_eq!(
        read(out.join("density.csv")),
        "breakpoint,value\n0/1,4/3\n1/2,2/3\n1/1,2/3\n"
    );
    let doc = json(&out, "density.json");
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["result"]["values"], serde_json::json!(["4/3", "2/3"]));

    let o = run(&["density", "--family", "map2", "--l", "1/4"], &out);
    assert!(o.status.success());
    assert_eq!(
        json(&out, "density.json")["result"]["values"],
        serde_json::json!(["1/1"])
    );

    let o = run(&["density", "--family", "map1", "--l", "3/7"], &out);
    assert!(o.status.success());
    assert_eq!(read(out.join("density.csv")), "breakpoint,value\n0/1,1/1\n1/1,1/1\n");
}

#[test]
fn fr_exact_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fr");
    assert!(run(&["fr", "--family", "map2", "--l", "1/8", "--n", "15"], &out)
        .status
        .success());
    let doc = json(&out, "fr.json");
    assert_eq!(doc["pass"], true);
    let bound = doc["result"]["report"]["bound"].as_f64().unwrap();
    assert!((bound - 2f64.ln()).abs() < 1e-15);

    assert!(run(&["fr", "--family", "map1", "--l", "2/3", "--n", "12"], &out)
        .status
        .success());
    let doc = json(&out, "fr.json");
    assert_eq!(doc["result"]["report"]["bound"], 0.0);
    assert!(doc["result"]["report"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["alpha"] == "1/1"));
}

#[test]
fn equilibrium_fr_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["fr", "--l", "1/4"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("⟨Λ⟩ = 0"));
}

#[test]
fn failed_check_exits_one() {
    // Too few samples for any ±g pair to be tested, so the report cannot pass.
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["fr", "--mode", "montecarlo", "--ensemble", "20", "--n", "12"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(tmp.path(), "fr.json")["pass"], false);
}

#[test]
fn upo_matches_exact_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("upo"), tmp.path().join("fr"));
    assert!(run(&["upo", "--family", "map1", "--l", "2/3", "--n", "10"], &a)
        .status
        .success());
    assert!(run(&["fr", "--family", "map1", "--l", "2/3", "--n", "10"], &b)
        .status
        .success());
    assert_eq!(read(a.join("upo.csv")), read(b.join("distribution.csv")));
    assert_eq!(read(a.join("orbits.csv")).lines().count(), 1 + 1024);

    let c = tmp.path().join("diag");
    assert!(run(&["upo", "--family", "map2", "--n", "6"], &c).status.success());
}

#[test]
fn multibaker_and_reversibility() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("mb");
    assert!(run(&["multibaker", "--n", "200", "--ensemble", "20000"], &out)
        .status
        .success());
    let psi = json(&out, "multibaker.json")["result"]["estimate"]["psi_hat"]
        .as_f64()
        .unwrap();
    assert!((psi - 1.0 / 3.0).abs() < 0.01);

    for (family, l) in [("map2", "1/8"), ("map1", "2/3")] {
        let out = tmp.path().join(family);
        assert!(run(&["reversibility", "--family", family, "--l", l], &out)
            .status
            .success());
    }
    assert_eq!(
        run(&["reversibility", "--family", "composite"], tmp.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn trajectory_antisymmetry() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(&["trajectory", "--n", "30"], tmp.path()).status.success());
    let doc = json(tmp.path(), "trajectory.json");
    assert_eq!(doc["result"]["reversed"]["g"], -doc["result"]["g"].as_i64().unwrap());
    assert_eq!(read(tmp.path().join("trajectory.csv")).lines().count(), 32);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["density"],
        &["fr", "--mode", "montecarlo", "--ensemble", "30000"],
        &[
            "fr",
            "--family",
            "composite",
            "--mode",
            "montecarlo",
            "--ensemble",
            "30000",
        ],
        &["upo", "--family", "map1", "--l", "2/3", "--n", "8"],
        &["multibaker", "--n", "100", "--ensemble", "5000"],
        &["trajectory", "--mode", "montecarlo", "--n", "200"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("case-{k}"));
        run(args, &out);
        let first = snapshot(&out);
        assert!(first.len() >= 2);
        run(args, &out);
        assert_eq!(first, snapshot(&out), "{args:?}");

        // The recorded config reproduces the same files.
        let again = run(&[args[0], "--config", out.join("config.toml").to_str().unwrap()], &out);
        assert!(again.status.code().is_some());
        assert_eq!(first, snapshot(&out), "{args:?} via config");
    }
}

#[test]
fn sweep_runs_each_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = tmp.path().join("sweep.toml");
    std::fs::write(&sweep, "[[run]]\nl = \"1/8\"\nn = 6\n\n[[run]]\nl = \"1/5\"\nn = 9\n").unwrap();
    let out = tmp.path().join("s");
    let o = run(&["fr", "--sweep", sweep.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("run-1"), "fr.json")["config"]["l"], "1/5");
    assert_eq!(json(&out.join("run-0"), "fr.json")["result"]["report"]["n"], 6);
}

#[test]
fn config_file_sets_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "family = \"map1\"\nl = \"3/5\"\nn = 7\n").unwrap();
    let out = tmp.path().join("o");
    assert!(run(&["fr", "--config", cfg.to_str().unwrap(), "--n", "5"], &out)
        .status
        .success());
    let doc = json(&out, "fr.json");
    assert_eq!(
        (doc["config"]["l"].as_str(), doc["config"]["n"].as_u64()),
        (Some("3/5"), Some(5))
    );

    std::fs::write(&cfg, "lambda = 3\n").unwrap();
    assert_eq!(
        run(&["fr", "--config", cfg.to_str().unwrap()], &out).status.code(),
        Some(2)
    );
}
