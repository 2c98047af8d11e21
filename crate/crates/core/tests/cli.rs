use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn netpov(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netpov"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "id,h,e\na,5,10\nb,10,10\n").unwrap();
    std::fs::write(
        dir.path().join("config.toml"),
        "alpha = 1.0\ncutoffs = [10.0, 10.0]\nmatrix = [[1.0, 0.5], [0.0, 1.0]]\nk = 1.0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("sym.toml"),
        "alpha = 1.0\ncutoffs = [1.0, 1.0, 1.0]\nmatrix = [[1.0, 0.5, 0.5], [0.5, 1.0, 0.0], [0.5, 0.0, 1.0]]\n",
    )
    .unwrap();
    dir
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compute_writes_report() {
    let dir = workspace();
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "data.csv",
            "--config",
            "config.toml",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["fgt_value"], 0.1);
    assert_eq!(v["headcount_ratio"], 0.5);
    assert_eq!(v["persons"][0]["id"], "a");
    assert!(v.get("naive").is_none());
}

#[test]
fn naive_flag_and_table() {
    let dir = workspace();
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "data.csv",
            "--config",
            "config.toml",
            "--diagnostic-naive",
            "--table",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["naive"]["label"], "naive (manipulable)");
    assert_eq!(v["naive"]["value"], 0.125);
    let table = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(table.starts_with("index,id,count,poor,score_h,score_e\n"));
}

#[test]
fn overrides() {
    let dir = workspace();
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "data.csv",
            "--config",
            "config.toml",
            "--k-fraction",
            "1.0",
            "--alpha",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["k"], 2.5);
    assert_eq!(v["config"]["alpha"], 2.0);
    assert_eq!(v["fgt_value"], 0.0);
}

#[test]
fn warns_between_attainable_scores() {
    let dir = workspace();
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "data.csv",
            "--config",
            "config.toml",
            "--k",
            "1.2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly between"));
}

#[test]
fn exit_codes() {
    let dir = workspace();
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "missing.csv",
            "--config",
            "config.toml",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let out = netpov(
        &[
            "compute",
            "--dataset",
            "data.csv",
            "--config",
            "config.toml",
            "--k",
            "9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("neg.csv"), "h,e\n-3,1\n").unwrap();
    let out = netpov(
        &["compute", "--dataset", "neg.csv", "--config", "config.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let out = netpov(&["nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = netpov(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bounds_subcommand() {
    let dir = workspace();
    let out = netpov(&["bounds", "--config", "config.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["d_bar"], 2.5);
    assert_eq!(v["d_under"], 1.0);
    assert_eq!(
        v["attainable_scores"],
        serde_json::json!([0.0, 1.0, 1.5, 2.5])
    );
}

#[test]
fn implied_weights_subcommand() {
    let dir = workspace();
    let out = netpov(&["implied-weights", "--config", "sym.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json(&out)["weights"],
        serde_json::json!([1.125, 0.9375, 0.9375])
    );
    let out = netpov(&["implied-weights", "--config", "config.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("M[1,2]"));
}

#[test]
fn axioms_subcommand() {
    let dir = workspace();
    let out = netpov(
        &[
            "axioms", "--trials", "20", "--seed", "5", "--alpha", "0.5,1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 24);
    let probe = reports
        .iter()
        .find(|r| r["axiom"] == "weak_transfer" && r["alpha"] == 0.5)
        .unwrap();
    assert_eq!(probe["status"], "not_covered");
    let again = netpov(
        &[
            "axioms", "--trials", "20", "--seed", "5", "--alpha", "0.5,1",
        ],
        dir.path(),
    );
    assert_eq!(out.stdout, again.stdout);
    let out = netpov(&["axioms", "--trials", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_subcommand() {
    let dir = workspace();
    std::fs::write(dir.path().join("pop.csv"), "h,e\n8,2\n20,20\n").unwrap();
    std::fs::write(
        dir.path().join("id.toml"),
        "alpha = 1.0\ncutoffs = [10.0, 10.0]\nk = 1.0\n",
    )
    .unwrap();
    let out = netpov(
        &["compare", "--dataset", "pop.csv", "--config", "id.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 11);
    for pair in rows.windows(2) {
        assert!(pair[1]["naive_numerator"].as_f64() > pair[0]["naive_numerator"].as_f64());
    }
    assert!(rows
        .iter()
        .all(|r| (0.0..=1.0).contains(&r["adjusted"].as_f64().unwrap())));
}
