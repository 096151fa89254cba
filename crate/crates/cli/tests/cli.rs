use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

fn tohtn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tohtn")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solves_and_prints_the_plan() {
    let out = tohtn(&[path(&fixture("seven_actions.htn"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let actions: Vec<&str> = text.lines().filter(|l| l.contains('(')).collect();
    assert_eq!(actions, ["0 (A_2)", "1 (A_1)", "2 (A_3)"]);
    assert!(text.starts_with("==>\n") && text.ends_with("<==\n"));
}

#[test]
fn exit_codes() {
    let unsolvable = tohtn(&[path(&fixture("unsolvable.htn"))]);
    assert_eq!(unsolvable.status.code(), Some(1));
    let limited = tohtn(&[path(&fixture("wide16.htn")), "--max-rounds", "1"]);
    assert_eq!(limited.status.code(), Some(2));
    assert_eq!(tohtn(&["missing.hddl"]).status.code(), Some(3));
    assert_eq!(tohtn(&[path(&fixture("seven_actions.htn")), "--frobnicate"]).status.code(), Some(3));
    assert_eq!(tohtn(&[path(&fixture("seven_actions.htn")), "--mode", "dfs"]).status.code(), Some(3));
    assert_eq!(tohtn(&["--help"]).status.code(), Some(0));
}

#[test]
fn corrupted_plan_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("seven_actions.plan");
    let domain = fixture("seven_actions.htn");
    assert_eq!(tohtn(&[path(&domain), "--plan", path(&plan)]).status.code(), Some(0));
    let ok = tohtn(&[path(&domain), "--validate-only", path(&plan)]);
    assert_eq!(ok.status.code(), Some(0));

    let text = std::fs::read_to_string(&plan).unwrap();
    // swapping the first two actions keeps the structure but breaks execution
    let swapped = text.replacen("0 (A_2)", "0 (A_1)", 1).replacen("1 (A_1)", "1 (A_2)", 1);
    let bad = dir.path().join("bad.plan");
    std::fs::write(&bad, swapped).unwrap();
    let out = tohtn(&[path(&domain), "--validate-only", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("plan invalid"), "{report}");

    std::fs::write(&bad, "==>\n0 (A_9)\nroot 0\n<==\n").unwrap();
    assert_eq!(tohtn(&[path(&domain), "--validate-only", path(&bad)]).status.code(), Some(1));
}

#[test]
fn hddl_pair_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("s.json");
    let dot = dir.path().join("t.dot");
    let cnf = dir.path().join("f.cnf");
    let profiles = dir.path().join("p.txt");
    let out = tohtn(&[
        path(&fixture("taxi/domain.hddl")),
        path(&fixture("taxi/problem.hddl")),
        "--amo",
        "bimander-sqrt",
        "--mandpre-prune=off",
        "--stats",
        path(&stats),
        "--emit-dot",
        path(&dot),
        "--dump-cnf",
        path(&cnf),
        "--dump-profiles",
        path(&profiles),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["amo"], "bimander-sqrt");
    assert_eq!(v["outcome"], "solved");
    assert!(v["ground_seconds"].as_f64().unwrap() <= v["total_seconds"].as_f64().unwrap());
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let header = std::fs::read_to_string(&cnf).unwrap();
    assert!(header.starts_with("p cnf "));
    assert!(std::fs::read_to_string(&profiles).unwrap().contains("task call_taxi"));
}

#[test]
fn bfs_develops_more_on_wide_choice() {
    let dir = tempfile::tempdir().unwrap();
    let mut dev = Vec::new();
    for mode in ["greedy", "bfs"] {
        let stats = dir.path().join(format!("{mode}.json"));
        let out = tohtn(&[path(&fixture("wide8.htn")), "--mode", mode, "--stats", path(&stats)]);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
        dev.push(v["methods_developed"].as_u64().unwrap());
    }
    assert!(dev[1] > dev[0], "{dev:?}");
}

#[test]
fn bench_writes_score_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("scores.csv");
    let summary = dir.path().join("summary.csv");
    let out = tohtn(&[
        "bench",
        path(&fixture("suite.manifest")),
        "--configs",
        "greedy,bfs+nomutex",
        "--timeout",
        "30",
        "--out",
        path(&out_csv),
        "--summary",
        path(&summary),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&out_csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 22);
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for r in &rows {
        let ipc: f64 = r[col("ipc_score")].parse().unwrap();
        let q: f64 = r[col("quality_score")].parse().unwrap();
        assert!((0.0..=1.0).contains(&ipc) && (0.0..=1.0).contains(&q));
        if &r[col("solved")] == "false" {
            assert_eq!((ipc, q), (0.0, 0.0));
        }
    }
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.lines().any(|l| l.starts_with("*,greedy,11,10,")), "{text}");

    let bad = tohtn(&["bench", path(&fixture("suite.manifest")), "--timeout", "1"]);
    assert_eq!(bad.status.code(), Some(3));
}
