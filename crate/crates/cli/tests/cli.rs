use std::path::Path;
use std::process::{Command, Output};

fn fj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fj")).args(args).output().expect("spawn fj")
}

fn fj_ok(args: &[&str]) -> String {
    let out = fj(args);
    assert!(out.status.success(), "fj {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_plan(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn walk_plan(out: &Path, reps: usize, targets: &str) -> String {
    format!(
        r#"{{"graph":{{"gnm":{{"n":300,"m":900}}}},"opinions":"uniform","oracle":"innate",
           "estimator":{{"walk":{{"num_walks":200,"max_steps":100}}}},"targets":{targets},
           "repetitions":{reps},"seed":7,"output":{:?}}}"#,
        out.to_str().unwrap()
    )
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn pipeline_from_raw_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    std::fs::write(&raw, "% toy\n10 20\n20 30\n30 10\n30 40\n99 98\n").unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    fj_ok(&["ingest", "--input", &p("raw.txt"), "--largest-component", "--out", &p("g.txt"), "--idmap", &p("ids.txt")]);
    assert_eq!(read(&dir.path().join("ids.txt")).lines().count(), 4);
    fj_ok(&["gen-opinions", "--graph", &p("g.txt"), "--kind", "uniform", "--seed", "3", "--out", &p("s.txt")]);
    let report: serde_json::Value = serde_json::from_str(&fj_ok(&[
        "exact", "--graph", &p("g.txt"), "--opinions", &p("s.txt"), "--method", "dense", "--z-out", &p("z.txt"),
    ]))
    .unwrap();
    let get = |k: &str| report[k].as_f64().unwrap();
    let lhs = get("internal_conflict") + 2.0 * get("disagreement") + get("controversy");
    assert!((lhs - get("s_norm_sq")).abs() < 1e-9);

    let csv = fj_ok(&["estimate-s", "--graph", &p("g.txt"), "--expressed", &p("z.txt"), "--all"]);
    let s: Vec<f64> = read(&dir.path().join("s.txt")).lines().map(|l| l.parse().unwrap()).collect();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let v: usize = f[1].parse().unwrap();
        let e: f64 = f[3].parse().unwrap();
        assert!((e - s[v]).abs() < 1e-9);
    }
    let csv = fj_ok(&["estimate-z", "--graph", &p("g.txt"), "--opinions", &p("s.txt"), "--targets", "3", "--walks", "100"]);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn repetitions_produce_files_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let plan = write_plan(dir.path(), "plan.json", &walk_plan(&out, 10, r#"{"random":{"k":20}}"#));
    let agg = fj_ok(&["run", "--plan", &plan]);
    for rep in 0..10 {
        assert!(out.join(format!("rep_{rep:03}.csv")).exists());
    }
    assert!(agg.starts_with("metric,mean,std\nmean_abs_error,"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["repetitions"].as_array().unwrap().len(), 10);
    assert!(manifest["repetitions"][0]["queries"].as_u64().unwrap() > 0);
}

#[test]
fn same_seed_gives_identical_csv_and_manifest_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let plan_a = write_plan(dir.path(), "a.json", &walk_plan(&a, 2, r#"{"random":{"k":30}}"#));
    let plan_b = write_plan(dir.path(), "b.json", &walk_plan(&b, 2, r#"{"random":{"k":30}}"#));
    fj_ok(&["--threads", "1", "run", "--plan", &plan_a]);
    fj_ok(&["--threads", "4", "run", "--plan", &plan_b]);
    let manifest = a.join("manifest.json");
    fj_ok(&["run", "--plan", manifest.to_str().unwrap(), "--output", c.to_str().unwrap()]);
    for name in ["rep_000.csv", "rep_001.csv", "aggregate.csv"] {
        let body = read(&a.join(name));
        assert_eq!(body, read(&b.join(name)), "{name}");
        assert_eq!(body, read(&c.join(name)), "{name}");
    }
}

#[test]
fn measures_plan_writes_json_per_rep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let body = format!(
        r#"{{"graph":{{"gnm":{{"n":200,"m":600}}}},"opinions":"uniform","oracle":"expressed",
           "estimator":{{"measures":{{"epsilon":0.2,"delta":0.2,"samples":200}}}},"targets":"all",
           "repetitions":2,"seed":1,"output":{:?}}}"#,
        out.to_str().unwrap()
    );
    let plan = write_plan(dir.path(), "plan.json", &body);
    let agg = fj_ok(&["run", "--plan", &plan]);
    assert_eq!(agg.lines().count(), 9);
    let rep: serde_json::Value = serde_json::from_str(&read(&out.join("rep_001.json"))).unwrap();
    assert!(rep["estimate"]["sum"].as_f64().unwrap() > 0.0);
}

#[test]
fn twenty_degree_buckets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let plan = write_plan(dir.path(), "plan.json", &walk_plan(&out, 2, r#""all""#));
    let table = fj_ok(&["buckets", "--plan", &plan, "--count", "20", "--per-bucket", "5"]);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    let mean_norm: f64 = rows.iter().map(|r| r.split(',').nth(4).unwrap().parse::<f64>().unwrap()).sum::<f64>() / 20.0;
    assert!((mean_norm - 1.0).abs() < 1e-3);
}

#[test]
fn bench_trivial_plan_has_timing_row() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"graph":{"gnm":{"n":20,"m":40}},"opinions":"uniform","oracle":"innate",
        "estimator":{"walk":{"num_walks":1}},"targets":{"random":{"k":1}},"output":"unused"}"#;
    let plan = write_plan(dir.path(), "plan.json", body);
    let csv = fj_ok(&["bench", "--plan", &plan]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fj(&["no-such-command"]).status.code(), Some(2));

    let bad = write_plan(dir.path(), "bad.json", &walk_plan(&dir.path().join("x"), 0, r#""all""#));
    let out = fj(&["run", "--plan", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repetitions"));

    let g = dir.path().join("g.txt");
    std::fs::write(&g, "0 1\n1 2\n").unwrap();
    let s = dir.path().join("s.txt");
    std::fs::write(&s, "0.5\n2.0\n0.1\n").unwrap();
    let out = fj(&["exact", "--graph", g.to_str().unwrap(), "--opinions", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let missing = fj(&["exact", "--graph", "/nonexistent/g.txt", "--opinions", s.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/g.txt"));

    let big = dir.path().join("big.txt");
    let body: String = (0..20_001).map(|i| format!("{i} {}\n", i + 1)).collect();
    std::fs::write(&big, body).unwrap();
    let ones = dir.path().join("ones.txt");
    std::fs::write(&ones, "0.5\n".repeat(20_002)).unwrap();
    let out = fj(&["exact", "--graph", big.to_str().unwrap(), "--opinions", ones.to_str().unwrap(), "--method", "dense"]);
    assert_eq!(out.status.code(), Some(4));
}
