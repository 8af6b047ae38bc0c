use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use symvar::Rational;
use symvar_cli::manifest::{run, RunManifest, RunOptions};
use symvar_cli::tasks::StrataDoc;

fn symvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symvar")).args(args).output().expect("binary runs")
}

fn write_manifest(dir: &Path, body: Value) -> String {
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exponents_manifest_for_det3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = write_manifest(
        dir.path(),
        serde_json::json!({"preset": "detsurface:3", "tasks": ["exponents"], "output_dir": out}),
    );
    let o = symvar(&["report", &m]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("summary.json"));
    let pred = &s["tasks"][0]["predicted"];
    assert_eq!(pred["a"].as_str().unwrap().parse::<Rational>().unwrap(), Rational::from_int(6));
    assert_eq!(pred["b"], 1);
    assert_eq!(pred["I"], serde_json::json!(["alpha_1"]));
    assert_eq!(s["all_pass"], true);
    assert!(out.join("exponents.json").exists());
    assert!(out.join("report.md").exists());
}

#[test]
fn empty_task_list_succeeds_with_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let m = RunManifest::from_json(r#"{"preset": "detsurface:3", "tasks": []}"#).unwrap();
    let m = RunManifest { output_dir: dir.path().to_path_buf(), ..m };
    let outcome = run(&m, &RunOptions::default());
    assert_eq!(outcome.exit_code, 0);
    assert!(outcome.summary.tasks.is_empty());
    assert!(outcome.summary.checks.is_empty());
    let s = read_json(&dir.path().join("summary.json"));
    assert_eq!(s["tasks"], serde_json::json!([]));
}

#[test]
fn det4_count_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = write_manifest(
        dir.path(),
        serde_json::json!({"preset": "detsurface:4", "tasks": ["count"], "ladder": [2, 3, 4, 5], "output_dir": out}),
    );
    let o = symvar(&["report", &m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n <= 3"));
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["error"]["exit_code"], 2);
}

#[test]
fn schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        serde_json::json!({"preset": "torus:3", "tasks": ["exponents"]}),
        serde_json::json!({"preset": "quadric:2,2,1", "tasks": ["count"], "ladder": [50, 40]}),
        serde_json::json!({"preset": "quadric:2,2,1", "tasks": ["count", "count"], "ladder": [5, 10]}),
        serde_json::json!({"preset": "quadric:2,2,1", "tasks": ["volume"]}),
        serde_json::json!({"preset": "quadric:2,2,1", "tasks": ["bogus"]}),
        serde_json::json!({"preset": "tworho:A,2,1", "tasks": ["count"], "ladder": [5, 10]}),
    ] {
        let mut body = body;
        body["output_dir"] = serde_json::json!(dir.path().join("o"));
        let m = write_manifest(dir.path(), body.clone());
        let o = symvar(&["report", &m]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
}

#[test]
fn budget_truncation_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = write_manifest(
        dir.path(),
        serde_json::json!({
            "preset": "quadric:2,2,1", "tasks": ["count"], "ladder": [10, 20, 40, 80, 1000000],
            "max_work": 1e7, "output_dir": out
        }),
    );
    let o = symvar(&["report", &m]);
    assert_eq!(o.status.code(), Some(3));
    let csv = fs::read_to_string(out.join("counts.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(read_json(&out.join("summary.json"))["truncated"].is_string());
}

#[test]
fn count_and_compare_outputs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let m = write_manifest(
            dir.path(),
            serde_json::json!({
                "preset": {"family": "quadric:2,2,1"},
                "tasks": ["count", "compare"],
                "ladder": [50, 100, 150, 200],
                "caps": ["1,0,1,0@0.3"],
                "compare": {"T": 200, "bins": 24},
                "output_dir": out
            }),
        );
        let o = symvar(&["--threads", threads, "report", &m]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(out.join("counts.csv")).unwrap(), fs::read(out.join("compare.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn shipped_example_manifest_validates() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/example-manifest.json");
    let m = RunManifest::load(&path).unwrap();
    m.validate().unwrap();
    assert_eq!(m.cap_specs().unwrap().len(), 1);
}

#[test]
fn manifest_round_trips() {
    let text = r#"{
        "preset": {"root_system": {"family": "A", "rank": 2, "mult": [
            {"root": [1, 0], "lp": 1, "lm": 1}, {"root": [0, 1], "lp": 1, "lm": 1}, {"root": [1, 1], "lp": 1, "lm": 1}]},
            "weight": ["4/3", "2/3"]},
        "tasks": ["exponents", "strata"],
        "ladder": [10, 20],
        "seed": 7
    }"#;
    let m = RunManifest::from_json(text).unwrap();
    let again = RunManifest::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(m, again);
    let p = m.preset.resolve().unwrap();
    assert_eq!(p.rs.rank(), 2);
}

#[test]
fn strata_subcommand_json_and_dot() {
    let o = symvar(&["strata", "--preset", "detsurface:3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: StrataDoc = serde_json::from_slice(&o.stdout).unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exponents"], serde_json::json!({"a": "6/1", "b": 1, "I": [0]}));
    assert_eq!(serde_json::from_str::<StrataDoc>(&serde_json::to_string(&doc).unwrap()).unwrap(), doc);

    let o = symvar(&["strata", "--preset", "detsurface:3", "--dot"]);
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("digraph strata"));
    assert!(dot.contains("->"));
}

#[test]
fn exponents_from_root_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("a2.json");
    fs::write(
        &sys,
        r#"{"family": "A", "rank": 2, "mult": [
            {"root": [1, 0], "lp": 2, "lm": 0}, {"root": [0, 1], "lp": 2, "lm": 0}, {"root": [1, 1], "lp": 2, "lm": 0}]}"#,
    )
    .unwrap();
    let out = dir.path().join("e.json");
    let o = symvar(&["exponents", "--system", sys.to_str().unwrap(), "--omega", "2,0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["predicted"]["a"], "6/1");
    assert_eq!(v["polytope"]["a"], "6/1");
}

#[test]
fn count_subcommand_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("counts.csv");
    let o = symvar(&[
        "count", "--family", "quadric:2,2,1", "--norm", "euclidean", "--ladder", "10:40:x2",
        "--cap", "0.707,0,0,0.707@0.2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["T", "total", "cap_0", "elapsed_ms"]);
    assert_eq!(rdr.records().count(), 3);
}

#[test]
fn volume_subcommand_writes_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"rank": 1, "terms": [{"lam": ["1/1"], "w": [1.0]}], "lead": 0, "chi": ["2/1"]}"#).unwrap();
    let o = symvar(&["volume", "--spec", spec.to_str().unwrap(), "--T-ladder", "1e2,1e3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("ratios.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["T", "integral", "normalized_ratio", "kappa_L_target"]);
    for r in rdr.records() {
        let r = r.unwrap();
        let ratio: f64 = r[2].parse().unwrap();
        let target: f64 = r[3].parse().unwrap();
        assert!((ratio / target - 1.0).abs() < 0.05);
    }
}

#[test]
fn compare_rejects_non_quadric() {
    let o = symvar(&["compare", "--family", "symmat:2,1", "--T", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn presets_lists_kinds() {
    let o = symvar(&["presets"]);
    let s = String::from_utf8(o.stdout).unwrap();
    for k in ["quadric:p,q", "detsurface:n", "symmat:p,q", "tworho:family,rank,ell", "detsurface:6,1"] {
        assert!(s.contains(k), "{k}");
    }
}
