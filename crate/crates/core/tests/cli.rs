mod common;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{gauss, normal_matrix, rng};
use rpcscreen::datagen::{generate, Design, SimSetting};
use rpcscreen::{lambda_presets, rpc_fast, select_top_k, standardize, DenseMatrix};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rpcscreen"));
    c.env_remove("RPC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_matrix(path: &Path, x: &DenseMatrix) {
    let mut s = String::new();
    for i in 0..x.rows() {
        let row: Vec<String> = (0..x.cols()).map(|j| x.get(i, j).to_string()).collect();
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

fn write_vec(path: &Path, y: &[f64]) {
    let s: String = y.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, s).unwrap();
}

/// `(index, score)` rows of a screen CSV without names.
fn parse_ranking(csv: &str) -> Vec<(usize, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rank,index,score,abs_score"));
    lines
        .enumerate()
        .map(|(r, line)| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0].parse::<usize>().unwrap(), r + 1);
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

struct Files {
    _dir: tempfile::TempDir,
    x: PathBuf,
    y: PathBuf,
}

impl Files {
    fn new(x: &DenseMatrix, y: &[f64]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (xp, yp) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
        write_matrix(&xp, x);
        write_vec(&yp, y);
        Files {
            _dir: dir,
            x: xp,
            y: yp,
        }
    }

    fn x(&self) -> &str {
        self.x.to_str().unwrap()
    }

    fn y(&self) -> &str {
        self.y.to_str().unwrap()
    }

    fn dir(&self) -> &Path {
        self._dir.path()
    }
}

fn toy() -> Files {
    let x = normal_matrix(6, 4, 21);
    let y = x.col(2).to_vec();
    Files::new(&x, &y)
}

#[test]
fn duplicated_column_ranks_first() {
    let f = toy();
    for (method, k) in [("sis", "4"), ("rpc", "4"), ("holp", "4"), ("fr", "1")] {
        let o = run(&["screen", "--x", f.x(), "--y", f.y(), "--method", method, "--k", k]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
        assert_eq!(parse_ranking(&stdout(&o))[0].0, 2, "{method}");
        assert!(o.stderr.is_empty());
    }
}

#[test]
fn missing_file_exits_3() {
    let o = run(&[
        "screen",
        "--x",
        "/nonexistent/x.csv",
        "--y",
        "/nonexistent/y.csv",
        "--method",
        "sis",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/x.csv"));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn bad_data_exits_4_with_location() {
    let f = toy();
    let ragged = f.dir().join("ragged.csv");
    std::fs::write(&ragged, "1,2,3\n4,5\n7,8,9\n1,1,2\n3,1,0\n2,2,2\n").unwrap();
    let o = run(&[
        "screen",
        "--x",
        ragged.to_str().unwrap(),
        "--y",
        f.y(),
        "--method",
        "sis",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));

    let bad = f.dir().join("bad.csv");
    std::fs::write(&bad, "1,2,3\n4,5,6\n7,oops,9\n1,1,2\n3,1,0\n2,2,2\n").unwrap();
    let o = run(&["screen", "--x", bad.to_str().unwrap(), "--y", f.y(), "--method", "sis"]);
    assert_eq!(o.status.code(), Some(4));
    let e = stderr(&o);
    assert!(
        e.contains("row 3") && e.contains("column 2") && e.contains("oops"),
        "{e}"
    );

    let constant = f.dir().join("const.csv");
    std::fs::write(&constant, "1,5\n2,5\n3,5\n4,5\n5,5\n7,5\n").unwrap();
    let o = run(&[
        "screen",
        "--x",
        constant.to_str().unwrap(),
        "--y",
        f.y(),
        "--method",
        "rpc",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("column 1"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    let f = toy();
    let o = run(&["screen", "--x", f.x(), "--y", f.y(), "--method", "rpc", "--k", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k = 5"));
    let o = run(&["screen", "--x", f.x(), "--y", f.y(), "--method", "sis", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["screen", "--x", f.x(), "--method", "sis"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["screen", "--x", f.x(), "--y", f.y(), "--method", "lasso"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn seeded_files() -> (Files, DenseMatrix, Vec<f64>) {
    let x = normal_matrix(50, 200, 5);
    let mut r = rng(6);
    let y: Vec<f64> = (0..50).map(|i| x.get(i, 3) - x.get(i, 17) + gauss(&mut r)).collect();
    (Files::new(&x, &y), x, y)
}

#[test]
fn screen_matches_library() {
    let (f, x, y) = seeded_files();
    let o = run(&[
        "screen",
        "--x",
        f.x(),
        "--y",
        f.y(),
        "--method",
        "rpc",
        "--lambda",
        "rpc1",
        "--k",
        "50",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = parse_ranking(&stdout(&o));

    let d = standardize(&x, &y).unwrap();
    let fit = rpc_fast(&d, lambda_presets(50, 200).unwrap().rpc1).unwrap();
    let want = select_top_k(&fit.scores, 50).unwrap();
    assert_eq!(got.len(), 50);
    for ((idx, score), w) in got.iter().zip(&want) {
        assert_eq!(idx, w);
        assert_eq!(*score, fit.scores[*w]);
    }
}

#[test]
fn output_independent_of_threads() {
    let (f, _, _) = seeded_files();
    let outs: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .map(|t| {
            let o = run(&["--threads", t, "screen", "--x", f.x(), "--y", f.y(), "--method", "rpc"]);
            assert!(o.status.success());
            o.stdout
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let o = bin()
        .env("RPC_THREADS", "3")
        .args(["screen", "--x", f.x(), "--y", f.y(), "--method", "rpc"])
        .output()
        .unwrap();
    assert_eq!(o.stdout, outs[0]);
}

#[test]
fn screen_writes_file_and_manifest() {
    let (f, _, _) = seeded_files();
    let out = f.dir().join("ranking.json");
    let o = run(&[
        "screen",
        "--x",
        f.x(),
        "--y",
        f.y(),
        "--method",
        "holp",
        "--k",
        "10",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success() && o.stdout.is_empty() && o.stderr.is_empty());
    let ranking: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(ranking.as_array().unwrap().len(), 10);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(f.dir().join("ranking.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["k"], 10);
    assert_eq!(manifest["lambda"], 0.25);
}

#[test]
fn crlf_header_and_response_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let mut s = String::from("a,b,target,c\r\n");
    let x = normal_matrix(12, 3, 40);
    for i in 0..12 {
        let t = x.get(i, 1) * 2.0 + 0.01 * x.get(i, 2);
        write!(s, "{},{},{},{}\r\n", x.get(i, 0), x.get(i, 1), t, x.get(i, 2)).unwrap();
    }
    std::fs::write(&path, s).unwrap();
    let p = path.to_str().unwrap();
    for col in ["target", "2"] {
        let o = run(&["screen", "--x", p, "--y-col", col, "--method", "sis", "--k", "3"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("rank,index,name,score,abs_score"));
        assert!(lines.next().unwrap().starts_with("1,1,b,"));
    }
}

fn write_plan(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("plan.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn simulate_full_submodel_reports_100() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"setting": {"design": "AR1", "n": 30, "p": 40, "r_squared": 0.5, "seed": 2},
            "replications": 1, "k": 40, "methods": ["RPC1", "HOLP", "SIS", "FR"]}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stderr.is_empty());
    let csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,AR1_TPR,AR1_CP"));
    for line in lines {
        assert!(line.ends_with(",100.0,100.0"), "{line}");
    }
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summaries"][0]["methods"][0]["cp"], 1.0);
    assert!(out.join("table.txt").is_file());
}

#[test]
fn simulate_is_reproducible_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"setting": {"design": "COMPOUND", "n": 40, "p": 200, "r_squared": 0.5, "seed": 9},
            "replications": 6, "k": 8, "methods": ["RPC1", "SIS"]}"#,
    );
    let table = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec![
            "simulate",
            "--plan",
            plan.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        assert!(run(&args).status.success());
        std::fs::read(out.join("table.csv")).unwrap()
    };
    assert_eq!(table("a", &[]), table("b", &["--threads", "1"]));
    assert_eq!(table("c", &["--seed", "9"]), table("a", &[]));
}

#[test]
fn invalid_plan_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"setting": {"design": "IID", "n": 30, "p": 40, "r_squared": 1.5},
            "replications": 1, "methods": ["RPC1"]}"#,
    );
    let o = run(&[
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r_squared"), "{}", stderr(&o));

    let plan = write_plan(
        dir.path(),
        r#"{"setting": {"design": "IID", "n": 30, "p": 40, "r_squared": 0.5}, "replications": 1, "methods": ["LASSO"]}"#,
    );
    let o = run(&[
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("methods[0]"), "{}", stderr(&o));
}

#[test]
fn bundled_plans_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
    for name in ["table1.json", "table1_extrcor.json"] {
        let text = std::fs::read_to_string(root.join(name)).unwrap();
        let plan = rpcscreen::bench::BenchmarkPlan::from_json(&text).unwrap();
        assert_eq!((plan.setting.n, plan.setting.p, plan.k()), (300, 5000, 300));
        let labels: Vec<String> = plan.methods.iter().map(|m| m.label()).collect();
        assert!(
            ["RPC1", "HOLP", "SIS"].iter().all(|l| labels.iter().any(|m| m == l)),
            "{name}"
        );
    }
}

fn compare(f: &Files, k: &str) -> Value {
    let o = run(&["compare", "--x", f.x(), "--y", f.y(), "--k", k]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn compare_on_noise_is_bounded() {
    let x = normal_matrix(30, 80, 50);
    let mut r = rng(51);
    let y: Vec<f64> = (0..30).map(|_| gauss(&mut r)).collect();
    let report = compare(&Files::new(&x, &y), "10");
    let overlaps = report["overlaps"].as_array().unwrap();
    assert_eq!(overlaps.len(), 15);
    for o in overlaps {
        let j = o["jaccard"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&j));
    }
}

#[test]
fn compare_agrees_on_exact_predictor() {
    let x = normal_matrix(25, 60, 52);
    let y = x.col(0).to_vec();
    let report = compare(&Files::new(&x, &y), "5");
    for m in report["methods"].as_array().unwrap() {
        assert_eq!(m["selected"][0], 0, "{}", m["method"]);
    }
}

#[test]
fn compare_presets_overlap_on_extreme_design() {
    let data = generate(&SimSetting::new(Design::Extreme, 100, 1000, 0.5, 3)).unwrap();
    let f = Files::new(&data.x_raw, &data.y_raw);
    let report = compare(&f, "100");
    let overlap = report["overlaps"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["a"] == "RPC1" && o["b"] == "RPC2")
        .unwrap()["jaccard"]
        .as_f64()
        .unwrap();
    assert!(overlap >= 0.9, "{overlap}");
}
