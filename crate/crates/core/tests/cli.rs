use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depthbandit::cli::ResultFile;
use depthbandit::depth::{binomial, naive_counts_all, DEFAULT_NAIVE_CAP};
use depthbandit::{Answer, PointSet};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_depthbandit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_threads(args: &[&str], threads: &str) -> Output {
    bin()
        .args(args)
        .env("DEPTHBANDIT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn square(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("square.csv");
    fs::write(&p, "0,0\n4,0\n0,4\n1,1\n").unwrap();
    p
}

fn gaussian_file(dir: &TempDir, n: usize, seed: u64) -> PathBuf {
    let p = dir.path().join(format!("g{n}_{seed}.csv"));
    let out = run(&[
        "generate",
        "--n",
        &n.to_string(),
        "--d",
        "2",
        "--seed",
        &seed.to_string(),
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    p
}

fn read_result(p: &Path) -> ResultFile {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Result document with the timing field removed.
fn stable(p: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

fn oracle_depths(p: &Path) -> Vec<f64> {
    let pts = depthbandit::data::read_csv(p, false).unwrap();
    let total = binomial(pts.len(), 3) as f64;
    naive_counts_all(&pts, DEFAULT_NAIVE_CAP)
        .unwrap()
        .into_iter()
        .map(|c| c as f64 / total)
        .collect()
}

fn deepest_k(depths: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..depths.len()).collect();
    order.sort_by(|&a, &b| depths[b].total_cmp(&depths[a]).then(a.cmp(&b)));
    let mut top = order[..k].to_vec();
    top.sort();
    top
}

#[test]
fn depth_naive_and_planar_on_square() {
    let dir = TempDir::new().unwrap();
    let input = square(&dir);
    for method in ["naive", "planar"] {
        let out = dir.path().join(format!("{method}.json"));
        let o = run(&[
            "depth",
            s(&input),
            "--all",
            "--method",
            method,
            "--out",
            s(&out),
        ]);
        assert!(o.status.success());
        let r = read_result(&out);
        let depths: Vec<f64> = r.per_point.iter().map(|a| a.mu_hat).collect();
        assert_eq!(depths, vec![0.75, 0.75, 0.75, 1.0]);
        assert!(r.per_point.iter().all(|a| a.exact));
        assert_eq!(r.answer, Answer::Index(3));
        assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
    }
}

#[test]
fn depth_mc_reports_half_width_and_rejects_zero_samples() {
    let dir = TempDir::new().unwrap();
    let input = square(&dir);
    let out = dir.path().join("mc.json");
    let o = run(&[
        "depth",
        s(&input),
        "--index",
        "0",
        "--method",
        "mc",
        "--samples",
        "1000",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let r = read_result(&out);
    let h = r.half_width.unwrap();
    assert!((h - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-12);
    // a vertex is inside every simplex it belongs to
    assert!(r.per_point[0].mu_hat >= 0.75 - 1e-12);

    let o = run(&[
        "depth",
        s(&input),
        "--all",
        "--method",
        "mc",
        "--samples",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples must be positive"));
}

#[test]
fn depth_planar_requires_two_dimensions() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("3d.csv");
    fs::write(&p, "0,0,0\n1,0,0\n0,1,0\n0,0,1\n0.1,0.1,0.1\n").unwrap();
    let o = run(&["depth", s(&p), "--all", "--method", "planar"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.csv");
    fs::write(&p, "0,0\n1,0\n0,x\n1,1\n").unwrap();
    let o = run(&["median", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn median_on_square_and_seed_determinism() {
    let dir = TempDir::new().unwrap();
    let input = square(&dir);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "median",
            s(&input),
            "--delta",
            "0.05",
            "--seed",
            "7",
            "--out",
            s(out),
        ]);
        assert!(o.status.success());
    }
    let ra = read_result(&a);
    assert_eq!(ra.answer, Answer::Index(3));
    assert_eq!(ra.task, "median");
    assert_eq!(ra.config["seed"], 7);
    let pa = serde_json::to_string(&ra.per_point).unwrap();
    let pb = serde_json::to_string(&read_result(&b).per_point).unwrap();
    assert_eq!(pa, pb);
    assert_eq!(stable(&a), stable(&b));
}

#[test]
fn bad_delta_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = square(&dir);
    for delta in ["0", "1", "1.5", "-0.1"] {
        let o = run(&["median", s(&input), "--delta", delta]);
        assert_eq!(o.status.code(), Some(2), "delta {delta}");
    }
    assert_eq!(run(&["median"]).status.code(), Some(2));
    assert_eq!(
        run(&["experiment", "--suite", "bogus"]).status.code(),
        Some(2)
    );
    let o = run(&["topk", s(&input), "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rank", s(&input), "--boundaries", "0,3,2,n"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn median_matches_naive_argmax_on_gaussian() {
    let dir = TempDir::new().unwrap();
    let input = gaussian_file(&dir, 100, 5);
    let depth_out = dir.path().join("depth.json");
    assert!(run(&[
        "depth",
        s(&input),
        "--all",
        "--method",
        "naive",
        "--out",
        s(&depth_out)
    ])
    .status
    .success());
    let depths: Vec<f64> = read_result(&depth_out)
        .per_point
        .iter()
        .map(|a| a.mu_hat)
        .collect();
    let best = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let med_out = dir.path().join("median.json");
    assert!(
        run(&["median", s(&input), "--seed", "3", "--out", s(&med_out)])
            .status
            .success()
    );
    match read_result(&med_out).answer {
        Answer::Index(i) => assert_eq!(depths[i], best),
        other => panic!("{other:?}"),
    }
}

#[test]
fn topk_and_rank_reduce_to_median() {
    let dir = TempDir::new().unwrap();
    let input = gaussian_file(&dir, 80, 11);
    let med = dir.path().join("m.json");
    let top = dir.path().join("t.json");
    let rank = dir.path().join("r.json");
    assert!(run(&["median", s(&input), "--seed", "1", "--out", s(&med)])
        .status
        .success());
    assert!(run(&[
        "topk",
        s(&input),
        "--k",
        "1",
        "--seed",
        "1",
        "--out",
        s(&top)
    ])
    .status
    .success());
    assert!(run(&[
        "rank",
        s(&input),
        "--boundaries",
        "0,1,n",
        "--seed",
        "1",
        "--out",
        s(&rank)
    ])
    .status
    .success());
    let m = match read_result(&med).answer {
        Answer::Index(i) => i,
        other => panic!("{other:?}"),
    };
    assert_eq!(read_result(&top).answer, Answer::Set(vec![m]));
    match read_result(&rank).answer {
        Answer::Clusters(c) => {
            assert_eq!(c[0], vec![m]);
            assert_eq!(c[1].len(), 79);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn topk_matches_oracle_on_gaussian() {
    let dir = TempDir::new().unwrap();
    let input = gaussian_file(&dir, 60, 2);
    let depths = oracle_depths(&input);
    let mut sorted = depths.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    assert!(
        sorted[4] > sorted[5],
        "fixture needs a clear 5th/6th boundary"
    );
    let out = dir.path().join("t.json");
    assert!(run(&[
        "topk",
        s(&input),
        "--k",
        "5",
        "--seed",
        "4",
        "--out",
        s(&out)
    ])
    .status
    .success());
    assert_eq!(read_result(&out).answer, Answer::Set(deepest_k(&depths, 5)));
}

#[test]
fn generate_is_deterministic_and_validated() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(gaussian_file(&dir, 5, 1)).unwrap();
    let other = TempDir::new().unwrap();
    let b = fs::read(gaussian_file(&other, 5, 1)).unwrap();
    assert_eq!(a, b);
    let o = run(&["generate", "--n", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let big = gaussian_file(&dir, 10_000, 3);
    let pts: PointSet = depthbandit::data::read_csv(&big, false).unwrap();
    for c in 0..2 {
        let mean = pts.rows().map(|r| r[c]).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "coordinate {c} mean {mean}");
    }
}

#[test]
fn generate_then_median_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = gaussian_file(&dir, 50, 8);
    let out = dir.path().join("r.json");
    assert!(run(&["median", s(&input), "--out", s(&out)])
        .status
        .success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for key in [
        "task",
        "config",
        "answer",
        "per_point",
        "total_cost_units",
        "rounds",
        "wall_time_ms",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in [
        "delta",
        "epsilon",
        "schedule_scale",
        "switch_factor",
        "seed",
        "task",
    ] {
        assert!(v["config"].get(key).is_some(), "config missing {key}");
    }
    let r = read_result(&out);
    assert_eq!(r.per_point.len(), 50);
    assert!(r.per_point.iter().enumerate().all(|(i, a)| a.index == i));
}

#[test]
fn results_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let input = gaussian_file(&dir, 120, 6);
    let cases: Vec<Vec<String>> = vec![
        vec![
            "median".into(),
            s(&input).into(),
            "--seed".into(),
            "5".into(),
        ],
        vec![
            "topk".into(),
            s(&input).into(),
            "--k".into(),
            "4".into(),
            "--seed".into(),
            "5".into(),
        ],
        vec![
            "rank".into(),
            s(&input).into(),
            "--boundaries".into(),
            "0,3,10,n".into(),
            "--ct".into(),
            "0.1".into(),
        ],
        vec![
            "depth".into(),
            s(&input).into(),
            "--all".into(),
            "--method".into(),
            "mc".into(),
            "--samples".into(),
            "3000".into(),
            "--seed".into(),
            "2".into(),
        ],
    ];
    for (c, args) in cases.iter().enumerate() {
        let mut docs = Vec::new();
        for threads in ["1", "4", "0"] {
            let out = dir.path().join(format!("c{c}_{threads}.json"));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--out", s(&out)]);
            let o = run_threads(&a, threads);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            docs.push(stable(&out));
        }
        assert_eq!(docs[0], docs[1], "case {c}");
        assert_eq!(docs[0], docs[2], "case {c}");
    }
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = square(&dir);
    let o = run_threads(&["median", s(&input)], "many");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_suites_emit_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("err.json");
    let o = run(&[
        "experiment",
        "--suite",
        "error-rate",
        "--n",
        "40",
        "--trials",
        "6",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert!(v["summary"]["failure_fraction"].as_f64().unwrap() <= 1.0);

    let csv = dir.path().join("cdf.csv");
    let o = run(&[
        "experiment",
        "--suite",
        "gap-cdf",
        "--n",
        "40",
        "--instances",
        "2",
        "--format",
        "csv",
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("normalized_gap,empirical_cdf"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("alpha"));

    let out = dir.path().join("scaling.json");
    let o = run(&[
        "experiment",
        "--suite",
        "scaling",
        "--ns",
        "40,60,80",
        "--trials",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["summary"]["slope"].as_f64().unwrap() > 0.0);

    let out = dir.path().join("pulls.json");
    let o = run(&[
        "experiment",
        "--suite",
        "pulls-vs-gap",
        "--n",
        "150",
        "--trials",
        "3",
        "--ct",
        "0.1",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 150);
}
