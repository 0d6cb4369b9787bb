use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bpgc_core::{ff_test, Dataset, GofConfig, Observation, HOSPITAL_ESTIMATES};
use serde_json::Value;

fn bpgc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpgc"))
        .args(args)
        .env_remove("BPGC_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_pairs(path: &Path) -> Vec<(f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y"));
    lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_independent_point() {
    let out = bpgc(&["eval", "--params", "1", "1", "0", "1", "0", "--x", "0", "--y", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    // Poisson(e) at 0 times Exp(1) density at 1
    let want = (-std::f64::consts::E).exp() * (-1.0f64).exp();
    let got = r["results"]["density"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    assert_eq!(r["command"], "eval");
    assert_eq!(r["params"]["m02"], 1.0);
}

#[test]
fn eval_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let out = bpgc(&[
        "eval", "--params", "1", "1", "0.1", "1", "0.1", "--grid", "x=0..15,y=0.1..10:100", "--out", s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,density"));
    let rows: Vec<(u64, f64, f64)> = lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1600);

    // trapezoid mass over the window against the quadrature value
    let dy = 9.9 / 99.0;
    let mut mass = 0.0;
    for chunk in rows.chunks(100) {
        let inner: f64 = chunk.iter().map(|r| r.2).sum();
        mass += dy * (inner - 0.5 * (chunk[0].2 + chunk[99].2));
    }
    let r = json(&out);
    let window = r["results"]["window_mass"].as_f64().unwrap();
    assert!((mass - window).abs() < 2e-3, "{mass} vs {window}");
    assert!((r["results"]["grid_mass"].as_f64().unwrap() - mass).abs() < 1e-9);
}

#[test]
fn eval_names_violated_constraint() {
    let out = bpgc(&["eval", "--params", "1", "-1", "0", "1", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("m01"), "{}", stderr(&out));
    let out = bpgc(&["eval", "--params", "1", "1", "0", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("diverges"), "{}", stderr(&out));
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv", "c.csv"].iter().map(|f| dir.path().join(f)).collect();
    for (p, seed) in paths.iter().zip(["7", "7", "8"]) {
        let out = bpgc(&[
            "sample", "--params", "1", "1", "0.1", "1", "0.1", "--n", "1000", "--seed", seed, "--out", s(p),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(json(&out)["seed"], seed.parse::<u64>().unwrap());
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    assert_ne!(a, fs::read(&paths[2]).unwrap());
    assert_eq!(read_pairs(&paths[0]).len(), 1000);
}

#[test]
fn sample_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = Vec::new();
    for method in ["exact", "gibbs"] {
        let p = dir.path().join(format!("{method}.csv"));
        let out = bpgc(&[
            "sample", "--params", "1", "1", "1", "1", "1", "--n", "5000", "--seed", "11", "--method", method,
            "--out", s(&p),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        samples.push(read_pairs(&p));
    }
    let g = ff_test(&samples[0], &samples[1], &GofConfig::new(5)).unwrap();
    assert!(g.p_value > 0.01, "{g:?}");
}

#[test]
fn sample_to_stdout_moves_report_to_stderr() {
    let out = bpgc(&["sample", "--params", "1", "1", "0.1", "1", "0.1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 6);
    assert!(stderr(&out).contains("\"command\": \"sample\""));
}

#[test]
fn report_file_round_trips_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = bpgc(&[
        "eval", "--params", "0.1", "0.3", "0.7", "1.1", "0.12345678901234568", "--report", s(&rep),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["params"]["m10"].as_f64(), Some(0.1));
    assert_eq!(r["params"]["m12"].as_f64(), Some(0.12345678901234568));
    assert!(r["versions"]["bpgc_core"].is_string());
    assert!(r["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

fn make_dataset(dir: &Path, n: &str, seed: u64) -> (std::path::PathBuf, Value) {
    let p = dir.join(format!("hospital_{seed}.csv"));
    let out = bpgc(&["make-dataset", "--template", "hospital", "--n", n, "--seed", &seed.to_string(), "--out", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    (p, json(&out))
}

#[test]
fn make_dataset_matches_published_summaries() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 1..=5 {
        let (p, r) = make_dataset(dir.path(), "500", seed);
        let pairs = read_pairs(&p);
        assert_eq!(pairs.len(), 500);
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / 500.0;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / 500.0;
        assert!((8.5..=11.5).contains(&mx), "mean x {mx}");
        assert!((12.0..=17.5).contains(&my), "mean y {my}");
        let d = &r["results"]["describe"];
        assert!((d["x"]["mean"].as_f64().unwrap() - mx).abs() < 1e-12);
        assert!(d["y"]["q1"].as_f64().unwrap() <= d["y"]["median"].as_f64().unwrap());
    }
    let (a, _) = make_dataset(dir.path(), "50", 9);
    let first = fs::read(&a).unwrap();
    let (b, _) = make_dataset(dir.path(), "50", 9);
    assert_eq!(first, fs::read(&b).unwrap());
    let out = bpgc(&["make-dataset", "--template", "hospital", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_hospital_analogue_recovers_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let mut fits = Vec::new();
    for seed in 100..120 {
        let (p, _) = make_dataset(dir.path(), "500", seed);
        let out = bpgc(&["fit", "--data", s(&p)]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let r = json(&out);
        assert_eq!(r["results"]["converged"], true);
        assert!(!r["results"]["trace"].as_array().unwrap().is_empty());
        let e = &r["estimates"];
        fits.push(["m10", "m01", "m11", "m02", "m12"].map(|k| e[k].as_f64().unwrap()));
    }
    for j in 0..5 {
        let v: Vec<f64> = fits.iter().map(|f| f[j]).collect();
        let mean = v.iter().sum::<f64>() / 20.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 19.0).sqrt();
        assert!(
            (HOSPITAL_ESTIMATES[j] - mean).abs() <= 1.96 * sd,
            "coordinate {j}: truth {} outside {mean} +- {}",
            HOSPITAL_ESTIMATES[j],
            1.96 * sd
        );
    }
}

#[test]
fn fit_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = dir.path().join("tiny.csv");
    fs::write(&tiny, "x,y\n1,2\n2,3.5\n0,1\n").unwrap();
    let out = bpgc(&["fit", "--data", s(&tiny)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("too few"), "{}", stderr(&out));

    let neg = dir.path().join("neg.csv");
    fs::write(&neg, "x,y\r\n1,2\r\n2,-3\r\n").unwrap();
    let out = bpgc(&["fit", "--data", s(&neg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let header = dir.path().join("header.csv");
    fs::write(&header, "y,x\n1,2\n").unwrap();
    let out = bpgc(&["fit", "--data", s(&header)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("header"));

    let out = bpgc(&["fit", "--data", s(&dir.path().join("absent.csv"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gof_self_comparison_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = make_dataset(dir.path(), "200", 3);
    let out = bpgc(&["gof", "--data", s(&p), "--self-compare", "--nperm", "99"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["results"]["d_stat"], 0.0);
    assert_eq!(r["results"]["raw_stat"], 0);
}

#[test]
fn gof_small_dataset_p_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = make_dataset(dir.path(), "10", 4);
    let out = bpgc(&["gof", "--data", s(&p), "--nperm", "99", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let p = json(&out)["results"]["p_value"].as_f64().unwrap();
    assert!((0.01..=1.0).contains(&p), "{p}");
}

#[test]
fn gof_hospital_analogue_accepts_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut accepted = 0;
    for seed in 200..220 {
        let (p, _) = make_dataset(dir.path(), "500", seed);
        let out = bpgc(&["gof", "--data", s(&p), "--seed", &seed.to_string()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let r = json(&out);
        assert!(r["estimates"].is_object());
        accepted += usize::from(r["results"]["p_value"].as_f64().unwrap() > 0.05);
    }
    assert!(accepted >= 18, "{accepted}/20");
}

#[test]
fn gof_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = make_dataset(dir.path(), "100", 5);
    let run = || {
        let mut r = json(&bpgc(&["gof", "--data", s(&p), "--seed", "3", "--nperm", "199"]));
        r["elapsed_seconds"] = Value::Null;
        r
    };
    assert_eq!(run(), run());
}

fn table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn simstudy_trend_case_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpgc(&[
        "simstudy", "--case", "1", "--sizes", "100,1000,10000", "--replicates", "20", "--seed", "3",
        "--nperm", "199", "--out", s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    for p in ["m10", "m01", "m11", "m02", "m12"] {
        assert_eq!(r["results"]["mae_decreasing"][p], true, "{p}: {}", r["results"]["per_size"]);
    }
    let t1 = table(&dir.path().join("table1.csv"));
    assert_eq!(t1.len(), 4);
    let t2 = table(&dir.path().join("table2.csv"));
    assert_eq!(t2.len(), 4);
    assert_eq!(t2[3][1], "1000");
    assert_eq!(table(&dir.path().join("replicates.csv")).len(), 61);
}

#[test]
fn simstudy_single_size_and_dispersed_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpgc(&[
        "simstudy", "--case", "4", "--sizes", "100", "--replicates", "10", "--nperm", "99", "--out", s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    assert!(r["results"]["mae_decreasing"].is_null());
    let t1 = table(&dir.path().join("table1.csv"));
    assert_eq!(t1.len(), 2);
    // estimates at n = 100 for (5,5,5,5,5) scatter widely
    let sd_col = t1[0].iter().position(|h| h == "sd_m10").unwrap();
    let sd: f64 = t1[1][sd_col].parse().unwrap();
    assert!(sd > 0.3, "sd_m10 = {sd}");
}

#[test]
fn simstudy_requires_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpgc(&["simstudy", "--sizes", "100", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = bpgc(&["simstudy", "--case", "5", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_bpgc"))
        .args(["eval", "--params", "1", "1", "0", "1", "0"])
        .env("BPGC_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BPGC_THREADS"));
}

#[test]
fn written_dataset_reads_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let out = bpgc(&["sample", "--params", "1", "1", "0.1", "1", "0.1", "--n", "50", "--seed", "2", "--out", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let batch = bpgc_core::exact_sample(
        &bpgc_core::Params::from_array([1.0, 1.0, 0.1, 1.0, 0.1]).unwrap(),
        50,
        2,
    )
    .unwrap();
    let read: Vec<Observation> = read_pairs(&p)
        .into_iter()
        .map(|(x, y)| Observation::from_reals(x, y).unwrap())
        .collect();
    assert_eq!(Dataset::new(read).unwrap().observations(), &batch.draws[..]);
}

#[test]
fn histogram_covers_every_observation() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = make_dataset(dir.path(), "300", 6);
    let h = dir.path().join("h.csv");
    let out = bpgc(&["histogram", "--data", s(&p), "--out", s(&h)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = table(&h);
    assert_eq!(rows[0], ["x", "y_lo", "y_hi", "count", "density"]);
    let pairs = read_pairs(&p);
    let x_max = pairs.iter().map(|p| p.0 as usize).max().unwrap();
    assert_eq!(rows.len() - 1, (x_max + 1) * 30);
    let total: u64 = rows[1..].iter().map(|r| r[3].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 300);
    let x5 = pairs.iter().filter(|p| p.0 == 5.0).count() as u64;
    let got: u64 = rows[1..].iter().filter(|r| r[0] == "5").map(|r| r[3].parse::<u64>().unwrap()).sum();
    assert_eq!(got, x5);
}
