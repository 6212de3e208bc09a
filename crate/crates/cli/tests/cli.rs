use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn expband() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_expband"));
    c.env_remove("EXPBAND_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    expband().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "status {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn paradigm_is_a_limit_case() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "p.csv", "t,value\n1,3\n2,0\n3,1\n4,2\n");
    let doc = json(&run(&["fit-minimax", &data]));
    assert_eq!(doc["taxonomy"]["tag"], "LimitNegInf");
    assert_eq!(doc["model"]["kind"], "limit_neg_inf");
    let values: Vec<f64> = doc["model"]["values"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(values, vec![2.0, 1.0, 1.0, 1.0]);
    assert_eq!(num(&doc["error"]), 1.0);
    assert_eq!(doc["input"]["rows"], 4);
    assert_eq!(doc["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn constructed_quartet() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "q.csv", "0,5.1\n1,3.326123\n2,2.571518\n4,1.441341\n");
    let doc = json(&run(&["fit-quartet", &data]));
    let m = &doc["model"];
    assert_eq!(m["kind"], "exponential");
    assert!((num(&m["a"]) - 4.0).abs() < 1e-5);
    assert!((num(&m["k"]) + 0.5).abs() < 1e-5);
    assert!((num(&m["b"]) - 1.0).abs() < 1e-5);
    assert!((num(&doc["error"]) - 0.1).abs() < 1e-5);
    assert_eq!(doc["quartet"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn plot_marks_certificate_indices() {
    let dir = TempDir::new().unwrap();
    let data = write(
        dir.path(),
        "d.csv",
        "0,2.0\n0.4,1.2\n1.1,0.9\n1.5,0.35\n2.3,0.4\n3.0,0.05\n",
    );
    let plot = dir.path().join("plot.csv");
    let doc = json(&run(&["fit-minimax", &data, "--plot", plot.to_str().unwrap()]));
    let text = std::fs::read_to_string(&plot).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,T,fit,residual,lower,upper,extremal");
    let marked: Vec<u64> = lines
        .enumerate()
        .filter(|(_, l)| l.ends_with(",1"))
        .map(|(i, _)| i as u64)
        .collect();
    let cert: Vec<u64> = doc["certificate"]["indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(marked, cert);
    assert!(cert.len() >= 4);
}

#[test]
fn fixed_rate_band_and_line() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "d.csv", "0,1\n1,0.2\n2,0.9\n3,0.1\n");
    let doc = json(&run(&["band", &data, "--k", "-1"]));
    let band = &doc["band"];
    let n = band["fitted"].as_array().unwrap().len();
    assert_eq!(n, 4);
    for i in 0..n {
        let w = num(&band["upper"][i]) - num(&band["lower"][i]);
        assert!((w - 2.0 * num(&doc["error"])).abs() < 1e-12);
    }
    let line = json(&run(&["band", &data, "--k", "0"]));
    let fit_line = json(&run(&["fit-line", &data]));
    assert_eq!(line["model"], fit_line["model"]);
    assert_eq!(line["model"]["kind"], "line");
}

#[test]
fn range_restricted_fit() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "d.csv", "0,2.0\n0.4,1.2\n1.1,0.9\n1.5,0.35\n2.3,0.4\n3.0,0.05\n");
    let doc = json(&run(&["fit-minimax", &data, "--k-min", "-0.5", "--k-max", "-0.1", "--tol", "1e-8"]));
    let k = num(&doc["model"]["k"]);
    assert!((-0.5..=-0.1).contains(&k));
}

#[test]
fn classify_and_stdin() {
    let mut child = expband()
        .args(["classify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1,1\n2,0\n3,2\n4,0\n").unwrap();
    let doc = json(&child.wait_with_output().unwrap());
    assert_eq!(doc["command"], "classify");
    assert_eq!(doc["input"]["path"], "-");
    assert!(doc["taxonomy"]["tag"].is_string());
    assert!(doc.get("model").is_none());
}

#[test]
fn expar_simulate_then_fit() {
    let dir = TempDir::new().unwrap();
    let series = dir.path().join("x.csv");
    let sim = json(&run(&[
        "simulate-expar",
        "--count",
        "100",
        "--noise",
        "0",
        "--seed",
        "1",
        "--data-out",
        series.to_str().unwrap(),
    ]));
    assert_eq!(sim["seed"], 1);
    assert_eq!(sim["data"]["values"].as_array().unwrap().len(), 100);
    let doc = json(&run(&["fit-tac", series.to_str().unwrap(), "--model", "expar"]));
    let p = &doc["params"];
    let pairs = [
        (num(&p["c0"]), -1.49),
        (num(&p["c"][0]), 1.65),
        (num(&p["c"][1]), 0.54),
        (num(&p["pi"][0]), -0.44),
        (num(&p["pi"][1]), -0.84),
        (num(&p["gamma"]), 1.3),
        (num(&p["z"][0]), 2.52),
        (num(&p["z"][1]), 3.86),
    ];
    for (got, want) in pairs {
        assert!((got - want).abs() < 0.1, "{got} vs {want}");
    }
    assert!(num(&doc["mse"]) < 1e-4);
    assert_eq!(doc["tac"]["model"], "expar");
    assert!(doc["tac"]["nonlinear"]["gamma"].is_number());
}

#[test]
fn demand_simulate_then_fit() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("q.csv");
    json(&run(&["simulate-demand", "--sd", "0", "--data-out", data.to_str().unwrap()]));
    let doc = json(&run(&[
        "fit-tac",
        data.to_str().unwrap(),
        "--model",
        "demand",
        "--grid",
        "d=-2:-0.01:12",
    ]));
    assert!((num(&doc["params"]["q0"]) - 48.0).abs() < 1e-3);
    assert!((num(&doc["params"]["k"]) - 3.42).abs() < 1e-4);
    assert!((num(&doc["params"]["alpha"]) - 0.006).abs() < 1e-7);
    assert_eq!(doc["norm"], "l2");
}

#[test]
fn exponential_tac_fit() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..20)
        .map(|i| {
            let x = i as f64 * 0.25;
            format!("{x},{}\n", 3.0 * (-0.7 * x).exp() + 0.5)
        })
        .collect();
    let data = write(dir.path(), "e.csv", &rows);
    let doc = json(&run(&["fit-tac", &data, "--model", "exp"]));
    assert!((num(&doc["model"]["k"]) + 0.7).abs() < 1e-6);
    assert!(num(&doc["rss"]) < 1e-12);
}

#[test]
fn seed_from_environment_and_flag() {
    let a = json(&expband().args(["simulate-demand"]).env("EXPBAND_SEED", "7").output().unwrap());
    let b = json(&run(&["simulate-demand", "--seed", "7"]));
    let c = json(&expband().args(["simulate-demand", "--seed", "8"]).env("EXPBAND_SEED", "7").output().unwrap());
    assert_eq!(a["seed"], 7);
    assert_eq!(a["data"], b["data"]);
    assert_eq!(c["seed"], 8);
    assert_ne!(a["data"], c["data"]);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "d.csv", "0,2.0\n0.4,1.2\n1.1,0.9\n1.5,0.35\n2.3,0.4\n3.0,0.05\n");
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    let a = strip(json(&run(&["fit-minimax", &data])));
    let b = strip(json(&run(&["fit-minimax", &data])));
    assert_eq!(a, b);
    let a = strip(json(&run(&["simulate-expar", "--noise", "0.05", "--seed", "3"])));
    let b = strip(json(&run(&["simulate-expar", "--noise", "0.05", "--seed", "3"])));
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "d.csv", "1,3\n2,0\n3,1\n4,2\n");
    let out = dir.path().join("r.json");
    let o = run(&["fit-minimax", &data, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc["command"], "fit-minimax");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(run(&["fit-minimax", "/nonexistent/file.csv"])), 2);
    let dup = write(dir.path(), "dup.csv", "0,1\n0,2\n1,3\n");
    assert_eq!(code(run(&["fit-minimax", &dup])), 2);
    let five = write(dir.path(), "five.csv", "0,1\n1,2\n2,0\n3,1\n4,5\n");
    assert_eq!(code(run(&["fit-quartet", &five])), 2);
    assert_eq!(code(run(&["fit-tac", &five, "--model", "exp", "--norm", "max"])), 2);
    assert_eq!(code(run(&["fit-tac", &five, "--model", "exp", "--grid", "q=1:2"])), 2);
    assert_eq!(code(run(&["no-such-command"])), 2);
    // Every node of a vanishing rate grid gives a singular design.
    assert_eq!(
        code(run(&["fit-tac", &five, "--model", "exp", "--grid", "d=-1e-300:1e-300"])),
        3
    );
}
