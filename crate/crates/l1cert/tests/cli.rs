use std::path::{Path, PathBuf};

use l1cert::cli::{CliError, EXIT_ARGUMENT, EXIT_RESOURCE, EXIT_SOLVER};
use l1cert::matrix_io::{format_matrix, format_vector, parse_matrix, read_matrix};
use l1cert::run_with;
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn l1cert(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("l1cert").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "stderr: {}", r.err);
    serde_json::from_str(&r.out).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn error_line(r: &Run) -> Value {
    let lines: Vec<&str> = r.err.lines().collect();
    assert_eq!(lines.len(), 1, "{}", r.err);
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn gen_writes_matrix_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.txt");
    let o = out.to_str().unwrap();
    let r = l1cert(&["gen", "--family", "hadamard", "--k", "4", "--n", "8", "--seed", "9", "--out", o]);
    let v = json(&r);
    assert_eq!(v["spec"]["family"], "hadamard");
    assert!(r.err.contains("seed=9"));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.txt.json")).unwrap()).unwrap();
    assert_eq!(side["k"], 4);
    assert_eq!(side["n"], 8);
    assert_eq!(side["seed"], 9);
    assert_eq!(side["normalize"], false);
    assert_eq!(side["schema_version"], 1);
    let a = read_matrix(&out).unwrap();
    assert_eq!((a.k(), a.n(), a.seed()), (4, 8, Some(9)));
    assert!(a.row_major().iter().all(|v| v.abs() == 1.0));

    let first = std::fs::read_to_string(&out).unwrap();
    l1cert(&["gen", "--family", "hadamard", "--k", "4", "--n", "8", "--seed", "9", "--out", o]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn gen_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("x.txt");
    let o = o.to_str().unwrap();
    for args in [
        vec!["gen", "--family", "gaussian", "--k", "3", "--out", o],
        vec!["gen", "--family", "hadamard", "--k", "3", "--n", "6", "--out", o],
        vec!["gen", "--family", "nope", "--k", "3", "--n", "6", "--out", o],
        vec!["gen", "--family", "conv", "--k", "10", "--out", o],
    ] {
        let r = l1cert(&args);
        assert_eq!(r.code, EXIT_ARGUMENT, "{args:?}");
        assert_eq!(error_line(&r)["error"], "argument");
    }
    let r = l1cert(&["gen", "--family", "gaussian", "--k", "3", "--out", o]);
    let msg = error_line(&r)["message"].as_str().unwrap().to_string();
    assert!(msg.contains("--n"), "{msg}");
}

#[test]
fn certify_identity() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.txt", &format_matrix(8, 8, |i, j| if i == j { 1.0 } else { 0.0 }));
    let v = json(&l1cert(&["certify", &f, "--full", "--upper"]));
    let s: Vec<u64> = v["results"].as_array().unwrap().iter().map(|r| r["s"].as_u64().unwrap()).collect();
    assert_eq!(s, vec![8, 8, 8, 8]);
    assert_eq!(v["results"][1]["certificate"]["kind"], "alpha1");
}

#[test]
fn certify_chain_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    let f = f.to_str().unwrap();
    json(&l1cert(&["gen", "--family", "gaussian", "--k", "10", "--n", "22", "--seed", "4", "--normalize", "--out", f]));
    let v = json(&l1cert(&["certify", f, "--full", "--upper"]));
    let names: Vec<&str> = v["results"].as_array().unwrap().iter().map(|r| r["bound"].as_str().unwrap()).collect();
    assert_eq!(names, ["s_mu", "s_alpha1", "s_alphas", "s_bar"]);
    let s: Vec<u64> = v["results"].as_array().unwrap().iter().map(|r| r["s"].as_u64().unwrap()).collect();
    assert!(s.windows(2).all(|w| w[0] <= w[1]), "{s:?}");
}

#[test]
fn resource_guard_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    let f = f.to_str().unwrap();
    json(&l1cert(&["gen", "--family", "gaussian", "--k", "6", "--n", "12", "--seed", "1", "--normalize", "--out", f]));
    let r = l1cert(&["certify", f, "--full", "--lp-limit", "100"]);
    assert_eq!(r.code, EXIT_RESOURCE);
    assert_eq!(error_line(&r)["error"], "resource");
    let partial: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(partial["results"][2]["interrupted"], true);

    let r = l1cert(&["oracle", f, "--s", "6", "--oracle-limit", "1000"]);
    assert_eq!(r.code, EXIT_RESOURCE);
}

#[test]
fn error_codes() {
    use l1cert_core::lp::LpStatus;
    use l1cert_core::Error;
    let e = CliError::from(Error::Solver { status: LpStatus::IterationLimit, context: "x".into() });
    assert_eq!(e.code, EXIT_SOLVER);
    let e = CliError::from(Error::TooLarge { what: "x", size: 2, limit: 1 });
    assert_eq!(e.code, EXIT_RESOURCE);
    assert_eq!(CliError::from(Error::RankDeficient).code, EXIT_ARGUMENT);
}

#[test]
fn oracle_on_pair() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.txt", "1 2\n1 1\n");
    let v = json(&l1cert(&["oracle", &f, "--s", "1", "--star", "--circuits"]));
    assert_eq!(v["gammahat"], 0.5);
    assert_eq!(v["gammahat_circuits"], 0.5);
    assert_eq!(v["s_star"], 0);
    assert_eq!(v["good"], false);

    let v = json(&l1cert(&["disprove", &f]));
    assert_eq!(v["s_bar"], 0);
    assert_eq!(v["disproved"], true);
    assert_eq!(v["certificate"]["kind"], "sca");
    assert_eq!(v["certificate"]["witness"]["u_support"], serde_json::json!([0]));
}

#[test]
fn alpha_commands_write_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    let f = f.to_str().unwrap();
    json(&l1cert(&["gen", "--family", "fourier", "--k", "5", "--n", "12", "--seed", "2", "--normalize", "--out", f]));
    let w = dir.path().join("y.txt");
    let v = json(&l1cert(&["alpha1", f, "--witness", w.to_str().unwrap()]));
    let a1 = v["alpha1"].as_f64().unwrap();
    assert!((0.0..=1.0 + 1e-9).contains(&a1));
    assert_eq!(v["s_alpha1"].as_u64().unwrap() >= 1, a1 < 0.5);
    assert_eq!(v["certificate"]["witness_file"], w.to_str().unwrap());
    let (k, n, _) = parse_matrix(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!((k, n), (5, 12));

    let v = json(&l1cert(&["alphas", f, "--s", "1", "--norm", "linf", "--beta", "3"]));
    assert_eq!(v["beta"], 3.0);
    assert_eq!(v["norm"], "linf");
    let v2 = json(&l1cert(&["alphas", f, "--s", "1"]));
    assert!(v["alpha_s"].as_f64().unwrap() >= v2["alpha_s"].as_f64().unwrap() - 1e-8);
    assert_eq!(v2["beta"], "inf");

    let r = l1cert(&["alpha1", f, "--beta", "2"]);
    assert_eq!(r.code, EXIT_ARGUMENT);
}

#[test]
fn recover_with_bound() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    let fs = f.to_str().unwrap();
    json(&l1cert(&["gen", "--family", "gaussian", "--k", "12", "--n", "24", "--seed", "8", "--normalize", "--out", fs]));
    let a = read_matrix(&f).unwrap();
    let mut w = vec![0.0; 24];
    w[3] = 1.5;
    w[17] = -0.7;
    let y = write(dir.path(), "y.txt", &format_vector(&a.apply(&w)));
    let t = write(dir.path(), "w.txt", &format_vector(&w));
    let v = json(&l1cert(&["recover", fs, "--y", &y, "--truth", &t, "--s", "1"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["seeds"]["matrix"], 8);
    assert!(v["linf_error"].as_f64().unwrap() < 1e-6);
    // w is 2-sparse; measured against s = 1 the tail is 0.7
    if v["bound_used"] == "noiseless" {
        assert_eq!(v["held"], true);
        assert!(v["bound_value"].as_f64().unwrap() >= 1.4);
    }

    let v = json(&l1cert(&["recover", fs, "--y", &y, "--eps", "0.01", "--norm", "linf", "--truth", &t, "--s", "1", "--beta", "4"]));
    assert!(v["l1_error"].as_f64().unwrap() <= v["bound_value"].as_f64().unwrap_or(f64::INFINITY));

    let short = write(dir.path(), "short.txt", "1 2 3");
    assert_eq!(l1cert(&["recover", fs, "--y", &short]).code, EXIT_ARGUMENT);
}

#[test]
fn table_csv() {
    let r = l1cert(&["table", "--family", "hadamard", "--n", "32", "--fractions", "0.25,0.5", "--seed", "7", "--full", "--restarts", "4"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert!(lines[0].starts_with("# l1cert table schema_version=1 family=hadamard n=32 seed=7"));
    assert_eq!(lines[1], "m,s_mu,s_alpha1,s_alphas,s_bar,cpu_seconds");
    assert_eq!(lines.len(), 4);
    for (line, m) in lines[2..].iter().zip(["8", "16"]) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], m);
        let s: Vec<usize> = cells[1..5].iter().map(|c| c.parse().unwrap()).collect();
        assert!(s.windows(2).all(|w| w[0] <= w[1]), "{line}");
    }
    let r = l1cert(&["table", "--family", "gaussian", "--n", "20", "--fractions", "0.5", "--no-upper"]);
    assert!(r.out.lines().nth(2).unwrap().ends_with(char::is_numeric));
    assert!(r.out.lines().nth(2).unwrap().contains(",NA,NA,"));
    assert_eq!(l1cert(&["table", "--family", "gaussian", "--n", "20", "--fractions", "2"]).code, EXIT_ARGUMENT);
}

#[test]
fn threads_and_help() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.txt", "2 3\n1 0 1\n0 1 1\n");
    let a = json(&l1cert(&["mu", &f, "--threads", "1"]));
    std::env::set_var("L1CERT_THREADS", "2");
    let b = json(&l1cert(&["mu", &f]));
    std::env::remove_var("L1CERT_THREADS");
    assert_eq!(a["mu"], b["mu"]);
    assert!(b["mu"].as_f64().unwrap() > 0.49);
    let r = l1cert(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("certify"));
}
