//! `l1cert` subcommands.
//!
//! Results go to stdout as one JSON document (CSV for `table`); stderr gets a
//! `seed=...` line and, on failure, one JSON line
//! `{"error": kind, "exit_code": code, "message": text}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l1cert_core::bounds::{
    compute_alphas_with, s_bound_alpha1_with, s_bound_alphas_with, s_bound_mu, CertifyOptions, GoodnessCertificate,
    Witness, DEFAULT_LP_LIMIT,
};
use l1cert_core::gen::{generate, Family, GenSpec, CONV_GRID};
use l1cert_core::lower::{s_upper_bound, ScaConfig};
use l1cert_core::oracle::{gammahat_circuits, gammahat_exact, s_star_exact, DEFAULT_ORACLE_LIMIT, ORACLE_GAP_TOL};
use l1cert_core::recovery::{
    l1_recover, noiseless_error_bound, noisy_error_bound, BoundUsed, ErrorBoundInputs, RecoveryProblem,
    RecoveryReport,
};
use l1cert_core::{hard_threshold, mutual_incoherence, Beta, Error, ObservationNorm, SensingMatrix};
use serde_json::{json, Value};

use crate::matrix_io::{
    format_matrix, format_sensing_matrix, read_matrix, read_vector, sidecar_path, write_text, Sidecar,
};
use crate::report::{beta_json, certificate_json, recovery_json};
use crate::table::{format_row, header, parse_fractions, row_counts, run_row, TableConfig};
use crate::SCHEMA_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "l1cert", version, about = "Verifiable bounds on the sparsity levels a sensing matrix recovers by l1 minimization")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Largest alpha_s program (nonzeros) that will be attempted
    #[arg(long, global = true, default_value_t = DEFAULT_LP_LIMIT)]
    lp_limit: u64,
    /// Largest oracle enumeration (vertices of P_s) that will be attempted
    #[arg(long, global = true, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: u64,
    /// Worker threads; falls back to L1CERT_THREADS, then to all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Fourier,
    Hadamard,
    Conv,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Fourier => Family::FourierRows,
            FamilyArg::Hadamard => Family::HadamardCut,
            FamilyArg::Conv => Family::Convolution,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
}

impl From<NormArg> for ObservationNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => ObservationNorm::L1,
            NormArg::L2 => ObservationNorm::L2,
            NormArg::Linf => ObservationNorm::Linf,
        }
    }
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    let v = match s {
        "inf" | "infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number or `inf`"))?,
    };
    Beta::new(v).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct BetaOpts {
    /// Bound on the dual norm of the corrector columns (`inf` for none)
    #[arg(long, default_value = "inf", value_parser = parse_beta)]
    beta: Beta,
    /// Norm measuring observation residuals
    #[arg(long, value_enum, default_value = "l2")]
    norm: NormArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a benchmark matrix and its metadata sidecar
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Rows (fixed to 992 for conv)
        #[arg(long)]
        k: Option<usize>,
        /// Columns (fixed to 1024 for conv)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale every column to unit Euclidean norm
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mutual incoherence and the sparsity level it certifies
    Mu { file: PathBuf },
    /// alpha_1 and the improved level from its corrector
    Alpha1 {
        file: PathBuf,
        #[command(flatten)]
        beta: BetaOpts,
        /// Write the corrector Y here
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// alpha_s for a single s
    Alphas {
        file: PathBuf,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        beta: BetaOpts,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Lower bounds on the largest good sparsity level
    Certify {
        file: PathBuf,
        /// Also run the full alpha_s program
        #[arg(long)]
        full: bool,
        /// Also compute the SCA upper bound
        #[arg(long)]
        upper: bool,
        #[command(flatten)]
        beta: BetaOpts,
    },
    /// SCA lower bounds on gammahat_s and the resulting upper bound on s
    Disprove {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        s_start: usize,
        #[arg(long, default_value_t = ScaConfig::default().restarts)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// l1 recovery from observations, with an error bound when the truth is known
    Recover {
        file: PathBuf,
        /// Observations
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value = "l2")]
        norm: NormArg,
        /// True signal, enables the error columns
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Sparsity level the error bound is stated for
        #[arg(long)]
        s: Option<usize>,
        /// Known gammahat_s(A, beta); computed as alpha_s when omitted
        #[arg(long)]
        gammahat: Option<f64>,
        /// beta paired with gammahat (required for noisy bounds)
        #[arg(long, value_parser = parse_beta)]
        beta: Option<Beta>,
        /// Optimality slack in the l1 objective
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
    },
    /// Exact gammahat_s by enumeration (tiny matrices only)
    Oracle {
        file: PathBuf,
        #[arg(long)]
        s: usize,
        /// Also report the exact largest good level
        #[arg(long)]
        star: bool,
        /// Cross-check with circuit enumeration
        #[arg(long)]
        circuits: bool,
    },
    /// Bound table for one family, one CSV row per row count
    Table {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// `0.1,0.2` or `0.1..0.9`
        #[arg(long, default_value = "0.1..0.9")]
        fractions: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the alpha_s column
        #[arg(long)]
        full: bool,
        /// Skip the SCA upper bound
        #[arg(long)]
        no_upper: bool,
        #[arg(long, default_value_t = ScaConfig::default().restarts)]
        restarts: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Output produced before the failure.
    pub partial: Option<String>,
}

impl CliError {
    fn argument(message: impl Into<String>) -> Self {
        Self { code: EXIT_ARGUMENT, message: message.into(), partial: None }
    }

    fn kind(&self) -> &'static str {
        match self.code {
            EXIT_RESOURCE => "resource",
            EXIT_SOLVER => "solver",
            _ => "argument",
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TooLarge { .. } => EXIT_RESOURCE,
        Error::Solver { .. } => EXIT_SOLVER,
        Error::Interrupted { cause, .. } => exit_code(cause),
        _ => EXIT_ARGUMENT,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = exit_code(&e);
        let message = match &e {
            Error::Interrupted { cause, .. } => cause.to_string(),
            _ => e.to_string(),
        };
        Self { code, message, partial: None }
    }
}

impl From<crate::matrix_io::FormatError> for CliError {
    fn from(e: crate::matrix_io::FormatError) -> Self {
        Self::argument(e.0)
    }
}

struct Output {
    stdout: String,
    seed: Option<u64>,
}

fn json_out(v: Value, seed: Option<u64>) -> Output {
    Output { stdout: format!("{}\n", serde_json::to_string_pretty(&v).expect("plain JSON")), seed }
}

/// Runs the command line with process stdio; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            // keep the details (missing argument names), drop usage and hints
            let msg = e.to_string();
            let detail: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("tip:") && !l.starts_with("For more"))
                .filter(|l| !l.is_empty())
                .collect();
            let line = detail.join(" ");
            let line = line.trim_start_matches("error: ");
            report_error(err, &CliError::argument(if line.is_empty() { "invalid arguments" } else { line }));
            return EXIT_ARGUMENT;
        }
    };
    let threads = cli.global.threads.or_else(|| std::env::var("L1CERT_THREADS").ok().and_then(|v| v.parse().ok()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            report_error(err, &CliError::argument(format!("cannot start thread pool: {e}")));
            return EXIT_ARGUMENT;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(o) => {
            let _ = writeln!(err, "seed={}", o.seed.map_or_else(|| "none".into(), |s| s.to_string()));
            let _ = out.write_all(o.stdout.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            if let Some(p) = &e.partial {
                let _ = out.write_all(p.as_bytes());
            }
            report_error(err, &e);
            e.code
        }
    }
}

fn report_error(err: &mut dyn Write, e: &CliError) {
    let line = json!({ "error": e.kind(), "exit_code": e.code, "message": e.message });
    let _ = writeln!(err, "{line}");
}

fn certify_opts(g: &GlobalOpts) -> CertifyOptions {
    CertifyOptions { lp_limit: g.lp_limit, ..Default::default() }
}

fn write_witness(c: &GoodnessCertificate, path: Option<&Path>) -> Result<Option<String>, CliError> {
    let (Some(path), Some(Witness::Corrector(y))) = (path, &c.witness) else {
        return Ok(None);
    };
    let m = y.y();
    write_text(path, &format_matrix(m.nrows(), m.ncols(), |i, j| m[(i, j)]))?;
    Ok(Some(path.display().to_string()))
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { family, k, n, seed, normalize, out } => {
            let family = Family::from(*family);
            let (k, n) = match (family, k, n) {
                (Family::Convolution, k, n) => {
                    (k.unwrap_or(CONV_GRID * (CONV_GRID - 1)), n.unwrap_or(CONV_GRID * CONV_GRID))
                }
                (_, Some(k), Some(n)) => (*k, *n),
                _ => return Err(CliError::argument("--k and --n are required for this family")),
            };
            let spec = GenSpec { family, k, n, seed: *seed, normalize: *normalize };
            let a = generate(&spec)?;
            write_text(out, &format_sensing_matrix(&a))?;
            let side = sidecar_path(out);
            let sc = Sidecar { schema_version: SCHEMA_VERSION, spec };
            write_text(&side, &serde_json::to_string_pretty(&sc).expect("plain JSON"))?;
            Ok(json_out(
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "gen",
                    "out": out.display().to_string(),
                    "sidecar": side.display().to_string(),
                    "spec": spec,
                }),
                Some(*seed),
            ))
        }
        Command::Mu { file } => {
            let a = read_matrix(file)?;
            let t = Instant::now();
            let mu = mutual_incoherence(&a)?;
            let c = s_bound_mu(&a)?;
            Ok(json_out(
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "mu",
                    "mu": mu,
                    "s_mu": c.s_certified,
                    "certificate": certificate_json(&c, None),
                    "seconds": t.elapsed().as_secs_f64(),
                }),
                a.seed(),
            ))
        }
        Command::Alpha1 { file, beta, witness } => {
            let a = read_matrix(file)?;
            let t = Instant::now();
            let c = s_bound_alpha1_with(&a, beta.beta, beta.norm.into(), &certify_opts(g))?;
            let alpha1 = match &c.witness {
                Some(Witness::Corrector(y)) => y.column_bound(&a, 1)?,
                _ => unreachable!("alpha_1 certificates carry their corrector"),
            };
            let wf = write_witness(&c, witness.as_deref())?;
            Ok(json_out(
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "alpha1",
                    "alpha1": alpha1,
                    "s_alpha1": c.s_certified,
                    "certificate": certificate_json(&c, wf.as_deref()),
                    "seconds": t.elapsed().as_secs_f64(),
                }),
                a.seed(),
            ))
        }
        Command::Alphas { file, s, beta, witness } => {
            let a = read_matrix(file)?;
            let t = Instant::now();
            let (value, y) = compute_alphas_with(&a, *s, beta.beta, beta.norm.into(), &certify_opts(g))?;
            let wf = match witness {
                Some(p) => {
                    let m = y.y();
                    write_text(p, &format_matrix(m.nrows(), m.ncols(), |i, j| m[(i, j)]))?;
                    Some(p.display().to_string())
                }
                None => None,
            };
            Ok(json_out(
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "alphas",
                    "s": s,
                    "alpha_s": value,
                    "certifies": value < 0.5,
                    "beta": beta_json(beta.beta),
                    "norm": ObservationNorm::from(beta.norm),
                    "witness_file": wf,
                    "seconds": t.elapsed().as_secs_f64(),
                }),
                a.seed(),
            ))
        }
        Command::Certify { file, full, upper, beta } => certify(g, file, *full, *upper, beta),
        Command::Disprove { file, s_start, restarts, seed } => {
            let a = read_matrix(file)?;
            if *restarts == 0 {
                return Err(CliError::argument("--restarts must be at least 1"));
            }
            let cfg = ScaConfig { restarts: *restarts, rng_seed: *seed, ..ScaConfig::default() };
            let t = Instant::now();
            let ub = s_upper_bound(&a, &cfg, *s_start)?;
            let lbs: Vec<Value> = ub.lower_bounds.iter().map(|(s, v)| json!({ "s": s, "lower_bound": v })).collect();
            Ok(json_out(
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "disprove",
                    "s_bar": ub.s_bar,
                    "disproved": ub.disproved,
                    "lower_bounds": lbs,
                    "certificate": certificate_json(&ub.certificate(), None),
                    "matrix_seed": a.seed(),
                    "seconds": t.elapsed().as_secs_f64(),
                }),
                Some(*seed),
            ))
        }
        Command::Recover { file, y, eps, norm, truth, s, gammahat, beta, nu } => {
            recover(g, file, y, *eps, (*norm).into(), truth.as_deref(), *s, *gammahat, *beta, *nu)
        }
        Command::Oracle { file, s, star, circuits } => {
            let a = read_matrix(file)?;
            let t = Instant::now();
            let value = gammahat_exact(&a, *s, g.oracle_limit)?;
            let mut v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "oracle",
                "s": s,
                "gammahat": value,
                "good": value < 0.5 - ORACLE_GAP_TOL,
            });
            if *circuits {
                v["gammahat_circuits"] = json!(gammahat_circuits(&a, *s, g.oracle_limit)?);
            }
            if *star {
                v["s_star"] = json!(s_star_exact(&a, g.oracle_limit)?);
            }
            v["seconds"] = json!(t.elapsed().as_secs_f64());
            Ok(json_out(v, a.seed()))
        }
        Command::Table { family, n, fractions, seed, full, no_upper, restarts } => {
            let fractions = parse_fractions(fractions).map_err(CliError::argument)?;
            if *restarts == 0 {
                return Err(CliError::argument("--restarts must be at least 1"));
            }
            let family = Family::from(*family);
            let n = if family == Family::Convolution { CONV_GRID * CONV_GRID } else { *n };
            let cfg = TableConfig {
                family,
                n,
                fractions,
                seed: *seed,
                full: *full,
                upper: !*no_upper,
                sca: ScaConfig { restarts: *restarts, ..ScaConfig::default() },
                certify: certify_opts(g),
            };
            let mut csv = header(&cfg);
            for m in row_counts(&cfg) {
                match run_row(&cfg, m) {
                    Ok(row) => csv.push_str(&format_row(&row)),
                    Err(e) => return Err(CliError { partial: Some(csv), ..CliError::from(e) }),
                }
            }
            Ok(Output { stdout: csv, seed: Some(*seed) })
        }
    }
}

fn certify(g: &GlobalOpts, file: &Path, full: bool, upper: bool, beta: &BetaOpts) -> Result<Output, CliError> {
    let a = read_matrix(file)?;
    let norm: ObservationNorm = beta.norm.into();
    let opts = certify_opts(g);
    let mut results = Vec::new();
    let entry = |name: &str, c: &GoodnessCertificate, secs: f64| {
        json!({ "bound": name, "s": c.s_upper.unwrap_or(c.s_certified), "seconds": secs, "certificate": certificate_json(c, None) })
    };
    let doc = |results: &[Value]| {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "certify",
            "k": a.k(),
            "n": a.n(),
            "results": results,
        })
    };
    let t = Instant::now();
    let mu = s_bound_mu(&a)?;
    results.push(entry("s_mu", &mu, t.elapsed().as_secs_f64()));
    let t = Instant::now();
    let a1 = s_bound_alpha1_with(&a, beta.beta, norm, &opts)?;
    results.push(entry("s_alpha1", &a1, t.elapsed().as_secs_f64()));
    let mut best = mu.s_certified.max(a1.s_certified);
    if full {
        let t = Instant::now();
        match s_bound_alphas_with(&a, beta.beta, norm, &opts) {
            Ok(c) => {
                best = best.max(c.s_certified);
                results.push(entry("s_alphas", &c, t.elapsed().as_secs_f64()));
            }
            Err(e) => {
                if let Error::Interrupted { best: partial, .. } = &e {
                    results.push(json!({
                        "bound": "s_alphas",
                        "interrupted": true,
                        "s": partial.s_certified,
                        "seconds": t.elapsed().as_secs_f64(),
                        "certificate": certificate_json(partial, None),
                    }));
                }
                let partial = json_out(doc(&results), a.seed()).stdout;
                return Err(CliError { partial: Some(partial), ..CliError::from(e) });
            }
        }
    }
    if upper {
        let t = Instant::now();
        let ub = s_upper_bound(&a, &ScaConfig::default(), best + 1)?;
        results.push(entry("s_bar", &ub.certificate(), t.elapsed().as_secs_f64()));
    }
    Ok(json_out(doc(&results), a.seed()))
}

#[allow(clippy::too_many_arguments)]
fn recover(
    g: &GlobalOpts,
    file: &Path,
    y: &Path,
    eps: f64,
    norm: ObservationNorm,
    truth: Option<&Path>,
    s: Option<usize>,
    gammahat: Option<f64>,
    beta: Option<Beta>,
    nu: f64,
) -> Result<Output, CliError> {
    let a = read_matrix(file)?;
    let y = read_vector(y)?;
    if y.len() != a.k() {
        return Err(CliError::argument(format!("observations have length {}, expected {}", y.len(), a.k())));
    }
    let truth = truth.map(read_vector).transpose()?;
    if let Some(w) = &truth {
        if w.len() != a.n() {
            return Err(CliError::argument(format!("truth has length {}, expected {}", w.len(), a.n())));
        }
    }
    let p = RecoveryProblem { a: a.clone(), y, epsilon: eps, norm };
    let x_hat = l1_recover(&p)?;
    let bound = match (&truth, s) {
        (Some(w), Some(s)) => error_bound(g, &a, &p, &x_hat, w, s, gammahat, beta, nu)?,
        _ => None,
    };
    let report = RecoveryReport::new(&p, x_hat, truth.as_deref(), bound);
    Ok(json_out(recovery_json(&report, json!({ "matrix": a.seed() })), a.seed()))
}

/// The noiseless bound when `eps = 0`, the noisy one otherwise; `None` when
/// the level is not certified.
#[allow(clippy::too_many_arguments)]
fn error_bound(
    g: &GlobalOpts,
    a: &SensingMatrix,
    p: &RecoveryProblem,
    x_hat: &[f64],
    w: &[f64],
    s: usize,
    gammahat: Option<f64>,
    beta: Option<Beta>,
    nu: f64,
) -> Result<Option<(BoundUsed, f64)>, CliError> {
    let beta = beta.unwrap_or(Beta::INFINITY);
    let gh = match gammahat {
        Some(v) => v,
        None => compute_alphas_with(a, s, beta, p.norm, &certify_opts(g))?.0,
    };
    if gh >= 0.5 {
        return Ok(None);
    }
    let tail = w.iter().map(|v| v.abs()).sum::<f64>() - hard_threshold(w, s).iter().map(|v| v.abs()).sum::<f64>();
    let tail = tail.max(0.0);
    if p.epsilon == 0.0 {
        return Ok(Some((BoundUsed::Noiseless, noiseless_error_bound(gh, nu, tail)?)));
    }
    if !beta.is_finite() {
        return Err(CliError::argument("the noisy error bound needs a finite --beta"));
    }
    let r: Vec<f64> = a.apply(x_hat).iter().zip(&p.y).map(|(u, v)| u - v).collect();
    let upsilon = (p.norm.eval(&r) - p.epsilon).max(0.0);
    let inp = ErrorBoundInputs { gammahat: gh, beta: beta.value(), epsilon: p.epsilon, upsilon, nu, tail };
    Ok(Some((BoundUsed::Noisy, noisy_error_bound(&inp)?)))
}
