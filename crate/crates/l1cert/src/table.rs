//! Reproduction harness for the bound tables: one CSV row per row count `m`.
//!
//! Columns are `m, s_mu, s_alpha1, s_alphas, s_bar, cpu_seconds`; a value
//! that was not computed (or was refused by a resource guard) is `NA`.
//! `cpu_seconds` is the wall-clock time spent on the row.

use std::fmt::Write as _;
use std::time::Instant;

use l1cert_core::bounds::{s_bound_alpha1_with, s_bound_alphas_with, s_bound_mu, CertifyOptions};
use l1cert_core::gen::{generate, Family, GenSpec, CONV_GRID};
use l1cert_core::lower::{s_upper_bound, ScaConfig};
use l1cert_core::{Beta, Error, ObservationNorm};

use crate::SCHEMA_VERSION;

#[derive(Clone, Debug)]
pub struct TableConfig {
    pub family: Family,
    pub n: usize,
    pub fractions: Vec<f64>,
    pub seed: u64,
    pub full: bool,
    pub upper: bool,
    pub sca: ScaConfig,
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub m: usize,
    pub s_mu: usize,
    pub s_alpha1: usize,
    pub s_alphas: Option<usize>,
    pub s_bar: Option<usize>,
    pub seconds: f64,
}

/// `"0.1,0.5"` or `"a..b"` (steps of 0.1, both ends included).
pub fn parse_fractions(s: &str) -> Result<Vec<f64>, String> {
    let out: Vec<f64> = if let Some((a, b)) = s.split_once("..") {
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad fraction `{a}`"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad fraction `{b}`"))?;
        let steps = ((hi - lo) / 0.1 + 1e-9).floor();
        if !(steps >= 0.0) {
            return Err(format!("empty fraction range `{s}`"));
        }
        (0..=steps as usize).map(|i| lo + 0.1 * i as f64).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| format!("bad fraction `{t}`"))).collect::<Result<_, _>>()?
    };
    if out.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(format!("fractions must lie in (0, 1], got `{s}`"));
    }
    Ok(out)
}

/// Row counts `floor(fraction * n)`; the convolution matrix has a single size.
pub fn row_counts(cfg: &TableConfig) -> Vec<usize> {
    match cfg.family {
        Family::Convolution => vec![CONV_GRID * (CONV_GRID - 1)],
        _ => cfg.fractions.iter().map(|f| ((f * cfg.n as f64 + 1e-9).floor() as usize).max(1)).collect(),
    }
}

pub fn header(cfg: &TableConfig) -> String {
    format!(
        "# l1cert table schema_version={SCHEMA_VERSION} family={} n={} seed={} full={} upper={} sca_restarts={} sca_seed={}\n\
         m,s_mu,s_alpha1,s_alphas,s_bar,cpu_seconds\n",
        cfg.family.name(),
        cfg.n,
        cfg.seed,
        cfg.full,
        cfg.upper,
        cfg.sca.restarts,
        cfg.sca.rng_seed,
    )
}

fn cell(v: Option<usize>) -> String {
    v.map_or_else(|| "NA".to_string(), |s| s.to_string())
}

pub fn format_row(r: &TableRow) -> String {
    let mut out = String::new();
    writeln!(out, "{},{},{},{},{},{:.3}", r.m, r.s_mu, r.s_alpha1, cell(r.s_alphas), cell(r.s_bar), r.seconds).unwrap();
    out
}

pub fn run_row(cfg: &TableConfig, m: usize) -> Result<TableRow, Error> {
    let start = Instant::now();
    let spec = GenSpec { family: cfg.family, k: m, n: cfg.n, seed: cfg.seed, normalize: true };
    let a = generate(&spec)?;
    let s_mu = s_bound_mu(&a)?.s_certified;
    let s_alpha1 = s_bound_alpha1_with(&a, Beta::INFINITY, ObservationNorm::L2, &cfg.certify)?.s_certified;
    let s_alphas = if cfg.full {
        match s_bound_alphas_with(&a, Beta::INFINITY, ObservationNorm::L2, &cfg.certify) {
            Ok(c) => Some(c.s_certified),
            Err(Error::Interrupted { cause, .. }) if matches!(*cause, Error::TooLarge { .. }) => None,
            Err(Error::TooLarge { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let s_bar = if cfg.upper {
        let known = s_alphas.unwrap_or(0).max(s_alpha1).max(s_mu);
        Some(s_upper_bound(&a, &cfg.sca, known + 1)?.s_bar)
    } else {
        None
    };
    Ok(TableRow { m, s_mu, s_alpha1, s_alphas, s_bar, seconds: start.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_fractions("0.1,0.8").unwrap(), vec![0.1, 0.8]);
        let r = parse_fractions("0.1..0.9").unwrap();
        assert_eq!(r.len(), 9);
        assert!((r[8] - 0.9).abs() < 1e-12);
        assert!(parse_fractions("0..0.5").is_err());
        assert!(parse_fractions("abc").is_err());
    }

    #[test]
    fn table_row_counts() {
        let cfg = TableConfig {
            family: Family::Gaussian,
            n: 256,
            fractions: parse_fractions("0.1,0.2,0.4,0.8").unwrap(),
            seed: 0,
            full: false,
            upper: false,
            sca: ScaConfig::default(),
            certify: CertifyOptions::default(),
        };
        assert_eq!(row_counts(&cfg), vec![25, 51, 102, 204]);
    }
}
