//! Exhaustive ground truth for tiny instances.
//!
//! `gammahat_s(A) = max { u^T x : u in P_s, ||x||_1 <= 1, Ax = 0 }` and the
//! maximum over `u` sits at a vertex of `P_s`, an `s`-sparse sign vector. The
//! oracle enumerates those vertices and solves one small LP per vertex. Nothing
//! here shares code with the bound programs, so the two can be compared.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LinearProgram, LpOptions, LpStatus};
use crate::math::{binomial, norm1, norm_inf};
use crate::par;
use crate::recovery::{l1_recover, RecoveryProblem};
use crate::types::{norm_s1, SensingMatrix};

/// Default cap on `C(n, s) * 2^s`, the number of vertices of `P_s`.
pub const DEFAULT_ORACLE_LIMIT: u64 = 200_000;

/// Margin below `1/2` required before the oracle calls a level good.
pub const ORACLE_GAP_TOL: f64 = 1e-8;

/// Entry-wise success threshold for a recovered signal.
pub const RECOVERY_TOL: f64 = 1e-6;

/// Number of vertices of `P_s` in `R^n`, saturating.
pub fn vertex_count(n: usize, s: usize) -> u64 {
    let c = binomial(n, s);
    if s >= 64 {
        return if c == 0 { 0 } else { u64::MAX };
    }
    c.saturating_mul(1u64 << s)
}

/// Lexicographic `s`-subsets of `0..n`.
pub(crate) struct Subsets {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Subsets {
    pub(crate) fn new(n: usize, s: usize) -> Self {
        Subsets { n, cur: (0..s).collect(), done: s > n }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let s = self.cur.len();
        let mut i = s;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - s + i {
                self.cur[i] += 1;
                for j in i + 1..s {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Orthonormal basis of the row space of `A` (as rows), or `None` for `A = 0`.
fn row_space(a: &SensingMatrix) -> Option<DMatrix<f64>> {
    let svd = a.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * top).collect();
    if keep.is_empty() {
        return None;
    }
    Some(DMatrix::from_fn(keep.len(), a.n(), |r, c| v_t[(keep[r], c)]))
}

fn kernel_is_trivial(a: &SensingMatrix) -> bool {
    row_space(a).map_or(false, |r| r.nrows() == a.n())
}

/// The LP `max { u^T x : ||x||_1 <= 1, Ax = 0 }` in split form `x = p - q`.
fn vertex_lp(rows: &Option<DMatrix<f64>>, n: usize, support: &[usize], signs: &[f64]) -> LinearProgram {
    let mut c = vec![0.0; 2 * n];
    for (&i, &sg) in support.iter().zip(signs) {
        c[i] = -sg;
        c[n + i] = sg;
    }
    let mut lp = LinearProgram::new(c)
        .with_inequalities(DMatrix::from_element(1, 2 * n, 1.0), vec![1.0])
        .with_bounds(vec![0.0; 2 * n], vec![f64::INFINITY; 2 * n]);
    if let Some(r) = rows {
        let e = DMatrix::from_fn(r.nrows(), 2 * n, |i, j| if j < n { r[(i, j)] } else { -r[(i, j - n)] });
        lp = lp.with_equalities(e, vec![0.0; r.nrows()]);
    }
    lp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// A maximizer `x` in `Ker A` with `||x||_1 = 1` (zero when the kernel is trivial).
    pub x: Vec<f64>,
}

/// Exact `gammahat_s(A)` by vertex enumeration, up to the LP tolerance.
pub fn gammahat_exact(a: &SensingMatrix, s: usize, size_guard: u64) -> Result<f64> {
    gammahat_exact_detailed(a, s, size_guard).map(|v| v.value)
}

pub fn gammahat_exact_detailed(a: &SensingMatrix, s: usize, size_guard: u64) -> Result<OracleValue> {
    let n = a.n();
    if s > n {
        return Err(Error::arg("s exceeds n"));
    }
    let size = vertex_count(n, s);
    if size > size_guard {
        return Err(Error::TooLarge { what: "oracle vertex enumeration", size, limit: size_guard });
    }
    if s == 0 || kernel_is_trivial(a) {
        return Ok(OracleValue { value: 0.0, x: vec![0.0; n] });
    }
    let rows = row_space(a);
    // u and -u give the same value, so the first sign stays +1
    let mut jobs = Vec::new();
    for support in Subsets::new(n, s) {
        for pattern in 0..1u64 << (s - 1) {
            let signs: Vec<f64> = (0..s).map(|t| if t > 0 && pattern >> (t - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect();
            jobs.push((support.clone(), signs));
        }
    }
    let opts = LpOptions { feas_tol: 1e-10, gap_tol: 1e-10, iter_limit: 200 };
    let results = par::map(jobs, |(support, signs)| -> Result<(f64, Vec<f64>)> {
        let lp = vertex_lp(&rows, n, &support, &signs);
        let sol = solve_lp_with(&lp, &opts)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Solver { status: sol.status, context: "oracle vertex LP".into() });
        }
        let x: Vec<f64> = (0..n).map(|i| sol.primal[i] - sol.primal[n + i]).collect();
        Ok(match polish(a, &x) {
            Some(xc) => (support.iter().zip(&signs).map(|(&i, sg)| sg * xc[i]).sum(), xc),
            None => (-sol.objective_value, x),
        })
    });
    let mut best = OracleValue { value: 0.0, x: vec![0.0; n] };
    for r in results {
        let (v, x) = r?;
        if v > best.value {
            best = OracleValue { value: v, x };
        }
    }
    let l1 = norm1(&best.x);
    if l1 > 0.0 {
        best.x.iter_mut().for_each(|v| *v /= l1);
    }
    Ok(best)
}

/// Snaps an interior-point solution to the circuit on its support.
///
/// A vertex of `{x in Ker A : ||x||_1 <= 1}` is a normalized circuit, so when
/// the columns on the numerical support of `x` have a one-dimensional kernel
/// close to `x`, that kernel vector is the exact optimum.
fn polish(a: &SensingMatrix, x: &[f64]) -> Option<Vec<f64>> {
    let top = norm_inf(x);
    if top == 0.0 {
        return None;
    }
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > 1e-6 * top).collect();
    let sub = DMatrix::from_fn(a.k(), support.len(), |i, j| a.get(i, support[j]));
    let eig = SymmetricEigen::new(sub.transpose() * &sub);
    let tol = 1e-10 * eig.eigenvalues.amax().max(1e-300);
    let null: Vec<usize> = (0..support.len()).filter(|&i| eig.eigenvalues[i].abs() <= tol).collect();
    if null.len() != 1 {
        return None;
    }
    let v = eig.eigenvectors.column(null[0]);
    let l1: f64 = v.iter().map(|c| c.abs()).sum();
    let sign = if support.iter().zip(v.iter()).map(|(&i, c)| x[i] * c).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut out = vec![0.0; x.len()];
    for (&i, c) in support.iter().zip(v.iter()) {
        out[i] = sign * c / l1;
    }
    let close = out.iter().zip(x).all(|(p, q)| (p - q).abs() <= 1e-4);
    close.then_some(out)
}

/// `gammahat_s(A)` from the vertices of `{x in Ker A : ||x||_1 <= 1}`.
///
/// `||.||_{s,1}` is convex, so its maximum over that polytope is attained at a
/// vertex, and the vertices are the normalized circuits of `A`: kernel vectors
/// of minimal support. A support `S` carries a circuit when `A_S` has a
/// one-dimensional kernel whose generator has no zero entry. Enumerates all
/// supports of size up to `rank(A) + 1`; only usable on very small matrices.
pub fn gammahat_circuits(a: &SensingMatrix, s: usize, size_guard: u64) -> Result<f64> {
    let n = a.n();
    if s > n {
        return Err(Error::arg("s exceeds n"));
    }
    let r = row_space(a).map_or(0, |m| m.nrows());
    let size: u64 = (1..=(r + 1).min(n)).map(|j| binomial(n, j)).fold(0u64, |acc, c| acc.saturating_add(c));
    if size > size_guard {
        return Err(Error::TooLarge { what: "oracle circuit enumeration", size, limit: size_guard });
    }
    if s == 0 {
        return Ok(0.0);
    }
    let scale = a.matrix().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut best = 0.0f64;
    for len in 1..=(r + 1).min(n) {
        for support in Subsets::new(n, len) {
            let sub = DMatrix::from_fn(a.k(), len, |i, j| a.get(i, support[j]));
            let gram = sub.transpose() * &sub;
            let eig = SymmetricEigen::new(gram);
            let tol = 1e-18 * scale * scale * len as f64 + 1e-11 * eig.eigenvalues.amax();
            let null: Vec<usize> = (0..len).filter(|&i| eig.eigenvalues[i].abs() <= tol).collect();
            if null.len() != 1 {
                continue;
            }
            let x: Vec<f64> = eig.eigenvectors.column(null[0]).iter().copied().collect();
            if x.iter().any(|v| v.abs() <= 1e-9 * norm_inf(&x)) {
                continue;
            }
            best = best.max(norm_s1(&x, s.min(len))? / norm1(&x));
        }
    }
    Ok(best)
}

/// Largest `s` with `gammahat_s(A) < 1/2 - ORACLE_GAP_TOL`; `n` for a trivial kernel.
pub fn s_star_exact(a: &SensingMatrix, size_guard: u64) -> Result<usize> {
    if kernel_is_trivial(a) {
        return Ok(a.n());
    }
    let mut good = 0;
    for s in 1..=a.k().min(a.n()) {
        if gammahat_exact(a, s, size_guard)? < 0.5 - ORACLE_GAP_TOL {
            good = s;
        } else {
            break;
        }
    }
    Ok(good)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    /// Largest `||x_hat - w||_inf` over all trials; infinite when a solve failed.
    pub worst_error: f64,
    /// The first signal that was not recovered, if any.
    pub failing: Option<Vec<f64>>,
}

/// Random `s`-sparse signal: uniform support, standard normal values.
pub fn random_sparse_signal(n: usize, s: usize, rng_seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    let mut w = vec![0.0; n];
    for i in rand::seq::index::sample(&mut rng, n, s.min(n)) {
        w[i] = StandardNormal.sample(&mut rng);
    }
    w
}

/// Recovers `trials` random `s`-sparse signals from noiseless data.
pub fn empirical_goodness(a: &SensingMatrix, s: usize, trials: usize, rng_seed: u64) -> EmpiricalReport {
    if s == 0 {
        return EmpiricalReport { trials, successes: trials, failures: 0, worst_error: 0.0, failing: None };
    }
    let errors = par::map((0..trials as u64).collect(), |t| {
        let w = random_sparse_signal(a.n(), s, rng_seed, t);
        let err = match l1_recover(&RecoveryProblem::noiseless(a.clone(), a.apply(&w))) {
            Ok(x) => x.iter().zip(&w).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        (err, w)
    });
    let mut report = EmpiricalReport { trials, successes: 0, failures: 0, worst_error: 0.0, failing: None };
    for (err, w) in errors {
        report.worst_error = report.worst_error.max(err);
        if err <= RECOVERY_TOL {
            report.successes += 1;
        } else {
            report.failures += 1;
            report.failing.get_or_insert(w);
        }
    }
    report
}

/// Whether every `k x s` column submatrix has full column rank, judged by
/// `sigma_min > 1e-8`. Enumerates when there are at most `samples` subsets and
/// checks `samples` seeded random subsets otherwise.
pub fn submatrix_kernel_check(a: &SensingMatrix, s: usize, samples: usize) -> bool {
    let (k, n) = (a.k(), a.n());
    if s == 0 {
        return true;
    }
    if s > k || s > n {
        return false;
    }
    let full_rank = |cols: &[usize]| {
        let sub = DMatrix::from_fn(k, s, |i, j| a.get(i, cols[j]));
        sub.singular_values().min() > 1e-8
    };
    if binomial(n, s) <= samples as u64 {
        return Subsets::new(n, s).all(|c| full_rank(&c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..samples).all(|_| {
        let mut c = rand::seq::index::sample(&mut rng, n, s).into_vec();
        c.sort_unstable();
        full_rank(&c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SensingMatrix {
        SensingMatrix::from_row_major(1, 2, &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn subsets_enumerate_in_order() {
        let all: Vec<Vec<usize>> = Subsets::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Subsets::new(3, 0).count(), 1);
        assert_eq!(Subsets::new(2, 3).count(), 0);
    }

    #[test]
    fn small_examples() {
        let id = SensingMatrix::identity(4);
        assert_eq!(gammahat_exact(&id, 2, DEFAULT_ORACLE_LIMIT).unwrap(), 0.0);
        assert_eq!(s_star_exact(&id, DEFAULT_ORACLE_LIMIT).unwrap(), 4);
        let v = gammahat_exact_detailed(&pair(), 1, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(v.value, 0.5);
        assert!((v.x[0] + v.x[1]).abs() < 1e-8);
        assert!((gammahat_circuits(&pair(), 1, DEFAULT_ORACLE_LIMIT).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(s_star_exact(&pair(), DEFAULT_ORACLE_LIMIT).unwrap(), 0);
    }

    #[test]
    fn guard() {
        let a = SensingMatrix::identity(12);
        assert!(matches!(gammahat_exact(&a, 6, 1000), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn empirical_examples() {
        let r = empirical_goodness(&pair(), 1, 100, 7);
        assert!(r.failures > 0 && r.failing.is_some());
        let r = empirical_goodness(&pair(), 0, 5, 7);
        assert_eq!((r.successes, r.failures), (5, 0));
        let r = empirical_goodness(&SensingMatrix::identity(5), 3, 20, 1);
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn submatrices() {
        assert!(submatrix_kernel_check(&SensingMatrix::identity(5), 3, 100));
        let twin = SensingMatrix::from_row_major(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(!submatrix_kernel_check(&twin, 2, 100));
        assert!(submatrix_kernel_check(&twin, 1, 100));
    }
}
