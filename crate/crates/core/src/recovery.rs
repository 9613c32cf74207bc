//! `l1`-recovery, error bounds for imperfect recovery, weighted-`l1` scaling
//! and bounds implied by restricted isometry / restricted eigenvalue constants.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bounds::{colprog, compute_alphas_with, CertifyOptions, CorrectorMatrix};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LinearProgram, LpOptions, LpStatus};
use crate::math::{norm1, norm_inf, sqrt};
use crate::types::{norm_s1_clamped, Beta, ObservationNorm, SensingMatrix};

/// `min ||x||_1  s.t.  ||A x - y|| <= epsilon`.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    pub a: SensingMatrix,
    pub y: Vec<f64>,
    pub epsilon: f64,
    pub norm: ObservationNorm,
}

impl RecoveryProblem {
    pub fn noiseless(a: SensingMatrix, y: Vec<f64>) -> Self {
        Self { a, y, epsilon: 0.0, norm: ObservationNorm::L2 }
    }

    fn validate(&self) -> Result<()> {
        if self.y.len() != self.a.k() {
            return Err(Error::arg(format!("observation has length {}, expected {}", self.y.len(), self.a.k())));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::arg("epsilon must be finite and nonnegative"));
        }
        if self.epsilon > 0.0 && !self.norm.is_polyhedral() {
            return Err(Error::Unsupported("noisy recovery under the Euclidean norm needs a conic solver".into()));
        }
        Ok(())
    }
}

pub fn l1_recover(p: &RecoveryProblem) -> Result<Vec<f64>> {
    l1_recover_with(p, &LpOptions::default())
}

pub fn l1_recover_with(p: &RecoveryProblem, opts: &LpOptions) -> Result<Vec<f64>> {
    p.validate()?;
    let (k, n) = (p.a.k(), p.a.n());
    // variables (x+, x-, r) with r present for the l1 constraint
    let with_r = p.epsilon > 0.0 && p.norm == ObservationNorm::L1;
    let nv = 2 * n + if with_r { k } else { 0 };
    let mut obj = vec![0.0; nv];
    obj[..2 * n].iter_mut().for_each(|v| *v = 1.0);
    let mut ax = DMatrix::zeros(k, nv);
    for i in 0..k {
        for j in 0..n {
            ax[(i, j)] = p.a.get(i, j);
            ax[(i, n + j)] = -p.a.get(i, j);
        }
    }
    let lo = vec![0.0; nv];
    let hi = vec![f64::INFINITY; nv];
    let mut lp = LinearProgram::new(obj).with_bounds(lo, hi);
    if p.epsilon == 0.0 {
        lp = lp.with_equalities(ax, p.y.clone());
    } else if with_r {
        // |A x - y| <= r, sum r <= eps
        let mut g = DMatrix::zeros(2 * k + 1, nv);
        let mut h = vec![0.0; 2 * k + 1];
        for i in 0..k {
            for c in 0..2 * n {
                g[(i, c)] = ax[(i, c)];
                g[(k + i, c)] = -ax[(i, c)];
            }
            g[(i, 2 * n + i)] = -1.0;
            g[(k + i, 2 * n + i)] = -1.0;
            g[(2 * k, 2 * n + i)] = 1.0;
            h[i] = p.y[i];
            h[k + i] = -p.y[i];
        }
        h[2 * k] = p.epsilon;
        lp = lp.with_inequalities(g, h);
    } else {
        let mut g = DMatrix::zeros(2 * k, nv);
        let mut h = vec![0.0; 2 * k];
        for i in 0..k {
            for c in 0..nv {
                g[(i, c)] = ax[(i, c)];
                g[(k + i, c)] = -ax[(i, c)];
            }
            h[i] = p.y[i] + p.epsilon;
            h[k + i] = p.epsilon - p.y[i];
        }
        lp = lp.with_inequalities(g, h);
    }
    let sol = solve_lp_with(&lp, opts)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver { status: sol.status, context: "l1 recovery".into() });
    }
    let x: Vec<f64> = (0..n).map(|j| sol.primal[j] - sol.primal[n + j]).collect();
    if p.epsilon == 0.0 {
        if let Some(xp) = polish_noiseless(&p.a, &p.y, &x) {
            return Ok(xp);
        }
    }
    Ok(x)
}

/// Crossover for the equality-constrained program: re-solves `A_S x_S = y`
/// where `S` holds the `m` largest entries of the interior-point solution,
/// `m = 1, ..., k`, and keeps the first result that is feasible to rounding,
/// close to `x` and no worse in `||.||_1`. Removes the interior-point error,
/// which near-degenerate instances amplify.
fn polish_noiseless(a: &SensingMatrix, y: &[f64], x: &[f64]) -> Option<Vec<f64>> {
    let top = norm_inf(x);
    if top == 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > 1e-9 * top).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    let rhs = nalgebra::DVector::from_column_slice(y);
    for m in 1..=order.len().min(a.k()) {
        let support = &order[..m];
        let sub = DMatrix::from_fn(a.k(), m, |i, j| a.get(i, support[j]));
        let svd = sub.svd(true, true);
        let sv = &svd.singular_values;
        if sv.min() <= 1e-10 * sv.max() {
            continue;
        }
        let Ok(xs) = svd.solve(&rhs, 0.0) else { continue };
        let mut out = vec![0.0; x.len()];
        for (&i, v) in support.iter().zip(xs.iter()) {
            out[i] = *v;
        }
        let resid: Vec<f64> = a.apply(&out).iter().zip(y).map(|(p, q)| p - q).collect();
        let feasible = norm_inf(&resid) <= 1e-9 * (1.0 + norm_inf(y));
        let close = out.iter().zip(x).all(|(p, q)| (p - q).abs() <= 1e-4 * (1.0 + top));
        let no_worse = norm1(&out) <= norm1(x) + 1e-7 * (1.0 + norm1(x));
        if feasible && close && no_worse {
            return Some(out);
        }
    }
    None
}

/// Which error bound a [`RecoveryReport`] was checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundUsed {
    Noiseless,
    Noisy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub x_hat: Vec<f64>,
    /// `||A x_hat - y||` in the problem's norm.
    pub residual: f64,
    pub l1_error: Option<f64>,
    pub linf_error: Option<f64>,
    pub bound: Option<(BoundUsed, f64)>,
    pub held: Option<bool>,
}

impl RecoveryReport {
    /// Collects residuals and, given the true signal and a bound, whether the
    /// bound held.
    pub fn new(p: &RecoveryProblem, x_hat: Vec<f64>, truth: Option<&[f64]>, bound: Option<(BoundUsed, f64)>) -> Self {
        let ax = p.a.apply(&x_hat);
        let diff: Vec<f64> = ax.iter().zip(&p.y).map(|(a, b)| a - b).collect();
        let residual = p.norm.eval(&diff);
        let (l1_error, linf_error) = match truth {
            Some(w) => {
                let e: Vec<f64> = x_hat.iter().zip(w).map(|(a, b)| a - b).collect();
                (Some(norm1(&e)), Some(norm_inf(&e)))
            }
            None => (None, None),
        };
        let held = match (bound, l1_error) {
            (Some((_, b)), Some(e)) => Some(e <= b),
            _ => None,
        };
        Self { x_hat, residual, l1_error, linf_error, bound, held }
    }
}

/// `(nu + 2 tail) / (1 - 2 gammahat)` for a `nu`-optimal noiseless recovery.
pub fn noiseless_error_bound(gammahat: f64, nu: f64, tail: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&gammahat) {
        return Err(Error::arg(format!("gammahat must lie in [0, 1/2), got {gammahat}")));
    }
    if !(nu >= 0.0 && tail >= 0.0) {
        return Err(Error::arg("nu and tail must be nonnegative"));
    }
    Ok((nu + 2.0 * tail) / (1.0 - 2.0 * gammahat))
}

/// Inputs of [`noisy_error_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBoundInputs {
    pub gammahat: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub upsilon: f64,
    pub nu: f64,
    /// `||w - w^s||_1`
    pub tail: f64,
}

/// `(2 beta (upsilon + epsilon) + 2 tail + nu) / (1 - 2 gammahat)` for a
/// `(upsilon, nu)`-optimal solution of the noisy recovery program, where
/// `gammahat = gammahat_s(A, beta)`.
pub fn noisy_error_bound(inp: &ErrorBoundInputs) -> Result<f64> {
    if !(0.0..0.5).contains(&inp.gammahat) {
        return Err(Error::arg(format!("gammahat must lie in [0, 1/2), got {}", inp.gammahat)));
    }
    if !(inp.beta.is_finite() && inp.beta >= 0.0) {
        return Err(Error::arg("beta must be finite and nonnegative"));
    }
    if [inp.epsilon, inp.upsilon, inp.nu, inp.tail].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::arg("epsilon, upsilon, nu and tail must be nonnegative"));
    }
    Ok((2.0 * inp.beta * (inp.upsilon + inp.epsilon) + 2.0 * inp.tail + inp.nu) / (1.0 - 2.0 * inp.gammahat))
}

/// `beta` large enough that `gamma_s(A, beta) = gamma_s(A)` when the latter is
/// below 1: `sqrt(k) / sigma_min(A_bar)` (Euclidean) or `1 / rho` (`l1`).
pub fn beta_sufficient_for_gamma(a: &SensingMatrix, norm: ObservationNorm) -> Result<Beta> {
    Beta::new(crate::bounds::sufficient_beta_base(a, norm, &LpOptions::default())?)
}

/// Outcome of the weighted-scaling search.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingResult {
    pub lambdas: Vec<f64>,
    pub y: CorrectorMatrix,
    /// `max_i ||lambda_i e_i - Y^T A_i||_{s,1} / lambda_i`, evaluated exactly;
    /// equals a bound on `alpha_s(A Lambda^{-1}, beta)`.
    pub achieved: f64,
    pub feasible: bool,
}

impl ScalingResult {
    /// The rescaled matrix `A Lambda^{-1}`.
    pub fn weighted_matrix(&self, a: &SensingMatrix) -> Result<SensingMatrix> {
        let inv: Vec<f64> = self.lambdas.iter().map(|l| 1.0 / l).collect();
        a.scale_columns(&inv)
    }
}

fn scaled_level(a: &SensingMatrix, y: &CorrectorMatrix, lambdas: &[f64], s: usize) -> Result<f64> {
    let mut r = -y.y().tr_mul(a.matrix());
    let mut worst: f64 = 0.0;
    for (j, &l) in lambdas.iter().enumerate() {
        r[(j, j)] += l;
        let col: Vec<f64> = r.column(j).iter().copied().collect();
        worst = worst.max(norm_s1_clamped(&col, s) / l);
    }
    Ok(worst)
}

fn check_scaling_args(a: &SensingMatrix, s: usize, beta: Beta, norm: ObservationNorm, ell: f64) -> Result<()> {
    if s == 0 || s > a.n() {
        return Err(Error::arg(format!("s must lie in 1..={}, got {s}", a.n())));
    }
    if !(ell > 0.0 && ell <= 1.0) {
        return Err(Error::arg(format!("ell must lie in (0, 1], got {ell}")));
    }
    if beta.is_finite() && !norm.is_polyhedral() {
        return Err(Error::Unsupported("finite beta with the Euclidean observation norm needs a conic solver".into()));
    }
    Ok(())
}

fn dual_ball(beta: Beta, norm: ObservationNorm) -> colprog::DualBall {
    if !beta.is_finite() {
        colprog::DualBall::Unbounded
    } else if norm.dual() == ObservationNorm::Linf {
        colprog::DualBall::Box(beta.value())
    } else {
        colprog::DualBall::L1(beta.value())
    }
}

/// Finds `lambda in [ell, 1]^n` and `Y` with
/// `||lambda_i e_i - Y^T A_i||_{s,1} <= target lambda_i` for all `i`, if any.
pub fn weighted_scaling_feasibility(
    a: &SensingMatrix,
    s: usize,
    beta_bar: Beta,
    norm: ObservationNorm,
    ell: f64,
    target: f64,
) -> Result<ScalingResult> {
    weighted_scaling_feasibility_with(a, s, beta_bar, norm, ell, target, &CertifyOptions::default())
}

pub fn weighted_scaling_feasibility_with(
    a: &SensingMatrix,
    s: usize,
    beta_bar: Beta,
    norm: ObservationNorm,
    ell: f64,
    target: f64,
    opts: &CertifyOptions,
) -> Result<ScalingResult> {
    check_scaling_args(a, s, beta_bar, norm, ell)?;
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::arg(format!("target must lie in (0, 1/2), got {target}")));
    }
    let (value, y) = compute_alphas_with(a, s, beta_bar, norm, opts)?;
    if value <= target || ell >= 1.0 {
        return Ok(ScalingResult { lambdas: vec![1.0; a.n()], y, achieved: value, feasible: value <= target });
    }
    scaling_step(a, s, beta_bar, norm, ell, target, opts)
}

fn scaling_step(
    a: &SensingMatrix,
    s: usize,
    beta: Beta,
    norm: ObservationNorm,
    ell: f64,
    target: f64,
    opts: &CertifyOptions,
) -> Result<ScalingResult> {
    let size = colprog::program_nnz(a.k(), a.n());
    if size > opts.lp_limit {
        return Err(Error::TooLarge { what: "weighted scaling program", size, limit: opts.lp_limit });
    }
    let sc = colprog::Scaling { gamma: target, lo: ell };
    let sol = colprog::solve(a.matrix(), s, Some(sc), dual_ball(beta, norm), &opts.lp)?;
    let y = CorrectorMatrix::new(sol.y, beta, norm)?;
    let achieved = scaled_level(a, &y, &sol.lambda, s)?;
    Ok(ScalingResult { lambdas: sol.lambda, y, achieved, feasible: achieved <= target + 1e-7 })
}

/// Bisection tolerance of [`weighted_scaling_optimize`].
pub const SCALING_TOL: f64 = 1e-3;

/// Smallest level `alpha` (to within [`SCALING_TOL`]) for which the weighted
/// feasibility problem is solvable.
pub fn weighted_scaling_optimize(
    a: &SensingMatrix,
    s: usize,
    beta_bar: Beta,
    norm: ObservationNorm,
    ell: f64,
) -> Result<ScalingResult> {
    weighted_scaling_optimize_with(a, s, beta_bar, norm, ell, &CertifyOptions::default())
}

pub fn weighted_scaling_optimize_with(
    a: &SensingMatrix,
    s: usize,
    beta_bar: Beta,
    norm: ObservationNorm,
    ell: f64,
    opts: &CertifyOptions,
) -> Result<ScalingResult> {
    check_scaling_args(a, s, beta_bar, norm, ell)?;
    // lambda = 1 is always admissible, so alpha_s(A) bounds the optimum
    let (value, y) = compute_alphas_with(a, s, beta_bar, norm, opts)?;
    let mut best = ScalingResult { lambdas: vec![1.0; a.n()], y, achieved: value, feasible: true };
    if ell >= 1.0 || value <= SCALING_TOL {
        return Ok(best);
    }
    let (mut lo, mut hi) = (0.0_f64, value.min(1.0));
    while hi - lo > SCALING_TOL {
        let mid = 0.5 * (lo + hi);
        let r = scaling_step(a, s, beta_bar, norm, ell, mid, opts)?;
        if r.feasible {
            hi = r.achieved.min(mid).max(lo);
            if r.achieved < best.achieved {
                best = r;
            }
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RipBounds {
    pub gammahat_bound: f64,
    pub gamma_bound: f64,
    /// Smallest `beta` at which the two bounds above are guaranteed.
    pub beta_bound: f64,
    /// Bound on `alpha_1`, present when `m` was given.
    pub alpha1_bound: Option<f64>,
}

/// Bounds implied by the restricted isometry property with constant `delta`:
/// `RIP(delta, 2s)` for the `gamma` bounds and `RIP(delta, m)` for `alpha_1`.
pub fn rip_implied_bounds(delta: f64, s: usize, m: Option<usize>) -> Result<RipBounds> {
    let r2 = core::f64::consts::SQRT_2;
    if !(delta > 0.0 && delta < r2 - 1.0) {
        return Err(Error::arg(format!("delta must lie in (0, sqrt(2) - 1), got {delta}")));
    }
    if s == 0 {
        return Err(Error::arg("s must be positive"));
    }
    let den = 1.0 + (r2 - 1.0) * delta;
    let alpha1_bound = match m {
        Some(m) if m < 2 => return Err(Error::arg("m must be at least 2")),
        Some(m) => Some(r2 * delta / ((1.0 - delta) * sqrt((m - 1) as f64))),
        None => None,
    };
    Ok(RipBounds {
        gammahat_bound: r2 * delta / den,
        gamma_bound: r2 * delta / (1.0 - delta),
        beta_bound: sqrt((1.0 + delta) * s as f64) / den,
        alpha1_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReBounds {
    pub gammahat_bound: f64,
    pub beta: f64,
    /// `gammahat_bound < 1/2`, i.e. `rho > 1`.
    pub certifying: bool,
}

/// `RE(s, rho, kappa)` implies `gammahat_s(A, sqrt(s) / kappa) <= 1 / (1 + rho)`.
pub fn re_implied_bounds(s: usize, rho: f64, kappa: f64) -> Result<ReBounds> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::arg(format!("kappa must be positive, got {kappa}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::arg(format!("rho must be nonnegative, got {rho}")));
    }
    Ok(ReBounds { gammahat_bound: 1.0 / (1.0 + rho), beta: sqrt(s as f64) / kappa, certifying: rho > 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(noiseless_error_bound(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((noiseless_error_bound(0.25, 0.1, 0.2).unwrap() - 1.0).abs() < 1e-15);
        assert!(noiseless_error_bound(0.5, 0.0, 0.0).is_err());
        let inp = ErrorBoundInputs { gammahat: 0.25, beta: 2.0, epsilon: 0.1, upsilon: 0.1, nu: 0.0, tail: 0.0 };
        assert!((noisy_error_bound(&inp).unwrap() - 1.6).abs() < 1e-15);
        let zero = ErrorBoundInputs { gammahat: 0.1, beta: 3.0, epsilon: 0.0, upsilon: 0.0, nu: 0.0, tail: 0.0 };
        assert_eq!(noisy_error_bound(&zero).unwrap(), 0.0);
        assert!(noisy_error_bound(&ErrorBoundInputs { beta: f64::INFINITY, ..zero }).is_err());
    }

    #[test]
    fn rip_examples() {
        let b = rip_implied_bounds(0.2, 4, Some(101)).unwrap();
        assert!((b.gammahat_bound - 0.26120).abs() < 1e-5);
        assert!((b.gamma_bound - 0.353553).abs() < 1e-6);
        let a1 = b.alpha1_bound.unwrap();
        assert!((a1 - 0.035355).abs() < 1e-6);
        assert!(14.0 * a1 < 0.5);
        let tiny = rip_implied_bounds(1e-12, 9, Some(2)).unwrap();
        assert!(tiny.gammahat_bound < 1e-11 && (tiny.beta_bound - 3.0).abs() < 1e-9);
        assert!(rip_implied_bounds(0.5, 1, None).is_err());
        assert!(rip_implied_bounds(0.2, 1, Some(1)).is_err());
    }

    #[test]
    fn re_examples() {
        let b = re_implied_bounds(4, 3.0, 1.0).unwrap();
        assert_eq!(b.gammahat_bound, 0.25);
        assert_eq!(b.beta, 2.0);
        assert!(b.certifying);
        assert!(!re_implied_bounds(4, 1.0, 1.0).unwrap().certifying);
        assert_eq!(re_implied_bounds(4, 1.0, 1.0).unwrap().gammahat_bound, 0.5);
        assert!(!re_implied_bounds(4, 0.5, 1.0).unwrap().certifying);
        assert!(re_implied_bounds(4, 3.0, 0.0).is_err());
    }

    #[test]
    fn recover_identity_and_zero() {
        let a = SensingMatrix::identity(3);
        let y = vec![1.0, -2.0, 0.5];
        let x = l1_recover(&RecoveryProblem::noiseless(a.clone(), y.clone())).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-7);
        }
        let x = l1_recover(&RecoveryProblem::noiseless(a.clone(), vec![0.0; 3])).unwrap();
        assert!(norm_inf(&x) < 1e-7);
        let l2 = RecoveryProblem { a, y, epsilon: 0.1, norm: ObservationNorm::L2 };
        assert!(matches!(l1_recover(&l2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn noisy_recovery_respects_constraint() {
        let a = SensingMatrix::from_row_major(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        for norm in [ObservationNorm::L1, ObservationNorm::Linf] {
            let p = RecoveryProblem { a: a.clone(), y: vec![1.0, 1.0], epsilon: 0.3, norm };
            let x = l1_recover(&p).unwrap();
            let r = RecoveryReport::new(&p, x, None, None);
            assert!(r.residual <= 0.3 + 1e-7);
        }
    }
}
