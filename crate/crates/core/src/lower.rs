//! Lower bounds on `gammahat_s(A)` by sequential convex approximation, and the
//! resulting upper bounds on the largest good `s`.
//!
//! `gammahat_s(A) = max_{u in P_s} f(u)` with the convex
//! `f(u) = max { u^T x : A x = 0, ||x||_1 <= 1 }`. Starting from a vertex `u_1`
//! the scheme iterates `u_{t+1} = argmax_{v in P_s} x_t^T v`, where `x_t`
//! attains `f(u_t)`; the values `||x_t||_{s,1}` are valid lower bounds and do
//! not decrease.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{BoundKind, GoodnessCertificate, Tolerances, Witness};
use crate::error::{Error, Result};
use crate::lp::LpOptions;
use crate::math::{norm1, norm2};
use crate::residual::ResidualSolver;
use crate::types::{argmax_over_ps, Beta, ObservationNorm, PsVertex, SensingMatrix};

/// A kernel vector `x` together with the vertex `u` of `P_s` it is scored
/// against: `gammahat_s(A) >= value = u^T x`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelWitness {
    pub u: PsVertex,
    pub x: Vec<f64>,
    pub value: f64,
    /// `||A x||_2`
    pub residual: f64,
}

impl KernelWitness {
    fn new(a: &SensingMatrix, x: Vec<f64>, s: usize) -> Self {
        let u = argmax_over_ps(&x, s).expect("1 <= s <= n");
        let value = u.dot(&x);
        let residual = norm2(&a.apply(&x));
        Self { u, x, value, residual }
    }

    /// Checks the stored invariants without solving anything.
    pub fn is_valid_for(&self, a: &SensingMatrix) -> bool {
        self.x.len() == a.n()
            && self.u.n() == a.n()
            && norm1(&self.x) <= 1.0 + 1e-9
            && norm2(&a.apply(&self.x)) <= 1e-8
            && (self.u.dot(&self.x) - self.value).abs() <= 1e-10
            && self.value <= crate::types::norm_s1_clamped(&self.x, self.u.s()) + 1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaConfig {
    pub restarts: usize,
    pub improvement_tol: f64,
    pub max_iters: usize,
    pub rng_seed: u64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self { restarts: 20, improvement_tol: 1e-7, max_iters: 100, rng_seed: 0 }
    }
}

impl ScaConfig {
    /// Defaults with 20 restarts for `n <= 64` and 10 above.
    pub fn for_dimension(n: usize) -> Self {
        Self { restarts: if n <= 64 { 20 } else { 10 }, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// Full record of one `sca` call.
#[derive(Clone, Debug)]
pub struct ScaOutcome {
    pub value: f64,
    pub witness: KernelWitness,
    /// Accepted lower-bound values of each restart, in iteration order.
    pub traces: Vec<Vec<f64>>,
}

/// Best lower bound on `gammahat_s(A)` over `cfg.restarts` runs.
pub fn sca_lower_bound(a: &SensingMatrix, s: usize, cfg: &ScaConfig) -> Result<(f64, KernelWitness)> {
    let out = sca_detailed(a, s, cfg)?;
    Ok((out.value, out.witness))
}

pub fn sca_detailed(a: &SensingMatrix, s: usize, cfg: &ScaConfig) -> Result<ScaOutcome> {
    check_s(a, s)?;
    let solver = ResidualSolver::new(a);
    run(&solver, a, s, cfg, None, &LpOptions::default())
}

fn check_s(a: &SensingMatrix, s: usize) -> Result<()> {
    if s == 0 || s > a.n() {
        return Err(Error::arg(alloc::format!("s must lie in 1..={}, got {s}", a.n())));
    }
    Ok(())
}

fn random_vertex(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    for i in rand::seq::index::sample(rng, n, s) {
        u[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    u
}

fn run(
    solver: &ResidualSolver,
    a: &SensingMatrix,
    s: usize,
    cfg: &ScaConfig,
    warm: Option<&[f64]>,
    lp: &LpOptions,
) -> Result<ScaOutcome> {
    let n = a.n();
    if solver.kernel_dim() == 0 {
        let witness = KernelWitness::new(a, vec![0.0; n], s);
        return Ok(ScaOutcome { value: 0.0, witness, traces: Vec::new() });
    }
    let restarts = cfg.restarts.max(1);
    let mut starts = Vec::with_capacity(restarts + 1);
    if let Some(x) = warm {
        starts.push(argmax_over_ps(x, s)?.to_vector());
    }
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(r as u64);
        starts.push(random_vertex(&mut rng, n, s));
    }
    let runs = crate::par::map(starts, |u| restart(solver, s, u, cfg, lp));

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut traces = Vec::new();
    let mut first_err = None;
    for r in runs {
        match r {
            Ok((trace, x)) => {
                let v = trace.last().copied().unwrap_or(0.0);
                if best.as_ref().map_or(true, |b| v > b.0) {
                    best = Some((v, x));
                }
                traces.push(trace);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    // failed restarts are dropped as long as one succeeded
    let Some((_, x)) = best else { return Err(first_err.expect("at least one restart")) };
    let witness = KernelWitness::new(a, x, s);
    Ok(ScaOutcome { value: witness.value, witness, traces })
}

fn restart(
    solver: &ResidualSolver,
    s: usize,
    mut u: Vec<f64>,
    cfg: &ScaConfig,
    lp: &LpOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut trace = Vec::new();
    let mut best_x = vec![0.0; u.len()];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..cfg.max_iters.max(1) {
        let sol = solver.solve(&u, lp)?;
        let next = argmax_over_ps(&sol.x, s)?;
        let v = next.dot(&sol.x);
        if v <= best {
            break;
        }
        let gain = v - best;
        trace.push(v);
        best = v;
        best_x = sol.x;
        if gain <= cfg.improvement_tol {
            break;
        }
        u = next.to_vector();
    }
    Ok((trace, best_x))
}

/// Result of [`s_upper_bound`].
#[derive(Clone, Debug)]
pub struct UpperBound {
    /// `s_*(A) <= s_bar`
    pub s_bar: usize,
    /// `false` when no `s <= min(k, n)` could be disproved; `s_bar` is then the
    /// trivial bound `min(k, n)`.
    pub disproved: bool,
    /// `(s, lower bound on gammahat_s)` for every `s` tried.
    pub lower_bounds: Vec<(usize, f64)>,
    /// Witness of the disproof, when there is one.
    pub witness: Option<KernelWitness>,
    pub config: ScaConfig,
}

impl UpperBound {
    pub fn certificate(&self) -> GoodnessCertificate {
        GoodnessCertificate {
            kind: BoundKind::Sca,
            s_certified: 0,
            s_upper: Some(self.s_bar),
            bound_value: self.lower_bounds.last().map_or(0.0, |p| p.1),
            beta: Beta::INFINITY,
            norm: ObservationNorm::L2,
            witness: self.witness.clone().map(Witness::Kernel),
            tolerances: Tolerances::from(&LpOptions::default()),
        }
    }
}

/// Scans `s = s_start, s_start + 1, ...` until a lower bound on
/// `gammahat_s` reaches `1/2`, which proves `A` is not `s`-good.
pub fn s_upper_bound(a: &SensingMatrix, cfg: &ScaConfig, s_start: usize) -> Result<UpperBound> {
    if s_start == 0 {
        return Err(Error::arg("s_start must be at least 1"));
    }
    let cap = a.k().min(a.n());
    let solver = ResidualSolver::new(a);
    let lp = LpOptions::default();
    let mut lower_bounds = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    if solver.kernel_dim() > 0 {
        for s in s_start..=cap {
            let out = run(&solver, a, s, cfg, warm.as_deref(), &lp)?;
            lower_bounds.push((s, out.value));
            if out.value >= 0.5 {
                return Ok(UpperBound {
                    s_bar: s - 1,
                    disproved: true,
                    lower_bounds,
                    witness: Some(out.witness),
                    config: *cfg,
                });
            }
            warm = Some(out.witness.x);
        }
    }
    Ok(UpperBound { s_bar: cap, disproved: false, lower_bounds, witness: None, config: *cfg })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_columns() {
        let a = SensingMatrix::from_row_major(1, 2, &[1.0, 1.0]).unwrap();
        let (v, w) = sca_lower_bound(&a, 1, &ScaConfig::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        assert!(w.is_valid_for(&a));
        assert!((w.x[0].abs() - 0.5).abs() < 1e-12 && (w.x[0] + w.x[1]).abs() < 1e-12);
        let ub = s_upper_bound(&a, &ScaConfig::default(), 1).unwrap();
        assert_eq!(ub.s_bar, 0);
        assert!(ub.disproved);
    }

    #[test]
    fn trivial_kernel() {
        let a = SensingMatrix::identity(4);
        assert_eq!(sca_lower_bound(&a, 2, &ScaConfig::default()).unwrap().0, 0.0);
        let ub = s_upper_bound(&a, &ScaConfig::default(), 1).unwrap();
        assert_eq!(ub.s_bar, 4);
        assert!(!ub.disproved);
    }

    #[test]
    fn seeds_reproduce() {
        let a = SensingMatrix::from_row_major(2, 4, &[1.0, 0.3, -0.2, 0.7, 0.1, 1.0, 0.5, -0.4]).unwrap();
        let cfg = ScaConfig::default().with_seed(3);
        let x = sca_detailed(&a, 2, &cfg).unwrap();
        let y = sca_detailed(&a, 2, &cfg).unwrap();
        assert_eq!(x.value, y.value);
        assert_eq!(x.traces, y.traces);
    }
}
