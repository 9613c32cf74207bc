//! Dense linear programming.
//!
//! Programs have the form
//!
//! ```text
//! minimize    c^T z
//! subject to  E z  = f
//!             G z <= h
//!             lo <= z <= hi      (entries of lo / hi may be infinite)
//! ```
//!
//! and are solved by a homogeneous self-dual interior-point method
//! ([`ipm`]) with a tableau simplex ([`simplex`]) as fallback when the
//! interior-point iteration breaks down. The interior-point core is generic
//! over the linear algebra used for its Newton systems, which lets the
//! certification programs plug in solvers that exploit their structure.
//!
//! Dual values follow the textbook convention: multipliers of `<=` rows and of
//! upper bounds are nonpositive, multipliers of lower bounds nonnegative, and
//!
//! ```text
//! c = E^T dual_eq + G^T dual_ineq + dual_lower + dual_upper
//! ```
//!
//! so that strong duality reads `c^T z = f^T dual_eq + h^T dual_ineq +
//! lo^T dual_lower + hi^T dual_upper` (infinite bounds carry zero multipliers).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) mod dense;
pub(crate) mod ipm;
pub mod simplex;

pub use ipm::IpmOptions;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `objective.len()` free variables with no constraints yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let d = objective.len();
        Self {
            objective,
            eq_matrix: DMatrix::zeros(0, d),
            eq_rhs: Vec::new(),
            ineq_matrix: DMatrix::zeros(0, d),
            ineq_rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; d],
            upper: vec![f64::INFINITY; d],
        }
    }

    pub fn with_equalities(mut self, e: DMatrix<f64>, f: Vec<f64>) -> Self {
        self.eq_matrix = e;
        self.eq_rhs = f;
        self
    }

    pub fn with_inequalities(mut self, g: DMatrix<f64>, h: Vec<f64>) -> Self {
        self.ineq_matrix = g;
        self.ineq_rhs = h;
        self
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.num_vars();
        if d == 0 {
            return Err(Error::arg("linear program has no variables"));
        }
        let shape_ok = self.eq_matrix.ncols() == d
            && self.eq_matrix.nrows() == self.eq_rhs.len()
            && self.ineq_matrix.ncols() == d
            && self.ineq_matrix.nrows() == self.ineq_rhs.len()
            && self.lower.len() == d
            && self.upper.len() == d;
        if !shape_ok {
            return Err(Error::arg(format!(
                "inconsistent dimensions: {d} variables, E {}x{} / f {}, G {}x{} / h {}, bounds {}/{}",
                self.eq_matrix.nrows(),
                self.eq_matrix.ncols(),
                self.eq_rhs.len(),
                self.ineq_matrix.nrows(),
                self.ineq_matrix.ncols(),
                self.ineq_rhs.len(),
                self.lower.len(),
                self.upper.len()
            )));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.eq_matrix.iter().all(|v| v.is_finite())
            && self.eq_rhs.iter().all(|v| v.is_finite())
            && self.ineq_matrix.iter().all(|v| v.is_finite())
            && self.ineq_rhs.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::arg("program data must be finite"));
        }
        for j in 0..d {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(Error::arg(format!("invalid bounds [{lo}, {hi}] on variable {j}")));
            }
        }
        let has_constraints = self.eq_matrix.nrows() > 0
            || self.ineq_matrix.nrows() > 0
            || self.lower.iter().chain(&self.upper).any(|v| v.is_finite());
        if !has_constraints {
            return Err(Error::arg("linear program has no constraints"));
        }
        Ok(())
    }

    /// Maximum violation of the constraints at `z`.
    pub fn primal_residual(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let ez = &self.eq_matrix * nalgebra::DVector::from_column_slice(z);
        for (a, b) in ez.iter().zip(&self.eq_rhs) {
            worst = worst.max((a - b).abs());
        }
        let gz = &self.ineq_matrix * nalgebra::DVector::from_column_slice(z);
        for (a, b) in gz.iter().zip(&self.ineq_rhs) {
            worst = worst.max(a - b);
        }
        for (j, &zj) in z.iter().enumerate() {
            worst = worst.max(self.lower[j] - zj).max(zj - self.upper[j]);
        }
        worst
    }

    pub fn objective_at(&self, z: &[f64]) -> f64 {
        self.objective.iter().zip(z).map(|(c, x)| c * x).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of [`solve_lp`].
///
/// For `Infeasible`, the dual slots hold a Farkas certificate normalized to
/// dual objective 1 (with `E^T y + G^T w + dual_lower + dual_upper = 0`). For
/// `Unbounded`, `primal` holds a recession direction `d` with `c^T d = -1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual_eq: Vec<f64>,
    pub dual_ineq: Vec<f64>,
    pub dual_lower: Vec<f64>,
    pub dual_upper: Vec<f64>,
    pub objective_value: f64,
    pub duality_gap: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// `f^T dual_eq + h^T dual_ineq + lo^T dual_lower + hi^T dual_upper`.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut v: f64 = lp.eq_rhs.iter().zip(&self.dual_eq).map(|(a, b)| a * b).sum();
        v += lp.ineq_rhs.iter().zip(&self.dual_ineq).map(|(a, b)| a * b).sum::<f64>();
        for j in 0..lp.num_vars() {
            if lp.lower[j].is_finite() {
                v += lp.lower[j] * self.dual_lower[j];
            }
            if lp.upper[j].is_finite() {
                v += lp.upper[j] * self.dual_upper[j];
            }
        }
        v
    }

    /// `max |c - E^T y - G^T w - dual_lower - dual_upper|` together with the
    /// largest sign violation of the multipliers.
    pub fn dual_residual(&self, lp: &LinearProgram) -> f64 {
        let mut r = lp.objective.clone();
        if self.status == LpStatus::Infeasible {
            r.iter_mut().for_each(|v| *v = 0.0);
        }
        let ety = lp.eq_matrix.transpose() * nalgebra::DVector::from_column_slice(&self.dual_eq);
        let gtw = lp.ineq_matrix.transpose() * nalgebra::DVector::from_column_slice(&self.dual_ineq);
        let mut worst: f64 = 0.0;
        for j in 0..lp.num_vars() {
            let v = r[j] - ety[j] - gtw[j] - self.dual_lower[j] - self.dual_upper[j];
            worst = worst.max(v.abs());
        }
        for &w in &self.dual_ineq {
            worst = worst.max(w);
        }
        for (&l, &u) in self.dual_lower.iter().zip(&self.dual_upper) {
            worst = worst.max(-l).max(u);
        }
        worst
    }
}

/// Solver tolerances; gaps are measured relative to `max(1, |objective|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub iter_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { feas_tol: 1e-8, gap_tol: 1e-8, iter_limit: 200 }
    }
}

impl LpOptions {
    pub(crate) fn ipm(&self) -> IpmOptions {
        IpmOptions { feas_tol: self.feas_tol, gap_tol: self.gap_tol, iter_limit: self.iter_limit }
    }
}

/// Above this many tableau entries the simplex fallback is skipped.
const SIMPLEX_FALLBACK_LIMIT: usize = 4_000_000;

pub fn solve_lp(p: &LinearProgram, feas_tol: f64, gap_tol: f64, iter_limit: usize) -> Result<LpSolution> {
    solve_lp_with(p, &LpOptions { feas_tol, gap_tol, iter_limit })
}

pub fn solve_lp_with(p: &LinearProgram, opts: &LpOptions) -> Result<LpSolution> {
    p.validate()?;
    if !(opts.feas_tol > 0.0 && opts.gap_tol > 0.0) {
        return Err(Error::arg("tolerances must be positive"));
    }
    let sol = dense::solve(p, &opts.ipm());
    if sol.status != LpStatus::IterationLimit {
        return Ok(sol);
    }
    if simplex::tableau_size(p) <= SIMPLEX_FALLBACK_LIMIT {
        let fallback = simplex::solve(p, opts.feas_tol);
        if fallback.status != LpStatus::IterationLimit {
            return Ok(fallback);
        }
    }
    Ok(sol)
}
