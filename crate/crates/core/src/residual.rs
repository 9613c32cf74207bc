//! The basic subproblem shared by `alpha_1`, sequential convex approximation
//! and the oracle:
//!
//! ```text
//! f(c) = min_y ||c - A^T y||_inf = max { c^T x : A x = 0, ||x||_1 <= 1 }.
//! ```
//!
//! Two LP formulations are available. The *range* form optimizes over
//! `(y, t)` and costs `O(n k^2)` per interior-point iteration; the *kernel*
//! form optimizes over `v = c - A^T y` directly, constrained by
//! `N^T v = N^T c` for an orthonormal kernel basis `N`, and costs
//! `O(n (n - k)^2)`. The cheaper one is picked per matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::lp::dense::{regularized_cholesky, DenseKkt};
use crate::lp::ipm::{self, Breakdown, KktSystem};
use crate::lp::{LpOptions, LpStatus};
use crate::math::{dot, norm1, norm_inf};
use crate::types::SensingMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Range,
    Kernel,
    /// `Ker A = {0}`; no program needs solving.
    TrivialKernel,
}

/// Primal-dual answer for one right-hand side `c`.
#[derive(Clone, Debug)]
pub struct ResidualSolution {
    /// `||c - A^T y||_inf`, evaluated at the returned `y`.
    pub value: f64,
    pub y: Vec<f64>,
    /// `c - A^T y`
    pub residual: Vec<f64>,
    /// Kernel vector with `||x||_1 = 1` (or zero); `c^T x <= f(c) <= value`.
    pub x: Vec<f64>,
    /// `c^T x`
    pub lower: f64,
}

pub struct ResidualSolver {
    a: DMatrix<f64>,
    form: Formulation,
    /// Orthonormal basis of the row space of `A` (columns).
    row_basis: DMatrix<f64>,
    /// `R` factor with `A^T = row_basis * r` when `A` has full row rank.
    r: Option<DMatrix<f64>>,
    /// Orthonormal kernel basis (kernel form only).
    kernel: DMatrix<f64>,
}

impl ResidualSolver {
    pub fn new(a: &SensingMatrix) -> Self {
        let (k, n) = (a.k(), a.n());
        let at = a.matrix().transpose();
        let qr = at.clone().qr();
        let r = qr.r();
        let p = k.min(n);
        let rmax = (0..p).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
        let full_rank = rmax > 0.0 && (0..p).all(|i| r[(i, i)].abs() > 1e-10 * rmax);

        if full_rank && k >= n {
            return Self {
                a: a.matrix().clone(),
                form: Formulation::TrivialKernel,
                row_basis: DMatrix::identity(n, n),
                r: None,
                kernel: DMatrix::zeros(n, 0),
            };
        }
        if full_rank {
            let kernel_form = n - k < k;
            let (row_basis, kernel) = if kernel_form {
                // QR of the zero-padded square matrix yields a full orthogonal Q
                let mut padded = DMatrix::zeros(n, n);
                padded.view_mut((0, 0), (n, k)).copy_from(&at);
                let q = padded.qr().q();
                (q.columns(0, k).into_owned(), q.columns(k, n - k).into_owned())
            } else {
                (qr.q(), DMatrix::zeros(n, 0))
            };
            return Self {
                a: a.matrix().clone(),
                form: if kernel_form { Formulation::Kernel } else { Formulation::Range },
                row_basis,
                r: Some(r),
                kernel,
            };
        }
        // rank deficient: the range form still works; the row space comes from an SVD
        let svd = a.matrix().clone().svd(false, true);
        let vt = svd.v_t.expect("requested");
        let smax = svd.singular_values.iter().fold(0.0_f64, |m, v| m.max(*v));
        let rows: Vec<usize> =
            (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * smax).collect();
        let mut basis = DMatrix::zeros(n, rows.len());
        for (c, &i) in rows.iter().enumerate() {
            basis.set_column(c, &vt.row(i).transpose());
        }
        Self { a: a.matrix().clone(), form: Formulation::Range, row_basis: basis, r: None, kernel: DMatrix::zeros(n, 0) }
    }

    pub fn formulation(&self) -> Formulation {
        self.form
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn k(&self) -> usize {
        self.a.nrows()
    }

    /// Dimension of `Ker A`.
    pub fn kernel_dim(&self) -> usize {
        self.n() - self.row_basis.ncols()
    }

    /// Orthogonal projection of `x` onto `Ker A`.
    pub fn project_to_kernel(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        let coef = self.row_basis.tr_mul(&xv);
        let mut p = xv - &self.row_basis * coef;
        // a second pass removes what the first left behind in floating point
        let coef = self.row_basis.tr_mul(&p);
        p -= &self.row_basis * coef;
        p.iter().copied().collect()
    }

    /// `c - A^T y`
    pub fn residual_of(&self, c: &[f64], y: &[f64]) -> Vec<f64> {
        let aty = self.a.tr_mul(&DVector::from_column_slice(y));
        c.iter().zip(aty.iter()).map(|(a, b)| a - b).collect()
    }

    /// Least-squares `y` with `A^T y ~ w`.
    fn lift(&self, w: &[f64]) -> Vec<f64> {
        if let Some(r) = &self.r {
            let k = self.k();
            let qtw = self.row_basis.tr_mul(&DVector::from_column_slice(w));
            let r1 = r.view((0, 0), (k, k)).into_owned();
            if let Some(y) = r1.solve_upper_triangular(&qtw.rows(0, k).into_owned()) {
                return y.iter().copied().collect();
            }
        }
        let svd = self.a.transpose().svd(true, true);
        match svd.solve(&DVector::from_column_slice(w), 1e-12) {
            Ok(y) => y.iter().copied().collect(),
            Err(_) => vec![0.0; self.k()],
        }
    }

    pub fn solve(&self, c: &[f64], opts: &LpOptions) -> Result<ResidualSolution> {
        let n = self.n();
        if c.len() != n {
            return Err(Error::arg(format!("right-hand side has length {}, expected {n}", c.len())));
        }
        let (y, x_raw) = match self.form {
            Formulation::TrivialKernel => (self.lift(c), vec![0.0; n]),
            Formulation::Range => self.solve_range(c, opts)?,
            Formulation::Kernel => self.solve_kernel(c, opts)?,
        };
        let residual = self.residual_of(c, &y);
        let value = norm_inf(&residual);

        let mut x = if self.kernel_dim() == 0 { vec![0.0; n] } else { self.project_to_kernel(&x_raw) };
        let l1 = norm1(&x);
        if l1 > 1e-300 {
            let sign = if dot(c, &x) < 0.0 { -1.0 } else { 1.0 };
            x.iter_mut().for_each(|v| *v *= sign / l1);
        } else {
            x.iter_mut().for_each(|v| *v = 0.0);
        }
        let lower = dot(c, &x);
        Ok(ResidualSolution { value, y, residual, x, lower })
    }

    fn solve_range(&self, c: &[f64], opts: &LpOptions) -> Result<(Vec<f64>, Vec<f64>)> {
        let (k, n) = (self.k(), self.n());
        let mut g = DMatrix::zeros(2 * n, k + 1);
        let mut h = vec![0.0; 2 * n];
        for j in 0..n {
            for i in 0..k {
                let v = self.a[(i, j)];
                g[(j, i)] = -v;
                g[(n + j, i)] = v;
            }
            g[(j, k)] = -1.0;
            g[(n + j, k)] = -1.0;
            h[j] = -c[j];
            h[n + j] = c[j];
        }
        let mut obj = vec![0.0; k + 1];
        obj[k] = 1.0;
        let mut kkt = DenseKkt::new(obj, g, h, DMatrix::zeros(0, k + 1), Vec::new());
        let res = ipm::solve(&mut kkt, &opts.ipm());
        if res.status != LpStatus::Optimal {
            return Err(Error::Solver { status: res.status, context: "residual program (range form)".into() });
        }
        let x = (0..n).map(|j| res.z[j] - res.z[n + j]).collect();
        Ok((res.x[..k].to_vec(), x))
    }

    fn solve_kernel(&self, c: &[f64], opts: &LpOptions) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let b: Vec<f64> = self.kernel.tr_mul(&DVector::from_column_slice(c)).iter().copied().collect();
        let mut kkt = KernelKkt::new(&self.kernel, b);
        let res = ipm::solve(&mut kkt, &opts.ipm());
        if res.status != LpStatus::Optimal {
            return Err(Error::Solver { status: res.status, context: "residual program (kernel form)".into() });
        }
        let v = &res.x[..n];
        let w: Vec<f64> = c.iter().zip(v).map(|(a, b)| a - b).collect();
        let x = (0..n).map(|j| res.z[j] - res.z[n + j]).collect();
        Ok((self.lift(&w), x))
    }
}

/// `min t  s.t.  -t <= v <= t,  N^T v = b` over `(v, t)`.
struct KernelKkt<'a> {
    nmat: &'a DMatrix<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
    b: Vec<f64>,
    e_inv: Vec<f64>,
    f: Vec<f64>,
    omega: f64,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl<'a> KernelKkt<'a> {
    fn new(nmat: &'a DMatrix<f64>, b: Vec<f64>) -> Self {
        let n = nmat.nrows();
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self { nmat, c, h: vec![0.0; 2 * n], b, e_inv: vec![0.0; n], f: vec![0.0; n], omega: 1.0, chol: None }
    }

    /// `M^{-1} r` for the arrowhead `M = [E f; f^T sigma]`, in place.
    fn solve_m(&self, r: &mut [f64]) {
        let n = self.e_inv.len();
        let mut ft = 0.0;
        for j in 0..n {
            ft += self.f[j] * self.e_inv[j] * r[j];
        }
        let t = (r[n] - ft) / self.omega;
        for j in 0..n {
            r[j] = self.e_inv[j] * (r[j] - self.f[j] * t);
        }
        r[n] = t;
    }
}

impl KktSystem for KernelKkt<'_> {
    fn num_vars(&self) -> usize {
        self.c.len()
    }
    fn num_ineq(&self) -> usize {
        self.h.len()
    }
    fn num_eq(&self) -> usize {
        self.b.len()
    }
    fn c(&self) -> &[f64] {
        &self.c
    }
    fn h(&self) -> &[f64] {
        &self.h
    }
    fn b(&self) -> &[f64] {
        &self.b
    }
    fn mul_g(&self, x: &[f64], out: &mut [f64]) {
        let n = self.e_inv.len();
        let t = x[n];
        for j in 0..n {
            out[j] = x[j] - t;
            out[n + j] = -x[j] - t;
        }
    }
    fn mul_gt(&self, z: &[f64], out: &mut [f64]) {
        let n = self.e_inv.len();
        let mut t = 0.0;
        for j in 0..n {
            out[j] = z[j] - z[n + j];
            t -= z[j] + z[n + j];
        }
        out[n] = t;
    }
    fn mul_a(&self, x: &[f64], out: &mut [f64]) {
        let n = self.e_inv.len();
        let v = self.nmat.tr_mul(&DVector::from_column_slice(&x[..n]));
        out.copy_from_slice(v.as_slice());
    }
    fn mul_at(&self, y: &[f64], out: &mut [f64]) {
        let n = self.e_inv.len();
        let v = self.nmat * DVector::from_column_slice(y);
        out[..n].copy_from_slice(v.as_slice());
        out[n] = 0.0;
    }

    fn factor(&mut self, d: &[f64]) -> Result<(), Breakdown> {
        let n = self.e_inv.len();
        let mut sigma = 0.0;
        let mut fef = 0.0;
        for j in 0..n {
            let e = d[j] + d[n + j];
            self.e_inv[j] = 1.0 / e;
            self.f[j] = d[n + j] - d[j];
            sigma += e;
            fef += self.f[j] * self.f[j] / e;
        }
        self.omega = sigma - fef;
        if !(self.omega > 0.0) {
            // equals sum 4 d1 d2 / (d1 + d2) in exact arithmetic
            self.omega = (0..n).map(|j| 4.0 * d[j] * d[n + j] / (d[j] + d[n + j])).sum();
        }
        let dk = self.nmat.ncols();
        let mut w = self.nmat.clone();
        let mut g = DVector::zeros(dk);
        for j in 0..n {
            let s = crate::math::sqrt(self.e_inv[j]);
            for l in 0..dk {
                g[l] += self.nmat[(j, l)] * self.e_inv[j] * self.f[j];
                w[(j, l)] *= s;
            }
        }
        let mut schur = w.tr_mul(&w);
        schur.ger(1.0 / self.omega, &g, &g, 1.0);
        self.chol = Some(regularized_cholesky(schur)?);
        Ok(())
    }

    fn solve(&self, r1: &mut [f64], r2: &mut [f64]) {
        let n = self.e_inv.len();
        let chol = self.chol.as_ref().expect("factor before solve");
        self.solve_m(r1);
        let mut rhs = vec![0.0; r2.len()];
        self.mul_a(r1, &mut rhs);
        for (a, b) in rhs.iter_mut().zip(r2.iter()) {
            *a -= b;
        }
        let dy = chol.solve(&DVector::from_column_slice(&rhs));
        let mut corr = vec![0.0; n + 1];
        self.mul_at(dy.as_slice(), &mut corr);
        self.solve_m(&mut corr);
        for (a, b) in r1.iter_mut().zip(&corr) {
            *a -= b;
        }
        r2.copy_from_slice(dy.as_slice());
    }
}
