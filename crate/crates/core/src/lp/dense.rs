//! Dense normal-equation solver for general [`LinearProgram`]s.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::ipm::{self, Breakdown, IpmOptions, KktSystem};
use super::{LinearProgram, LpSolution, LpStatus};

/// Canonical-form data: `G x + s = h`, `A x = b` with dense `G`, `A`.
pub(crate) struct DenseKkt {
    c: Vec<f64>,
    g: DMatrix<f64>,
    h: Vec<f64>,
    a: DMatrix<f64>,
    b: Vec<f64>,
    chol_m: Option<Cholesky<f64, Dyn>>,
    chol_s: Option<Cholesky<f64, Dyn>>,
    m_inv_at: DMatrix<f64>,
}

impl DenseKkt {
    pub(crate) fn new(c: Vec<f64>, g: DMatrix<f64>, h: Vec<f64>, a: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self { c, g, h, a, b, chol_m: None, chol_s: None, m_inv_at: DMatrix::zeros(0, 0) }
    }
}

pub(crate) fn regularized_cholesky(mut m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, Breakdown> {
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max).max(1.0);
    let mut reg = 1e-13 * scale;
    for _ in 0..8 {
        let mut trial = m.clone();
        for i in 0..n {
            trial[(i, i)] += reg;
        }
        if let Some(ch) = Cholesky::new(trial) {
            return Ok(ch);
        }
        reg *= 100.0;
    }
    // last resort: symmetrize in case of drift
    m = (&m + m.transpose()) * 0.5;
    for i in 0..n {
        m[(i, i)] += reg;
    }
    Cholesky::new(m).ok_or(Breakdown)
}

impl KktSystem for DenseKkt {
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
        let v = &self.g * DVector::from_column_slice(x);
        out.copy_from_slice(v.as_slice());
    }
    fn mul_gt(&self, z: &[f64], out: &mut [f64]) {
        let v = self.g.tr_mul(&DVector::from_column_slice(z));
        out.copy_from_slice(v.as_slice());
    }
    fn mul_a(&self, x: &[f64], out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let v = &self.a * DVector::from_column_slice(x);
        out.copy_from_slice(v.as_slice());
    }
    fn mul_at(&self, y: &[f64], out: &mut [f64]) {
        if y.is_empty() {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let v = self.a.tr_mul(&DVector::from_column_slice(y));
        out.copy_from_slice(v.as_slice());
    }

    fn factor(&mut self, d: &[f64]) -> Result<(), Breakdown> {
        let mut gs = self.g.clone();
        for (i, &di) in d.iter().enumerate() {
            let w = libm::sqrt(di);
            gs.row_mut(i).iter_mut().for_each(|v| *v *= w);
        }
        let m = gs.transpose() * &gs;
        let chol = regularized_cholesky(m)?;
        if !self.b.is_empty() {
            let x = chol.solve(&self.a.transpose());
            let s = &self.a * &x;
            self.chol_s = Some(regularized_cholesky(s)?);
            self.m_inv_at = x;
        }
        self.chol_m = Some(chol);
        Ok(())
    }

    fn solve(&self, r1: &mut [f64], r2: &mut [f64]) {
        let chol = self.chol_m.as_ref().expect("factor before solve");
        let t = chol.solve(&DVector::from_column_slice(r1));
        if r2.is_empty() {
            r1.copy_from_slice(t.as_slice());
            return;
        }
        let chol_s = self.chol_s.as_ref().expect("factor before solve");
        let rhs = &self.a * &t - DVector::from_column_slice(r2);
        let dy = chol_s.solve(&rhs);
        let dx = t - &self.m_inv_at * &dy;
        r1.copy_from_slice(dx.as_slice());
        r2.copy_from_slice(dy.as_slice());
    }
}

/// Which constraint a canonical inequality row came from.
#[derive(Clone, Copy)]
enum RowOrigin {
    Ineq(usize),
    Lower(usize),
    Upper(usize),
}

pub(crate) fn solve(lp: &LinearProgram, opts: &IpmOptions) -> LpSolution {
    let d = lp.num_vars();
    let mut origins: Vec<RowOrigin> = (0..lp.ineq_matrix.nrows()).map(RowOrigin::Ineq).collect();
    for j in 0..d {
        if lp.lower[j].is_finite() {
            origins.push(RowOrigin::Lower(j));
        }
        if lp.upper[j].is_finite() {
            origins.push(RowOrigin::Upper(j));
        }
    }
    let m = origins.len();
    let mut g = DMatrix::zeros(m, d);
    let mut h = vec![0.0; m];
    for (r, origin) in origins.iter().enumerate() {
        match *origin {
            RowOrigin::Ineq(i) => {
                g.row_mut(r).copy_from(&lp.ineq_matrix.row(i));
                h[r] = lp.ineq_rhs[i];
            }
            RowOrigin::Lower(j) => {
                g[(r, j)] = -1.0;
                h[r] = -lp.lower[j];
            }
            RowOrigin::Upper(j) => {
                g[(r, j)] = 1.0;
                h[r] = lp.upper[j];
            }
        }
    }
    let mut kkt = DenseKkt::new(lp.objective.clone(), g, h, lp.eq_matrix.clone(), lp.eq_rhs.clone());
    let res = ipm::solve(&mut kkt, opts);

    let mut dual_ineq = vec![0.0; lp.ineq_matrix.nrows()];
    let mut dual_lower = vec![0.0; d];
    let mut dual_upper = vec![0.0; d];
    let dual_eq: Vec<f64> = res.y.iter().map(|v| -v).collect();
    for (r, origin) in origins.iter().enumerate() {
        match *origin {
            RowOrigin::Ineq(i) => dual_ineq[i] = -res.z[r],
            RowOrigin::Lower(j) => dual_lower[j] = res.z[r],
            RowOrigin::Upper(j) => dual_upper[j] = -res.z[r],
        }
    }
    let (objective_value, duality_gap) = match res.status {
        LpStatus::Optimal => (res.pobj, (res.pobj - res.dobj).abs()),
        LpStatus::Infeasible => (f64::INFINITY, 0.0),
        LpStatus::Unbounded => (f64::NEG_INFINITY, 0.0),
        LpStatus::IterationLimit => (res.pobj, (res.pobj - res.dobj).abs()),
    };
    LpSolution {
        status: res.status,
        primal: res.x,
        dual_eq,
        dual_ineq,
        dual_lower,
        dual_upper,
        objective_value,
        duality_gap,
        iterations: res.iterations,
    }
}
