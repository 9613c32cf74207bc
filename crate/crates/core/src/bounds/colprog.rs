//! Interior-point solver for the column program
//!
//! ```text
//! minimize tau
//! s.t.  || lambda_j e_j - Y^T A_j ||_{s,1} <= gamma lambda_j + tau    (all j)
//!       ||y_i||_* <= beta,   lo <= lambda_j <= 1
//! ```
//!
//! With `lambda = 1` and `gamma = 0` this is the `alpha_s` program; with free
//! `lambda` it is the weighted-scaling feasibility problem (feasible iff the
//! optimal `tau` is nonpositive).
//!
//! The `s,1`-norm uses the epigraph
//! `||v||_{s,1} <= s theta + sum_i mu_i`, `|v_i| <= theta + mu_i`, `mu >= 0`.
//! The `n^2` variables `mu_ij` are eliminated block by block from the Newton
//! system (each block is diagonal plus rank one), which leaves a dense system
//! in `Y`, `theta`, `tau`, `lambda` only.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::lp::dense::regularized_cholesky;
use crate::lp::ipm::{self, Breakdown, KktSystem};
use crate::lp::{LpOptions, LpStatus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum DualBall {
    Unbounded,
    /// `|y_ia| <= beta` (observations measured in `l1`)
    Box(f64),
    /// `||y_i||_1 <= beta` (observations measured in `l_inf`)
    L1(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Scaling {
    pub gamma: f64,
    pub lo: f64,
}

pub(crate) struct ColumnSolution {
    pub y: DMatrix<f64>,
    pub lambda: Vec<f64>,
}

/// Nonzeros of the explicit LP, the quantity the size guard is phrased in.
pub fn program_nnz(k: usize, n: usize) -> u64 {
    let (k, n) = (k as u64, n as u64);
    2 * k * n * n + 5 * n * n + 2 * n
}

struct SparseRow {
    idx: Vec<usize>,
    val: Vec<f64>,
    h: f64,
}

struct ColumnKkt<'a> {
    a: &'a DMatrix<f64>,
    k: usize,
    n: usize,
    s: f64,
    scaling: Option<Scaling>,
    n_glob: usize,
    global_rows: Vec<SparseRow>,
    c: Vec<f64>,
    h: Vec<f64>,
    // factorization state
    d: Vec<f64>,
    a_diag: Vec<f64>,
    c_rank: Vec<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl<'a> ColumnKkt<'a> {
    fn new(a: &'a DMatrix<f64>, s: usize, scaling: Option<Scaling>, ball: DualBall) -> Self {
        let (k, n) = (a.nrows(), a.ncols());
        let kn = k * n;
        let lam0 = kn + n + 1;
        let w0 = lam0 + if scaling.is_some() { n } else { 0 };
        let n_glob = w0 + if matches!(ball, DualBall::L1(_)) { kn } else { 0 };

        let mut global_rows = Vec::new();
        let mut row = |idx: Vec<usize>, val: Vec<f64>, h: f64| global_rows.push(SparseRow { idx, val, h });
        match ball {
            DualBall::Unbounded => {}
            DualBall::Box(beta) => {
                for v in 0..kn {
                    row(vec![v], vec![1.0], beta);
                    row(vec![v], vec![-1.0], beta);
                }
            }
            DualBall::L1(beta) => {
                for v in 0..kn {
                    row(vec![v, w0 + v], vec![1.0, -1.0], 0.0);
                    row(vec![v, w0 + v], vec![-1.0, -1.0], 0.0);
                }
                for i in 0..n {
                    row((0..k).map(|a| w0 + i * k + a).collect(), vec![1.0; k], beta);
                }
            }
        }
        if let Some(sc) = scaling {
            for j in 0..n {
                row(vec![lam0 + j], vec![1.0], 1.0);
                row(vec![lam0 + j], vec![-1.0], -sc.lo);
            }
        }

        let n_vars = n_glob + n * n;
        let mut c = vec![0.0; n_vars];
        c[kn + n] = 1.0;
        let mut h = vec![0.0; 3 * n * n + n + global_rows.len()];
        if scaling.is_none() {
            for j in 0..n {
                let r = 3 * (j * n + j);
                h[r] = -1.0;
                h[r + 1] = 1.0;
            }
        }
        for (r, gr) in global_rows.iter().enumerate() {
            h[3 * n * n + n + r] = gr.h;
        }
        Self {
            a,
            k,
            n,
            s: s as f64,
            scaling,
            n_glob,
            global_rows,
            c,
            h,
            d: Vec::new(),
            a_diag: vec![0.0; n * n],
            c_rank: vec![0.0; n],
            chol: None,
        }
    }

    #[inline]
    fn theta(&self, j: usize) -> usize {
        self.k * self.n + j
    }
    #[inline]
    fn tau(&self) -> usize {
        self.k * self.n + self.n
    }
    #[inline]
    fn lambda(&self, j: usize) -> usize {
        self.k * self.n + self.n + 1 + j
    }
    #[inline]
    fn mu(&self, i: usize, j: usize) -> usize {
        self.n_glob + j * self.n + i
    }

    /// Global parts of rows 1 and 2 of entry `(i, j)` as `(index, coef1, coef2)`.
    fn pair_rows(&self, i: usize, j: usize, out: &mut Vec<(usize, f64, f64)>) {
        out.clear();
        let aj = self.a.column(j);
        for a in 0..self.k {
            out.push((i * self.k + a, -aj[a], aj[a]));
        }
        out.push((self.theta(j), -1.0, -1.0));
        if self.scaling.is_some() && i == j {
            out.push((self.lambda(j), 1.0, -1.0));
        }
    }

    fn row4(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.push((self.theta(j), self.s));
        out.push((self.tau(), -1.0));
        if let Some(sc) = self.scaling {
            out.push((self.lambda(j), -sc.gamma));
        }
    }

    /// Global coupling of `mu_ij` in the Newton matrix.
    fn coupling(&self, i: usize, j: usize, pair: &mut Vec<(usize, f64, f64)>, r4: &mut Vec<(usize, f64)>, out: &mut Vec<(usize, f64)>) {
        let n = self.n;
        let base = 3 * (j * n + i);
        let (d1, d2, d4) = (self.d[base], self.d[base + 1], self.d[3 * n * n + j]);
        self.pair_rows(i, j, pair);
        self.row4(j, r4);
        out.clear();
        for &(g, c1, c2) in pair.iter() {
            out.push((g, -d1 * c1 - d2 * c2));
        }
        for &(g, c4) in r4.iter() {
            out.push((g, d4 * c4));
        }
    }

    /// `M_j^{-1} v` in place for block `j`.
    fn solve_block(&self, j: usize, v: &mut [f64]) {
        let n = self.n;
        let a = &self.a_diag[j * n..(j + 1) * n];
        let mut sum = 0.0;
        for i in 0..n {
            v[i] /= a[i];
            sum += v[i];
        }
        let corr = self.c_rank[j] * sum;
        for i in 0..n {
            v[i] -= corr / a[i];
        }
    }
}

fn add_outer(m: &mut DMatrix<f64>, v: &[(usize, f64)], w: f64) {
    for &(p, vp) in v {
        let s = w * vp;
        for &(q, vq) in v {
            m[(p, q)] += s * vq;
        }
    }
}

impl KktSystem for ColumnKkt<'_> {
    fn num_vars(&self) -> usize {
        self.c.len()
    }
    fn num_ineq(&self) -> usize {
        self.h.len()
    }
    fn num_eq(&self) -> usize {
        0
    }
    fn c(&self) -> &[f64] {
        &self.c
    }
    fn h(&self) -> &[f64] {
        &self.h
    }
    fn b(&self) -> &[f64] {
        &[]
    }

    fn mul_g(&self, x: &[f64], out: &mut [f64]) {
        let (k, n) = (self.k, self.n);
        let y = DMatrix::from_column_slice(k, n, &x[..k * n]);
        let p = y.tr_mul(self.a);
        let tau = x[self.tau()];
        for j in 0..n {
            let th = x[self.theta(j)];
            let lam = if self.scaling.is_some() { x[self.lambda(j)] } else { 0.0 };
            let mut sum_mu = 0.0;
            for i in 0..n {
                let mu = x[self.mu(i, j)];
                sum_mu += mu;
                let l = if i == j { lam } else { 0.0 };
                let r = 3 * (j * n + i);
                out[r] = -p[(i, j)] - th + l - mu;
                out[r + 1] = p[(i, j)] - th - l - mu;
                out[r + 2] = -mu;
            }
            let g = self.scaling.map_or(0.0, |sc| sc.gamma);
            out[3 * n * n + j] = self.s * th - tau - g * lam + sum_mu;
        }
        for (r, gr) in self.global_rows.iter().enumerate() {
            out[3 * n * n + n + r] = gr.idx.iter().zip(&gr.val).map(|(&i, v)| v * x[i]).sum();
        }
    }

    fn mul_gt(&self, z: &[f64], out: &mut [f64]) {
        let (k, n) = (self.k, self.n);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut w = DMatrix::zeros(n, n);
        let mut tau = 0.0;
        let g = self.scaling.map_or(0.0, |sc| sc.gamma);
        for j in 0..n {
            let z4 = z[3 * n * n + j];
            let mut th = self.s * z4;
            for i in 0..n {
                let r = 3 * (j * n + i);
                let (z1, z2, z3) = (z[r], z[r + 1], z[r + 2]);
                w[(i, j)] = z2 - z1;
                th -= z1 + z2;
                out[self.mu(i, j)] = -z1 - z2 - z3 + z4;
            }
            out[self.theta(j)] = th;
            tau -= z4;
            if self.scaling.is_some() {
                let r = 3 * (j * n + j);
                out[self.lambda(j)] = z[r] - z[r + 1] - g * z4;
            }
        }
        out[self.tau()] = tau;
        let gy = self.a * w.transpose();
        out[..k * n].copy_from_slice(gy.as_slice());
        for (r, gr) in self.global_rows.iter().enumerate() {
            let zr = z[3 * n * n + n + r];
            for (&i, v) in gr.idx.iter().zip(&gr.val) {
                out[i] += v * zr;
            }
        }
    }

    fn mul_a(&self, _x: &[f64], _out: &mut [f64]) {}

    fn mul_at(&self, _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn factor(&mut self, d: &[f64]) -> Result<(), Breakdown> {
        let n = self.n;
        let ng = self.n_glob;
        self.d = d.to_vec();
        let mut schur = DMatrix::zeros(ng, ng);
        let mut q = DMatrix::zeros(ng, n);
        let mut pair = Vec::new();
        let mut r4 = Vec::new();
        let mut b = Vec::new();
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        for j in 0..n {
            let d4 = d[3 * n * n + j];
            self.row4(j, &mut r4);
            add_outer(&mut schur, &r4, d4);
            let mut inv_sum = 0.0;
            for i in 0..n {
                let base = 3 * (j * n + i);
                let (d1, d2, d3) = (d[base], d[base + 1], d[base + 2]);
                let a = d1 + d2 + d3;
                self.a_diag[j * n + i] = a;
                inv_sum += 1.0 / a;

                self.pair_rows(i, j, &mut pair);
                g1.clear();
                g2.clear();
                for &(g, c1, c2) in &pair {
                    g1.push((g, c1));
                    g2.push((g, c2));
                }
                add_outer(&mut schur, &g1, d1);
                add_outer(&mut schur, &g2, d2);

                self.coupling(i, j, &mut pair, &mut r4, &mut b);
                add_outer(&mut schur, &b, -1.0 / a);
                for &(g, v) in &b {
                    q[(g, j)] += v / a;
                }
            }
            let cr = d4 / (1.0 + d4 * inv_sum);
            self.c_rank[j] = cr;
            let sc = crate::math::sqrt(cr);
            q.column_mut(j).iter_mut().for_each(|v| *v *= sc);
        }
        schur.gemm(1.0, &q, &q.transpose(), 1.0);
        for (r, gr) in self.global_rows.iter().enumerate() {
            let dr = d[3 * n * n + n + r];
            for (&p, vp) in gr.idx.iter().zip(&gr.val) {
                for (&qq, vq) in gr.idx.iter().zip(&gr.val) {
                    schur[(p, qq)] += dr * vp * vq;
                }
            }
        }
        self.chol = Some(regularized_cholesky(schur)?);
        Ok(())
    }

    fn solve(&self, r1: &mut [f64], _r2: &mut [f64]) {
        let n = self.n;
        let ng = self.n_glob;
        let chol = self.chol.as_ref().expect("factor before solve");
        let mut pair = Vec::new();
        let mut r4 = Vec::new();
        let mut b = Vec::new();

        let (rg, rl) = r1.split_at_mut(ng);
        let mut t = rl.to_vec();
        let mut rhs = DVector::from_column_slice(rg);
        for j in 0..n {
            self.solve_block(j, &mut t[j * n..(j + 1) * n]);
            for i in 0..n {
                let tij = t[j * n + i];
                self.coupling(i, j, &mut pair, &mut r4, &mut b);
                for &(g, v) in &b {
                    rhs[g] -= v * tij;
                }
            }
        }
        let xg = chol.solve(&rhs);
        for j in 0..n {
            let block = &mut rl[j * n..(j + 1) * n];
            for (i, bi) in block.iter_mut().enumerate() {
                self.coupling(i, j, &mut pair, &mut r4, &mut b);
                *bi -= b.iter().map(|&(g, v)| v * xg[g]).sum::<f64>();
            }
            self.solve_block(j, block);
        }
        rg.copy_from_slice(xg.as_slice());
    }
}

pub(crate) fn solve(
    a: &DMatrix<f64>,
    s: usize,
    scaling: Option<Scaling>,
    ball: DualBall,
    opts: &LpOptions,
) -> Result<ColumnSolution> {
    let (k, n) = (a.nrows(), a.ncols());
    let mut kkt = ColumnKkt::new(a, s, scaling, ball);
    let res = ipm::solve(&mut kkt, &opts.ipm());
    if res.status != LpStatus::Optimal {
        return Err(Error::Solver { status: res.status, context: "column program".into() });
    }
    let mut y = DMatrix::from_column_slice(k, n, &res.x[..k * n]);
    match ball {
        DualBall::Unbounded => {}
        DualBall::Box(beta) => y.iter_mut().for_each(|v| *v = v.clamp(-beta, beta)),
        DualBall::L1(beta) => {
            for mut col in y.column_iter_mut() {
                let l1: f64 = col.iter().map(|v| v.abs()).sum();
                if l1 > beta {
                    col *= beta / l1;
                }
            }
        }
    }
    let lambda = match scaling {
        Some(sc) => (0..n).map(|j| res.x[kkt.lambda(j)].clamp(sc.lo, 1.0)).collect(),
        None => vec![1.0; n],
    };
    Ok(ColumnSolution { y, lambda })
}
