//! Two-phase dense tableau simplex.
//!
//! Slow but exact up to pivot tolerances; used as the fallback when the
//! interior-point iteration breaks down and as an independent reference in
//! tests.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpSolution, LpStatus};

#[derive(Clone, Copy)]
enum VarMap {
    /// `z = lo + x'`, optional row index of `x' <= hi - lo`.
    Shift { col: usize, lo: f64, upper_row: Option<usize> },
    /// `z = hi - x'`
    Neg { col: usize, hi: f64 },
    /// `z = x+ - x-`
    Free { pos: usize, neg: usize },
}

impl VarMap {
    fn shift(&self) -> f64 {
        match *self {
            VarMap::Shift { lo, .. } => lo,
            VarMap::Neg { hi, .. } => hi,
            VarMap::Free { .. } => 0.0,
        }
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }
    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }
    fn row(&self, r: usize) -> &[f64] {
        let w = self.cols + 1;
        &self.data[r * w..(r + 1) * w]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.row(pr).to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                let row = &mut self.data[r * w..(r + 1) * w];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on columns `< enter_limit`.
    fn optimize(&mut self, enter_limit: usize, tol: f64, max_iter: usize) -> Phase {
        let obj = self.rows;
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate > 50;
            let mut enter = None;
            let mut best = -tol;
            for c in 0..enter_limit {
                let d = self.at(obj, c);
                if d < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(ec) = enter else { return Phase::Optimal };
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, ec);
                if a > 1e-9 {
                    let q = self.rhs(r).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => q < ratio - 1e-12 || (q <= ratio + 1e-12 && self.basis[r] < self.basis[l]),
                    };
                    if better {
                        leave = Some(r);
                        ratio = q;
                    }
                }
            }
            let Some(lr) = leave else { return Phase::Unbounded(ec) };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(lr, ec);
        }
        Phase::Stalled
    }
}

enum Phase {
    Optimal,
    Unbounded(usize),
    Stalled,
}

struct StandardForm {
    maps: Vec<VarMap>,
    n_struct: usize,
    n_slack: usize,
    /// Rows: equalities, inequalities, upper bounds; each with its slack column.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let d = lp.num_vars();
    let mut maps = Vec::with_capacity(d);
    let mut next = 0usize;
    let mut n_upper = 0usize;
    for j in 0..d {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let map = if lo.is_finite() {
            let upper_row = if hi.is_finite() {
                n_upper += 1;
                Some(n_upper - 1)
            } else {
                None
            };
            next += 1;
            VarMap::Shift { col: next - 1, lo, upper_row }
        } else if hi.is_finite() {
            next += 1;
            VarMap::Neg { col: next - 1, hi }
        } else {
            next += 2;
            VarMap::Free { pos: next - 2, neg: next - 1 }
        };
        maps.push(map);
    }
    let n_struct = next;
    let (p, mi) = (lp.eq_matrix.nrows(), lp.ineq_matrix.nrows());
    let n_slack = mi + n_upper;
    let rows = p + mi + n_upper;
    let width = n_struct + n_slack;
    let mut a = vec![vec![0.0; width]; rows];
    let mut b = vec![0.0; rows];

    let put = |row: &mut Vec<f64>, rhs: &mut f64, j: usize, coef: f64| {
        *rhs -= coef * maps[j].shift();
        match maps[j] {
            VarMap::Shift { col, .. } => row[col] += coef,
            VarMap::Neg { col, .. } => row[col] -= coef,
            VarMap::Free { pos, neg } => {
                row[pos] += coef;
                row[neg] -= coef;
            }
        }
    };
    for i in 0..p {
        b[i] = lp.eq_rhs[i];
        for j in 0..d {
            let v = lp.eq_matrix[(i, j)];
            if v != 0.0 {
                put(&mut a[i], &mut b[i], j, v);
            }
        }
    }
    for i in 0..mi {
        let r = p + i;
        b[r] = lp.ineq_rhs[i];
        for j in 0..d {
            let v = lp.ineq_matrix[(i, j)];
            if v != 0.0 {
                put(&mut a[r], &mut b[r], j, v);
            }
        }
        a[r][n_struct + i] = 1.0;
    }
    for j in 0..d {
        if let VarMap::Shift { col, lo, upper_row: Some(u) } = maps[j] {
            let r = p + mi + u;
            a[r][col] = 1.0;
            a[r][n_struct + mi + u] = 1.0;
            b[r] = lp.upper[j] - lo;
        }
    }
    let mut cost = vec![0.0; width];
    for j in 0..d {
        let c = lp.objective[j];
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] = c,
            VarMap::Neg { col, .. } => cost[col] = -c,
            VarMap::Free { pos, neg } => {
                cost[pos] = c;
                cost[neg] = -c;
            }
        }
    }
    StandardForm { maps, n_struct, n_slack, a, b, cost }
}

/// Number of tableau entries the simplex would allocate.
pub(crate) fn tableau_size(lp: &LinearProgram) -> usize {
    let d = lp.num_vars();
    let finite = lp.lower.iter().chain(&lp.upper).filter(|v| v.is_finite()).count();
    let rows = lp.eq_matrix.nrows() + lp.ineq_matrix.nrows() + finite;
    let cols = 2 * d + 2 * rows + 1;
    (rows + 1) * cols
}

/// Solves `lp` with the two-phase simplex method.
pub fn solve(lp: &LinearProgram, tol: f64) -> LpSolution {
    let sf = standard_form(lp);
    let rows = sf.b.len();
    let width = sf.n_struct + sf.n_slack;
    let cols = width + rows;
    let mut flip = vec![1.0; rows];
    let mut t = Tableau { rows, cols, data: vec![0.0; (rows + 1) * (cols + 1)], basis: vec![0; rows] };
    let w = cols + 1;
    for r in 0..rows {
        if sf.b[r] < 0.0 {
            flip[r] = -1.0;
        }
        for c in 0..width {
            t.data[r * w + c] = flip[r] * sf.a[r][c];
        }
        t.data[r * w + width + r] = 1.0;
        t.data[r * w + cols] = flip[r] * sf.b[r];
        t.basis[r] = width + r;
    }
    // phase 1: minimize the sum of artificials
    for c in 0..=cols {
        if c >= width && c < cols {
            continue;
        }
        let s: f64 = (0..rows).map(|r| t.at(r, c)).sum();
        t.data[rows * w + c] = -s;
    }
    let bnorm = 1.0 + sf.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let max_iter = 50 * (rows + cols) + 1000;
    let d = lp.num_vars();

    let phase1 = t.optimize(width, tol * 1e-3, max_iter);
    if matches!(phase1, Phase::Stalled) {
        return failure(lp);
    }
    let infeasibility = -t.rhs(rows);
    if infeasibility > tol * bnorm {
        // Farkas multipliers from the artificial reduced costs
        let mut y: Vec<f64> = (0..rows).map(|r| flip[r] * (1.0 - t.at(rows, width + r))).collect();
        let by: f64 = y.iter().zip(&sf.b).map(|(a, b)| a * b).sum();
        if by > 0.0 {
            y.iter_mut().for_each(|v| *v /= by);
        }
        let zero = vec![0.0; d];
        let (de, di, dl, du) = map_duals(lp, &sf, &y, &zero);
        return LpSolution {
            status: LpStatus::Infeasible,
            primal: vec![0.0; d],
            dual_eq: de,
            dual_ineq: di,
            dual_lower: dl,
            dual_upper: du,
            objective_value: f64::INFINITY,
            duality_gap: 0.0,
            iterations: 0,
        };
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..rows {
        if t.basis[r] >= width {
            if let Some(c) = (0..width).find(|&c| t.at(r, c).abs() > 1e-9) {
                t.pivot(r, c);
            }
        }
    }
    // phase 2 objective row
    for c in 0..=cols {
        let own = if c < width { sf.cost[c] } else { 0.0 };
        let s: f64 = (0..rows)
            .map(|r| {
                let bc = t.basis[r];
                let cb = if bc < width { sf.cost[bc] } else { 0.0 };
                cb * t.at(r, c)
            })
            .sum();
        t.data[rows * w + c] = if c == cols { -s } else { own - s };
    }
    let phase2 = t.optimize(width, tol * 1e-3, max_iter);
    let mut xs = vec![0.0; width];
    for r in 0..rows {
        if t.basis[r] < width {
            xs[t.basis[r]] = t.rhs(r);
        }
    }
    match phase2 {
        Phase::Stalled => failure(lp),
        Phase::Unbounded(ec) => {
            let mut dir = vec![0.0; width];
            dir[ec] = 1.0;
            for r in 0..rows {
                if t.basis[r] < width {
                    dir[t.basis[r]] = -t.at(r, ec);
                }
            }
            let mut ray = to_original(&sf, &dir, false);
            let cd: f64 = lp.objective.iter().zip(&ray).map(|(a, b)| a * b).sum();
            if cd < 0.0 {
                ray.iter_mut().for_each(|v| *v /= -cd);
            }
            LpSolution {
                status: LpStatus::Unbounded,
                primal: ray,
                dual_eq: vec![0.0; lp.eq_matrix.nrows()],
                dual_ineq: vec![0.0; lp.ineq_matrix.nrows()],
                dual_lower: vec![0.0; d],
                dual_upper: vec![0.0; d],
                objective_value: f64::NEG_INFINITY,
                duality_gap: 0.0,
                iterations: 0,
            }
        }
        Phase::Optimal => {
            let primal = to_original(&sf, &xs, true);
            let y: Vec<f64> = (0..rows).map(|r| -flip[r] * t.at(rows, width + r)).collect();
            let (de, di, dl, du) = map_duals(lp, &sf, &y, &lp.objective);
            let mut sol = LpSolution {
                status: LpStatus::Optimal,
                objective_value: lp.objective_at(&primal),
                primal,
                dual_eq: de,
                dual_ineq: di,
                dual_lower: dl,
                dual_upper: du,
                duality_gap: 0.0,
                iterations: 0,
            };
            sol.duality_gap = (sol.objective_value - sol.dual_objective(lp)).abs();
            sol
        }
    }
}

fn failure(lp: &LinearProgram) -> LpSolution {
    let d = lp.num_vars();
    LpSolution {
        status: LpStatus::IterationLimit,
        primal: vec![0.0; d],
        dual_eq: vec![0.0; lp.eq_matrix.nrows()],
        dual_ineq: vec![0.0; lp.ineq_matrix.nrows()],
        dual_lower: vec![0.0; d],
        dual_upper: vec![0.0; d],
        objective_value: f64::NAN,
        duality_gap: f64::NAN,
        iterations: 0,
    }
}

fn to_original(sf: &StandardForm, xs: &[f64], with_shift: bool) -> Vec<f64> {
    sf.maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo, .. } => xs[col] + if with_shift { lo } else { 0.0 },
            VarMap::Neg { col, hi } => -xs[col] + if with_shift { hi } else { 0.0 },
            VarMap::Free { pos, neg } => xs[pos] - xs[neg],
        })
        .collect()
}

/// Maps row multipliers of the standard form back to textbook duals with
/// costs `cost` (zero for Farkas certificates).
fn map_duals(
    lp: &LinearProgram,
    sf: &StandardForm,
    y: &[f64],
    cost: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = lp.num_vars();
    let (p, mi) = (lp.eq_matrix.nrows(), lp.ineq_matrix.nrows());
    let dual_eq = y[..p].to_vec();
    let dual_ineq = y[p..p + mi].to_vec();
    let mut dual_lower = vec![0.0; d];
    let mut dual_upper = vec![0.0; d];
    for j in 0..d {
        let mut aty = 0.0;
        for i in 0..p {
            aty += lp.eq_matrix[(i, j)] * dual_eq[i];
        }
        for i in 0..mi {
            aty += lp.ineq_matrix[(i, j)] * dual_ineq[i];
        }
        match sf.maps[j] {
            VarMap::Shift { upper_row, .. } => {
                let ub = upper_row.map_or(0.0, |u| y[p + mi + u]);
                dual_upper[j] = ub;
                dual_lower[j] = cost[j] - aty - ub;
            }
            VarMap::Neg { .. } => dual_upper[j] = cost[j] - aty,
            VarMap::Free { .. } => {}
        }
    }
    (dual_eq, dual_ineq, dual_lower, dual_upper)
}
