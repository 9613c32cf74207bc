//! Upper bounds on `gammahat_s(A)`, hence lower bounds on the largest `s` for
//! which `A` is `s`-good.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lower::KernelWitness;
use crate::lp::{solve_lp_with, LinearProgram, LpOptions, LpStatus};
use crate::math::{norm1, norm2, norm_inf, sqrt};
use crate::residual::ResidualSolver;
use crate::types::{mutual_incoherence, norm_s1_clamped, Beta, ObservationNorm, SensingMatrix};

pub(crate) mod colprog;

pub use colprog::program_nnz as alphas_program_nnz;

/// Default cap on the size (nonzeros) of the full `alpha_s` program.
pub const DEFAULT_LP_LIMIT: u64 = 300_000;

/// Corrector matrix `Y = [y_1, ..., y_n]` (`k x n`) with `||y_i||_* <= beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorMatrix {
    y: DMatrix<f64>,
    beta: Beta,
    norm: ObservationNorm,
}

impl CorrectorMatrix {
    pub fn new(y: DMatrix<f64>, beta: Beta, norm: ObservationNorm) -> Result<Self> {
        if beta.is_finite() {
            let dual = norm.dual();
            for (i, col) in y.column_iter().enumerate() {
                let v: Vec<f64> = col.iter().copied().collect();
                let nv = dual.eval(&v);
                if nv > beta.value() + 1e-9 {
                    return Err(Error::arg(format!("column {i} has dual norm {nv} above beta {}", beta.value())));
                }
            }
        }
        Ok(Self { y, beta, norm })
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn norm(&self) -> ObservationNorm {
        self.norm
    }

    /// `I - Y^T A`
    pub fn residual_matrix(&self, a: &SensingMatrix) -> Result<DMatrix<f64>> {
        if self.y.nrows() != a.k() || self.y.ncols() != a.n() {
            return Err(Error::arg(format!(
                "corrector is {}x{}, matrix is {}x{}",
                self.y.nrows(),
                self.y.ncols(),
                a.k(),
                a.n()
            )));
        }
        let mut r = -self.y.tr_mul(a.matrix());
        for i in 0..a.n() {
            r[(i, i)] += 1.0;
        }
        Ok(r)
    }

    /// `max_j ||(I - Y^T A) e_j||_{s,1}`
    pub fn column_bound(&self, a: &SensingMatrix, s: usize) -> Result<f64> {
        let r = self.residual_matrix(a)?;
        Ok(max_column_norm(&r, s))
    }
}

fn max_column_norm(r: &DMatrix<f64>, s: usize) -> f64 {
    r.column_iter()
        .map(|c| {
            let v: Vec<f64> = c.iter().copied().collect();
            norm_s1_clamped(&v, s)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "alpha1")]
    Alpha1,
    #[serde(rename = "alphas")]
    AlphaS,
    #[serde(rename = "sca")]
    Sca,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Corrector(CorrectorMatrix),
    Kernel(KernelWitness),
}

/// Tolerances a certificate was produced with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub gap_tol: f64,
}

impl From<&LpOptions> for Tolerances {
    fn from(o: &LpOptions) -> Self {
        Self { feas_tol: o.feas_tol, gap_tol: o.gap_tol }
    }
}

/// Outcome of a bound computation.
///
/// For the lower-bounding kinds, `s_certified` is the largest `s` proved good
/// and `bound_value` the certified level (`gamma` scale for [`BoundKind::Mu`],
/// `alpha` scale otherwise). For [`BoundKind::Sca`], `s_certified` is `0`,
/// `s_upper` carries the bound on `s_*(A)` and `bound_value` the lower bound on
/// `gammahat` that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodnessCertificate {
    pub kind: BoundKind,
    pub s_certified: usize,
    pub s_upper: Option<usize>,
    pub bound_value: f64,
    pub beta: Beta,
    pub norm: ObservationNorm,
    pub witness: Option<Witness>,
    pub tolerances: Tolerances,
}

impl GoodnessCertificate {
    /// Re-checks the stored witness against `a`.
    pub fn verify(&self, a: &SensingMatrix) -> Result<bool> {
        match (&self.kind, &self.witness) {
            (BoundKind::Mu, _) => {
                let mu = mutual_incoherence(a)?;
                let s = self.s_certified as f64;
                Ok(self.s_certified == 0 || (mu < 1.0 && s * mu / (1.0 - (s - 1.0) * mu) < 1.0))
            }
            (BoundKind::Alpha1 | BoundKind::AlphaS, Some(Witness::Corrector(y))) => {
                Ok(self.s_certified == 0 || y.column_bound(a, self.s_certified)? < 0.5)
            }
            (BoundKind::Sca, Some(Witness::Kernel(w))) => Ok(w.is_valid_for(a)),
            _ => Ok(false),
        }
    }
}

/// Options shared by the certification routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub lp: LpOptions,
    /// Largest `alpha_s` program (in nonzeros) that will be attempted.
    pub lp_limit: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { lp: LpOptions::default(), lp_limit: DEFAULT_LP_LIMIT }
    }
}

/// `max_j ||A_j||_* / ||A_j||_2^2`.
pub fn column_beta(a: &SensingMatrix, norm: ObservationNorm) -> Result<f64> {
    if let Some(column) = a.zero_column() {
        return Err(Error::ZeroColumn { column });
    }
    let dual = norm.dual();
    Ok((0..a.n())
        .map(|j| {
            let c = a.column(j);
            dual.eval(c) / (norm2(c) * norm2(c))
        })
        .fold(0.0, f64::max))
}

/// Goodness certified by mutual incoherence: the largest `s` with
/// `s mu / (1 - (s - 1) mu) < 1`, capped at `min(k, n)`.
///
/// The witness is `Y = [A_j / ||A_j||_2^2] / (1 + mu)` and the recorded `beta`
/// is `s beta(A) (1 + mu) / (1 - (s - 1) mu)` in the Euclidean norm.
pub fn s_bound_mu(a: &SensingMatrix) -> Result<GoodnessCertificate> {
    let mu = mutual_incoherence(a)?;
    let cap = a.k().min(a.n());
    let level = |s: usize| {
        let s = s as f64;
        s * mu / (1.0 - (s - 1.0) * mu)
    };
    let mut s = 0;
    if mu < 1.0 {
        while s < cap && {
            let l = level(s + 1);
            l >= 0.0 && l < 1.0
        } {
            s += 1;
        }
    }
    let beta_a = column_beta(a, ObservationNorm::L2)?;
    let (bound_value, beta) = if s == 0 {
        (0.0, Beta::INFINITY)
    } else {
        let sf = s as f64;
        (level(s), Beta::new(sf * beta_a * (1.0 + mu) / (1.0 - (sf - 1.0) * mu))?)
    };
    let mut y = a.matrix().clone();
    for (j, mut col) in y.column_iter_mut().enumerate() {
        let c = a.column(j);
        col /= norm2(c) * norm2(c) * (1.0 + mu);
    }
    let witness = CorrectorMatrix { y, beta: Beta::new(beta_a / (1.0 + mu))?, norm: ObservationNorm::L2 };
    Ok(GoodnessCertificate {
        kind: BoundKind::Mu,
        s_certified: s,
        s_upper: None,
        bound_value,
        beta,
        norm: ObservationNorm::L2,
        witness: Some(Witness::Corrector(witness)),
        tolerances: Tolerances { feas_tol: 0.0, gap_tol: 0.0 },
    })
}

fn check_norm(beta: Beta, norm: ObservationNorm) -> Result<()> {
    if beta.is_finite() && !norm.is_polyhedral() {
        return Err(Error::Unsupported(
            "finite beta with the Euclidean observation norm needs a conic solver".into(),
        ));
    }
    Ok(())
}

fn ball(beta: Beta, norm: ObservationNorm) -> colprog::DualBall {
    if !beta.is_finite() {
        return colprog::DualBall::Unbounded;
    }
    match norm.dual() {
        ObservationNorm::Linf => colprog::DualBall::Box(beta.value()),
        _ => colprog::DualBall::L1(beta.value()),
    }
}

/// `alpha_1(A, beta) = max_i min { ||e_i - A^T y||_inf : ||y||_* <= beta }`
/// together with the optimal corrector. The returned value is evaluated at
/// the returned corrector.
pub fn compute_alpha1(a: &SensingMatrix, beta: Beta, norm: ObservationNorm) -> Result<(f64, CorrectorMatrix)> {
    compute_alpha1_with(a, beta, norm, &CertifyOptions::default())
}

pub fn compute_alpha1_with(
    a: &SensingMatrix,
    beta: Beta,
    norm: ObservationNorm,
    opts: &CertifyOptions,
) -> Result<(f64, CorrectorMatrix)> {
    check_norm(beta, norm)?;
    let (k, n) = (a.k(), a.n());
    let lp = opts.lp;
    let columns: Vec<Result<Vec<f64>>> = if beta.is_finite() {
        let b = ball(beta, norm);
        crate::par::map((0..n).collect(), |i| alpha1_column_bounded(a, i, b, &lp))
    } else {
        let solver = ResidualSolver::new(a);
        crate::par::map((0..n).collect(), |i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            solver.solve(&e, &lp).map(|sol| sol.y)
        })
    };
    let mut y = DMatrix::zeros(k, n);
    for (i, col) in columns.into_iter().enumerate() {
        y.set_column(i, &DVector::from_vec(col?));
    }
    let mut cm = CorrectorMatrix { y, beta, norm };
    let mut r = cm.residual_matrix(a)?;
    // row i of I - Y^T A is e_i - A^T y_i, and y_i = 0 leaves exactly e_i
    let worse: Vec<usize> = (0..n).filter(|&i| r.row(i).amax() > 1.0).collect();
    if !worse.is_empty() {
        for &i in &worse {
            cm.y.column_mut(i).fill(0.0);
        }
        r = cm.residual_matrix(a)?;
    }
    Ok((norm_inf(r.as_slice()), cm))
}

/// One column of `alpha_1` with a finite-radius corrector, as a small dense LP.
fn alpha1_column_bounded(a: &SensingMatrix, i: usize, b: colprog::DualBall, opts: &LpOptions) -> Result<Vec<f64>> {
    let (k, n) = (a.k(), a.n());
    let with_w = matches!(b, colprog::DualBall::L1(_));
    let nv = k + 1 + if with_w { k } else { 0 };
    let mut obj = vec![0.0; nv];
    obj[k] = 1.0;
    let rows = 2 * n + if with_w { 2 * k + 1 } else { 0 };
    let mut g = DMatrix::zeros(rows, nv);
    let mut h = vec![0.0; rows];
    for j in 0..n {
        for r in 0..k {
            g[(j, r)] = -a.get(r, j);
            g[(n + j, r)] = a.get(r, j);
        }
        g[(j, k)] = -1.0;
        g[(n + j, k)] = -1.0;
        let e = if i == j { 1.0 } else { 0.0 };
        h[j] = -e;
        h[n + j] = e;
    }
    let mut lo = vec![f64::NEG_INFINITY; nv];
    let mut hi = vec![f64::INFINITY; nv];
    match b {
        colprog::DualBall::Unbounded => {}
        colprog::DualBall::Box(beta) => {
            lo[..k].iter_mut().for_each(|v| *v = -beta);
            hi[..k].iter_mut().for_each(|v| *v = beta);
        }
        colprog::DualBall::L1(beta) => {
            for r in 0..k {
                g[(2 * n + 2 * r, r)] = 1.0;
                g[(2 * n + 2 * r, k + 1 + r)] = -1.0;
                g[(2 * n + 2 * r + 1, r)] = -1.0;
                g[(2 * n + 2 * r + 1, k + 1 + r)] = -1.0;
                g[(2 * n + 2 * k, k + 1 + r)] = 1.0;
            }
            h[2 * n + 2 * k] = beta;
        }
    }
    let p = LinearProgram::new(obj).with_inequalities(g, h).with_bounds(lo, hi);
    let sol = solve_lp_with(&p, opts)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver { status: sol.status, context: format!("alpha_1 column {i}") });
    }
    let mut y = sol.primal[..k].to_vec();
    clamp_to_ball(&mut y, b);
    Ok(y)
}

fn clamp_to_ball(y: &mut [f64], b: colprog::DualBall) {
    match b {
        colprog::DualBall::Unbounded => {}
        colprog::DualBall::Box(beta) => y.iter_mut().for_each(|v| *v = v.clamp(-beta, beta)),
        colprog::DualBall::L1(beta) => {
            let l1 = norm1(y);
            if l1 > beta {
                y.iter_mut().for_each(|v| *v *= beta / l1);
            }
        }
    }
}

/// Largest `s` with `max_j ||(I - Y^T A) e_j||_{s,1} < 1/2` (0 if none).
pub fn improved_s_from_corrector(a: &SensingMatrix, y: &CorrectorMatrix) -> Result<usize> {
    let r = y.residual_matrix(a)?;
    Ok(improved_s(&r))
}

fn improved_s(r: &DMatrix<f64>) -> usize {
    let n = r.ncols();
    // prefix sums of sorted magnitudes give a fast first guess
    let mut worst = vec![0.0_f64; n + 1];
    for col in r.column_iter() {
        let mut m: Vec<f64> = col.iter().map(|v| v.abs()).collect();
        m.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        for (s, v) in m.iter().enumerate() {
            acc += v;
            worst[s + 1] = worst[s + 1].max(acc);
        }
    }
    let mut s = (1..=n).take_while(|&s| worst[s] < 0.5).last().unwrap_or(0);
    // settle the boundary with the reference evaluation
    while s > 0 && max_column_norm(r, s) >= 0.5 {
        s -= 1;
    }
    while s < n && max_column_norm(r, s + 1) < 0.5 {
        s += 1;
    }
    s
}

/// `alpha_s(A, beta) = min_Y max_j ||(I - Y^T A) e_j||_{s,1}` subject to
/// `||y_i||_* <= beta`. The returned value is evaluated at the returned `Y`.
pub fn compute_alphas(a: &SensingMatrix, s: usize, beta: Beta, norm: ObservationNorm) -> Result<(f64, CorrectorMatrix)> {
    compute_alphas_with(a, s, beta, norm, &CertifyOptions::default())
}

pub fn compute_alphas_with(
    a: &SensingMatrix,
    s: usize,
    beta: Beta,
    norm: ObservationNorm,
    opts: &CertifyOptions,
) -> Result<(f64, CorrectorMatrix)> {
    check_norm(beta, norm)?;
    let (k, n) = (a.k(), a.n());
    if s == 0 || s > n {
        return Err(Error::arg(format!("s must lie in 1..={n}, got {s}")));
    }
    let size = colprog::program_nnz(k, n);
    if size > opts.lp_limit {
        return Err(Error::TooLarge { what: "alpha_s program (use the alpha_1 bound instead)", size, limit: opts.lp_limit });
    }
    let sol = colprog::solve(a.matrix(), s, None, ball(beta, norm), &opts.lp)?;
    let cm = CorrectorMatrix { y: sol.y, beta, norm };
    let value = cm.column_bound(a, s)?;
    // Y = 0 always achieves exactly 1
    if value > 1.0 {
        return Ok((1.0, CorrectorMatrix { y: DMatrix::zeros(k, n), beta, norm }));
    }
    Ok((value, cm))
}

/// Certificate from the `alpha_1` corrector with the improved column bound.
pub fn s_bound_alpha1(a: &SensingMatrix, beta: Beta, norm: ObservationNorm) -> Result<GoodnessCertificate> {
    s_bound_alpha1_with(a, beta, norm, &CertifyOptions::default())
}

pub fn s_bound_alpha1_with(
    a: &SensingMatrix,
    beta: Beta,
    norm: ObservationNorm,
    opts: &CertifyOptions,
) -> Result<GoodnessCertificate> {
    let (_, y1) = compute_alpha1_with(a, beta, norm, opts)?;
    let s1 = improved_s_from_corrector(a, &y1)?;
    corrector_certificate(a, BoundKind::Alpha1, s1, y1, beta, norm, opts)
}

/// Incremental certification: start from the `alpha_1` corrector and raise
/// `s` while `alpha_s < 1/2`.
pub fn s_bound_alphas(a: &SensingMatrix, beta: Beta, norm: ObservationNorm) -> Result<GoodnessCertificate> {
    s_bound_alphas_with(a, beta, norm, &CertifyOptions::default())
}

pub fn s_bound_alphas_with(
    a: &SensingMatrix,
    beta: Beta,
    norm: ObservationNorm,
    opts: &CertifyOptions,
) -> Result<GoodnessCertificate> {
    let mut best = s_bound_alpha1_with(a, beta, norm, opts)?;
    let n = a.n();
    while best.s_certified < n {
        let s = best.s_certified + 1;
        match compute_alphas_with(a, s, beta, norm, opts) {
            Ok((value, y)) => {
                if value >= 0.5 {
                    break;
                }
                let s_new = improved_s_from_corrector(a, &y)?.max(s);
                best = corrector_certificate(a, BoundKind::AlphaS, s_new, y, beta, norm, opts)?;
            }
            Err(cause) => {
                return Err(Error::Interrupted { best: Box::new(best), cause: Box::new(cause) });
            }
        }
    }
    Ok(best)
}

fn corrector_certificate(
    a: &SensingMatrix,
    kind: BoundKind,
    s: usize,
    y: CorrectorMatrix,
    beta: Beta,
    norm: ObservationNorm,
    opts: &CertifyOptions,
) -> Result<GoodnessCertificate> {
    let bound_value = y.column_bound(a, s.max(1))?;
    Ok(GoodnessCertificate {
        kind,
        s_certified: s,
        s_upper: None,
        bound_value,
        beta,
        norm,
        witness: Some(Witness::Corrector(y)),
        tolerances: Tolerances::from(&opts.lp),
    })
}

/// Known quantity for [`convert_gamma`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaInput {
    /// `gamma_s(A, beta)`
    Gamma { value: f64, beta: Beta },
    /// `gammahat_s(A, beta)`
    GammaHat { value: f64, beta: Beta },
}

/// Matching values of `gamma_s` and `gammahat_s` with their `beta`s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPair {
    pub gamma: f64,
    pub gammahat: f64,
    pub beta_gamma: Beta,
    pub beta_gammahat: Beta,
}

/// `gamma < 1  =>  gammahat(beta / (1 + gamma)) = gamma / (1 + gamma)`, and
/// `gammahat < 1/2  =>  gamma(beta / (1 - gammahat)) = gammahat / (1 - gammahat)`.
pub fn convert_gamma(input: GammaInput) -> Result<GammaPair> {
    match input {
        GammaInput::Gamma { value, beta } => {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::arg(format!("gamma must lie in [0, 1), got {value}")));
            }
            Ok(GammaPair {
                gamma: value,
                gammahat: value / (1.0 + value),
                beta_gamma: beta,
                beta_gammahat: Beta::new(beta.value() / (1.0 + value))?,
            })
        }
        GammaInput::GammaHat { value, beta } => {
            if !(0.0..0.5).contains(&value) {
                return Err(Error::arg(format!("gammahat must lie in [0, 1/2), got {value}")));
            }
            Ok(GammaPair {
                gamma: value / (1.0 - value),
                gammahat: value,
                beta_gamma: Beta::new(beta.value() / (1.0 - value))?,
                beta_gammahat: beta,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerformanceLimit {
    pub value: f64,
    pub applicable: bool,
}

/// For `n >= 32 k`, every `k x n` matrix has
/// `alpha_s >= min(3 s / (4 (s + sqrt(2 k))), 1/2)`.
pub fn performance_limit(k: usize, n: usize, s: usize) -> PerformanceLimit {
    if n < 32 * k {
        return PerformanceLimit { value: 0.0, applicable: false };
    }
    let sf = s as f64;
    let v = 3.0 * sf / (4.0 * (sf + sqrt(2.0 * k as f64)));
    PerformanceLimit { value: v.min(0.5), applicable: true }
}

/// `beta` large enough that `alpha_s(A, beta) = alpha_s(A)` whenever the
/// latter is below `1/2`: `(3/2) sqrt(k) / sigma_min(A_bar)` for the Euclidean
/// norm, `3 / (2 rho)` for `l1`.
pub fn beta_sufficient_for_alpha(a: &SensingMatrix, norm: ObservationNorm) -> Result<Beta> {
    Beta::new(1.5 * sufficient_beta_base(a, norm, &LpOptions::default())?)
}

/// `sqrt(k) / sigma_min(A_bar)` (Euclidean) or `1 / rho` (`l1`).
pub(crate) fn sufficient_beta_base(a: &SensingMatrix, norm: ObservationNorm, opts: &LpOptions) -> Result<f64> {
    let k = a.k();
    match norm {
        ObservationNorm::L2 => {
            let cols = pivoted_columns(a)?;
            Ok(sqrt(k as f64) / submatrix_sigma_min(a, &cols))
        }
        ObservationNorm::L1 => {
            if rank(a) < k {
                return Err(Error::RankDeficient);
            }
            let rho = image_ball_radius(a, opts)?;
            if !(rho > 0.0) {
                return Err(Error::DegenerateImageBall);
            }
            Ok(1.0 / rho)
        }
        ObservationNorm::Linf => Err(Error::Unsupported("sufficient beta is available for the l1 and l2 norms".into())),
    }
}

fn rank(a: &SensingMatrix) -> usize {
    let sv = a.matrix().clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |m, v| m.max(*v));
    sv.iter().filter(|&&v| v > 1e-10 * smax.max(1e-300)).count()
}

/// `k` columns picked greedily by largest residual norm (QR column pivoting).
pub fn pivoted_columns(a: &SensingMatrix) -> Result<Vec<usize>> {
    let (k, n) = (a.k(), a.n());
    if k > n {
        return Err(Error::RankDeficient);
    }
    let mut work = a.matrix().clone();
    let scale = (0..n).map(|j| norm2(a.column(j))).fold(0.0, f64::max);
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, norm) = (0..n)
            .filter(|j| !chosen.contains(j))
            .map(|j| (j, work.column(j).norm()))
            .fold((usize::MAX, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best == usize::MAX || norm <= 1e-10 * scale {
            return Err(Error::RankDeficient);
        }
        let q = work.column(best) / norm;
        for j in 0..n {
            let proj = q.dot(&work.column(j));
            let mut col = work.column_mut(j);
            col.axpy(-proj, &q, 1.0);
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Smallest singular value of the square submatrix on `cols`.
pub fn submatrix_sigma_min(a: &SensingMatrix, cols: &[usize]) -> f64 {
    let sub = a.matrix().select_columns(cols);
    sub.svd(false, false).singular_values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
}

/// Largest `rho` such that `A` maps the unit `l1`-ball onto a set containing
/// the `l1`-ball of radius `rho`: `min_i max { rho : A x = rho e_i, ||x||_1 <= 1 }`.
pub fn image_ball_radius(a: &SensingMatrix, opts: &LpOptions) -> Result<f64> {
    let (k, n) = (a.k(), a.n());
    let radii = crate::par::map((0..k).collect(), |i| {
        // variables (x+, x-, rho)
        let mut obj = vec![0.0; 2 * n + 1];
        obj[2 * n] = -1.0;
        let mut e = DMatrix::zeros(k, 2 * n + 1);
        for r in 0..k {
            for j in 0..n {
                e[(r, j)] = a.get(r, j);
                e[(r, n + j)] = -a.get(r, j);
            }
        }
        e[(i, 2 * n)] = -1.0;
        let mut g = DMatrix::zeros(1, 2 * n + 1);
        for j in 0..2 * n {
            g[(0, j)] = 1.0;
        }
        let mut lo = vec![0.0; 2 * n + 1];
        lo[2 * n] = f64::NEG_INFINITY;
        let p = LinearProgram::new(obj)
            .with_equalities(e, vec![0.0; k])
            .with_inequalities(g, vec![1.0])
            .with_bounds(lo, vec![f64::INFINITY; 2 * n + 1]);
        let sol = solve_lp_with(&p, opts)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Solver { status: sol.status, context: format!("image-ball radius along e_{i}") });
        }
        Ok(-sol.objective_value)
    });
    let mut rho = f64::INFINITY;
    for r in radii {
        rho = rho.min(r?);
    }
    Ok(rho)
}
