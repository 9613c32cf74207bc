//! Matrices, norms, the polytope `P_s = {u : ||u||_1 <= s, ||u||_inf <= 1}` and
//! closed-form maximization over it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Dense real `k x n` sensing matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingMatrix {
    data: DMatrix<f64>,
    column_normalized: bool,
    seed: Option<u64>,
}

impl SensingMatrix {
    /// Builds a matrix from `k` rows of `n` entries each.
    pub fn from_row_major(k: usize, n: usize, entries: &[f64]) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::arg(format!("matrix must be non-empty, got {k}x{n}")));
        }
        if entries.len() != k * n {
            return Err(Error::arg(format!(
                "expected {} entries for a {k}x{n} matrix, got {}",
                k * n,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(k, n, entries))
    }

    pub fn from_dmatrix(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::arg("matrix must be non-empty"));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos % data.nrows(), pos / data.nrows());
            return Err(Error::arg(format!("entry ({i}, {j}) is not finite")));
        }
        Ok(Self { data, column_normalized: false, seed: None })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_dmatrix(DMatrix::identity(n, n)).expect("identity is valid");
        m.column_normalized = true;
        m
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn k(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// True when the matrix was produced by [`SensingMatrix::normalized`].
    pub fn is_column_normalized(&self) -> bool {
        self.column_normalized
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[f64] {
        let k = self.k();
        &self.data.as_slice()[j * k..(j + 1) * k]
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k() * self.n());
        for i in 0..self.k() {
            for j in 0..self.n() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Returns the first zero column, if any.
    pub fn zero_column(&self) -> Option<usize> {
        (0..self.n()).find(|&j| self.column(j).iter().all(|&v| v == 0.0))
    }

    /// Divides every column by its Euclidean norm.
    pub fn normalized(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for j in 0..self.n() {
            let norm = math::norm2(self.column(j));
            if norm == 0.0 {
                return Err(Error::ZeroColumn { column: j });
            }
            data.column_mut(j).iter_mut().for_each(|v| *v /= norm);
        }
        Ok(Self { data, column_normalized: true, seed: self.seed })
    }

    /// `A x` for a signal `x` of length `n`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n());
        let mut out = vec![0.0; self.k()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                math::axpy(xj, self.column(j), &mut out);
            }
        }
        out
    }

    /// `A^T y` for `y` of length `k`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.k());
        (0..self.n()).map(|j| math::dot(self.column(j), y)).collect()
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.n() {
            return Err(Error::arg("one scale factor per column is required"));
        }
        let mut data = self.data.clone();
        for (j, &f) in factors.iter().enumerate() {
            data.column_mut(j).iter_mut().for_each(|v| *v *= f);
        }
        Ok(Self { data, column_normalized: false, seed: self.seed })
    }
}

/// Norm used to measure observation residuals in `R^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationNorm {
    L1,
    L2,
    Linf,
}

impl ObservationNorm {
    pub fn dual(self) -> Self {
        match self {
            ObservationNorm::L1 => ObservationNorm::Linf,
            ObservationNorm::L2 => ObservationNorm::L2,
            ObservationNorm::Linf => ObservationNorm::L1,
        }
    }

    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            ObservationNorm::L1 => math::norm1(v),
            ObservationNorm::L2 => math::norm2(v),
            ObservationNorm::Linf => math::norm_inf(v),
        }
    }

    /// Whether the unit ball of this norm (and of its dual) is a polytope.
    pub fn is_polyhedral(self) -> bool {
        !matches!(self, ObservationNorm::L2)
    }
}

/// Radius `beta` in `[0, +inf]` of the ball the corrector columns live in.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub const INFINITY: Beta = Beta(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::arg(format!("beta must be nonnegative, got {value}")));
        }
        Ok(Beta(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Default for Beta {
    fn default() -> Self {
        Beta::INFINITY
    }
}

/// Vertex of `P_s`: an `s`-sparse vector with entries in `{-1, 0, +1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsVertex {
    n: usize,
    s: usize,
    /// Ascending indices.
    support: Vec<usize>,
    signs: Vec<i8>,
}

impl PsVertex {
    pub fn new(n: usize, s: usize, mut entries: Vec<(usize, i8)>) -> Result<Self> {
        if entries.len() > s {
            return Err(Error::arg("vertex support larger than s"));
        }
        entries.sort_unstable_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::arg("duplicate index in vertex support"));
        }
        if entries.iter().any(|&(i, sg)| i >= n || (sg != 1 && sg != -1)) {
            return Err(Error::arg("vertex entries must be +-1 within 0..n"));
        }
        let (support, signs) = entries.into_iter().unzip();
        Ok(Self { n, s, support, signs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for (&i, &sg) in self.support.iter().zip(&self.signs) {
            u[i] = f64::from(sg);
        }
        u
    }

    /// `u^T c`, summed in ascending index order.
    pub fn dot(&self, c: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.signs)
            .map(|(&i, &sg)| f64::from(sg) * c[i])
            .sum()
    }
}

/// Signal of dimension `n` with a nominal sparsity level.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    values: Vec<f64>,
    nominal_sparsity: usize,
}

impl SparseSignal {
    pub fn new(values: Vec<f64>, nominal_sparsity: usize) -> Result<Self> {
        if nominal_sparsity > values.len() {
            return Err(Error::arg("nominal sparsity exceeds the signal dimension"));
        }
        Ok(Self { values, nominal_sparsity })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nominal_sparsity(&self) -> usize {
        self.nominal_sparsity
    }

    /// `||w - w^s||_1` for the nominal sparsity `s`.
    pub fn tail(&self) -> f64 {
        let kept = hard_threshold(&self.values, self.nominal_sparsity);
        self.values.iter().zip(&kept).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Indices of the `s` largest magnitudes (lowest index wins ties), ascending.
fn top_indices(x: &[f64], s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    idx.truncate(s);
    idx.sort_unstable();
    idx
}

/// Sum of the `s` largest magnitudes of `x`.
pub fn norm_s1(x: &[f64], s: usize) -> Result<f64> {
    if s == 0 || s > x.len() {
        return Err(Error::arg(format!("s must lie in 1..={}, got {s}", x.len())));
    }
    Ok(top_indices(x, s).into_iter().map(|i| x[i].abs()).sum())
}

/// `norm_s1` without argument checks; `s` is clamped to `1..=len`.
pub(crate) fn norm_s1_clamped(x: &[f64], s: usize) -> f64 {
    let s = s.clamp(1, x.len());
    if s == 1 {
        return math::norm_inf(x);
    }
    if s == x.len() {
        return math::norm1(x);
    }
    top_indices(x, s).into_iter().map(|i| x[i].abs()).sum()
}

/// A maximizer of `c^T u` over `P_s`.
pub fn argmax_over_ps(c: &[f64], s: usize) -> Result<PsVertex> {
    if s == 0 || s > c.len() {
        return Err(Error::arg(format!("s must lie in 1..={}, got {s}", c.len())));
    }
    let support = top_indices(c, s);
    let signs = support.iter().map(|&i| if c[i] < 0.0 { -1 } else { 1 }).collect();
    Ok(PsVertex { n: c.len(), s, support, signs })
}

/// Keeps the `s` largest magnitudes of `w` and zeroes the rest.
pub fn hard_threshold(w: &[f64], s: usize) -> Vec<f64> {
    let s = s.min(w.len());
    let mut out = vec![0.0; w.len()];
    for i in top_indices(w, s) {
        out[i] = w[i];
    }
    out
}

/// `max_{i != j} |A_i^T A_j| / A_i^T A_i`.
pub fn mutual_incoherence(a: &SensingMatrix) -> Result<f64> {
    if let Some(column) = a.zero_column() {
        return Err(Error::ZeroColumn { column });
    }
    let gram = a.matrix().transpose() * a.matrix();
    let n = a.n();
    let mut mu: f64 = 0.0;
    for i in 0..n {
        let d = gram[(i, i)];
        for j in 0..n {
            if i != j {
                mu = mu.max(gram[(i, j)].abs() / d);
            }
        }
    }
    Ok(mu)
}
