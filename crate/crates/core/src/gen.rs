//! Seeded generators for the benchmark matrix families.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by row or
//! column index, so generation is bit-for-bit reproducible regardless of the
//! order in which rows or columns are produced.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SensingMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// i.i.d. standard normal entries.
    Gaussian,
    /// `k` distinct rows of the real trigonometric basis sampled on `i / n`.
    #[serde(rename = "fourier")]
    FourierRows,
    /// `k` distinct rows of the `n x n` Sylvester-Hadamard matrix.
    #[serde(rename = "hadamard")]
    HadamardCut,
    /// `992 x 1024` two-dimensional convolution with a `15 x 15` kernel.
    #[serde(rename = "conv")]
    Convolution,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::FourierRows => "fourier",
            Family::HadamardCut => "hadamard",
            Family::Convolution => "conv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(Family::Gaussian),
            "fourier" => Some(Family::FourierRows),
            "hadamard" => Some(Family::HadamardCut),
            "conv" | "convolution" => Some(Family::Convolution),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub normalize: bool,
}

/// Side length of the convolution grid and half-width of its kernel.
pub const CONV_GRID: usize = 32;
pub const CONV_HALF_WIDTH: usize = 7;

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::arg("k and n must be positive"));
        }
        match self.family {
            Family::Gaussian => Ok(()),
            Family::FourierRows | Family::HadamardCut if self.k > self.n => {
                Err(Error::arg(format!("cannot draw {} distinct rows out of {}", self.k, self.n)))
            }
            Family::HadamardCut if !self.n.is_power_of_two() => {
                Err(Error::arg(format!("Hadamard cuts need n = 2^l, got {}", self.n)))
            }
            Family::Convolution if (self.k, self.n) != (CONV_GRID * (CONV_GRID - 1), CONV_GRID * CONV_GRID) => {
                Err(Error::arg(format!("the convolution matrix is 992 x 1024, got {} x {}", self.k, self.n)))
            }
            _ => Ok(()),
        }
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `k` distinct indices out of `n`, ascending.
fn pick_rows(seed: u64, n: usize, k: usize) -> Vec<usize> {
    let mut rng = stream(seed, u64::MAX);
    let mut rows = rand::seq::index::sample(&mut rng, n, k).into_vec();
    rows.sort_unstable();
    rows
}

/// Builds the matrix described by `spec`.
///
/// With `normalize`, a zero column is an error; this happens for Fourier rows
/// when every drawn row is a sine (all vanish at `t = 0`).
pub fn generate(spec: &GenSpec) -> Result<SensingMatrix> {
    spec.validate()?;
    let (k, n) = (spec.k, spec.n);
    let m = match spec.family {
        Family::Gaussian => {
            let mut m = DMatrix::zeros(k, n);
            for j in 0..n {
                let mut rng = stream(spec.seed, j as u64);
                for i in 0..k {
                    m[(i, j)] = StandardNormal.sample(&mut rng);
                }
            }
            m
        }
        Family::FourierRows => {
            let rows = pick_rows(spec.seed, n, k);
            DMatrix::from_fn(k, n, |r, i| trig_basis(rows[r], i, n))
        }
        Family::HadamardCut => {
            let rows = pick_rows(spec.seed, n, k);
            DMatrix::from_fn(k, n, |r, j| hadamard_entry(rows[r], j))
        }
        Family::Convolution => convolution(spec.seed),
    };
    let a = SensingMatrix::from_dmatrix(m)?.with_seed(spec.seed);
    if spec.normalize {
        a.normalized()
    } else {
        Ok(a)
    }
}

/// Row `r` of the real trigonometric basis at `t = i / n`: `1`, then
/// `cos(2 pi j t)`, `sin(2 pi j t)` for `j = 1, 2, ...`, and `cos(pi n t)` as
/// the last row when `n` is even.
pub fn trig_basis(r: usize, i: usize, n: usize) -> f64 {
    if r == 0 {
        return 1.0;
    }
    let t = i as f64 / n as f64;
    if n % 2 == 0 && r == n - 1 {
        return if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let j = r.div_ceil(2) as f64;
    let arg = 2.0 * core::f64::consts::PI * j * t;
    if r % 2 == 1 {
        libm::cos(arg)
    } else {
        libm::sin(arg)
    }
}

/// Entry `(r, c)` of the Sylvester-Hadamard matrix `H_{l+1} = [H_l H_l; H_l -H_l]`.
pub fn hadamard_entry(r: usize, c: usize) -> f64 {
    if (r & c).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Row of the convolution output at grid node `(p, q)`, `q >= 1`.
pub fn conv_row(p: usize, q: usize) -> usize {
    p * (CONV_GRID - 1) + (q - 1)
}

/// Column of the input grid node `(i, j)`.
pub fn conv_col(i: usize, j: usize) -> usize {
    i * CONV_GRID + j
}

/// Kernel values `K(a, b)`, `-7 <= a, b <= 7`, stored at `(a + 7) * 15 + (b + 7)`.
pub fn conv_kernel(seed: u64) -> Vec<f64> {
    let w = 2 * CONV_HALF_WIDTH + 1;
    let mut rng = stream(seed, 0);
    (0..w * w).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn convolution(seed: u64) -> DMatrix<f64> {
    let g = CONV_GRID as isize;
    let hw = CONV_HALF_WIDTH as isize;
    let w = 2 * hw + 1;
    let kernel = conv_kernel(seed);
    let mut m = DMatrix::zeros(CONV_GRID * (CONV_GRID - 1), CONV_GRID * CONV_GRID);
    for p in 0..g {
        for q in 1..g {
            let row = conv_row(p as usize, q as usize);
            // (K * x)(p, q) = sum_{a, b} K(a, b) x(p - a, q - b)
            for a in -hw..=hw {
                for b in -hw..=hw {
                    let (i, j) = (p - a, q - b);
                    if (0..g).contains(&i) && (0..g).contains(&j) {
                        m[(row, conv_col(i as usize, j as usize))] = kernel[((a + hw) * w + (b + hw)) as usize];
                    }
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn hadamard_base() {
        let spec = GenSpec { family: Family::HadamardCut, k: 2, n: 2, seed: 1, normalize: false };
        let a = generate(&spec).unwrap();
        assert_eq!(a.row_major(), vec![1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn spec_violations() {
        let bad = [
            GenSpec { family: Family::HadamardCut, k: 2, n: 6, seed: 0, normalize: false },
            GenSpec { family: Family::FourierRows, k: 7, n: 6, seed: 0, normalize: false },
            GenSpec { family: Family::Convolution, k: 10, n: 1024, seed: 0, normalize: false },
            GenSpec { family: Family::Gaussian, k: 0, n: 3, seed: 0, normalize: false },
        ];
        for s in bad {
            assert!(generate(&s).is_err(), "{s:?}");
        }
    }

    #[test]
    fn trig_rows_are_orthogonal() {
        let n = 8;
        for r1 in 0..n {
            for r2 in 0..n {
                let d: f64 = (0..n).map(|i| trig_basis(r1, i, n) * trig_basis(r2, i, n)).sum();
                if r1 != r2 {
                    assert!(d.abs() < 1e-12, "{r1} {r2} {d}");
                } else {
                    assert!(d > 1.0);
                }
            }
        }
    }
}
