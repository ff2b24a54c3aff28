//! Trigonometric orthonormal basis on `[0, 1]`.
//!
//! `φ₁ ≡ 1`, `φ_{2k}(x) = √2 cos(2πkx)`, `φ_{2k+1}(x) = √2 sin(2πkx)`.
//!
//! Functions are observed on the grid `k/n, k = 1..n` (no sample at 0). On
//! that grid the first `n - 1` basis vectors are orthonormal under the
//! averaged inner product `(1/n) Σ_k u_k v_k`, which is why every truncation
//! here is capped at `M <= n - 1`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;

use crate::error::{FussoError, Result};

/// 1-based index into the trigonometric basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(FussoError::InvalidBasisIndex(m));
        }
        Ok(BasisIndex(m))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Value of the basis function at `x`. No range check on `x`.
    #[inline]
    pub fn value(self, x: f64) -> f64 {
        let m = self.0;
        if m == 1 {
            1.0
        } else if m.is_multiple_of(2) {
            let k = (m / 2) as f64;
            SQRT_2 * (2.0 * PI * k * x).cos()
        } else {
            let k = ((m - 1) / 2) as f64;
            SQRT_2 * (2.0 * PI * k * x).sin()
        }
    }
}

/// Noisy or noiseless samples of a function at `k/n, k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSample {
    values: Vec<f64>,
}

impl GridSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(FussoError::InvalidArgument(format!(
                "grid sample needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FussoError::NonFinite(format!("grid sample entry {k}")));
        }
        Ok(GridSample { values })
    }

    /// Samples `f` at `k/n` for `k = 1..n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridSample::new(grid_points(n).into_iter().map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A block of basis coefficients (`α̃_j` for a covariate or `β_j` for a
/// regression function).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock(pub Vec<f64>);

impl CoefficientBlock {
    pub fn zeros(m: usize) -> Self {
        CoefficientBlock(vec![0.0; m])
    }

    /// Unit vector `e_m` of length `len` (1-based `m`).
    pub fn unit(m: usize, len: usize) -> Self {
        let mut v = vec![0.0; len];
        v[m - 1] = 1.0;
        CoefficientBlock(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

/// The grid `1/n, 2/n, ..., 1`.
pub fn grid_points(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

/// `φ_m(x)` for 1-based `m` and `x` in `[0, 1]`.
pub fn eval_basis(m: usize, x: f64) -> Result<f64> {
    let idx = BasisIndex::new(m)?;
    check_unit_interval(x)?;
    Ok(idx.value(x))
}

fn check_unit_interval(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(FussoError::GridOutOfRange(x))
    }
}

pub(crate) fn check_truncation(n: usize, m: usize) -> Result<()> {
    if m == 0 || n < 2 || m > n - 1 {
        return Err(FussoError::TruncationTooLarge { m, n });
    }
    Ok(())
}

/// `n × M` matrix with entry `(k, m) = φ_m(k/n)`.
pub fn design_matrix(n: usize, m: usize) -> Result<DMatrix<f64>> {
    check_truncation(n, m)?;
    Ok(DMatrix::from_fn(n, m, |k, col| {
        BasisIndex(col + 1).value((k + 1) as f64 / n as f64)
    }))
}

/// Precomputed basis table for repeated projections on one `(n, M)` grid.
///
/// Entries are stored column by column (`table[m * n + k] = φ_{m+1}((k+1)/n)`)
/// so each coefficient is a contiguous dot product.
#[derive(Debug, Clone)]
pub struct Projector {
    n: usize,
    m: usize,
    table: Vec<f64>,
}

impl Projector {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        check_truncation(n, m)?;
        let mut table = Vec::with_capacity(n * m);
        for col in 1..=m {
            let idx = BasisIndex(col);
            table.extend((1..=n).map(|k| idx.value(k as f64 / n as f64)));
        }
        Ok(Projector { n, m, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Writes `α̃_m = (1/n) Σ_k φ_m(k/n) y_k` for `m = 1..M` into `out`.
    pub fn project_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        if y.len() != self.n {
            return Err(FussoError::DimensionMismatch(format!(
                "sample has {} points, projector expects n = {}",
                y.len(),
                self.n
            )));
        }
        debug_assert_eq!(out.len(), self.m);
        let inv_n = 1.0 / self.n as f64;
        for (col, slot) in self.table.chunks_exact(self.n).zip(out.iter_mut()) {
            let s: f64 = col.iter().zip(y).map(|(phi, v)| phi * v).sum();
            *slot = s * inv_n;
        }
        Ok(())
    }

    pub fn project(&self, y: &[f64]) -> Result<CoefficientBlock> {
        let mut out = vec![0.0; self.m];
        self.project_into(y, &mut out)?;
        Ok(CoefficientBlock(out))
    }
}

/// Estimated projection coefficients of a grid sample on the first `M` basis
/// functions.
pub fn project(y: &GridSample, m: usize) -> Result<CoefficientBlock> {
    Projector::new(y.n(), m)?.project(y.values())
}

/// Evaluates `Σ_m block[m] φ_m(x)` at each grid point.
pub fn reconstruct(block: &CoefficientBlock, grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = block.0.iter().position(|v| !v.is_finite()) {
        return Err(FussoError::NonFinite(format!("coefficient {k}")));
    }
    grid.iter()
        .map(|&x| {
            check_unit_interval(x)?;
            Ok(block
                .0
                .iter()
                .enumerate()
                .map(|(i, b)| b * BasisIndex(i + 1).value(x))
                .sum())
        })
        .collect()
}

/// Sobolev ellipsoid weight: `k^γ` when `k` is even or one, `(k-1)^γ`
/// otherwise.
pub fn sobolev_weight(k: usize, gamma: f64) -> f64 {
    debug_assert!(k >= 1);
    let base = if k == 1 || k.is_multiple_of(2) {
        k
    } else {
        k - 1
    };
    (base as f64).powf(gamma)
}
