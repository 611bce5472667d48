//! Rank-one factors of the checkered and all-ones matrices, and the
//! rank-one expansion of an SVD.

mod jacobi;

pub use jacobi::{svd_jacobi, svd_jacobi_default, SvdResult, DEFAULT_MAX_SWEEPS, DEFAULT_SVD_TOL};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_dims, Matrix};

/// `sigma * left * right^T` with unit `left` (length m) and `right` (length n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneFactor {
    pub sigma: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl RankOneFactor {
    pub fn rows(&self) -> usize {
        self.left.len()
    }

    pub fn cols(&self) -> usize {
        self.right.len()
    }

    /// Entry `(i, j)`, evaluated as `(sigma * left[i]) * right[j]`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.sigma * self.left[i]) * self.right[j]
    }

    pub fn realize(&self) -> Matrix {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| self.entry(i, j))
            .expect("rank-one factor has non-empty vectors")
    }

    pub fn add_into(&self, target: &mut Matrix) {
        for i in 0..self.rows() {
            let s = self.sigma * self.left[i];
            for j in 0..self.cols() {
                target[(i, j)] += s * self.right[j];
            }
        }
    }
}

/// Dense sum of rank-one factors, or `None` for an empty list.
pub fn realize_sum(factors: &[RankOneFactor]) -> Option<Matrix> {
    let first = factors.first()?;
    let mut out = Matrix::zeros(first.rows(), first.cols()).ok()?;
    for f in factors {
        f.add_into(&mut out);
    }
    Some(out)
}

fn alternating(len: usize, magnitude: f64) -> Vec<f64> {
    (0..len)
        .map(|k| if k % 2 == 0 { magnitude } else { -magnitude })
        .collect()
}

/// Scale and right-vector magnitude for the `m x n` sign patterns.
///
/// The textbook values `sqrt(mn)`, `1/sqrt(m)` and `1/sqrt(n)` round so that
/// `(sigma / sqrt(m)) / sqrt(n)` can miss 1 by an ulp. The scale and the
/// right magnitude are instead chosen from the nearest few representable
/// neighbours of their textbook values so that the product is exactly 1;
/// both stay within 16 ulps, so norms and Frobenius identities still hold to
/// ~1e-15.
fn pattern_scale(m: usize, n: usize) -> (f64, f64, f64) {
    let left = 1.0 / (m as f64).sqrt();
    let sigma0 = ((m * n) as f64).sqrt();
    let right0 = 1.0 / (n as f64).sqrt();
    const RADIUS: i64 = 16;
    for ds in neighbour_offsets(RADIUS) {
        let sigma = ulp_step(sigma0, ds);
        let scaled = sigma * left;
        for dr in neighbour_offsets(RADIUS) {
            let right = ulp_step(right0, dr);
            if scaled * right == 1.0 {
                return (sigma, left, right);
            }
        }
    }
    (sigma0, left, right0)
}

fn neighbour_offsets(radius: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=radius).flat_map(|k| [k, -k]))
}

fn ulp_step(x: f64, steps: i64) -> f64 {
    // x is positive and finite here
    f64::from_bits((x.to_bits() as i64 + steps) as u64)
}

/// Rank-one factor of the high-first {1, -1} pattern: `sigma = sqrt(mn)` with
/// alternating unit vectors.
pub fn analytic_factor_checkered(m: usize, n: usize) -> Result<RankOneFactor> {
    check_dims(m, n)?;
    let (sigma, l, r) = pattern_scale(m, n);
    Ok(RankOneFactor {
        sigma,
        left: alternating(m, l),
        right: alternating(n, r),
    })
}

/// Rank-one factor of the all-ones matrix: `tau = sqrt(mn)` with constant unit vectors.
pub fn analytic_factor_ones(m: usize, n: usize) -> Result<RankOneFactor> {
    check_dims(m, n)?;
    let (sigma, l, r) = pattern_scale(m, n);
    Ok(RankOneFactor {
        sigma,
        left: vec![l; m],
        right: vec![r; n],
    })
}

/// The {1, 0} pattern as half the sign pattern plus half the all-ones matrix.
///
/// The two terms are a rank-2 decomposition but not an SVD in general: the
/// left vectors are orthogonal only for even `m`, the right ones only for even `n`.
pub fn analytic_factor_zero_one(m: usize, n: usize) -> Result<(RankOneFactor, RankOneFactor)> {
    let mut sign = analytic_factor_checkered(m, n)?;
    let mut ones = analytic_factor_ones(m, n)?;
    sign.sigma *= 0.5;
    ones.sigma *= 0.5;
    Ok((sign, ones))
}

/// Sum of the leading `k` SVD terms.
pub fn truncate(svd: &SvdResult, k: usize) -> Result<Matrix> {
    let (m, n) = svd.shape();
    let r = m.min(n);
    if k > r {
        return Err(Error::Argument(format!("truncation rank {k} exceeds min(m, n) = {r}")));
    }
    let mut out = Matrix::zeros(m, n)?;
    for idx in 0..k {
        svd.factor(idx).add_into(&mut out);
    }
    Ok(out)
}

/// Rank-one terms of the SVD whose singular value exceeds the rank cutoff of
/// the decomposed matrix, largest first.
pub fn components(svd: &SvdResult) -> Vec<RankOneFactor> {
    components_above(svd, svd.rank_tolerance)
}

pub fn components_above(svd: &SvdResult, cutoff: f64) -> Vec<RankOneFactor> {
    svd.singular_values
        .iter()
        .enumerate()
        .take_while(|(_, &s)| s > cutoff)
        .map(|(idx, _)| svd.factor(idx))
        .collect()
}
