//! One-sided (Hestenes) Jacobi SVD for small dense matrices.

use serde::Serialize;

use super::RankOneFactor;
use crate::error::{Error, Result};
use crate::matrix::{dot, format_row, norm, Matrix};
use crate::rank::default_tolerance;

pub const DEFAULT_SVD_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// m x m, orthogonal.
    pub u: Matrix,
    /// min(m, n) values, non-increasing.
    pub singular_values: Vec<f64>,
    /// n x n, orthogonal.
    pub v: Matrix,
    /// Rank cutoff of the decomposed matrix under the default tolerance policy.
    pub rank_tolerance: f64,
    pub sweeps: usize,
}

#[derive(Serialize)]
struct SvdJson<'a> {
    singular_values: &'a [f64],
    u: Vec<String>,
    v: Vec<String>,
}

impl SvdResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.u.rows(), self.v.rows())
    }

    pub fn left_vector(&self, idx: usize) -> Vec<f64> {
        self.u.col(idx)
    }

    pub fn right_vector(&self, idx: usize) -> Vec<f64> {
        self.v.col(idx)
    }

    pub fn factor(&self, idx: usize) -> RankOneFactor {
        RankOneFactor {
            sigma: self.singular_values[idx],
            left: self.left_vector(idx),
            right: self.right_vector(idx),
        }
    }

    /// `U * diag(s) * V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = self.shape();
        let mut out = Matrix::zeros(m, n).expect("non-empty svd");
        for idx in 0..self.singular_values.len() {
            self.factor(idx).add_into(&mut out);
        }
        out
    }

    /// Number of singular values above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    /// `{"singular_values": [...], "u": ["row,...", ...], "v": [...]}`, rows as CSV lines.
    pub fn to_json(&self) -> String {
        let rows = |m: &Matrix| (0..m.rows()).map(|i| format_row(m.row(i))).collect();
        let doc = SvdJson {
            singular_values: &self.singular_values,
            u: rows(&self.u),
            v: rows(&self.v),
        };
        serde_json::to_string_pretty(&doc).expect("svd serializes")
    }
}

pub fn svd_jacobi_default(matrix: &Matrix) -> Result<SvdResult> {
    svd_jacobi(matrix, DEFAULT_SVD_TOL, DEFAULT_MAX_SWEEPS)
}

/// One-sided Jacobi SVD.
///
/// Column pairs of a working copy are rotated until every pair is orthogonal
/// to `tol` relative to the product of the two column norms. Pairs whose
/// inner product is already at rounding level for the whole matrix
/// (`n * eps * ||M||_F^2`) are left alone, which keeps numerically null
/// columns from being rotated forever. Wide inputs are handled through their
/// transpose.
pub fn svd_jacobi(matrix: &Matrix, tol: f64, max_sweeps: usize) -> Result<SvdResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if max_sweeps == 0 {
        return Err(Error::Argument("max_sweeps must be at least 1".into()));
    }
    if !matrix.is_finite() {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let rank_tolerance = default_tolerance(matrix);
    let (m, n) = matrix.shape();
    let mut result = if m >= n {
        tall_svd(matrix, tol, max_sweeps)?
    } else {
        let t = tall_svd(&matrix.transpose(), tol, max_sweeps)?;
        TallSvd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
            sweeps: t.sweeps,
        }
    };
    fix_signs(&mut result);
    Ok(SvdResult {
        u: result.u,
        singular_values: result.singular_values,
        v: result.v,
        rank_tolerance,
        sweeps: result.sweeps,
    })
}

struct TallSvd {
    u: Matrix,
    singular_values: Vec<f64>,
    v: Matrix,
    sweeps: usize,
}

fn tall_svd(matrix: &Matrix, tol: f64, max_sweeps: usize) -> Result<TallSvd> {
    let (m, n) = matrix.shape();
    // Work column-major: cols[j] is column j of the working copy.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| matrix.col(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let frob = matrix.frobenius_norm();
    let floor = n.max(1) as f64 * f64::EPSILON * frob * frob;

    let mut sweeps = 0;
    let mut converged = n < 2;
    while !converged {
        if sweeps == max_sweeps {
            // The last sweep may have finished the job without a confirming pass.
            let residual = off_diagonal_residual(&cols, floor);
            if residual <= tol {
                break;
            }
            return Err(Error::Convergence { sweeps, residual });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= floor || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        converged = !rotated;
    }

    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let null_cutoff = m.max(n) as f64 * f64::EPSILON * frob;
    let mut ubasis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut singular_values = Vec::with_capacity(n);
    for &j in &order {
        let s = norms[j];
        singular_values.push(s);
        if s > null_cutoff {
            ubasis.push(cols[j].iter().map(|x| x / s).collect());
        }
    }
    complete_basis(&mut ubasis, m);

    let u = Matrix::from_fn(m, m, |i, k| ubasis[k][i])?;
    let v = Matrix::from_fn(n, n, |i, k| vcols[order[k]][i])?;
    Ok(TallSvd {
        u,
        singular_values,
        v,
        sweeps,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (a, b) = (&mut head[p], &mut tail[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

fn off_diagonal_residual(cols: &[Vec<f64>], floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for p in 0..cols.len() {
        for q in p + 1..cols.len() {
            let gamma = dot(&cols[p], &cols[q]).abs();
            if gamma > floor {
                let scale = (dot(&cols[p], &cols[p]) * dot(&cols[q], &cols[q])).sqrt();
                worst = worst.max(gamma / scale);
            }
        }
    }
    worst
}

/// Extends orthonormal `basis` to `dim` vectors by Gram-Schmidt against the
/// canonical vectors e_0, e_1, ... in index order.
fn complete_basis(basis: &mut Vec<Vec<f64>>, dim: usize) {
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut cand: Vec<f64> = (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        // two passes for orthogonality at rounding level
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(b, &cand);
                for (c, bi) in cand.iter_mut().zip(b) {
                    *c -= proj * bi;
                }
            }
        }
        let len = norm(&cand);
        if len > 1e-8 {
            cand.iter_mut().for_each(|c| *c /= len);
            basis.push(cand);
        }
    }
}

/// Flips each (u_i, v_i) pair so the largest-magnitude component of u_i is
/// positive; ties go to the lowest index.
fn fix_signs(svd: &mut TallSvd) {
    let (m, n) = (svd.u.rows(), svd.v.rows());
    for k in 0..m.min(n) {
        let col = svd.u.col(k);
        let peak = col.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let lead = col
            .iter()
            .copied()
            .find(|x| x.abs() >= peak * (1.0 - 1e-9))
            .unwrap_or(0.0);
        if lead < 0.0 {
            for i in 0..m {
                svd.u[(i, k)] = -svd.u[(i, k)];
            }
            for i in 0..n {
                svd.v[(i, k)] = -svd.v[(i, k)];
            }
        }
    }
}
