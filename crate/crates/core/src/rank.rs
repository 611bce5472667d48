//! Numerical rank by row reduction, and the exact rank of checkered patterns
//! and of the blend family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_dims, format_row, Matrix};
use crate::patterns::{alpha_blend, AlphabetKind, Alphabet};

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub numerical_rank: usize,
    /// Accepted pivot magnitudes, largest first.
    pub pivot_magnitudes: Vec<f64>,
    pub tolerance_used: f64,
    pub echelon_form: Matrix,
}

/// JSON view of a [`RankReport`].
#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub rank: usize,
    pub pivots: Vec<f64>,
    pub tolerance: f64,
}

impl RankReport {
    pub fn summary(&self) -> RankSummary {
        RankSummary {
            rank: self.numerical_rank,
            pivots: self.pivot_magnitudes.clone(),
            tolerance: self.tolerance_used,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("rank summary serializes")
    }

    pub fn echelon_csv(&self) -> String {
        self.echelon_form.to_csv()
    }

    /// Smallest accepted pivot, if any.
    pub fn min_pivot(&self) -> Option<f64> {
        self.pivot_magnitudes.last().copied()
    }
}

/// Library default pivot threshold: `1e-10 * max(m, n) * max|entry|`.
///
/// Falls back to the smallest positive normal for an all-zero matrix so the
/// threshold stays strictly positive.
pub fn default_tolerance(matrix: &Matrix) -> f64 {
    let scale = matrix.max_abs();
    let tol = 1e-10 * matrix.rows().max(matrix.cols()) as f64 * scale;
    if tol > 0.0 {
        tol
    } else {
        f64::MIN_POSITIVE
    }
}

/// Gaussian elimination with partial pivoting.
///
/// Columns are swept left to right. The pivot is the largest-magnitude entry
/// at or below the current row (lowest row index on ties); it counts only if
/// it exceeds `tol`. Entries at or below `tol` in a skipped column are treated
/// as zero and cleared, so every row below the rank is exactly zero.
pub fn rank_gauss(matrix: &Matrix, tol: f64) -> Result<RankReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if !matrix.is_finite() {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let mut a = matrix.clone();
    let (m, n) = a.shape();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let mut best = row;
        let mut best_mag = a.get(row, col).abs();
        for i in row + 1..m {
            let mag = a.get(i, col).abs();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag <= tol {
            for i in row..m {
                a.set(i, col, 0.0);
            }
            continue;
        }
        a.swap_rows(row, best);
        let pivot = a.get(row, col);
        for i in row + 1..m {
            let factor = a.get(i, col) / pivot;
            if factor != 0.0 {
                for j in col + 1..n {
                    let v = a.get(i, j) - factor * a.get(row, j);
                    a.set(i, j, v);
                }
            }
            a.set(i, col, 0.0);
        }
        pivots.push(best_mag);
        row += 1;
    }
    pivots.sort_by(|x, y| y.total_cmp(x));
    Ok(RankReport {
        numerical_rank: pivots.len(),
        pivot_magnitudes: pivots,
        tolerance_used: tol,
        echelon_form: a,
    })
}

/// Rank of a checkered pattern, known in closed form.
pub fn analytic_checkered_rank(alphabet: Alphabet, m: usize, n: usize) -> Result<usize> {
    check_dims(m, n)?;
    Ok(match alphabet.kind {
        AlphabetKind::PlusMinus => 1,
        AlphabetKind::ZeroOne if m >= 2 && n >= 2 => 2,
        AlphabetKind::ZeroOne => 1,
    })
}

/// `1 - (2 alpha - 1)^2` in its factored form `4 alpha (1 - alpha)`, which is
/// zero in floating point exactly when alpha is 0 or 1.
pub fn alpha_discriminant(alpha: f64) -> f64 {
    4.0 * alpha * (1.0 - alpha)
}

/// Exact rank of `alpha_blend(alpha, m, n)`: 1 at the two roots, 2 elsewhere.
/// Single-row or single-column blends fall back to elimination.
pub fn alpha_rank(alpha: f64, m: usize, n: usize) -> Result<usize> {
    if !alpha.is_finite() {
        return Err(Error::Argument(format!("alpha must be finite, got {alpha}")));
    }
    check_dims(m, n)?;
    if m < 2 || n < 2 {
        let blend = alpha_blend(alpha, m, n)?;
        return Ok(rank_gauss(&blend, default_tolerance(&blend))?.numerical_rank);
    }
    Ok(if alpha_discriminant(alpha) == 0.0 { 1 } else { 2 })
}

/// Roots of `1 - (2 alpha - 1)^2 = 0`, in ascending order.
///
/// Expands to `-4 alpha^2 + 4 alpha = 0` and solves with the quadratic formula.
pub fn alpha_roots() -> (f64, f64) {
    // 1 - (4a^2 - 4a + 1)
    let (qa, qb, qc) = (-4.0_f64, 4.0_f64, 0.0_f64);
    let disc = qb * qb - 4.0 * qa * qc;
    assert!(disc > 0.0, "blend root equation must have two real roots");
    let sq = disc.sqrt();
    let r1 = (-qb + sq) / (2.0 * qa) + 0.0;
    let r2 = (-qb - sq) / (2.0 * qa) + 0.0;
    if r1 <= r2 {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// One row of an alpha sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub analytic_rank: usize,
    pub numerical_rank: usize,
    pub min_pivot: Option<f64>,
}

pub fn sweep_alpha(alphas: &[f64], m: usize, n: usize, tol: f64) -> Result<Vec<SweepRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let report = rank_gauss(&alpha_blend(alpha, m, n)?, tol)?;
            Ok(SweepRow {
                alpha,
                analytic_rank: alpha_rank(alpha, m, n)?,
                numerical_rank: report.numerical_rank,
                min_pivot: report.min_pivot(),
            })
        })
        .collect()
}

/// CSV with header `alpha,analytic_rank,numerical_rank,min_pivot`. A sweep
/// point with no accepted pivot leaves `min_pivot` empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,analytic_rank,numerical_rank,min_pivot\n");
    for r in rows {
        let pivot = r.min_pivot.map(|p| format_row(&[p])).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_row(&[r.alpha]),
            r.analytic_rank,
            r.numerical_rank,
            pivot
        ));
    }
    out
}

/// `count` evenly spaced points from `lo` to `hi` inclusive, computed as
/// `lo + (hi - lo) * k / (count - 1)` so integer-valued grid points land exactly.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + ((hi - lo) * k as f64) / (count - 1) as f64)
            .collect(),
    }
}
