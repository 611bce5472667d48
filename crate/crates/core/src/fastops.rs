//! Products with rank-structured matrices, counted in flops.
//!
//! Cost model: every scalar multiply and every scalar add is one flop; there
//! is no fused multiply-add. Counts are exact functions of the shapes.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{
    analytic_factor_checkered, analytic_factor_zero_one, realize_sum, RankOneFactor,
};
use crate::matrix::{check_dims, dot, format_value, norm, Matrix};

/// Dense `m x n` matrix held as a sum of rank-one factors.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMatrix {
    rows: usize,
    cols: usize,
    factors: Vec<RankOneFactor>,
}

impl StructuredMatrix {
    pub fn new(rows: usize, cols: usize, factors: Vec<RankOneFactor>) -> Result<Self> {
        check_dims(rows, cols)?;
        if factors.len() > rows.min(cols) {
            return Err(Error::Dimension(format!(
                "{} factors exceed min({rows}, {cols})",
                factors.len()
            )));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.rows() != rows || f.cols() != cols {
                return Err(Error::Dimension(format!(
                    "factor {k} is {}x{}, expected {rows}x{cols}",
                    f.rows(),
                    f.cols()
                )));
            }
            let finite = f.sigma.is_finite()
                && f.left.iter().chain(&f.right).all(|v| v.is_finite());
            if !finite {
                return Err(Error::Argument(format!("factor {k} has non-finite values")));
            }
        }
        Ok(StructuredMatrix { rows, cols, factors })
    }

    /// The {1, -1} pattern as a single factor.
    pub fn plus_minus(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![analytic_factor_checkered(m, n)?])
    }

    /// The {1, 0} pattern as two factors.
    pub fn zero_one(m: usize, n: usize) -> Result<Self> {
        let (a, b) = analytic_factor_zero_one(m, n)?;
        Self::new(m, n, vec![a, b])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[RankOneFactor] {
        &self.factors
    }

    pub fn to_dense(&self) -> Matrix {
        realize_sum(&self.factors).unwrap_or_else(|| {
            Matrix::zeros(self.rows, self.cols).expect("dimensions validated on construction")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlopReport {
    pub structured_flops: u64,
    pub dense_flops: u64,
    pub ratio: f64,
}

impl FlopReport {
    fn new(structured_flops: u64, dense_flops: u64) -> Self {
        let ratio = if dense_flops == 0 {
            0.0
        } else {
            structured_flops as f64 / dense_flops as f64
        };
        FlopReport {
            structured_flops,
            dense_flops,
            ratio,
        }
    }
}

/// `m*n` multiplies and `m*(n-1)` adds.
pub fn dense_matvec_flops(m: usize, n: usize) -> u64 {
    let (m, n) = (m as u64, n as u64);
    2 * m * n - m
}

/// Per factor: a length-n dot product, one sigma multiply, and m multiplies
/// scaling the left vector; accumulating r scaled vectors costs `m*(r-1)` adds.
pub fn structured_matvec_flops(m: usize, n: usize, r: usize) -> u64 {
    let (m, n, r) = (m as u64, n as u64, r as u64);
    if r == 0 {
        return 0;
    }
    r * (2 * n - 1) + r * m + m * (r - 1) + r
}

pub fn dense_matmul_flops(m: usize, n: usize, k: usize) -> u64 {
    k as u64 * dense_matvec_flops(m, n)
}

pub fn structured_matmul_flops(m: usize, n: usize, r: usize, k: usize) -> u64 {
    k as u64 * structured_matvec_flops(m, n, r)
}

/// `y = sum_i sigma_i * left_i * (right_i . x)` without forming the dense matrix.
pub fn matvec_structured(s: &StructuredMatrix, x: &[f64]) -> Result<(Vec<f64>, FlopReport)> {
    let (m, n) = s.shape();
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "vector of length {} does not match {n} columns",
            x.len()
        )));
    }
    let mut y = vec![0.0; m];
    for (k, f) in s.factors.iter().enumerate() {
        let coeff = f.sigma * dot(&f.right, x);
        if k == 0 {
            for (yi, li) in y.iter_mut().zip(&f.left) {
                *yi = coeff * li;
            }
        } else {
            for (yi, li) in y.iter_mut().zip(&f.left) {
                *yi += coeff * li;
            }
        }
    }
    let report = FlopReport::new(structured_matvec_flops(m, n, s.rank()), dense_matvec_flops(m, n));
    Ok((y, report))
}

/// `Y = sum_i sigma_i * left_i * (right_i^T X)` for `X` of shape `n x k`.
pub fn matmul_structured(s: &StructuredMatrix, x: &Matrix) -> Result<(Matrix, FlopReport)> {
    let (m, n) = s.shape();
    if x.rows() != n {
        return Err(Error::Dimension(format!(
            "cannot multiply {m}x{n} by {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let k = x.cols();
    let mut y = Matrix::zeros(m, k)?;
    for f in &s.factors {
        // row vector right^T X, scaled by sigma
        let mut coeffs = vec![0.0; k];
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = f.sigma * (0..n).map(|i| f.right[i] * x.get(i, j)).sum::<f64>();
        }
        for i in 0..m {
            for (j, c) in coeffs.iter().enumerate() {
                y[(i, j)] += f.left[i] * c;
            }
        }
    }
    let report = FlopReport::new(
        structured_matmul_flops(m, n, s.rank(), k),
        dense_matmul_flops(m, n, k),
    );
    Ok((y, report))
}

/// Max |y - A x| over `max_i sum_j |a_ij x_j|`, the scale a dense product
/// is accurate to. Stays meaningful when `A x` cancels to near zero.
pub fn matvec_error(dense: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..dense.rows() {
        let row = dense.row(i);
        let exact: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        let mag: f64 = row.iter().zip(x).map(|(a, b)| (a * b).abs()).sum();
        diff = diff.max((y[i] - exact).abs());
        scale = scale.max(mag);
    }
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub flops: FlopReport,
    pub median_ns_structured: u128,
    pub median_ns_dense: u128,
    /// Worst relative disagreement between the two paths over all trials.
    pub max_relative_error: f64,
}

const BENCH_SEED: u64 = 0x5eed_c4ec;

/// Structured matrix of the requested rank used by [`bench`]: the {1, -1}
/// pattern for rank 1, the {1, 0} pattern for rank 2, seeded random unit
/// factors otherwise.
pub fn bench_matrix(m: usize, n: usize, rank: usize) -> Result<StructuredMatrix> {
    match rank {
        1 => StructuredMatrix::plus_minus(m, n),
        2 => StructuredMatrix::zero_one(m, n),
        _ => {
            let mut rng = StdRng::seed_from_u64(BENCH_SEED ^ (m as u64) << 32 ^ n as u64);
            let mut unit = |len: usize| {
                let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
                let l = norm(&v);
                v.into_iter().map(|x| x / l).collect::<Vec<_>>()
            };
            let factors = (0..rank)
                .map(|k| RankOneFactor {
                    sigma: (rank - k) as f64,
                    left: unit(m),
                    right: unit(n),
                })
                .collect();
            StructuredMatrix::new(m, n, factors)
        }
    }
}

/// Times structured vs dense matvec for each size. Timings are medians over
/// `trials`; flop counts come from the closed-form model.
pub fn bench(sizes: &[(usize, usize)], rank: usize, trials: usize) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let mut rng = StdRng::seed_from_u64(BENCH_SEED);
    let mut table = Vec::with_capacity(sizes.len());
    for &(m, n) in sizes {
        let s = bench_matrix(m, n, rank)?;
        let dense = s.to_dense();
        let mut t_struct = Vec::with_capacity(trials);
        let mut t_dense = Vec::with_capacity(trials);
        let mut worst: f64 = 0.0;
        let mut flops = None;
        for _ in 0..trials {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let start = Instant::now();
            let (ys, report) = std::hint::black_box(matvec_structured(&s, &x)?);
            t_struct.push(start.elapsed().as_nanos());
            let start = Instant::now();
            std::hint::black_box(dense.matvec(&x)?);
            t_dense.push(start.elapsed().as_nanos());
            worst = worst.max(matvec_error(&dense, &x, &ys));
            flops = Some(report);
        }
        table.push(BenchRow {
            rows: m,
            cols: n,
            rank,
            flops: flops.expect("at least one trial"),
            median_ns_structured: median(&mut t_struct),
            median_ns_dense: median(&mut t_dense),
            max_relative_error: worst,
        });
    }
    Ok(table)
}

fn median(samples: &mut [u128]) -> u128 {
    samples.sort_unstable();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}

pub const BENCH_CSV_HEADER: &str =
    "size,rank,structured_flops,dense_flops,ratio,median_ns_structured,median_ns_dense";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{BENCH_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{}x{},{},{},{},{},{},{}\n",
            r.rows,
            r.cols,
            r.rank,
            r.flops.structured_flops,
            r.flops.dense_flops,
            format_value(r.flops.ratio),
            r.median_ns_structured,
            r.median_ns_dense
        ));
    }
    out
}

/// Same columns as [`bench_csv`], space-aligned.
pub fn bench_text(rows: &[BenchRow]) -> String {
    let header: Vec<String> = BENCH_CSV_HEADER.split(',').map(str::to_string).collect();
    let mut cells = vec![header];
    for r in rows {
        cells.push(vec![
            format!("{}x{}", r.rows, r.cols),
            r.rank.to_string(),
            r.flops.structured_flops.to_string(),
            r.flops.dense_flops.to_string(),
            format!("{:.6}", r.flops.ratio),
            r.median_ns_structured.to_string(),
            r.median_ns_dense.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
