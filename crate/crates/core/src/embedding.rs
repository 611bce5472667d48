//! Hiding a uniform block in a checkered background and getting it back.
//!
//! [`separate`] runs the Jacobi SVD on the embedded matrix and classifies each
//! rank-one term as background or payload by how much of its left and right
//! vectors lies in the span of the pattern's closed-form directions
//! (`{u}` / `{v}` for {1, -1}, `{u, w}` / `{v, z}` for {1, 0}).
//!
//! The SVD terms themselves mix background and block energy, because the block
//! directions are not orthogonal to the pattern directions. The background is
//! therefore refitted: its coefficients in the pattern subspace are solved by
//! least squares over every entry outside the located block, which is exact
//! there. The payload is what remains.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{
    components, realize_sum, svd_jacobi_default, RankOneFactor, SvdResult,
};
use crate::matrix::{dot, norm, Matrix};
use crate::patterns::{gen_checkered, Alphabet, AlphabetKind};
use crate::rank::{analytic_checkered_rank, default_tolerance};

/// Projection norm at or above which a vector counts as lying in the background span.
pub const BACKGROUND_THRESHOLD: f64 = 0.99;
/// Projection norm at or below which a vector counts as orthogonal to it.
pub const PAYLOAD_THRESHOLD: f64 = 0.2;
/// Payload entries above this fraction of the peak magnitude belong to the block.
pub const LOCALIZATION_FRACTION: f64 = 0.25;

const MAX_REFINEMENTS: usize = 8;

/// The mean of the alphabet's two symbols: 0.5 for {1, 0}, 0 for {1, -1}.
pub fn alphabet_mean(alphabet: Alphabet) -> f64 {
    0.5 * (alphabet.high_symbol() + alphabet.low_symbol())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub top_left: (usize, usize),
    pub dims: (usize, usize),
}

impl Block {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (r, c) = self.top_left;
        let (p, q) = self.dims;
        i >= r && i < r + p && j >= c && j < c + q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbedSpec {
    pub background_dims: (usize, usize),
    pub alphabet: Alphabet,
    pub block_top_left: (usize, usize),
    pub block_dims: (usize, usize),
    pub fill_value: f64,
}

impl EmbedSpec {
    /// Block of `p x q` at `((m - p) / 2, (n - q) / 2)` filled with the alphabet mean.
    pub fn centered(m: usize, n: usize, alphabet: Alphabet, p: usize, q: usize) -> Self {
        EmbedSpec {
            background_dims: (m, n),
            alphabet,
            block_top_left: (m.saturating_sub(p) / 2, n.saturating_sub(q) / 2),
            block_dims: (p, q),
            fill_value: alphabet_mean(alphabet),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.fill_value == alphabet_mean(self.alphabet)
    }

    pub fn block(&self) -> Block {
        Block {
            top_left: self.block_top_left,
            dims: self.block_dims,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.background_dims;
        let (r, c) = self.block_top_left;
        let (p, q) = self.block_dims;
        if m == 0 || n == 0 {
            return Err(Error::Dimension(format!("background must be non-empty, got {m}x{n}")));
        }
        if p == 0 || q == 0 {
            return Err(Error::Geometry(format!("block must be non-empty, got {p}x{q}")));
        }
        if r + p > m || c + q > n {
            return Err(Error::Geometry(format!(
                "{p}x{q} block at ({r}, {c}) does not fit in {m}x{n}"
            )));
        }
        if !self.fill_value.is_finite() {
            return Err(Error::Argument(format!("fill value must be finite, got {}", self.fill_value)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embed spec serializes")
    }
}

/// The checkered background with the block overwritten by `fill_value`.
pub fn embed_block(spec: &EmbedSpec) -> Result<Matrix> {
    spec.validate()?;
    let (m, n) = spec.background_dims;
    let mut out = gen_checkered(m, n, spec.alphabet)?;
    let block = spec.block();
    for i in 0..m {
        for j in 0..n {
            if block.contains(i, j) {
                out.set(i, j, spec.fill_value);
            }
        }
    }
    Ok(out)
}

/// Rank of the embedded matrix for a mean-filled block: 2 over {1, -1}, 3 over {1, 0}.
///
/// The prediction needs rows and columns of both parities to survive outside
/// the block; otherwise the block can fall inside the background's row or
/// column space and the rank drops.
pub fn embedded_rank(spec: &EmbedSpec) -> Result<usize> {
    spec.validate()?;
    if !spec.is_canonical() {
        return Err(Error::Unsupported(format!(
            "rank prediction needs the alphabet mean as fill, got {}",
            spec.fill_value
        )));
    }
    let (m, n) = spec.background_dims;
    let (r, c) = spec.block_top_left;
    let (p, q) = spec.block_dims;
    if m < 2 || n < 2 {
        return Err(Error::Unsupported(format!("background {m}x{n} is too small")));
    }
    let both_parities = |start: usize, len: usize, total: usize| {
        let outside = (0..total).filter(|&k| k < start || k >= start + len);
        let mut seen = [false; 2];
        for k in outside {
            seen[k % 2] = true;
        }
        seen[0] && seen[1]
    };
    if !both_parities(r, p, m) || !both_parities(c, q, n) {
        return Err(Error::Unsupported(
            "block leaves rows or columns of only one parity outside it".into(),
        ));
    }
    Ok(analytic_checkered_rank(spec.alphabet, m, n)? + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Background,
    Payload,
}

/// One SVD term with its classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedComponent {
    pub factor: RankOneFactor,
    pub left_projection: f64,
    pub right_projection: f64,
    pub class: ComponentClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalReport {
    pub shape: (usize, usize),
    /// The raw SVD terms above the rank cutoff, largest first.
    pub svd_components: Vec<ClassifiedComponent>,
    pub background_components: Vec<RankOneFactor>,
    pub payload_components: Vec<RankOneFactor>,
    pub recovered_block: Option<Block>,
    pub recovered_fill_value: Option<f64>,
    pub residual_norm: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    rows: usize,
    cols: usize,
    svd_sigmas: Vec<f64>,
    svd_classes: Vec<ComponentClass>,
    background_sigmas: Vec<f64>,
    payload_sigmas: Vec<f64>,
    block: Option<&'a Block>,
    fill_value: Option<f64>,
    residual_norm: f64,
}

impl RetrievalReport {
    pub fn count(&self, class: ComponentClass) -> usize {
        self.svd_components.iter().filter(|c| c.class == class).count()
    }

    pub fn to_json(&self) -> String {
        let doc = ReportJson {
            rows: self.shape.0,
            cols: self.shape.1,
            svd_sigmas: self.svd_components.iter().map(|c| c.factor.sigma).collect(),
            svd_classes: self.svd_components.iter().map(|c| c.class).collect(),
            background_sigmas: self.background_components.iter().map(|f| f.sigma).collect(),
            payload_sigmas: self.payload_components.iter().map(|f| f.sigma).collect(),
            block: self.recovered_block.as_ref(),
            fill_value: self.recovered_fill_value,
            residual_norm: self.residual_norm,
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }
}

/// Orthonormal basis (Gram-Schmidt) of the closed-form pattern directions
/// of length `len`: the alternating vector, plus the constant one for {1, 0}.
fn pattern_basis(kind: AlphabetKind, len: usize) -> Vec<Vec<f64>> {
    let scale = 1.0 / (len as f64).sqrt();
    let alternating: Vec<f64> = (0..len)
        .map(|k| if k % 2 == 0 { scale } else { -scale })
        .collect();
    let mut raw = vec![alternating];
    if kind == AlphabetKind::ZeroOne {
        raw.push(vec![scale; len]);
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in raw {
        for b in &basis {
            let p = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let l = norm(&v);
        if l > 1e-12 {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    basis
}

fn projection_norm(basis: &[Vec<f64>], x: &[f64]) -> f64 {
    basis.iter().map(|b| dot(b, x).powi(2)).sum::<f64>().sqrt()
}

/// Classifies one SVD term. Both projections at or above the background
/// threshold means background; both at or below the payload threshold, or
/// one below and the other not ambiguous, means payload.
fn classify(
    index: usize,
    factor: &RankOneFactor,
    left_basis: &[Vec<f64>],
    right_basis: &[Vec<f64>],
) -> Result<ClassifiedComponent> {
    let left = projection_norm(left_basis, &factor.left);
    let right = projection_norm(right_basis, &factor.right);
    let ambiguous = |p: f64| p > PAYLOAD_THRESHOLD && p < BACKGROUND_THRESHOLD;
    let class = if left >= BACKGROUND_THRESHOLD && right >= BACKGROUND_THRESHOLD {
        ComponentClass::Background
    } else if ambiguous(left) || ambiguous(right) {
        return Err(Error::Classification { index, left, right });
    } else {
        ComponentClass::Payload
    };
    Ok(ClassifiedComponent {
        factor: factor.clone(),
        left_projection: left,
        right_projection: right,
        class,
    })
}

/// Bounding box of entries above `LOCALIZATION_FRACTION` of the peak, if
/// the peak exceeds `floor`.
fn locate(payload: &Matrix, floor: f64) -> Option<Block> {
    let peak = payload.max_abs();
    if peak <= floor {
        return None;
    }
    let cut = LOCALIZATION_FRACTION * peak;
    let (mut r0, mut c0, mut r1, mut c1) = (usize::MAX, usize::MAX, 0, 0);
    for i in 0..payload.rows() {
        for j in 0..payload.cols() {
            if payload.get(i, j).abs() > cut {
                r0 = r0.min(i);
                c0 = c0.min(j);
                r1 = r1.max(i);
                c1 = c1.max(j);
            }
        }
    }
    Some(Block {
        top_left: (r0, c0),
        dims: (r1 - r0 + 1, c1 - c0 + 1),
    })
}

/// `L^T M R` for orthonormal column sets `L`, `R` given as vectors.
fn subspace_coefficients(m: &Matrix, left: &[Vec<f64>], right: &[Vec<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut acc = 0.0;
            for i in 0..m.rows() {
                acc += l[i] * dot(m.row(i), r);
            }
            out.push(acc);
        }
    }
    out
}

fn subspace_matrix(coeffs: &[f64], left: &[Vec<f64>], right: &[Vec<f64>], shape: (usize, usize)) -> Matrix {
    let mut out = Matrix::zeros(shape.0, shape.1).expect("non-empty shape");
    let mut k = 0;
    for l in left {
        for r in right {
            let c = coeffs[k];
            k += 1;
            for i in 0..shape.0 {
                for j in 0..shape.1 {
                    out[(i, j)] += c * l[i] * r[j];
                }
            }
        }
    }
    out
}

/// Least-squares coefficients of `M` in the basis `{l_a r_b^T}` using only
/// entries outside `block`.
fn fit_outside(
    m: &Matrix,
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    block: Option<Block>,
) -> Result<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = (0..left.len())
        .flat_map(|a| (0..right.len()).map(move |b| (a, b)))
        .collect();
    let k = pairs.len();
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if block.is_some_and(|b| b.contains(i, j)) {
                continue;
            }
            let basis: Vec<f64> = pairs.iter().map(|&(a, b)| left[a][i] * right[b][j]).collect();
            let value = m.get(i, j);
            for s in 0..k {
                rhs[s] += basis[s] * value;
                for t in 0..k {
                    gram[s][t] += basis[s] * basis[t];
                }
            }
        }
    }
    solve_small(gram, rhs)
}

/// Gaussian elimination with partial pivoting on a tiny dense system.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let k = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[piv][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Underdetermined(
                "too few entries outside the block to pin the background".into(),
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let tail: f64 = (row + 1..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Rank-one terms of `coeffs` viewed as a `|left| x |right|` matrix in the
/// given bases, mapped back to full-length vectors.
fn background_factors(
    coeffs: &[f64],
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    cutoff: f64,
) -> Result<Vec<RankOneFactor>> {
    let small = Matrix::new(left.len(), right.len(), coeffs.to_vec())?;
    let svd = svd_jacobi_default(&small)?;
    let lift = |basis: &[Vec<f64>], coords: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; basis[0].len()];
        for (b, c) in basis.iter().zip(coords) {
            out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
        }
        out
    };
    Ok((0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cutoff)
        .map(|k| RankOneFactor {
            sigma: svd.singular_values[k],
            left: lift(left, &svd.left_vector(k)),
            right: lift(right, &svd.right_vector(k)),
        })
        .collect())
}

/// Splits an embedded matrix into checkered background and block payload.
pub fn separate(embedded: &Matrix, alphabet: Alphabet) -> Result<RetrievalReport> {
    let svd = svd_jacobi_default(embedded)?;
    separate_with_svd(embedded, alphabet, &svd)
}

pub fn separate_with_svd(
    embedded: &Matrix,
    alphabet: Alphabet,
    svd: &SvdResult,
) -> Result<RetrievalReport> {
    let (m, n) = embedded.shape();
    let left_basis = pattern_basis(alphabet.kind, m);
    let right_basis = pattern_basis(alphabet.kind, n);
    let cutoff = default_tolerance(embedded);

    let svd_components = components(svd)
        .iter()
        .enumerate()
        .map(|(idx, f)| classify(idx, f, &left_basis, &right_basis))
        .collect::<Result<Vec<_>>>()?;
    let has_payload = svd_components
        .iter()
        .any(|c| c.class == ComponentClass::Payload);

    // Start from the part of the matrix outside the pattern subspace, then
    // alternate between refitting the background and relocating the block.
    let mut block = None;
    if has_payload {
        let coeffs = subspace_coefficients(embedded, &left_basis, &right_basis);
        let projected = subspace_matrix(&coeffs, &left_basis, &right_basis, (m, n));
        block = locate(&embedded.sub(&projected)?, cutoff);
    }
    let mut coeffs = fit_outside(embedded, &left_basis, &right_basis, block)?;
    let mut background = subspace_matrix(&coeffs, &left_basis, &right_basis, (m, n));
    if has_payload {
        for _ in 0..MAX_REFINEMENTS {
            let next = locate(&embedded.sub(&background)?, cutoff);
            if next == block {
                break;
            }
            block = next;
            coeffs = fit_outside(embedded, &left_basis, &right_basis, block)?;
            background = subspace_matrix(&coeffs, &left_basis, &right_basis, (m, n));
        }
    }

    let background_components = background_factors(&coeffs, &left_basis, &right_basis, cutoff)?;
    let payload_components = match block {
        Some(_) => {
            let payload = embedded.sub(&background)?;
            components(&svd_jacobi_default(&payload)?)
                .into_iter()
                .filter(|f| f.sigma > cutoff)
                .collect()
        }
        None => Vec::new(),
    };

    let mut all = background_components.clone();
    all.extend(payload_components.iter().cloned());
    let rebuilt = realize_sum(&all).unwrap_or(Matrix::zeros(m, n)?);
    let residual_norm = embedded.sub(&rebuilt)?.frobenius_norm();

    let recovered_fill_value = block.map(|b| {
        let (r, c) = b.top_left;
        let (p, q) = b.dims;
        let mut total = 0.0;
        for i in r..r + p {
            for j in c..c + q {
                total += embedded.get(i, j);
            }
        }
        total / (p * q) as f64
    });

    Ok(RetrievalReport {
        shape: (m, n),
        svd_components,
        background_components,
        payload_components,
        recovered_block: block,
        recovered_fill_value,
        residual_norm,
    })
}

/// Sum of the background components.
pub fn reconstruct_background(report: &RetrievalReport) -> Matrix {
    realize_sum(&report.background_components)
        .unwrap_or_else(|| Matrix::zeros(report.shape.0, report.shape.1).expect("non-empty shape"))
}

/// Sum of the payload components (zero when nothing was embedded).
pub fn reconstruct_payload(report: &RetrievalReport) -> Matrix {
    realize_sum(&report.payload_components)
        .unwrap_or_else(|| Matrix::zeros(report.shape.0, report.shape.1).expect("non-empty shape"))
}
