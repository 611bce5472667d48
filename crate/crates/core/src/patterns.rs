//! Checkered patterns over the two binary alphabets, the all-ones shift
//! matrix, and the blend family `(1 - alpha) * B + alpha * C` connecting them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_dims, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphabetKind {
    /// Symbols {1, 0}.
    ZeroOne,
    /// Symbols {1, -1}.
    PlusMinus,
}

/// Which symbol sits at position (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    #[default]
    HighFirst,
    LowFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub kind: AlphabetKind,
    pub phase: Phase,
}

impl Alphabet {
    pub const ZERO_ONE: Alphabet = Alphabet {
        kind: AlphabetKind::ZeroOne,
        phase: Phase::HighFirst,
    };
    pub const PLUS_MINUS: Alphabet = Alphabet {
        kind: AlphabetKind::PlusMinus,
        phase: Phase::HighFirst,
    };

    pub fn new(kind: AlphabetKind, phase: Phase) -> Self {
        Alphabet { kind, phase }
    }

    pub fn high_symbol(&self) -> f64 {
        1.0
    }

    pub fn low_symbol(&self) -> f64 {
        match self.kind {
            AlphabetKind::ZeroOne => 0.0,
            AlphabetKind::PlusMinus => -1.0,
        }
    }

    /// Symbol at cell (i, j).
    pub fn symbol_at(&self, i: usize, j: usize) -> f64 {
        let even = (i + j) % 2 == 0;
        if even ^ (self.phase == Phase::LowFirst) {
            self.high_symbol()
        } else {
            self.low_symbol()
        }
    }

    fn symbols_label(&self) -> &'static str {
        match self.kind {
            AlphabetKind::ZeroOne => "1, 0",
            AlphabetKind::PlusMinus => "1, -1",
        }
    }
}

pub fn gen_checkered(m: usize, n: usize, alphabet: Alphabet) -> Result<Matrix> {
    check_dims(m, n)?;
    Matrix::from_fn(m, n, |i, j| alphabet.symbol_at(i, j))
}

pub fn gen_ones(m: usize, n: usize) -> Result<Matrix> {
    check_dims(m, n)?;
    Matrix::from_fn(m, n, |_, _| 1.0)
}

/// Exact check that every entry is one of the alphabet's two symbols.
pub fn validate_alphabet(matrix: &Matrix, kind: AlphabetKind) -> Result<()> {
    let alphabet = Alphabet::new(kind, Phase::HighFirst);
    let (lo, hi) = (alphabet.low_symbol(), alphabet.high_symbol());
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let v = matrix.get(i, j);
            if v != lo && v != hi {
                return Err(Error::Alphabet {
                    row: i,
                    col: j,
                    value: v,
                    expected: alphabet.symbols_label(),
                });
            }
        }
    }
    Ok(())
}

/// Maps a {1, -1} matrix to {1, 0} via `(B + C) / 2`.
pub fn affine_to_zero_one(b: &Matrix) -> Result<Matrix> {
    validate_alphabet(b, AlphabetKind::PlusMinus)?;
    Ok(b.map(|v| 0.5 * (v + 1.0)))
}

/// Maps a {1, 0} matrix to {1, -1} via `2A - C`.
pub fn affine_to_plus_minus(a: &Matrix) -> Result<Matrix> {
    validate_alphabet(a, AlphabetKind::ZeroOne)?;
    Ok(a.map(|v| 2.0 * v - 1.0))
}

/// `(1 - alpha) * B + alpha * C` with `B` the high-first {1, -1} pattern.
///
/// Even-parity cells are always 1; odd-parity cells equal `2 * alpha - 1`.
pub fn alpha_blend(alpha: f64, m: usize, n: usize) -> Result<Matrix> {
    if !alpha.is_finite() {
        return Err(Error::Argument(format!("alpha must be finite, got {alpha}")));
    }
    check_dims(m, n)?;
    let off = -1.0 + 2.0 * alpha;
    Matrix::from_fn(m, n, |i, j| if (i + j) % 2 == 0 { 1.0 } else { off })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn plus_minus_corner() {
        let b = gen_checkered(2, 2, Alphabet::PLUS_MINUS).unwrap();
        assert_eq!(b, m(&[&[1.0, -1.0], &[-1.0, 1.0]]));
    }

    #[test]
    fn single_cell_is_phase_symbol() {
        assert_eq!(gen_checkered(1, 1, Alphabet::ZERO_ONE).unwrap(), m(&[&[1.0]]));
        let low = Alphabet::new(AlphabetKind::ZeroOne, Phase::LowFirst);
        assert_eq!(gen_checkered(1, 1, low).unwrap(), m(&[&[0.0]]));
    }

    #[test]
    fn zero_one_four_by_five() {
        let a = gen_checkered(4, 5, Alphabet::ZERO_ONE).unwrap();
        let expected = m(&[
            &[1.0, 0.0, 1.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0, 1.0, 0.0],
            &[1.0, 0.0, 1.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(a, expected);
    }

    #[test]
    fn low_first_swaps_symbols() {
        let b = gen_checkered(2, 3, Alphabet::new(AlphabetKind::PlusMinus, Phase::LowFirst)).unwrap();
        assert_eq!(b, m(&[&[-1.0, 1.0, -1.0], &[1.0, -1.0, 1.0]]));
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(gen_checkered(0, 3, Alphabet::ZERO_ONE), Err(Error::Dimension(_))));
        assert!(matches!(gen_ones(3, 0), Err(Error::Dimension(_))));
        assert!(matches!(alpha_blend(0.5, 0, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn ones() {
        assert_eq!(gen_ones(2, 3).unwrap(), m(&[&[1.0; 3], &[1.0; 3]]));
        assert_eq!(gen_ones(1, 1).unwrap(), m(&[&[1.0]]));
        assert_eq!(gen_ones(4, 7).unwrap(), alpha_blend(1.0, 4, 7).unwrap());
    }

    #[test]
    fn affine_maps() {
        let b = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let a = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(affine_to_zero_one(&b).unwrap(), a);
        assert_eq!(affine_to_plus_minus(&a).unwrap(), b);
        let ones = gen_ones(3, 3).unwrap();
        assert_eq!(affine_to_zero_one(&ones).unwrap(), ones);
        assert_eq!(affine_to_plus_minus(&ones).unwrap(), ones);
    }

    #[test]
    fn affine_rejects_foreign_symbols() {
        let a = m(&[&[1.0, 0.5]]);
        assert_eq!(
            affine_to_plus_minus(&a).unwrap_err(),
            Error::Alphabet {
                row: 0,
                col: 1,
                value: 0.5,
                expected: "1, 0"
            }
        );
        // 0 is not a {1, -1} symbol.
        assert!(matches!(
            affine_to_zero_one(&m(&[&[1.0, 0.0]])),
            Err(Error::Alphabet { row: 0, col: 1, .. })
        ));
        assert!(affine_to_zero_one(&m(&[&[1.0 + 1e-15]])).is_err());
    }

    #[test]
    fn affine_maps_zero_one_pattern_to_plus_minus() {
        for rows in 1..=8 {
            for cols in 1..=8 {
                for phase in [Phase::HighFirst, Phase::LowFirst] {
                    let a = gen_checkered(rows, cols, Alphabet::new(AlphabetKind::ZeroOne, phase)).unwrap();
                    let b = gen_checkered(rows, cols, Alphabet::new(AlphabetKind::PlusMinus, phase)).unwrap();
                    let mapped = affine_to_plus_minus(&a).unwrap();
                    for i in 0..rows {
                        for j in 0..cols {
                            assert_eq!(mapped.get(i, j), b.get(i, j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn blend_endpoints() {
        assert_eq!(alpha_blend(0.0, 2, 2).unwrap(), m(&[&[1.0, -1.0], &[-1.0, 1.0]]));
        assert_eq!(alpha_blend(1.0, 2, 2).unwrap(), m(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(alpha_blend(0.5, 2, 2).unwrap(), m(&[&[1.0, 0.0], &[0.0, 1.0]]));
    }

    #[test]
    fn blend_rejects_non_finite() {
        assert!(matches!(alpha_blend(f64::NAN, 2, 2), Err(Error::Argument(_))));
        assert!(matches!(alpha_blend(f64::INFINITY, 2, 2), Err(Error::Argument(_))));
    }
}
