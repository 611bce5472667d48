//! Checkered-pattern matrices over {1, 0} and {1, -1}: construction, rank,
//! closed-form factorizations, a Jacobi SVD, block embedding and separation,
//! and rank-structured matrix products with exact flop accounting.

pub mod embedding;
pub mod error;
pub mod factorization;
pub mod fastops;
pub mod matrix;
pub mod patterns;
pub mod rank;

pub use error::{Error, Result};
pub use factorization::{RankOneFactor, SvdResult};
pub use matrix::Matrix;
pub use patterns::{Alphabet, AlphabetKind, Phase};
