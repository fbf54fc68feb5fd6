//! Counting tropical solutions: plane curves through points and covers of
//! the line, plus independent oracles for both counts.

pub mod covers;
pub mod oracle;
pub mod plane;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curve::{CurveError, TropicalMap};
use crate::rational::{fmt_q, Q};

pub use covers::enumerate_tropical_covers;
pub use oracle::{hurwitz_factorization_oracle, wdvv_oracle};
pub use plane::{enumerate_plane_curves, mikhalkin_multiplicity, severi_degree, severi_degree_with_retries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("point configuration is not generic: {0}")]
    NonGenericConfiguration(String),
    #[error("no generic configuration found after {0} attempts")]
    ResamplingExhausted(u32),
    #[error("vertex {0} is not trivalent")]
    NotTrivalent(usize),
    #[error("expected {expected} points, got {found}")]
    PointCount { expected: usize, found: usize },
    #[error("coordinates exceeded 128-bit arithmetic")]
    Overflow,
    #[error("{0} points exceed the supported 63")]
    TooManyPoints(usize),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Seeded points with rational coordinates over one shared large
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfiguration {
    pub points: Vec<Vec<Q>>,
    pub seed: u64,
}

impl PointConfiguration {
    /// `count` distinct points in `Q^dim` drawn from ChaCha8 seeded with
    /// `seed`: first a denominator in `[10007, 99991]`, then numerators in
    /// `[-10^6, 10^6]`, coordinate by coordinate.
    pub fn random(count: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let den = BigInt::from(rng.gen_range(10_007i64..=99_991));
        let mut points: Vec<Vec<Q>> = Vec::with_capacity(count);
        while points.len() < count {
            let p: Vec<Q> = (0..dim)
                .map(|_| Q::new(BigInt::from(rng.gen_range(-1_000_000i64..=1_000_000)), den.clone()))
                .collect();
            if !points.contains(&p) {
                points.push(p);
            }
        }
        Self { points, seed }
    }

    pub fn translate(&self, t: &[Q]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(t).map(|(x, y)| x + y).collect())
            .collect();
        Self {
            points,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub map: TropicalMap,
    pub multiplicity: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    pub solutions: Vec<Solution>,
    pub total: Q,
}

impl EnumerationResult {
    /// Sorts by curve text and sums the multiplicities.
    pub fn from_solutions(mut solutions: Vec<Solution>) -> Self {
        solutions.sort_by_cached_key(|s| s.map.to_text());
        let total = solutions.iter().map(|s| s.multiplicity.clone()).sum();
        Self { solutions, total }
    }

    pub fn summary(&self) -> String {
        let positive = self.solutions.iter().filter(|s| s.multiplicity.is_positive()).count();
        format!(
            "total {} from {} solutions ({} positive)",
            fmt_q(&self.total),
            self.solutions.len(),
            positive
        )
    }
}
