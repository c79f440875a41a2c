//! Distance scoring and magnitude mapping.
//!
//! A point is scored against a population (never including itself) as the
//! mean of its k smallest Euclidean distances, then squashed through
//! λ = 1 / (1 + e^(-α·d + β)) so that every score lands strictly inside
//! (0, 1) with the 0.5 crossing at d = β/α.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::window::DataVector;

/// Which end of the sorted distance list feeds the mean.
///
/// `FarthestK` mirrors an alternative reading of the block score (mean of the
/// k largest distances). It is kept behind this switch for experiments; the
/// nearest-neighbour form is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreMode {
    NearestK,
    FarthestK,
}

/// Distance score for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceScore {
    /// Mean of the k selected distances.
    pub d: f64,
    /// Arrival index of the scored observation.
    pub t: u64,
    /// Population size the score was computed against.
    pub window_size: usize,
}

/// Sigmoid magnitude, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Magnitude(pub f64);

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("population too small: have {have}, need {need}")]
    PopulationTooSmall { have: usize, need: usize },
    #[error("k must be at least 1")]
    NonPositiveK,
}

/// Euclidean distance between two observations.
pub fn pairwise_distance(a: &DataVector, b: &DataVector) -> Result<f64, ScoreError> {
    if a.values.len() != b.values.len() {
        return Err(ScoreError::DimensionMismatch {
            a: a.values.len(),
            b: b.values.len(),
        });
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Mean of the k smallest distances from `x` to the population. The caller
/// guarantees the population does not contain `x` itself; exclusion is by
/// identity, so value-level duplicates of `x` are legitimate members and can
/// pull the score down to zero.
///
/// Distances are sorted before aggregation, which makes the result invariant
/// under population reordering, ties included.
pub fn knn_score(
    x: &DataVector,
    population: &[&DataVector],
    k: usize,
) -> Result<DistanceScore, ScoreError> {
    knn_score_with(x, population, k, ScoreMode::NearestK)
}

/// [`knn_score`] with an explicit aggregation end.
pub fn knn_score_with(
    x: &DataVector,
    population: &[&DataVector],
    k: usize,
    mode: ScoreMode,
) -> Result<DistanceScore, ScoreError> {
    if k == 0 {
        return Err(ScoreError::NonPositiveK);
    }
    if population.len() < k {
        return Err(ScoreError::PopulationTooSmall {
            have: population.len(),
            need: k,
        });
    }
    let mut dists = Vec::with_capacity(population.len());
    for p in population {
        dists.push(pairwise_distance(x, p)?);
    }
    dists.sort_unstable_by(f64::total_cmp);
    let picked: &[f64] = match mode {
        ScoreMode::NearestK => &dists[..k],
        ScoreMode::FarthestK => &dists[dists.len() - k..],
    };
    let d = picked.iter().sum::<f64>() / k as f64;
    Ok(DistanceScore {
        d,
        t: x.t,
        window_size: population.len(),
    })
}

/// λ = 1 / (1 + e^(-α·d + β)), evaluated in the numerically stable split form
/// and nudged off the interval ends so the result is strictly inside (0, 1)
/// even when the exponential saturates.
pub fn magnitude(d: f64, alpha: f64, beta: f64) -> Magnitude {
    debug_assert!(d >= 0.0 && d.is_finite());
    debug_assert!(alpha > 0.0 && alpha.is_finite() && beta.is_finite());
    let z = alpha * d - beta;
    let lambda = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
    Magnitude(lambda.clamp(f64::MIN_POSITIVE, BELOW_ONE))
}
