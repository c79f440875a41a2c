//! Streaming outlier detection with deferred, trend-based confirmation.
//!
//! Observations arrive one at a time and are grouped into tumbling blocks of
//! `W`. Each completed block is scored in isolation: every member gets a
//! k-nearest-neighbour distance and a sigmoid magnitude in (0, 1). Points whose
//! magnitude clears the candidate threshold are not reported immediately.
//! Instead the block is frozen as a landmark window that keeps growing with
//! the stream, candidates are re-scored as it grows, and the resulting
//! magnitude series is handed to a Mann-Kendall / Sen's slope ensemble. Only
//! candidates whose evidence survives the landmark phase are confirmed;
//! everything else quietly returns to the population.

#![forbid(unsafe_code)]

pub mod detect;
pub mod eval;
pub mod score;
pub mod trend;
pub mod window;

pub use detect::{
    flag_candidates, rescore_candidates, resolve_candidate, BlockScan, CandidateRecord,
    CandidateStatus, Decision, DecisionStatus, DetectError, Detector, Resolution,
};
pub use eval::{confusion, metrics, Confusion, EvalError, MetricsReport};
pub use score::{
    knn_score, knn_score_with, magnitude, pairwise_distance, DistanceScore, Magnitude, ScoreError,
    ScoreMode,
};
pub use trend::{
    ensemble_trend, mann_kendall_s, mann_kendall_z, normal_quantile, sen_slope, sen_slope_with,
    LambdaSeries, MkResult, SlopePairing, TrendError, TrendVerdict,
};
pub use window::{
    landmark_plan, DataVector, LandmarkStep, Mode, PushEvent, ThetaPolicy, WindowConfig,
    WindowError, WindowState,
};
