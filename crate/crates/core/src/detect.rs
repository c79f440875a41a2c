//! Candidate lifecycle: flag on block completion, re-score while the landmark
//! grows, resolve by trend and threshold.
//!
//! A completed block is scanned in isolation; members whose magnitude reaches
//! `lambda_c` become candidates and open (or join) a landmark episode. Each
//! expansion step re-scores every pending candidate against the full landmark
//! and then tries to resolve it:
//!
//! * ensemble says increasing -> confirmed outlier,
//! * ensemble says decreasing or neutral and the latest distance sits below
//!   θ -> normal (the point re-enters the population),
//! * otherwise the candidate stays pending; when the landmark is exhausted it
//!   is confirmed exactly when its latest distance still reaches θ.
//!
//! Confirmed vectors are evicted: they never appear in a later scoring
//! population. Within one step, re-scoring is batched before any resolution,
//! so same-step outcomes cannot influence each other's populations.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{knn_score_with, magnitude, DistanceScore, ScoreError};
use crate::trend::{
    ensemble_trend, mann_kendall_z, sen_slope_with, LambdaSeries, TrendError, TrendVerdict,
};
use crate::window::{DataVector, Mode, ThetaPolicy, WindowConfig, WindowError, WindowState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Candidate,
    ConfirmedOutlier,
    Normal,
}

/// Terminal status carried by an emitted decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionStatus {
    ConfirmedOutlier,
    Normal,
}

/// A flagged observation and the evidence gathered on it so far.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub vector: DataVector,
    /// Block index ω whose scan produced the flag.
    pub first_flagged_block: u64,
    /// Magnitudes over time; the time axis is the population size each score
    /// was computed against (block size first, then landmark sizes).
    pub lambda_series: LambdaSeries,
    /// Latest distance score.
    pub last_d: f64,
    pub status: CandidateStatus,
}

/// Terminal verdict for one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// Arrival index of the decided observation.
    pub t: u64,
    pub status: DecisionStatus,
    /// Distance score at resolution time.
    pub d_final: f64,
    /// Ensemble verdict at resolution time.
    pub trend: TrendVerdict,
    /// Arrival index of the observation whose processing resolved this one.
    pub resolved_at: u64,
}

/// Outcome of a resolution attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Decided {
        status: DecisionStatus,
        trend: TrendVerdict,
    },
    Pending,
}

/// Result of scanning one completed block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockScan {
    pub candidates: Vec<CandidateRecord>,
    /// Distance scores of every block member, in block order; the quantile
    /// policy derives the episode θ from these.
    pub scores: Vec<DistanceScore>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Trend(#[from] TrendError),
    #[error("candidate series has {have} point(s); need 2 before the landmark is exhausted")]
    InsufficientSeries { have: usize },
}

/// Score every member of a completed block against the rest of the block and
/// flag those whose magnitude reaches `lambda_c`. k is clamped to the block
/// population, so k = W degenerates to the mean distance over all others.
pub fn flag_candidates(
    block: &[DataVector],
    omega: u64,
    cfg: &WindowConfig,
) -> Result<BlockScan, DetectError> {
    let k_eff = cfg.k.min(block.len().saturating_sub(1));
    let mut scores = Vec::with_capacity(block.len());
    let mut candidates = Vec::new();
    for (i, x) in block.iter().enumerate() {
        let pop: Vec<&DataVector> = block
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .collect();
        let score = knn_score_with(x, &pop, k_eff, cfg.score_mode)?;
        let lambda = magnitude(score.d, cfg.alpha, cfg.beta);
        if lambda.0 >= cfg.lambda_c {
            let mut series = LambdaSeries::empty();
            series.push(lambda.0, block.len() as f64)?;
            candidates.push(CandidateRecord {
                vector: x.clone(),
                first_flagged_block: omega,
                lambda_series: series,
                last_d: score.d,
                status: CandidateStatus::Candidate,
            });
        }
        scores.push(score);
    }
    Ok(BlockScan { candidates, scores })
}

/// Re-score every still-pending candidate against the current landmark,
/// excluding the candidate itself and every evicted vector. Calling this
/// twice at the same landmark size is a no-op: a score is appended only when
/// the landmark has grown past the series' last time stamp.
pub fn rescore_candidates(
    candidates: &mut [CandidateRecord],
    landmark: &[DataVector],
    evicted: &HashSet<u64>,
    cfg: &WindowConfig,
) -> Result<(), DetectError> {
    let now = landmark.len() as f64;
    for cand in candidates.iter_mut() {
        if cand.status != CandidateStatus::Candidate {
            continue;
        }
        if cand
            .lambda_series
            .step_times()
            .last()
            .is_some_and(|&last| last >= now)
        {
            continue;
        }
        let pop: Vec<&DataVector> = landmark
            .iter()
            .filter(|v| v.t != cand.vector.t && !evicted.contains(&v.t))
            .collect();
        let k_eff = cfg.k.min(pop.len());
        let score = knn_score_with(&cand.vector, &pop, k_eff, cfg.score_mode)?;
        let lambda = magnitude(score.d, cfg.alpha, cfg.beta);
        cand.lambda_series.push(lambda.0, now)?;
        cand.last_d = score.d;
    }
    Ok(())
}

/// Attempt to resolve one candidate against threshold θ. Needs at least two
/// series points unless the landmark is exhausted, in which case the trend is
/// treated as neutral and the threshold decides alone.
pub fn resolve_candidate(
    cand: &CandidateRecord,
    theta: f64,
    cfg: &WindowConfig,
    landmark_exhausted: bool,
) -> Result<Resolution, DetectError> {
    let trend = if cand.lambda_series.len() >= 2 {
        let mk = mann_kendall_z(&cand.lambda_series, cfg.significance)?;
        let slope = sen_slope_with(&cand.lambda_series, cfg.slope_pairing)?;
        ensemble_trend(mk.verdict, slope)
    } else if landmark_exhausted {
        TrendVerdict::Neutral
    } else {
        return Err(DetectError::InsufficientSeries {
            have: cand.lambda_series.len(),
        });
    };
    Ok(match trend {
        TrendVerdict::Increasing => Resolution::Decided {
            status: DecisionStatus::ConfirmedOutlier,
            trend,
        },
        TrendVerdict::Decreasing | TrendVerdict::Neutral => {
            if cand.last_d < theta {
                Resolution::Decided {
                    status: DecisionStatus::Normal,
                    trend,
                }
            } else if landmark_exhausted {
                Resolution::Decided {
                    status: DecisionStatus::ConfirmedOutlier,
                    trend,
                }
            } else {
                Resolution::Pending
            }
        }
    })
}

/// Linear-interpolation quantile (the `q*(n-1)` positional form) of an
/// unsorted sample.
fn sample_quantile(values: &[f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Streaming detector: feed observations one at a time, collect decisions.
#[derive(Debug, Clone)]
pub struct Detector {
    cfg: WindowConfig,
    window: WindowState,
    episode_theta: Option<f64>,
    pending: Vec<CandidateRecord>,
    evicted: HashSet<u64>,
}

impl Detector {
    pub fn new(cfg: WindowConfig) -> Result<Self, DetectError> {
        let window = WindowState::new(cfg.clone())?;
        Ok(Detector {
            cfg,
            window,
            episode_theta: None,
            pending: Vec::new(),
            evicted: HashSet::new(),
        })
    }

    pub fn config(&self) -> &WindowConfig {
        &self.cfg
    }

    pub fn window(&self) -> &WindowState {
        &self.window
    }

    /// Candidates of the active episode that are still undecided.
    pub fn pending(&self) -> &[CandidateRecord] {
        &self.pending
    }

    /// θ of the active episode, if one is running.
    pub fn episode_theta(&self) -> Option<f64> {
        self.episode_theta
    }

    /// Consume one observation; returns the decisions it triggered.
    ///
    /// Processing order within a single arrival: the landmark step (re-score
    /// plus resolution, possibly closing the episode) runs before the block
    /// scan, so candidates flagged by a block that completes at the very
    /// moment an episode dies open a fresh episode instead of joining a dead
    /// one.
    pub fn observe(&mut self, v: DataVector) -> Result<Vec<Decision>, DetectError> {
        let ev = self.window.push(v)?;
        let mut out = Vec::new();

        if self.window.expansion_due() {
            let step = self.window.expand_landmark()?;
            rescore_candidates(
                &mut self.pending,
                self.window.landmark(),
                &self.evicted,
                &self.cfg,
            )?;
            let theta = self
                .episode_theta
                .expect("landmark episode always has a theta");
            let mut still = Vec::new();
            for mut cand in std::mem::take(&mut self.pending) {
                match resolve_candidate(&cand, theta, &self.cfg, step.exhausted)? {
                    Resolution::Decided { status, trend } => {
                        cand.status = match status {
                            DecisionStatus::ConfirmedOutlier => {
                                self.evicted.insert(cand.vector.t);
                                CandidateStatus::ConfirmedOutlier
                            }
                            DecisionStatus::Normal => CandidateStatus::Normal,
                        };
                        out.push(Decision {
                            t: cand.vector.t,
                            status,
                            d_final: cand.last_d,
                            trend,
                            resolved_at: ev.t,
                        });
                    }
                    Resolution::Pending => still.push(cand),
                }
            }
            self.pending = still;
            if self.pending.is_empty() {
                self.window.exit_landmark();
                self.episode_theta = None;
            }
        }

        if ev.block_completed {
            let scan = flag_candidates(self.window.block(), self.window.block_index(), &self.cfg)?;
            if !scan.candidates.is_empty() {
                match self.window.mode() {
                    Mode::Sliding => {
                        let theta = match self.cfg.theta {
                            ThetaPolicy::Absolute(v) => v,
                            ThetaPolicy::BlockQuantile(q) => {
                                let ds: Vec<f64> = scan.scores.iter().map(|s| s.d).collect();
                                sample_quantile(&ds, q)
                            }
                        };
                        self.episode_theta = Some(theta);
                        self.window.enter_landmark()?;
                        self.pending = scan.candidates;
                    }
                    Mode::Landmark => {
                        self.pending.extend(scan.candidates);
                    }
                }
            }
        }
        Ok(out)
    }
}
