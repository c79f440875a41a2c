//! Block and landmark window management.
//!
//! The stream is consumed in tumbling blocks of `window` observations. When a
//! completed block produces candidates, that block is frozen as the start of a
//! landmark window which then absorbs every subsequent arrival, one expansion
//! step of `step` observations at a time, until it holds `ceil(xi * window)`
//! observations. The landmark never slides and never reorders: it is always a
//! contiguous prefix-extension of the block that triggered it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::ScoreMode;
use crate::trend::SlopePairing;

/// One observation: a feature vector plus its 1-based arrival index.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector {
    pub values: Vec<f64>,
    pub t: u64,
}

impl DataVector {
    pub fn new(t: u64, values: Vec<f64>) -> Self {
        DataVector { values, t }
    }
}

/// How the confirmation threshold θ is obtained for an episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaPolicy {
    /// Fixed distance threshold, must be positive.
    Absolute(f64),
    /// Quantile (in (0,1)) of the triggering block's own score distribution,
    /// recomputed for every episode.
    BlockQuantile(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Block length W.
    pub window: usize,
    /// Neighbour count k for distance scoring.
    pub k: usize,
    /// Landmark expansion step w.
    pub step: usize,
    /// Landmark growth factor ξ; capacity is ceil(ξ·W).
    pub xi: f64,
    /// Sigmoid slope α.
    pub alpha: f64,
    /// Sigmoid offset β; the magnitude crosses 0.5 at distance β/α.
    pub beta: f64,
    /// Candidate threshold λ_c.
    pub lambda_c: f64,
    /// Confirmation threshold policy.
    pub theta: ThetaPolicy,
    /// Two-sided significance level for the Mann-Kendall Z test.
    pub significance: f64,
    /// Distance aggregation (k nearest by default).
    pub score_mode: ScoreMode,
    /// Pair selection for Sen's slope (all pairs by default).
    pub slope_pairing: SlopePairing,
}

impl WindowConfig {
    /// Config with the usual experimental defaults: w=3, ξ=2.5, α=β=2,
    /// λ_c=0.5, θ from the 0.9 block quantile, 5% significance.
    pub fn new(window: usize, k: usize) -> Self {
        WindowConfig {
            window,
            k,
            step: 3,
            xi: 2.5,
            alpha: 2.0,
            beta: 2.0,
            lambda_c: 0.5,
            theta: ThetaPolicy::BlockQuantile(0.9),
            significance: 0.05,
            score_mode: ScoreMode::NearestK,
            slope_pairing: SlopePairing::AllPairs,
        }
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.window < 2 {
            return Err(WindowError::InvalidConfig(format!(
                "window must be at least 2, got {}",
                self.window
            )));
        }
        if self.k == 0 {
            return Err(WindowError::InvalidConfig("k must be at least 1".into()));
        }
        if !self.xi.is_finite() || self.xi <= 1.0 {
            return Err(WindowError::InvalidConfig(format!(
                "xi must be finite and greater than 1, got {}",
                self.xi
            )));
        }
        if self.step == 0 {
            return Err(WindowError::InvalidConfig("step must be at least 1".into()));
        }
        // The landmark tops out at capacity-1 scoring neighbours, so k beyond
        // that can never be satisfied even after every expansion. Within a
        // single block k is clamped to the block population instead of being
        // rejected, which keeps k=W usable (it degenerates to the mean
        // distance over all other block members).
        let (capacity, _) = landmark_plan(self);
        if self.k >= capacity {
            return Err(WindowError::InvalidConfig(format!(
                "k={} can never be satisfied: landmark capacity is {}",
                self.k, capacity
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(WindowError::InvalidConfig(format!(
                "alpha must be finite and positive, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() {
            return Err(WindowError::InvalidConfig("beta must be finite".into()));
        }
        if !self.lambda_c.is_finite() || self.lambda_c <= 0.0 || self.lambda_c >= 1.0 {
            return Err(WindowError::InvalidConfig(format!(
                "lambda_c must lie strictly between 0 and 1, got {}",
                self.lambda_c
            )));
        }
        match self.theta {
            ThetaPolicy::Absolute(v) if !(v.is_finite() && v > 0.0) => {
                return Err(WindowError::InvalidConfig(format!(
                    "absolute theta must be finite and positive, got {v}"
                )));
            }
            ThetaPolicy::BlockQuantile(q) if !(q.is_finite() && q > 0.0 && q < 1.0) => {
                return Err(WindowError::InvalidConfig(format!(
                    "theta quantile must lie strictly between 0 and 1, got {q}"
                )));
            }
            _ => {}
        }
        if !self.significance.is_finite() || self.significance <= 0.0 || self.significance >= 1.0 {
            return Err(WindowError::InvalidConfig(format!(
                "significance must lie strictly between 0 and 1, got {}",
                self.significance
            )));
        }
        Ok(())
    }
}

/// Landmark capacity and expansion-step budget for a config:
/// `(ceil(xi*W), ceil((capacity - W) / step))`.
///
/// The step count equals ceil((ξ-1)·W / w) by the nested-ceiling identity
/// ceil(ceil(x)/n) = ceil(x/n); computing it from the integer capacity keeps
/// "exactly y expansions fit" true by construction.
pub fn landmark_plan(cfg: &WindowConfig) -> (usize, usize) {
    let raw = cfg.xi * cfg.window as f64;
    let nearest = raw.round();
    // ξ·W is often an exact integer that float rounding lands a hair above
    // (2.2 * 10 = 22.000000000000004); snap before taking the ceiling.
    let capacity = if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        raw.ceil() as usize
    };
    let capacity = capacity.max(cfg.window + 1);
    let steps = (capacity - cfg.window).div_ceil(cfg.step);
    (capacity, steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sliding,
    Landmark,
}

/// Result of a successful push.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PushEvent {
    pub t: u64,
    /// True when this observation filled the current block to exactly W.
    pub block_completed: bool,
}

/// Result of a successful landmark expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LandmarkStep {
    /// 1-based expansion counter h.
    pub step: usize,
    /// Landmark length after this expansion.
    pub landmark_len: usize,
    /// True when this was the final expansion the plan allows.
    pub exhausted: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got} (t={t})")]
    DimensionMismatch { expected: usize, got: usize, t: u64 },
    #[error("non-finite component in observation t={t}")]
    NonFiniteValue { t: u64 },
    #[error("non-monotonic arrival index: last was {last}, got {got}")]
    NonMonotonicTime { last: u64, got: u64 },
    #[error("already in landmark mode")]
    AlreadyInLandmarkMode,
    #[error("not in landmark mode")]
    NotInLandmarkMode,
    #[error("block incomplete: {have} of {need} observations")]
    IncompleteBlock { have: usize, need: usize },
    #[error("landmark exhausted: all expansions already performed")]
    LandmarkExhausted,
    #[error("insufficient arrivals for expansion: have {have}, need {need}")]
    InsufficientArrivals { have: usize, need: usize },
}

/// Mutable window state: the rolling block plus, during an episode, the
/// growing landmark.
#[derive(Debug, Clone)]
pub struct WindowState {
    cfg: WindowConfig,
    capacity: usize,
    steps: usize,
    dims: Option<usize>,
    last_t: Option<u64>,
    block_index: u64,
    block: Vec<DataVector>,
    mode: Mode,
    landmark: Vec<DataVector>,
    expansions: usize,
}

impl WindowState {
    pub fn new(cfg: WindowConfig) -> Result<Self, WindowError> {
        cfg.validate()?;
        let (capacity, steps) = landmark_plan(&cfg);
        Ok(WindowState {
            cfg,
            capacity,
            steps,
            dims: None,
            last_t: None,
            block_index: 1,
            block: Vec::new(),
            mode: Mode::Sliding,
            landmark: Vec::new(),
            expansions: 0,
        })
    }

    pub fn config(&self) -> &WindowConfig {
        &self.cfg
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// 1-based index ω of the block currently being filled.
    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    pub fn block(&self) -> &[DataVector] {
        &self.block
    }

    pub fn landmark(&self) -> &[DataVector] {
        &self.landmark
    }

    /// Expansions performed so far in the active episode.
    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn expansion_steps(&self) -> usize {
        self.steps
    }

    /// Append one observation. Rolls into a fresh block when the previous one
    /// was already complete; in landmark mode the observation also joins the
    /// landmark until capacity is reached.
    pub fn push(&mut self, v: DataVector) -> Result<PushEvent, WindowError> {
        for x in &v.values {
            if !x.is_finite() {
                return Err(WindowError::NonFiniteValue { t: v.t });
            }
        }
        match self.dims {
            None => self.dims = Some(v.values.len()),
            Some(d) if d != v.values.len() => {
                return Err(WindowError::DimensionMismatch {
                    expected: d,
                    got: v.values.len(),
                    t: v.t,
                });
            }
            Some(_) => {}
        }
        if let Some(last) = self.last_t {
            if v.t <= last {
                return Err(WindowError::NonMonotonicTime { last, got: v.t });
            }
        }
        self.last_t = Some(v.t);

        if self.block.len() == self.cfg.window {
            self.block_index += 1;
            self.block.clear();
        }
        if self.mode == Mode::Landmark && self.landmark.len() < self.capacity {
            self.landmark.push(v.clone());
        }
        let t = v.t;
        self.block.push(v);
        Ok(PushEvent {
            t,
            block_completed: self.block.len() == self.cfg.window,
        })
    }

    /// Freeze the just-completed block as the start of a landmark episode.
    pub fn enter_landmark(&mut self) -> Result<(), WindowError> {
        if self.mode == Mode::Landmark {
            return Err(WindowError::AlreadyInLandmarkMode);
        }
        if self.block.len() != self.cfg.window {
            return Err(WindowError::IncompleteBlock {
                have: self.block.len(),
                need: self.cfg.window,
            });
        }
        self.landmark = self.block.clone();
        self.expansions = 0;
        self.mode = Mode::Landmark;
        Ok(())
    }

    /// Landmark length at which expansion step `h` fires. The final step is
    /// truncated at capacity when (ξ-1)·W is not a multiple of the step size.
    fn target(&self, h: usize) -> usize {
        (self.cfg.window + h * self.cfg.step).min(self.capacity)
    }

    /// True when enough arrivals have accumulated for the next expansion.
    pub fn expansion_due(&self) -> bool {
        self.mode == Mode::Landmark
            && self.expansions < self.steps
            && self.landmark.len() >= self.target(self.expansions + 1)
    }

    /// Consume one expansion step, making the observations that arrived since
    /// the previous step part of the scoring population. The caller re-scores
    /// candidates after every successful expansion.
    pub fn expand_landmark(&mut self) -> Result<LandmarkStep, WindowError> {
        if self.mode != Mode::Landmark {
            return Err(WindowError::NotInLandmarkMode);
        }
        if self.expansions >= self.steps {
            return Err(WindowError::LandmarkExhausted);
        }
        let need = self.target(self.expansions + 1);
        if self.landmark.len() < need {
            return Err(WindowError::InsufficientArrivals {
                have: self.landmark.len(),
                need,
            });
        }
        self.expansions += 1;
        Ok(LandmarkStep {
            step: self.expansions,
            landmark_len: self.landmark.len(),
            exhausted: self.expansions == self.steps,
        })
    }

    /// Drop the landmark and return to plain block processing. Idempotent.
    pub fn exit_landmark(&mut self) {
        self.mode = Mode::Sliding;
        self.landmark.clear();
        self.expansions = 0;
    }
}
