//! Trend analysis over magnitude series.
//!
//! The Mann-Kendall statistic S counts concordant minus discordant pairs,
//! its variance is tie-corrected,
//!
//! ```text
//! var(S) = [ n(n-1)(2n+5) - Σ_p t_p(t_p-1)(2t_p+5) ] / 18,
//! ```
//!
//! and the continuity-corrected standard score
//!
//! ```text
//! Z = (S-1)/sqrt(var)  if S > 0,   0  if S = 0,   (S+1)/sqrt(var)  if S < 0
//! ```
//!
//! is compared two-sided against the normal quantile for the configured
//! significance. Sen's slope is the median pairwise slope. The ensemble only
//! reports a direction when both agree; any disagreement is neutral.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Direction verdict shared by the Mann-Kendall test and the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendVerdict {
    Increasing,
    Decreasing,
    Neutral,
}

/// Pair selection for Sen's slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopePairing {
    /// Median over all i < j pairs (the estimator proper).
    AllPairs,
    /// Median over adjacent pairs only.
    Consecutive,
}

/// A candidate's magnitude history: one λ per scoring event, stamped with the
/// population size it was scored against (block size, then landmark sizes),
/// which serves as the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeries {
    values: Vec<f64>,
    step_times: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("series too short: have {have}, need {need}")]
    SeriesTooShort { have: usize, need: usize },
    #[error("values and step times differ in length: {values} vs {times}")]
    MismatchedLengths { values: usize, times: usize },
    #[error("step times must be strictly increasing")]
    NonIncreasingTimes,
    #[error("non-finite entry in series")]
    NonFiniteValue,
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),
}

impl LambdaSeries {
    pub fn new(values: Vec<f64>, step_times: Vec<f64>) -> Result<Self, TrendError> {
        if values.len() != step_times.len() {
            return Err(TrendError::MismatchedLengths {
                values: values.len(),
                times: step_times.len(),
            });
        }
        let mut s = LambdaSeries {
            values: Vec::new(),
            step_times: Vec::new(),
        };
        for (v, t) in values.into_iter().zip(step_times) {
            s.push(v, t)?;
        }
        Ok(s)
    }

    pub fn empty() -> Self {
        LambdaSeries {
            values: Vec::new(),
            step_times: Vec::new(),
        }
    }

    pub fn push(&mut self, value: f64, step_time: f64) -> Result<(), TrendError> {
        if !value.is_finite() || !step_time.is_finite() {
            return Err(TrendError::NonFiniteValue);
        }
        if let Some(&last) = self.step_times.last() {
            if step_time <= last {
                return Err(TrendError::NonIncreasingTimes);
            }
        }
        self.values.push(value);
        self.step_times.push(step_time);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step_times(&self) -> &[f64] {
        &self.step_times
    }

    pub fn last_value(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Mann-Kendall test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkResult {
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub verdict: TrendVerdict,
}

/// S = Σ_{i<j} sign(λ_j - λ_i), exact in integer arithmetic.
pub fn mann_kendall_s(series: &LambdaSeries) -> Result<i64, TrendError> {
    let v = &series.values;
    if v.len() < 2 {
        return Err(TrendError::SeriesTooShort {
            have: v.len(),
            need: 2,
        });
    }
    let mut s: i64 = 0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            s += match v[j].partial_cmp(&v[i]).expect("finite by construction") {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
            };
        }
    }
    Ok(s)
}

/// Tie-corrected variance of S for the given series.
fn var_s(series: &LambdaSeries) -> f64 {
    let n = series.values.len() as i128;
    let mut sorted = series.values.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut tie_term: i128 = 0;
    let mut run = 1i128;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                tie_term += run * (run - 1) * (2 * run + 5);
            }
            run = 1;
        }
    }
    if run > 1 {
        tie_term += run * (run - 1) * (2 * run + 5);
    }
    let raw = n * (n - 1) * (2 * n + 5) - tie_term;
    raw as f64 / 18.0
}

/// Full Mann-Kendall test: statistic, variance, continuity-corrected Z and
/// the two-sided verdict at `significance`. A fully tied series has zero
/// variance and is reported as neutral with Z = 0 rather than an error.
pub fn mann_kendall_z(series: &LambdaSeries, significance: f64) -> Result<MkResult, TrendError> {
    if !(significance.is_finite() && significance > 0.0 && significance < 1.0) {
        return Err(TrendError::InvalidProbability(significance));
    }
    let s = mann_kendall_s(series)?;
    let var = var_s(series);
    if var <= 0.0 {
        return Ok(MkResult {
            s,
            var_s: var,
            z: 0.0,
            verdict: TrendVerdict::Neutral,
        });
    }
    let sd = var.sqrt();
    let z = match s.cmp(&0) {
        std::cmp::Ordering::Greater => (s - 1) as f64 / sd,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => (s + 1) as f64 / sd,
    };
    let crit = normal_quantile(1.0 - significance / 2.0)?;
    let verdict = if z > crit {
        TrendVerdict::Increasing
    } else if z < -crit {
        TrendVerdict::Decreasing
    } else {
        TrendVerdict::Neutral
    };
    Ok(MkResult {
        s,
        var_s: var,
        z,
        verdict,
    })
}

/// Sen's slope: median of (λ_j - λ_i) / (t_j - t_i) over all i < j.
pub fn sen_slope(series: &LambdaSeries) -> Result<f64, TrendError> {
    sen_slope_with(series, SlopePairing::AllPairs)
}

/// [`sen_slope`] with an explicit pair selection.
pub fn sen_slope_with(series: &LambdaSeries, pairing: SlopePairing) -> Result<f64, TrendError> {
    let n = series.values.len();
    if n < 2 {
        return Err(TrendError::SeriesTooShort { have: n, need: 2 });
    }
    let v = &series.values;
    let t = &series.step_times;
    let mut slopes = Vec::new();
    match pairing {
        SlopePairing::AllPairs => {
            for i in 0..n {
                for j in (i + 1)..n {
                    slopes.push((v[j] - v[i]) / (t[j] - t[i]));
                }
            }
        }
        SlopePairing::Consecutive => {
            for i in 1..n {
                slopes.push((v[i] - v[i - 1]) / (t[i] - t[i - 1]));
            }
        }
    }
    slopes.sort_unstable_by(f64::total_cmp);
    let m = slopes.len();
    Ok(if m % 2 == 1 {
        slopes[m / 2]
    } else {
        (slopes[m / 2 - 1] + slopes[m / 2]) / 2.0
    })
}

/// Conjunctive ensemble: a direction is reported only when the Mann-Kendall
/// verdict and the sign of Sen's slope agree; everything else is neutral.
pub fn ensemble_trend(mk: TrendVerdict, slope: f64) -> TrendVerdict {
    match mk {
        TrendVerdict::Increasing if slope > 0.0 => TrendVerdict::Increasing,
        TrendVerdict::Decreasing if slope < 0.0 => TrendVerdict::Decreasing,
        _ => TrendVerdict::Neutral,
    }
}

/// Inverse standard normal CDF via Acklam's rational approximation
/// (relative error below 1.2e-9 over the whole open interval), so the
/// critical value needs no lookup table.
pub fn normal_quantile(p: f64) -> Result<f64, TrendError> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(TrendError::InvalidProbability(p));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |p_tail: f64| -> f64 {
        let q = (-2.0 * p_tail.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    Ok(if p < P_LOW {
        tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - p)
    })
}
