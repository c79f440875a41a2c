//! Detection quality metrics against ground-truth labels.
//!
//! Only a `ConfirmedOutlier` decision counts as a positive prediction.
//! Points resolved `Normal` and points the stream ended on before resolution
//! are both negative. ROC AUC is the binary single-point form
//! (1 + TPR - FPR) / 2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{Decision, DecisionStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

/// Quality metrics for one replay. The timing fields are not derivable from
/// the confusion counts; [`metrics`] leaves them at zero and the experiment
/// runner fills them from its own clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Detected fraction of labeled outliers, TP / |O|.
    pub epsilon: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub roc_auc: f64,
    pub throughput_objs_per_sec: f64,
    pub mean_latency_ms: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("decision at t={t} has no ground-truth label (stream length {len})")]
    MissingLabel { t: u64, len: usize },
    #[error("dataset contains no labeled outliers")]
    NoLabeledOutliers,
    #[error("reported outlier count {given} does not match TP+FN={implied}")]
    InconsistentOutlierCount { given: usize, implied: usize },
}

/// Tally decisions against labels (`true` = outlier), indexed by arrival
/// order. Undecided points are negative predictions by definition, so the
/// counts always partition the whole labeled stream.
pub fn confusion(decisions: &[Decision], labels: &[bool]) -> Result<Confusion, EvalError> {
    let total_outliers = labels.iter().filter(|&&l| l).count();
    let total_inliers = labels.len() - total_outliers;
    let mut tp = 0usize;
    let mut fp = 0usize;
    for d in decisions {
        let idx = d.t as usize;
        if idx == 0 || idx > labels.len() {
            return Err(EvalError::MissingLabel {
                t: d.t,
                len: labels.len(),
            });
        }
        if d.status == DecisionStatus::ConfirmedOutlier {
            if labels[idx - 1] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok(Confusion {
        true_positives: tp,
        false_positives: fp,
        false_negatives: total_outliers - tp,
        true_negatives: total_inliers - fp,
    })
}

/// Compute quality metrics from a confusion tally. `reported_outliers` is the
/// ground-truth outlier count |O| and must equal TP + FN.
///
/// Conventions for empty denominators: precision is 0 when nothing was
/// confirmed, the F-measure is 0 when precision + recall is 0, and the false
/// positive rate is 0 when the dataset has no inliers.
pub fn metrics(c: &Confusion, reported_outliers: usize) -> Result<MetricsReport, EvalError> {
    let implied = c.true_positives + c.false_negatives;
    if reported_outliers != implied {
        return Err(EvalError::InconsistentOutlierCount {
            given: reported_outliers,
            implied,
        });
    }
    if reported_outliers == 0 {
        return Err(EvalError::NoLabeledOutliers);
    }
    let tp = c.true_positives as f64;
    let fp = c.false_positives as f64;
    let tn = c.true_negatives as f64;
    let epsilon = tp / reported_outliers as f64;
    let precision = if c.true_positives + c.false_positives == 0 {
        0.0
    } else {
        tp / (tp + fp)
    };
    let recall = tp / reported_outliers as f64;
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let fpr = if c.false_positives + c.true_negatives == 0 {
        0.0
    } else {
        fp / (fp + tn)
    };
    let roc_auc = (1.0 + recall - fpr) / 2.0;
    Ok(MetricsReport {
        epsilon,
        precision,
        recall,
        f_measure,
        roc_auc,
        throughput_objs_per_sec: 0.0,
        mean_latency_ms: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trend::TrendVerdict;
    use approx::assert_abs_diff_eq;

    fn decision(t: u64, status: DecisionStatus) -> Decision {
        Decision {
            t,
            status,
            d_final: 1.0,
            trend: TrendVerdict::Neutral,
            resolved_at: t + 5,
        }
    }

    #[test]
    fn confusion_counts_confirmations_only() {
        // labels: outliers at t = 2, 5, 7
        let labels = [false, true, false, false, true, false, true];
        let decisions = [
            decision(2, DecisionStatus::ConfirmedOutlier), // TP
            decision(5, DecisionStatus::ConfirmedOutlier), // TP
            decision(3, DecisionStatus::ConfirmedOutlier), // FP
            decision(4, DecisionStatus::Normal),           // negative, inlier
            decision(7, DecisionStatus::Normal),           // negative, outlier -> FN
        ];
        let c = confusion(&decisions, &labels).unwrap();
        assert_eq!(
            c,
            Confusion {
                true_positives: 2,
                false_positives: 1,
                false_negatives: 1,
                true_negatives: 3,
            }
        );
    }

    #[test]
    fn undecided_points_count_as_negatives() {
        let labels = [true, false];
        let c = confusion(&[], &labels).unwrap();
        assert_eq!(c.false_negatives, 1);
        assert_eq!(c.true_negatives, 1);
        assert_eq!(c.true_positives + c.false_positives, 0);
    }

    #[test]
    fn confusion_rejects_out_of_range_decisions() {
        let labels = [true];
        let err = confusion(&[decision(2, DecisionStatus::Normal)], &labels);
        assert_eq!(err, Err(EvalError::MissingLabel { t: 2, len: 1 }));
    }

    #[test]
    fn metrics_on_the_worked_example() {
        let c = Confusion {
            true_positives: 2,
            false_positives: 1,
            false_negatives: 1,
            true_negatives: 3,
        };
        let m = metrics(&c, 3).unwrap();
        assert_abs_diff_eq!(m.precision, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.recall, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.f_measure, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.epsilon, m.recall, epsilon = 1e-15);
        // TPR = 2/3, FPR = 1/4 -> AUC = (1 + 2/3 - 1/4) / 2
        assert_abs_diff_eq!(m.roc_auc, 0.7083333333333334, epsilon = 1e-12);
        assert_eq!(m.throughput_objs_per_sec, 0.0);
        assert_eq!(m.mean_latency_ms, 0.0);
    }

    #[test]
    fn metrics_zero_division_conventions() {
        let c = Confusion {
            true_positives: 0,
            false_positives: 0,
            false_negatives: 4,
            true_negatives: 6,
        };
        let m = metrics(&c, 4).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f_measure, 0.0);
        assert_abs_diff_eq!(m.roc_auc, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn metrics_with_no_inliers_pins_fpr_to_zero() {
        let c = Confusion {
            true_positives: 3,
            false_positives: 0,
            false_negatives: 0,
            true_negatives: 0,
        };
        let m = metrics(&c, 3).unwrap();
        assert_eq!(m.roc_auc, 1.0);
        assert_eq!(m.f_measure, 1.0);
    }

    #[test]
    fn metrics_validates_outlier_count() {
        let c = Confusion {
            true_positives: 1,
            false_positives: 0,
            false_negatives: 1,
            true_negatives: 0,
        };
        assert_eq!(
            metrics(&c, 3),
            Err(EvalError::InconsistentOutlierCount {
                given: 3,
                implied: 2
            })
        );
        let empty = Confusion {
            true_positives: 0,
            false_positives: 2,
            false_negatives: 0,
            true_negatives: 5,
        };
        assert_eq!(metrics(&empty, 0), Err(EvalError::NoLabeledOutliers));
    }

    #[test]
    fn perfect_detection_maxes_every_metric() {
        let c = Confusion {
            true_positives: 5,
            false_positives: 0,
            false_negatives: 0,
            true_negatives: 20,
        };
        let m = metrics(&c, 5).unwrap();
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.f_measure, 1.0);
        assert_eq!(m.roc_auc, 1.0);
    }
}
