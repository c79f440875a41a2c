//! Parameter-grid experiments.
//!
//! A run replays one labeled stream through a fresh detector per (W, k)
//! grid point, scores the decisions against the labels, and assembles one
//! report. Grid points are independent, so they execute in parallel; the
//! rows come back merged in ascending (W, k) order regardless of worker
//! scheduling. A failed point is recorded in `failures` and never aborts
//! the rest of the grid.

use std::time::Instant;

use lookout_core::{
    confusion, metrics, Confusion, DataVector, Decision, Detector, ThetaPolicy, WindowConfig,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledStream;

/// Replay order for the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayOrder {
    /// Exactly as the rows appear in the file.
    File,
    /// Seeded permutation; the seed is part of the config echo so the run
    /// stays reproducible.
    Shuffled { seed: u64 },
}

/// Everything a run needs: the (W, k) grid plus the shared scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub windows: Vec<usize>,
    pub ks: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub step_w: usize,
    pub xi: f64,
    pub lambda_c: f64,
    pub theta: ThetaPolicy,
    pub significance: f64,
    pub order: ReplayOrder,
    /// When false the wall-clock fields are emitted as zero so identical
    /// runs produce identical bytes.
    pub include_timing: bool,
}

impl RunConfig {
    /// Grid over the given W and k lists with the usual defaults for the
    /// scalars: α=β=2, w=3, ξ=2.5, λ_c=0.5, θ from the 0.9 block quantile,
    /// 5% significance, file-order replay, timing on.
    pub fn new(windows: Vec<usize>, ks: Vec<usize>) -> Self {
        RunConfig {
            windows,
            ks,
            alpha: 2.0,
            beta: 2.0,
            step_w: 3,
            xi: 2.5,
            lambda_c: 0.5,
            theta: ThetaPolicy::BlockQuantile(0.9),
            significance: 0.05,
            order: ReplayOrder::File,
            include_timing: true,
        }
    }

    fn window_config(&self, window: usize, k: usize) -> WindowConfig {
        let mut cfg = WindowConfig::new(window, k);
        cfg.alpha = self.alpha;
        cfg.beta = self.beta;
        cfg.step = self.step_w;
        cfg.xi = self.xi;
        cfg.lambda_c = self.lambda_c;
        cfg.theta = self.theta;
        cfg.significance = self.significance;
        cfg
    }
}

/// One grid point's scored outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    #[serde(rename = "W")]
    pub window: usize,
    pub k: usize,
    #[serde(rename = "TP")]
    pub true_positives: usize,
    #[serde(rename = "FP")]
    pub false_positives: usize,
    #[serde(rename = "FN")]
    pub false_negatives: usize,
    #[serde(rename = "TN")]
    pub true_negatives: usize,
    pub epsilon: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub roc_auc: f64,
    pub throughput: f64,
    pub mean_latency_ms: f64,
}

/// A grid point that could not be scored. Kept out of `rows` so the row
/// schema stays exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    #[serde(rename = "W")]
    pub window: usize,
    pub k: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub instances: usize,
    pub dims: usize,
    pub outliers: usize,
}

/// The full report; serialization order is fixed by field order here.
///
/// `per_object` carries the individual decisions only when the grid has
/// exactly one point, so the list is never ambiguous about which
/// configuration produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: DatasetSummary,
    pub config: RunConfig,
    pub rows: Vec<GridRow>,
    pub per_object: Vec<Decision>,
    pub failures: Vec<GridFailure>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("metrics in row W={window} k={k} do not match its confusion counts")]
    InconsistentRow { window: usize, k: usize },
    #[error(transparent)]
    Serialize(#[from] serde_json::Error),
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Replay `stream` over every (W, k) point of the grid and score each
/// replay against the labels.
pub fn run_experiment(
    stream: &LabeledStream,
    cfg: &RunConfig,
) -> Result<ExperimentReport, ExperimentError> {
    if cfg.windows.is_empty() || cfg.ks.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }

    let (vectors, labels) = replay_order(stream, cfg.order);
    let outliers = labels.iter().filter(|&&o| o).count();

    let mut points: Vec<(usize, usize)> = cfg
        .windows
        .iter()
        .flat_map(|&w| cfg.ks.iter().map(move |&k| (w, k)))
        .collect();
    points.sort_unstable();
    points.dedup();

    let outcomes: Vec<Result<(GridRow, Vec<Decision>), GridFailure>> = points
        .par_iter()
        .map(|&(w, k)| run_point(&vectors, &labels, outliers, cfg, w, k))
        .collect();

    let single_point = points.len() == 1;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut per_object = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((row, decisions)) => {
                if single_point {
                    per_object = decisions;
                }
                rows.push(row);
            }
            Err(failure) => failures.push(failure),
        }
    }

    Ok(ExperimentReport {
        dataset: DatasetSummary {
            name: stream.name.clone(),
            instances: stream.len(),
            dims: stream.dims,
            outliers,
        },
        config: cfg.clone(),
        rows,
        per_object,
        failures,
    })
}

/// Apply the replay order and reassign arrival indices 1..=n.
fn replay_order(stream: &LabeledStream, order: ReplayOrder) -> (Vec<DataVector>, Vec<bool>) {
    match order {
        ReplayOrder::File => (stream.vectors.clone(), stream.labels.clone()),
        ReplayOrder::Shuffled { seed } => {
            let mut indices: Vec<usize> = (0..stream.vectors.len()).collect();
            indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let vectors = indices
                .iter()
                .enumerate()
                .map(|(pos, &i)| DataVector::new(pos as u64 + 1, stream.vectors[i].values.clone()))
                .collect();
            let labels = indices.iter().map(|&i| stream.labels[i]).collect();
            (vectors, labels)
        }
    }
}

fn run_point(
    vectors: &[DataVector],
    labels: &[bool],
    outliers: usize,
    cfg: &RunConfig,
    window: usize,
    k: usize,
) -> Result<(GridRow, Vec<Decision>), GridFailure> {
    let fail = |error: String| GridFailure { window, k, error };

    let mut detector =
        Detector::new(cfg.window_config(window, k)).map_err(|e| fail(e.to_string()))?;
    let started = Instant::now();
    let mut decisions = Vec::new();
    for v in vectors {
        decisions.extend(
            detector
                .observe(v.clone())
                .map_err(|e| fail(e.to_string()))?,
        );
    }
    let elapsed = started.elapsed();

    let conf = confusion(&decisions, labels).map_err(|e| fail(e.to_string()))?;
    let m = metrics(&conf, outliers).map_err(|e| fail(e.to_string()))?;

    let n = vectors.len() as f64;
    let (throughput, mean_latency_ms) = if cfg.include_timing && n > 0.0 {
        let secs = elapsed.as_secs_f64().max(f64::MIN_POSITIVE);
        (n / secs, secs * 1000.0 / n)
    } else {
        (0.0, 0.0)
    };

    Ok((
        GridRow {
            window,
            k,
            true_positives: conf.true_positives,
            false_positives: conf.false_positives,
            false_negatives: conf.false_negatives,
            true_negatives: conf.true_negatives,
            epsilon: m.epsilon,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
            roc_auc: m.roc_auc,
            throughput,
            mean_latency_ms,
        },
        decisions,
    ))
}

const CSV_HEADER: &str =
    "W,k,TP,FP,FN,TN,epsilon,precision,recall,f_measure,roc_auc,throughput,mean_latency_ms";

/// Serialize a report. Every metric row is first cross-checked against its
/// own confusion counts, so a tampered or drifted report never leaves the
/// process.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
) -> Result<String, ExperimentError> {
    verify_rows(report)?;
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => Ok(render_csv(report)),
    }
}

fn verify_rows(report: &ExperimentReport) -> Result<(), ExperimentError> {
    for row in &report.rows {
        let inconsistent = ExperimentError::InconsistentRow {
            window: row.window,
            k: row.k,
        };
        let conf = Confusion {
            true_positives: row.true_positives,
            false_positives: row.false_positives,
            false_negatives: row.false_negatives,
            true_negatives: row.true_negatives,
        };
        let labeled = row.true_positives + row.false_negatives;
        let m = match metrics(&conf, labeled) {
            Ok(m) => m,
            Err(_) => return Err(inconsistent),
        };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        if !(close(m.epsilon, row.epsilon)
            && close(m.precision, row.precision)
            && close(m.recall, row.recall)
            && close(m.f_measure, row.f_measure)
            && close(m.roc_auc, row.roc_auc))
        {
            return Err(inconsistent);
        }
    }
    Ok(())
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.window,
            r.k,
            r.true_positives,
            r.false_positives,
            r.false_negatives,
            r.true_negatives,
            r.epsilon,
            r.precision,
            r.recall,
            r.f_measure,
            r.roc_auc,
            r.throughput,
            r.mean_latency_ms,
        ));
    }
    out
}
