//! The `lookout` command: replay labeled datasets through the detector and
//! report metrics (`run`), inspect per-object decisions for one
//! configuration (`detect`), or compute brute-force trend statistics for a
//! series file (`oracle`).
//!
//! Failures print a single machine-readable JSON object to stderr and exit
//! nonzero.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lookout_core::ThetaPolicy;
use thiserror::Error;

use lookout_cli::dataset::{parse_dataset, DatasetError, Format, LabeledStream};
use lookout_cli::experiment::{
    emit_report, run_experiment, ExperimentError, ReplayOrder, ReportFormat, RunConfig,
};
use lookout_cli::oracle::{brute_force_trend, parse_series, OracleError};

#[derive(Parser)]
#[command(
    name = "lookout",
    version,
    about = "Streaming distance-based outlier detection with trend-checked candidates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a labeled dataset across a (W, k) grid and report metrics.
    Run(RunArgs),
    /// Replay one configuration and report per-object decisions.
    Detect(DetectArgs),
    /// Brute-force Mann-Kendall and Sen statistics for a series file.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Path to the dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Name of the label attribute or column.
    #[arg(long)]
    label_column: String,
    /// Label value marking an outlier; every other value means inlier.
    #[arg(long)]
    outlier_label: String,
}

#[derive(Args)]
struct SharedParams {
    /// Sigmoid slope alpha.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Sigmoid offset beta; the magnitude crosses 0.5 at distance beta/alpha.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Landmark expansion step w.
    #[arg(long = "step-w", default_value_t = 3)]
    step_w: usize,
    /// Landmark growth factor xi; the landmark holds up to ceil(xi*W) vectors.
    #[arg(long, default_value_t = 2.5)]
    xi: f64,
    /// Candidate threshold on the magnitude.
    #[arg(long = "lambda-c", default_value_t = 0.5)]
    lambda_c: f64,
    /// Absolute confirmation threshold theta.
    #[arg(long, conflicts_with = "theta_quantile")]
    theta: Option<f64>,
    /// Confirmation threshold as a quantile of the triggering block's
    /// scores (default 0.9).
    #[arg(long = "theta-quantile")]
    theta_quantile: Option<f64>,
    /// Two-sided significance level for the trend test.
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
    /// Replay order.
    #[arg(long, value_enum, default_value_t = OrderArg::File)]
    order: OrderArg,
    /// Shuffle seed; required with --order shuffle.
    #[arg(long, required_if_eq("order", "shuffle"))]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = ReportArg::Json)]
    report: ReportArg,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero the wall-clock fields so identical runs emit identical bytes.
    #[arg(long = "no-timing")]
    no_timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Block length W; repeat the flag for a grid.
    #[arg(short = 'W', long = "window", default_values_t = vec![5, 10])]
    windows: Vec<usize>,
    /// Neighbour count k; repeat the flag for a grid.
    #[arg(short = 'k', long = "k", default_values_t = vec![2, 3, 4, 5])]
    ks: Vec<usize>,
    #[command(flatten)]
    params: SharedParams,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Block length W.
    #[arg(short = 'W', long = "window", default_value_t = 5)]
    window: usize,
    /// Neighbour count k.
    #[arg(short = 'k', long = "k", default_value_t = 2)]
    k: usize,
    #[command(flatten)]
    params: SharedParams,
}

#[derive(Args)]
struct OracleArgs {
    /// Series file: numbers separated by newlines, spaces, or commas;
    /// '#' starts a comment.
    #[arg(long)]
    series: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    File,
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportArg {
    Json,
    Csv,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot infer format of {path}; pass --format arff|csv")]
    UnknownFormat { path: String },
    #[error("failed to read {path}: {source}")]
    ReadIo { path: String, source: io::Error },
    #[error("failed to write {path}: {source}")]
    WriteIo { path: String, source: io::Error },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Dataset(_) => "dataset",
            CliError::Experiment(_) => "experiment",
            CliError::Oracle(_) => "oracle",
            CliError::UnknownFormat { .. } => "dataset",
            CliError::ReadIo { .. } | CliError::WriteIo { .. } => "io",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit_error("usage", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{body}");
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let stream = load_stream(&args.data)?;
            let cfg = build_config(args.windows, args.ks, &args.params);
            let report = run_experiment(&stream, &cfg)?;
            let text = emit_report(&report, report_format(args.params.report))?;
            write_output(args.params.out.as_deref(), &text)
        }
        Command::Detect(args) => {
            let stream = load_stream(&args.data)?;
            let cfg = build_config(vec![args.window], vec![args.k], &args.params);
            let report = run_experiment(&stream, &cfg)?;
            let text = emit_report(&report, report_format(args.params.report))?;
            write_output(args.params.out.as_deref(), &text)
        }
        Command::Oracle(args) => {
            let text = fs::read_to_string(&args.series).map_err(|source| CliError::ReadIo {
                path: args.series.display().to_string(),
                source,
            })?;
            let values = parse_series(&text)?;
            let report = brute_force_trend(&values)?;
            let mut body = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Experiment(ExperimentError::Serialize(e)))?;
            body.push('\n');
            write_output(args.out.as_deref(), &body)
        }
    }
}

fn load_stream(data: &DataArgs) -> Result<LabeledStream, CliError> {
    let format = match data.format {
        Some(f) => f,
        None => Format::infer(&data.dataset).ok_or_else(|| CliError::UnknownFormat {
            path: data.dataset.display().to_string(),
        })?,
    };
    Ok(parse_dataset(
        &data.dataset,
        format,
        &data.label_column,
        &data.outlier_label,
    )?)
}

fn build_config(windows: Vec<usize>, ks: Vec<usize>, p: &SharedParams) -> RunConfig {
    let mut cfg = RunConfig::new(windows, ks);
    cfg.alpha = p.alpha;
    cfg.beta = p.beta;
    cfg.step_w = p.step_w;
    cfg.xi = p.xi;
    cfg.lambda_c = p.lambda_c;
    cfg.theta = match (p.theta, p.theta_quantile) {
        (Some(t), _) => ThetaPolicy::Absolute(t),
        (None, Some(q)) => ThetaPolicy::BlockQuantile(q),
        (None, None) => ThetaPolicy::BlockQuantile(0.9),
    };
    cfg.significance = p.significance;
    cfg.order = match p.order {
        OrderArg::File => ReplayOrder::File,
        OrderArg::Shuffle => ReplayOrder::Shuffled {
            seed: p.seed.expect("enforced by required_if_eq"),
        },
    };
    cfg.include_timing = !p.no_timing;
    cfg
}

fn report_format(arg: ReportArg) -> ReportFormat {
    match arg {
        ReportArg::Json => ReportFormat::Json,
        ReportArg::Csv => ReportFormat::Csv,
    }
}

fn write_output(out: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::WriteIo {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let stdout = io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(text.as_bytes())
                .map_err(|source| CliError::WriteIo {
                    path: "<stdout>".to_string(),
                    source,
                })
        }
    }
}
