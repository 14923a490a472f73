//! Command-line surface: run permutation-invariant goodness-of-fit tests on
//! user data, compute optimal thresholds, and drive the simulation harness.
//!
//! Exit codes: 0 = fail to reject, 1 = reject, 2 = error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use permutest::harness::{run_manifest, run_null_calibration, run_power_curve, ScenarioConfig};
use permutest::report::TestReport;
use permutest::testing::{
    cat_test_auto, cat_test_flat, gauss_test_auto, two_sample_test, CategoricalSample,
    NullHypothesis,
};
use permutest::thresholds::{optimal_threshold_cat, optimal_threshold_gauss};

#[derive(Parser)]
#[command(
    name = "permutest",
    version,
    about = "Permutation-invariant goodness-of-fit tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DegenerateMode {
    /// Route by exact ties in the reference vector.
    Auto,
    /// Force the single-cluster path regardless of ties.
    ForceFlat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThresholdFamily {
    Gauss,
    Cat,
}

#[derive(Subcommand)]
enum Command {
    /// Test observed counts against a categorical reference, up to relabeling.
    TestCat {
        /// CSV file with header `category,count`.
        #[arg(long)]
        counts: PathBuf,
        /// Reference probabilities q1,...,qk.
        #[arg(long, value_delimiter = ',', required = true)]
        null: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = DegenerateMode::Auto)]
        degenerate: DegenerateMode,
    },
    /// Test a Gaussian observation vector against a reference mean vector.
    TestGauss {
        /// Observed values x1,...,xk.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Reference means mu1,...,muk.
        #[arg(long, value_delimiter = ',', required = true)]
        null: Vec<f64>,
        /// Sample size: the observation has covariance I/n.
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Two-sample test on a CSV with header `category,count_x,count_y`.
    TestTwoSample {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Clustering threshold: `auto` (ln of each sample size) or a number.
        #[arg(long, default_value = "auto")]
        lambda: String,
    },
    /// Minimax-optimal threshold t* against a local alternative at scale delta.
    Threshold {
        #[arg(long, value_enum)]
        kind: ThresholdFamily,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
    },
    /// Run a Monte Carlo study and write its CSV + JSON manifest.
    Simulate {
        /// Built-in scenario 1..=5.
        #[arg(long, conflicts_with = "config")]
        scenario: Option<u8>,
        /// JSON scenario configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV path; the manifest lands next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured replication count.
        #[arg(long)]
        reps: Option<u32>,
        /// Null calibration (KS distances and Type-1 error) instead of power.
        #[arg(long, default_value_t = false)]
        calibration: bool,
    },
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    match cli.command {
        Command::TestCat {
            counts,
            null,
            alpha,
            degenerate,
        } => {
            let (labels, count_values) = read_one_sample_csv(&counts)?;
            let (q, renorm_warning) = normalize_reference(&null)?;
            let sample = CategoricalSample::new(count_values);
            let mut report = match degenerate {
                DegenerateMode::Auto => {
                    let hypothesis = NullHypothesis::categorical(&q)?;
                    cat_test_auto(&sample, &hypothesis, alpha)?
                }
                DegenerateMode::ForceFlat => cat_test_flat(&sample, &q, alpha)?,
            };
            if let Some(w) = renorm_warning {
                eprintln!("warning: {w}");
                report.diagnostics.warnings.push(w);
            }
            report.categories = Some(labels);
            emit(report)
        }
        Command::TestGauss { x, null, n, alpha } => {
            let hypothesis = NullHypothesis::gaussian_mean(&null)?;
            let sample = permutest::testing::GaussianSample { values: x, n };
            let report = gauss_test_auto(&sample, &hypothesis, alpha)?;
            emit(report)
        }
        Command::TestTwoSample {
            counts,
            alpha,
            lambda,
        } => {
            let (labels, x, y) = read_two_sample_csv(&counts)?;
            let lambda = parse_lambda(&lambda)?;
            let mut report = two_sample_test(&x, &y, alpha, lambda)?;
            report.categories = Some(labels);
            let n: u64 = x.iter().sum();
            let m: u64 = y.iter().sum();
            let (lx, ly) = match lambda {
                Some(l) => (l, l),
                None => ((n as f64).ln(), (m as f64).ln()),
            };
            report.diagnostics.warnings.push(format!(
                "lambda used: {lx} (first sample), {ly} (second sample)"
            ));
            emit(report)
        }
        Command::Threshold { kind, k, delta } => {
            if k < 2 {
                return Err("k must be at least 2".into());
            }
            if delta <= 0.0 {
                return Err("delta must be positive".into());
            }
            let spec = match kind {
                ThresholdFamily::Gauss => optimal_threshold_gauss(k, delta),
                ThresholdFamily::Cat => optimal_threshold_cat(k, delta),
            };
            println!("{}", serde_json::to_string_pretty(&spec)?);
            Ok(0)
        }
        Command::Simulate {
            scenario,
            config,
            out,
            seed,
            reps,
            calibration,
        } => {
            let mut cfg = match (scenario, config) {
                (Some(id), None) => ScenarioConfig::builtin(id, seed.unwrap_or(0))?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(&path)?;
                    serde_json::from_str::<ScenarioConfig>(&text)?
                }
                _ => return Err("provide exactly one of --scenario or --config".into()),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(reps) = reps {
                cfg.replications = reps;
            }
            let csv = if calibration {
                let rows = run_null_calibration(&cfg)?;
                let mut text = String::from("n,m,statistic,ks_distance,type1_error\n");
                for r in &rows {
                    let m = r.m.map(|v| v.to_string()).unwrap_or_default();
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.n, m, r.statistic, r.ks_distance, r.type1_error
                    ));
                }
                text
            } else {
                run_power_curve(&cfg)?.to_csv()
            };
            fs::write(&out, csv)?;
            let manifest_path = manifest_path(&out);
            fs::write(&manifest_path, run_manifest(&cfg))?;
            eprintln!(
                "wrote {} and {} (seed {})",
                out.display(),
                manifest_path.display(),
                cfg.seed
            );
            Ok(0)
        }
    }
}

fn emit(report: TestReport) -> Result<i32, Box<dyn std::error::Error>> {
    println!("{}", report.to_json());
    Ok(if report.reject { 1 } else { 0 })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Renormalize a reference that is slightly off the simplex; warn beyond
/// 1e-6, reject nonpositive entries.
fn normalize_reference(
    q: &[f64],
) -> Result<(Vec<f64>, Option<String>), Box<dyn std::error::Error>> {
    if q.len() < 2 {
        return Err("need at least 2 reference probabilities".into());
    }
    if q.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err("reference probabilities must be positive and finite".into());
    }
    let sum: f64 = q.iter().sum();
    let warning = ((sum - 1.0).abs() > 1e-6)
        .then(|| format!("reference summed to {sum}; renormalized to the simplex"));
    Ok((q.iter().map(|v| v / sum).collect(), warning))
}

fn parse_lambda(raw: &str) -> Result<Option<f64>, Box<dyn std::error::Error>> {
    if raw == "auto" {
        return Ok(None);
    }
    let value: f64 = raw
        .parse()
        .map_err(|_| format!("--lambda must be `auto` or a positive number, got `{raw}`"))?;
    if value.is_nan() || value <= 0.0 {
        return Err("--lambda must be positive".into());
    }
    Ok(Some(value))
}

fn read_one_sample_csv(path: &Path) -> Result<(Vec<String>, Vec<u64>), Box<dyn std::error::Error>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    expect_headers(&mut reader, &["category", "count"])?;
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for record in reader.records() {
        let record = record?;
        labels.push(field(&record, 0)?.to_string());
        counts.push(parse_count(field(&record, 1)?)?);
    }
    if counts.len() < 2 {
        return Err("need at least 2 categories".into());
    }
    Ok((labels, counts))
}

type TwoSampleCsv = (Vec<String>, Vec<u64>, Vec<u64>);

fn read_two_sample_csv(path: &Path) -> Result<TwoSampleCsv, Box<dyn std::error::Error>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    expect_headers(&mut reader, &["category", "count_x", "count_y"])?;
    let mut labels = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in reader.records() {
        let record = record?;
        labels.push(field(&record, 0)?.to_string());
        xs.push(parse_count(field(&record, 1)?)?);
        ys.push(parse_count(field(&record, 2)?)?);
    }
    if labels.len() < 2 {
        return Err("need at least 2 categories".into());
    }
    Ok((labels, xs, ys))
}

fn expect_headers(
    reader: &mut csv::Reader<fs::File>,
    expected: &[&str],
) -> Result<(), Box<dyn std::error::Error>> {
    let headers = reader.headers()?;
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != expected {
        return Err(format!(
            "expected CSV header `{}`, found `{}`",
            expected.join(","),
            got.join(",")
        )
        .into());
    }
    Ok(())
}

fn field(record: &csv::StringRecord, idx: usize) -> Result<&str, Box<dyn std::error::Error>> {
    record
        .get(idx)
        .ok_or_else(|| format!("row {:?} is missing column {idx}", record).into())
}

fn parse_count(raw: &str) -> Result<u64, Box<dyn std::error::Error>> {
    raw.parse::<u64>()
        .map_err(|_| format!("counts must be nonnegative integers, got `{raw}`").into())
}
