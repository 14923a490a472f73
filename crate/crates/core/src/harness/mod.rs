//! Monte Carlo experiment engine: null calibration, power curves over local
//! alternatives, and the numbered study scenarios. Replications run in
//! parallel with per-replication RNG streams derived from (seed, indices),
//! so results are bitwise independent of the thread count.

pub mod alternatives;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{mixture_cdf_cached, ChiSquared, MixtureNull};
use crate::error::{Error, Result};
use crate::testing::{
    cat_test_auto, gauss_test_auto, two_sample_draw, CategoricalSample, GaussianSample,
    NullHypothesis,
};

pub use alternatives::{alternative_at_distance, categorical_alternative, gaussian_alternative};

/// What the data-generating process of a scenario is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GaussianMean,
    Categorical,
    TwoSample,
}

/// Full description of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// "1".."5" for the built-in studies, anything else for custom runs.
    pub scenario_id: String,
    pub kind: ScenarioKind,
    pub null_reference: Vec<f64>,
    /// Grid of scaled distances: √n·ℓ for one-sample scenarios,
    /// √(2nm/(n+m))·ℓ for the two-sample scenario.
    pub alternative_grid: Vec<f64>,
    pub sample_sizes: Vec<u64>,
    /// Second-sample sizes for two-sample runs; defaults to `sample_sizes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_sizes: Option<Vec<u64>>,
    pub replications: u32,
    pub alpha: f64,
    pub seed: u64,
    /// Clustering threshold override (two-sample only); default ln(size).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl ScenarioConfig {
    /// The five built-in studies with their reference vectors.
    pub fn builtin(scenario: u8, seed: u64) -> Result<Self> {
        let grid: Vec<f64> = (0..=8).map(|i| i as f64).collect();
        let base = |kind, null_reference: Vec<f64>, sizes: Vec<u64>| ScenarioConfig {
            scenario_id: scenario.to_string(),
            kind,
            null_reference,
            alternative_grid: grid.clone(),
            sample_sizes: sizes,
            m_sizes: None,
            replications: 10_000,
            alpha: 0.05,
            seed,
            lambda: None,
        };
        Ok(match scenario {
            1 => base(
                ScenarioKind::GaussianMean,
                vec![1.0, 2.0, 3.0, 4.0, 5.0],
                vec![200, 500, 1000, 2000],
            ),
            2 => base(
                ScenarioKind::GaussianMean,
                vec![1.0, 3.0, 3.0, 3.0, 5.0, 5.0],
                vec![200, 500, 1000, 2000],
            ),
            3 => base(
                ScenarioKind::Categorical,
                vec![0.1, 0.2, 0.3, 0.4],
                vec![500, 1000, 2000],
            ),
            4 => base(
                ScenarioKind::Categorical,
                vec![0.1, 0.1, 0.4, 0.4],
                vec![500, 1000, 2000],
            ),
            5 => base(
                ScenarioKind::TwoSample,
                vec![0.1, 0.1, 0.4, 0.4],
                vec![500, 1000, 2000],
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario {other}; built-ins are 1..=5"
                )))
            }
        })
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("need at least one sample size".into()));
        }
        if self.alternative_grid.is_empty() {
            return Err(Error::Config("alternative grid must be nonempty".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0,1)".into()));
        }
        if self.null_reference.len() < 2 {
            return Err(Error::Config("reference needs at least 2 entries".into()));
        }
        if let Some(m) = &self.m_sizes {
            if m.len() != self.sample_sizes.len() {
                return Err(Error::Config(
                    "m_sizes must match sample_sizes in length".into(),
                ));
            }
        }
        if self.kind != ScenarioKind::GaussianMean {
            crate::metrics::cat_distance(&self.null_reference, &self.null_reference)
                .map_err(|e| Error::Config(format!("invalid reference: {e}")))?;
        }
        Ok(())
    }
}

/// One grid point of an estimated power function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    /// Scaled distance (√n·ℓ or √(2nm/(n+m))·ℓ).
    pub x: f64,
    pub power: f64,
    /// Monte Carlo standard error √(p(1−p)/reps).
    pub std_err: f64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub scenario_id: String,
    pub points: Vec<PowerPoint>,
    pub config: ScenarioConfig,
}

impl PowerCurve {
    /// CSV with one row per grid point: x, power, stderr, n, m, scenario.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,power,stderr,n,m,scenario\n");
        for p in &self.points {
            let m = p.m.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.x, p.power, p.std_err, p.n, m, self.scenario_id
            ));
        }
        out
    }
}

/// One statistic's agreement with its asymptotic law under the null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub statistic: String,
    pub ks_distance: f64,
    pub type1_error: f64,
}

/// Kolmogorov–Smirnov distance between a sample and a reference CDF.
pub fn ks_distance(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in values.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Honor the PERMTEST_THREADS cap when set; otherwise use the global pool.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("PERMTEST_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(threads) if threads >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool construction")
            .install(f),
        _ => f(),
    }
}

/// Stream id for replication `rep` of grid point `grid_idx` at sample-size
/// index `size_idx`; disjoint across the run for reps < 2²⁸.
fn stream_id(size_idx: usize, grid_idx: usize, rep: u32) -> u64 {
    ((size_idx as u64) << 40) | ((grid_idx as u64) << 28) | rep as u64
}

fn rep_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// X ~ N(θ, n⁻¹ I_k).
pub fn sample_gaussian<R: Rng + ?Sized>(theta: &[f64], n: f64, rng: &mut R) -> Vec<f64> {
    let scale = 1.0 / n.sqrt();
    theta
        .iter()
        .map(|&t| t + scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Multinomial counts by sequential binomial decomposition: O(k) per draw.
pub fn sample_multinomial<R: Rng + ?Sized>(p: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let k = p.len();
    let mut counts = vec![0u64; k];
    let mut remaining_n = n;
    let mut remaining_mass = 1.0f64;
    for i in 0..k {
        if remaining_n == 0 {
            break;
        }
        if i == k - 1 {
            counts[i] = remaining_n;
            break;
        }
        let cond = (p[i] / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_n, cond)
            .expect("conditional probability in [0,1]")
            .sample(rng);
        counts[i] = draw;
        remaining_n -= draw;
        remaining_mass = (remaining_mass - p[i]).max(0.0);
        if remaining_mass == 0.0 {
            break;
        }
    }
    counts
}

fn prewarm_mixture_cache(k: usize, beta: f64) {
    for d in 1..=k {
        if let Ok(mix) = MixtureNull::new(k, d, beta) {
            let _ = mixture_cdf_cached(mix);
            let _ = crate::distributions::mixture_critical_value_cached(mix, 0.05);
        }
    }
}

/// Estimate the power function on the configured grid. Each replication
/// draws a fresh alternative direction at the exact requested distance, so
/// the curve averages over local directions.
pub fn run_power_curve(config: &ScenarioConfig) -> Result<PowerCurve> {
    config.validate()?;
    let null = match config.kind {
        ScenarioKind::GaussianMean => Some(NullHypothesis::gaussian_mean(&config.null_reference)?),
        ScenarioKind::Categorical => Some(NullHypothesis::categorical(&config.null_reference)?),
        ScenarioKind::TwoSample => {
            prewarm_mixture_cache(config.null_reference.len(), 0.5);
            None
        }
    };
    let mut points = Vec::new();
    for (size_idx, &n) in config.sample_sizes.iter().enumerate() {
        let m = match (config.kind, &config.m_sizes) {
            (ScenarioKind::TwoSample, Some(ms)) => Some(ms[size_idx]),
            (ScenarioKind::TwoSample, None) => Some(n),
            _ => None,
        };
        if let Some(m) = m {
            let beta = m as f64 / (n + m) as f64;
            prewarm_mixture_cache(config.null_reference.len(), beta);
        }
        for (grid_idx, &x) in config.alternative_grid.iter().enumerate() {
            let scale = match m {
                Some(m) => (2.0 * n as f64 * m as f64 / (n + m) as f64).sqrt(),
                None => (n as f64).sqrt(),
            };
            let ell = x / scale;
            let rejections: Result<u64> = with_thread_cap(|| {
                (0..config.replications)
                    .into_par_iter()
                    .map(|rep| {
                        let mut rng = rep_rng(config.seed, stream_id(size_idx, grid_idx, rep));
                        run_one_replication(config, null.as_ref(), n, m, ell, &mut rng)
                            .map(u64::from)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))
            });
            let reject_count = rejections?;
            let reps = config.replications as f64;
            let power = reject_count as f64 / reps;
            points.push(PowerPoint {
                x,
                power,
                std_err: (power * (1.0 - power) / reps).sqrt(),
                n,
                m,
            });
        }
    }
    Ok(PowerCurve {
        scenario_id: config.scenario_id.clone(),
        points,
        config: config.clone(),
    })
}

fn run_one_replication(
    config: &ScenarioConfig,
    null: Option<&NullHypothesis>,
    n: u64,
    m: Option<u64>,
    ell: f64,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    match config.kind {
        ScenarioKind::GaussianMean => {
            let null = null.expect("one-sample null present");
            let theta = gaussian_alternative(&config.null_reference, ell, rng)?;
            let sample = GaussianSample {
                values: sample_gaussian(&theta, n as f64, rng),
                n: n as f64,
            };
            Ok(gauss_test_auto(&sample, null, config.alpha)?.reject)
        }
        ScenarioKind::Categorical => {
            let null = null.expect("one-sample null present");
            let p = categorical_alternative(&config.null_reference, ell, rng)?;
            let sample = CategoricalSample::new(sample_multinomial(&p, n, rng));
            Ok(cat_test_auto(&sample, null, config.alpha)?.reject)
        }
        ScenarioKind::TwoSample => {
            let m = m.expect("two-sample m present");
            let q = categorical_alternative(&config.null_reference, ell, rng)?;
            let x = sample_multinomial(&config.null_reference, n, rng);
            let y = sample_multinomial(&q, m, rng);
            Ok(two_sample_draw(&x, &y, config.alpha, config.lambda)?.reject)
        }
    }
}

/// Simulate the configured null and compare every statistic with its
/// asymptotic law: KS distance of the empirical sample against the limit
/// CDF, plus the empirical rejection rate at α.
pub fn run_null_calibration(config: &ScenarioConfig) -> Result<Vec<CalibrationRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (size_idx, &n) in config.sample_sizes.iter().enumerate() {
        match config.kind {
            ScenarioKind::GaussianMean | ScenarioKind::Categorical => {
                let null = match config.kind {
                    ScenarioKind::GaussianMean => {
                        NullHypothesis::gaussian_mean(&config.null_reference)?
                    }
                    _ => NullHypothesis::categorical(&config.null_reference)?,
                };
                let reps: Result<Vec<(Vec<f64>, bool)>> = with_thread_cap(|| {
                    (0..config.replications)
                        .into_par_iter()
                        .map(|rep| {
                            let mut rng = rep_rng(config.seed, stream_id(size_idx, 0, rep));
                            let report = match config.kind {
                                ScenarioKind::GaussianMean => {
                                    let sample = GaussianSample {
                                        values: sample_gaussian(
                                            &config.null_reference,
                                            n as f64,
                                            &mut rng,
                                        ),
                                        n: n as f64,
                                    };
                                    gauss_test_auto(&sample, &null, config.alpha)?
                                }
                                _ => {
                                    let counts =
                                        sample_multinomial(&config.null_reference, n, &mut rng);
                                    cat_test_auto(
                                        &CategoricalSample::new(counts),
                                        &null,
                                        config.alpha,
                                    )?
                                }
                            };
                            let stats: Vec<f64> = if report.statistics.contains_key("T") {
                                vec![report.statistics["T"]]
                            } else if report.statistics.contains_key("T_f") {
                                vec![report.statistics["T_f"], report.statistics["T_g"]]
                            } else {
                                vec![report.statistics["T_g"]]
                            };
                            Ok((stats, report.reject))
                        })
                        .collect()
                });
                let reps = reps?;
                let k = null.k();
                let d = null.d();
                let is_cat = config.kind == ScenarioKind::Categorical;
                let laws: Vec<(String, u32)> = if d == k {
                    vec![(
                        "T".to_string(),
                        if is_cat { (k - 1) as u32 } else { k as u32 },
                    )]
                } else if d == 1 {
                    vec![(
                        "T_g".to_string(),
                        if is_cat { (k - 1) as u32 } else { k as u32 },
                    )]
                } else if is_cat {
                    vec![
                        ("T_f".to_string(), (d - 1) as u32),
                        ("T_g".to_string(), (k - 1) as u32),
                        ("T_g-T_f".to_string(), (k - d) as u32),
                    ]
                } else {
                    vec![
                        ("T_f".to_string(), d as u32),
                        ("T_g".to_string(), k as u32),
                        ("T_g-T_f".to_string(), (k - d) as u32),
                    ]
                };
                let type1 = reps.iter().filter(|(_, r)| *r).count() as f64 / reps.len() as f64;
                for (idx, (name, df)) in laws.iter().enumerate() {
                    let mut values: Vec<f64> = if name == "T_g-T_f" {
                        reps.iter().map(|(s, _)| s[1] - s[0]).collect()
                    } else {
                        reps.iter().map(|(s, _)| s[idx.min(s.len() - 1)]).collect()
                    };
                    let law = ChiSquared::central(*df);
                    let ks = ks_distance(&mut values, |x| law.cdf(x));
                    rows.push(CalibrationRow {
                        n,
                        m: None,
                        statistic: name.clone(),
                        ks_distance: ks,
                        type1_error: type1,
                    });
                }
            }
            ScenarioKind::TwoSample => {
                let m = config.m_sizes.as_ref().map(|ms| ms[size_idx]).unwrap_or(n);
                let beta = m as f64 / (n + m) as f64;
                let k = config.null_reference.len();
                prewarm_mixture_cache(k, beta);
                let reps: Result<Vec<(f64, f64, bool)>> = with_thread_cap(|| {
                    (0..config.replications)
                        .into_par_iter()
                        .map(|rep| {
                            let mut rng = rep_rng(config.seed, stream_id(size_idx, 0, rep));
                            let x = sample_multinomial(&config.null_reference, n, &mut rng);
                            let y = sample_multinomial(&config.null_reference, m, &mut rng);
                            let draw = two_sample_draw(&x, &y, config.alpha, config.lambda)?;
                            Ok((draw.t_f, draw.t_g, draw.reject))
                        })
                        .collect()
                });
                let reps = reps?;
                let d = crate::testing::detect_null_partition(&config.null_reference).d();
                let type1 = reps.iter().filter(|(_, _, r)| *r).count() as f64 / reps.len() as f64;
                let mut t_f: Vec<f64> = reps.iter().map(|r| r.0).collect();
                let f_law = ChiSquared::central((d - 1) as u32);
                rows.push(CalibrationRow {
                    n,
                    m: Some(m),
                    statistic: "T_f".into(),
                    ks_distance: ks_distance(&mut t_f, |x| f_law.cdf(x)),
                    type1_error: type1,
                });
                let mut t_g: Vec<f64> = reps.iter().map(|r| r.1).collect();
                let mix = MixtureNull::new(k, d, beta)?;
                let table = mixture_cdf_cached(mix);
                rows.push(CalibrationRow {
                    n,
                    m: Some(m),
                    statistic: "T_g".into(),
                    ks_distance: ks_distance(&mut t_g, |x| table.cdf(x)),
                    type1_error: type1,
                });
            }
        }
    }
    Ok(rows)
}

/// JSON manifest echoing the full configuration next to the emitted data.
pub fn run_manifest(config: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "config": config,
        "version": crate::report::crate_version(),
    }))
    .expect("manifest serialization cannot fail")
}
