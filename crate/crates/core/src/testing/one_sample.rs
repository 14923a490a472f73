//! One-sample tests: Gaussian mean vectors and categorical frequencies, each
//! with a non-degenerate path (all reference values distinct) and a
//! degenerate path (tied values grouped into d < k clusters).

use std::collections::BTreeMap;

use crate::distributions::ChiSquared;
use crate::error::{Error, Result};
use crate::polynomials::{LagrangeBasis, Nodes};
use crate::report::{crate_version, ConditionDiagnostics, NullSpec, TestReport};
use crate::testing::diagnostics::condition_diagnostics;
use crate::testing::partition::{detect_null_partition, Partition};

/// Which family the null refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullKind {
    GaussianMean,
    Categorical,
}

/// A permutation-invariant null: the parameter equals `reference` up to a
/// relabeling of coordinates. The partition groups exactly-equal reference
/// values; d = partition.d() selects the test path.
#[derive(Debug, Clone, PartialEq)]
pub struct NullHypothesis {
    kind: NullKind,
    reference: Vec<f64>,
    partition: Partition,
}

impl NullHypothesis {
    pub fn gaussian_mean(mu: &[f64]) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 reference means".into(),
            ));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("reference must be finite".into()));
        }
        Ok(Self {
            kind: NullKind::GaussianMean,
            reference: mu.to_vec(),
            partition: detect_null_partition(mu),
        })
    }

    pub fn categorical(q: &[f64]) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 reference cells".into(),
            ));
        }
        if q.iter().any(|&v| v.is_nan() || v <= 0.0 || v >= 1.0) {
            return Err(Error::NotAProbabilityVector(
                "reference probabilities must lie strictly inside (0, 1)".into(),
            ));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::NotAProbabilityVector(format!(
                "reference sums to {sum}, expected 1"
            )));
        }
        Ok(Self {
            kind: NullKind::Categorical,
            reference: q.to_vec(),
            partition: detect_null_partition(q),
        })
    }

    pub fn kind(&self) -> NullKind {
        self.kind
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.reference.len()
    }

    pub fn d(&self) -> usize {
        self.partition.d()
    }

    pub fn is_degenerate(&self) -> bool {
        self.d() < self.k()
    }
}

/// One Gaussian observation X ~ N(θ, n⁻¹ I_k); `n` is the precision scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSample {
    pub values: Vec<f64>,
    pub n: f64,
}

/// Categorical observations reduced to their sufficient counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalSample {
    pub counts: Vec<u64>,
}

impl CategoricalSample {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn p_hat(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// The envelope function with 1/g(t) = Σ_g (t − ν_g)⁻², taking the exact-hit
/// branch g(ν_g) = 0 so cluster centers never produce 0/0.
pub fn g_envelope(t: f64, centers: &[f64]) -> f64 {
    let mut inv = 0.0;
    for &nu in centers {
        let diff = t - nu;
        if diff == 0.0 {
            return 0.0;
        }
        inv += 1.0 / (diff * diff);
    }
    1.0 / inv
}

fn check_gauss_inputs(sample: &GaussianSample, null: &NullHypothesis) -> Result<()> {
    if null.kind() != NullKind::GaussianMean {
        return Err(Error::InvalidArgument(
            "gaussian test requires a gaussian-mean null".into(),
        ));
    }
    if sample.values.len() != null.k() {
        return Err(Error::LengthMismatch {
            left: sample.values.len(),
            right: null.k(),
        });
    }
    if sample.n.is_nan() || sample.n <= 0.0 {
        return Err(Error::InvalidArgument(
            "sample size n must be positive".into(),
        ));
    }
    Ok(())
}

fn check_cat_inputs(sample: &CategoricalSample, null: &NullHypothesis) -> Result<()> {
    if null.kind() != NullKind::Categorical {
        return Err(Error::InvalidArgument(
            "categorical test requires a categorical null".into(),
        ));
    }
    if sample.counts.len() != null.k() {
        return Err(Error::LengthMismatch {
            left: sample.counts.len(),
            right: null.k(),
        });
    }
    if sample.n() == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn single_statistic_report(
    test_kind: &str,
    key: &str,
    null: &NullHypothesis,
    n: f64,
    statistic: f64,
    df: usize,
    alpha: f64,
    diagnostics: ConditionDiagnostics,
) -> TestReport {
    let law = ChiSquared::central(df as u32);
    let threshold = law.critical_value(alpha);
    let mut statistics = BTreeMap::new();
    statistics.insert(key.to_string(), statistic);
    let mut dof = BTreeMap::new();
    dof.insert(key.to_string(), df as f64);
    let mut thresholds = BTreeMap::new();
    thresholds.insert(key.to_string(), threshold);
    let mut p_values = BTreeMap::new();
    p_values.insert(key.to_string(), 1.0 - law.cdf(statistic));
    TestReport {
        test_kind: test_kind.to_string(),
        k: null.k(),
        d: null.d(),
        d_x: None,
        d_y: None,
        n,
        m: None,
        statistics,
        dof,
        thresholds,
        p_values,
        reject: statistic > threshold,
        alpha,
        null_spec: NullSpec::CentralChi2 { df },
        diagnostics,
        categories: None,
        seed: None,
        version: crate_version(),
    }
}

#[allow(clippy::too_many_arguments)]
fn pair_statistic_report(
    test_kind: &str,
    null: &NullHypothesis,
    n: f64,
    t_f: f64,
    df_f: usize,
    t_g: f64,
    df_g: usize,
    alpha: f64,
    diagnostics: ConditionDiagnostics,
) -> TestReport {
    let law_f = ChiSquared::central(df_f as u32);
    let law_g = ChiSquared::central(df_g as u32);
    let thr_f = law_f.critical_value(alpha);
    let thr_g = law_g.critical_value(alpha);
    let mut statistics = BTreeMap::new();
    statistics.insert("T_f".to_string(), t_f);
    statistics.insert("T_g".to_string(), t_g);
    let mut dof = BTreeMap::new();
    dof.insert("T_f".to_string(), df_f as f64);
    dof.insert("T_g".to_string(), df_g as f64);
    let mut thresholds = BTreeMap::new();
    thresholds.insert("T_f".to_string(), thr_f);
    thresholds.insert("T_g".to_string(), thr_g);
    let mut p_values = BTreeMap::new();
    p_values.insert("T_f".to_string(), 1.0 - law_f.cdf(t_f));
    p_values.insert("T_g".to_string(), 1.0 - law_g.cdf(t_g));
    TestReport {
        test_kind: test_kind.to_string(),
        k: null.k(),
        d: null.d(),
        d_x: None,
        d_y: None,
        n,
        m: None,
        statistics,
        dof,
        thresholds,
        p_values,
        reject: t_f > thr_f || t_g > thr_g,
        alpha,
        null_spec: NullSpec::Chi2Pair { df_f, df_g },
        diagnostics,
        categories: None,
        seed: None,
        version: crate_version(),
    }
}

/// Non-degenerate Gaussian test (all μ_j distinct):
/// T = n·Σ_l (Σ_j f_l(X_j) − Σ_j f_l(μ_j))², asymptotically χ²_k.
pub fn gauss_test(
    sample: &GaussianSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    check_gauss_inputs(sample, null)?;
    let nodes = Nodes::new(null.reference().to_vec())?;
    let basis = LagrangeBasis::new(&nodes)?; // DegenerateNodes redirects caller
    let sums_x = basis.sums(&sample.values);
    let sums_mu = basis.sums(null.reference());
    let t: f64 = sums_x
        .iter()
        .zip(&sums_mu)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * sample.n;
    let diag = condition_diagnostics(null, None, sample.n);
    Ok(single_statistic_report(
        "gaussian",
        "T",
        null,
        sample.n,
        t,
        null.k(),
        alpha,
        diag,
    ))
}

/// Degenerate Gaussian test for tied means grouped into d < k clusters:
/// T_f (cluster-size-weighted basis sums, χ²_d) and T_g (envelope sum, χ²_k),
/// rejecting when either exceeds its threshold. For d = 1 only T_g remains.
pub fn gauss_test_degenerate(
    sample: &GaussianSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    check_gauss_inputs(sample, null)?;
    let partition = null.partition();
    let d = partition.d();
    let k = null.k();
    if d == k {
        return Err(Error::InvalidPartition(
            "reference has no ties; use the non-degenerate test".into(),
        ));
    }
    let n = sample.n;
    let centers = partition.centers();
    let diag = condition_diagnostics(null, None, n);

    if d == 1 {
        let t_g: f64 = sample
            .values
            .iter()
            .map(|&x| (x - centers[0]).powi(2))
            .sum::<f64>()
            * n;
        return Ok(single_statistic_report(
            "gaussian_degenerate",
            "T_g",
            null,
            n,
            t_g,
            k,
            alpha,
            diag,
        ));
    }

    let nodes = Nodes::new(centers.to_vec())?;
    let basis = LagrangeBasis::new(&nodes)?;
    let sums_x = basis.sums(&sample.values);
    let sums_mu = basis.sums(null.reference());
    let t_f: f64 = partition
        .cluster_sizes()
        .iter()
        .enumerate()
        .map(|(h, &size)| (sums_x[h] - sums_mu[h]).powi(2) / size as f64)
        .sum::<f64>()
        * n;
    let t_g: f64 = sample
        .values
        .iter()
        .map(|&x| g_envelope(x, centers))
        .sum::<f64>()
        * n;
    Ok(pair_statistic_report(
        "gaussian_degenerate",
        null,
        n,
        t_f,
        d,
        t_g,
        k,
        alpha,
        diag,
    ))
}

/// Route a Gaussian sample to the degenerate or non-degenerate path based on
/// exact ties in the reference.
pub fn gauss_test_auto(
    sample: &GaussianSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    if null.is_degenerate() {
        gauss_test_degenerate(sample, null, alpha)
    } else {
        gauss_test(sample, null, alpha)
    }
}

/// Non-degenerate categorical test (all q_j distinct, strictly inside (0,1)):
/// T = 4n·Σ_l (Σ_j f_l(p̂_j) − Σ_j f_l(q_j))² with the basis built on √q,
/// asymptotically χ²_{k−1}.
pub fn cat_test(
    sample: &CategoricalSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    check_cat_inputs(sample, null)?;
    let n = sample.n() as f64;
    let sqrt_q: Vec<f64> = null.reference().iter().map(|v| v.sqrt()).collect();
    let nodes = Nodes::new(sqrt_q.clone())?;
    // Tied (or √-tolerance-tied) references fail here with DegenerateNodes,
    // redirecting the caller to the degenerate path.
    let basis = LagrangeBasis::new(&nodes)?;
    let sqrt_p_hat: Vec<f64> = sample.p_hat().iter().map(|v| v.sqrt()).collect();
    let sums_p = basis.sums(&sqrt_p_hat);
    let sums_q = basis.sums(&sqrt_q);
    let t: f64 = sums_p
        .iter()
        .zip(&sums_q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * 4.0
        * n;
    let mut diag = condition_diagnostics(null, Some(sample), n);
    push_zero_count_warnings(sample, &mut diag);
    Ok(single_statistic_report(
        "categorical",
        "T",
        null,
        n,
        t,
        null.k() - 1,
        alpha,
        diag,
    ))
}

/// Degenerate categorical test for tied cell probabilities:
/// T_f (χ²_{d−1}) and T_g (χ²_{k−1}), OR decision rule. For d = 1 only T_g.
pub fn cat_test_degenerate(
    sample: &CategoricalSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    check_cat_inputs(sample, null)?;
    let partition = null.partition();
    let d = partition.d();
    let k = null.k();
    if d == k {
        return Err(Error::InvalidPartition(
            "reference has no ties; use the non-degenerate test".into(),
        ));
    }
    let n = sample.n() as f64;
    let sqrt_r: Vec<f64> = partition.centers().iter().map(|v| v.sqrt()).collect();
    let sqrt_p_hat: Vec<f64> = sample.p_hat().iter().map(|v| v.sqrt()).collect();
    let mut diag = condition_diagnostics(null, Some(sample), n);
    push_zero_count_warnings(sample, &mut diag);

    if d == 1 {
        let t_g: f64 = sqrt_p_hat
            .iter()
            .map(|&s| (s - sqrt_r[0]).powi(2))
            .sum::<f64>()
            * 4.0
            * n;
        return Ok(single_statistic_report(
            "categorical_degenerate",
            "T_g",
            null,
            n,
            t_g,
            k - 1,
            alpha,
            diag,
        ));
    }

    let nodes = Nodes::new(sqrt_r.clone())?;
    let basis = LagrangeBasis::new(&nodes)?;
    let sqrt_q: Vec<f64> = null.reference().iter().map(|v| v.sqrt()).collect();
    let sums_p = basis.sums(&sqrt_p_hat);
    let sums_q = basis.sums(&sqrt_q);
    let t_f: f64 = partition
        .cluster_sizes()
        .iter()
        .enumerate()
        .map(|(h, &size)| (sums_p[h] - sums_q[h]).powi(2) / size as f64)
        .sum::<f64>()
        * 4.0
        * n;
    let t_g: f64 = sqrt_p_hat
        .iter()
        .map(|&s| g_envelope(s, &sqrt_r))
        .sum::<f64>()
        * 4.0
        * n;
    Ok(pair_statistic_report(
        "categorical_degenerate",
        null,
        n,
        t_f,
        d - 1,
        t_g,
        k - 1,
        alpha,
        diag,
    ))
}

/// Route a categorical sample by exact ties in the reference.
pub fn cat_test_auto(
    sample: &CategoricalSample,
    null: &NullHypothesis,
    alpha: f64,
) -> Result<TestReport> {
    if null.is_degenerate() {
        cat_test_degenerate(sample, null, alpha)
    } else {
        cat_test(sample, null, alpha)
    }
}

/// Force the flat single-cluster path regardless of ties in q: the center is
/// the squared mean of √q and only T_g is computed (against χ²_{k−1}). The
/// asymptotic level is exact only when q is constant; a warning records the
/// coercion.
pub fn cat_test_flat(sample: &CategoricalSample, q: &[f64], alpha: f64) -> Result<TestReport> {
    let null = NullHypothesis::categorical(q)?;
    check_cat_inputs(sample, &null)?;
    let n = sample.n() as f64;
    let k = null.k();
    let mean_sqrt: f64 = q.iter().map(|v| v.sqrt()).sum::<f64>() / k as f64;
    let t_g: f64 = sample
        .p_hat()
        .iter()
        .map(|&p| (p.sqrt() - mean_sqrt).powi(2))
        .sum::<f64>()
        * 4.0
        * n;
    let mut diag = condition_diagnostics(&null, Some(sample), n);
    push_zero_count_warnings(sample, &mut diag);
    diag.warnings.push(
        "partition forced to a single cluster; null law assumes equal cell probabilities".into(),
    );
    let mut report = single_statistic_report(
        "categorical_degenerate",
        "T_g",
        &null,
        n,
        t_g,
        k - 1,
        alpha,
        diag,
    );
    report.d = 1;
    Ok(report)
}

fn push_zero_count_warnings(sample: &CategoricalSample, diag: &mut ConditionDiagnostics) {
    let zeros: Vec<usize> = sample
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect();
    if !zeros.is_empty() {
        diag.warnings
            .push(format!("zero counts in cells {zeros:?}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU5: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
    const MU_DEGEN: [f64; 6] = [1.0, 3.0, 3.0, 3.0, 5.0, 5.0];
    const Q4: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
    const Q_DEGEN: [f64; 4] = [0.1, 0.1, 0.4, 0.4];

    #[test]
    fn gauss_statistic_vanishes_at_reference() {
        let null = NullHypothesis::gaussian_mean(&MU5).unwrap();
        let sample = GaussianSample {
            values: MU5.to_vec(),
            n: 100.0,
        };
        let report = gauss_test(&sample, &null, 0.05).unwrap();
        assert!(report.statistics["T"].abs() < 1e-18);
        assert!(!report.reject);
        assert_eq!(report.dof["T"], 5.0);
    }

    #[test]
    fn gauss_statistic_vanishes_at_permuted_reference() {
        let null = NullHypothesis::gaussian_mean(&MU5).unwrap();
        let sample = GaussianSample {
            values: vec![5.0, 3.0, 1.0, 4.0, 2.0],
            n: 250.0,
        };
        let report = gauss_test(&sample, &null, 0.05).unwrap();
        assert!(report.statistics["T"].abs() < 1e-12);
        assert!(!report.reject);
    }

    #[test]
    fn gauss_redirects_degenerate_reference() {
        let null = NullHypothesis::gaussian_mean(&MU_DEGEN).unwrap();
        let sample = GaussianSample {
            values: MU_DEGEN.to_vec(),
            n: 200.0,
        };
        assert!(matches!(
            gauss_test(&sample, &null, 0.05),
            Err(Error::DegenerateNodes { .. })
        ));
    }

    #[test]
    fn degenerate_gauss_zero_at_cluster_centers() {
        let null = NullHypothesis::gaussian_mean(&MU_DEGEN).unwrap();
        let sample = GaussianSample {
            values: MU_DEGEN.to_vec(),
            n: 200.0,
        };
        let report = gauss_test_degenerate(&sample, &null, 0.05).unwrap();
        assert_eq!(report.statistics["T_f"], 0.0);
        assert_eq!(report.statistics["T_g"], 0.0);
        assert_eq!(report.dof["T_f"], 3.0);
        assert_eq!(report.dof["T_g"], 6.0);
        assert!(!report.reject);
    }

    #[test]
    fn envelope_sandwich_bounds() {
        // (1/d)·min(t−ν)² ≤ g(t) ≤ min(t−ν)² away from the centers.
        let centers = [1.0, 3.0, 5.0];
        let d = centers.len() as f64;
        for &t in &[0.0, 2.0, 2.5, 3.7, 4.99, 8.0] {
            let min_sq = centers
                .iter()
                .map(|&nu| (t - nu) * (t - nu))
                .fold(f64::INFINITY, f64::min);
            let g = g_envelope(t, &centers);
            assert!(g <= min_sq + 1e-15, "t={t}");
            assert!(g >= min_sq / d - 1e-15, "t={t}");
        }
        assert_eq!(g_envelope(3.0, &centers), 0.0);
    }

    #[test]
    fn flat_gauss_reference_uses_single_statistic() {
        let null = NullHypothesis::gaussian_mean(&[2.0, 2.0, 2.0]).unwrap();
        let sample = GaussianSample {
            values: vec![2.1, 1.9, 2.0],
            n: 100.0,
        };
        let report = gauss_test_degenerate(&sample, &null, 0.05).unwrap();
        assert_eq!(report.d, 1);
        assert!(report.statistics.contains_key("T_g"));
        assert!(!report.statistics.contains_key("T_f"));
        assert_eq!(report.dof["T_g"], 3.0);
        let expect = 100.0 * (0.01f64 + 0.01 + 0.0);
        assert!((report.statistics["T_g"] - expect).abs() < 1e-10);
    }

    #[test]
    fn cat_statistic_vanishes_at_reference_counts() {
        let null = NullHypothesis::categorical(&Q4).unwrap();
        let sample = CategoricalSample::new(vec![100, 200, 300, 400]);
        let report = cat_test(&sample, &null, 0.05).unwrap();
        assert!(report.statistics["T"].abs() < 1e-18);
        assert!(!report.reject);
        assert_eq!(report.dof["T"], 3.0);
    }

    #[test]
    fn cat_statistic_vanishes_under_permuted_counts() {
        let null = NullHypothesis::categorical(&Q4).unwrap();
        let sample = CategoricalSample::new(vec![400, 300, 200, 100]);
        let report = cat_test(&sample, &null, 0.05).unwrap();
        assert!(report.statistics["T"].abs() < 1e-12);
        assert!(!report.reject);
    }

    #[test]
    fn cat_degenerate_dofs_scenario_four() {
        let null = NullHypothesis::categorical(&Q_DEGEN).unwrap();
        assert_eq!(null.d(), 2);
        let sample = CategoricalSample::new(vec![200, 200, 800, 800]);
        let report = cat_test_degenerate(&sample, &null, 0.05).unwrap();
        assert_eq!(report.dof["T_f"], 1.0);
        assert_eq!(report.dof["T_g"], 3.0);
        // Counts exactly proportional to q: both statistics vanish.
        assert_eq!(report.statistics["T_f"], 0.0);
        assert_eq!(report.statistics["T_g"], 0.0);
        assert!(!report.reject);
    }

    #[test]
    fn cat_routes_by_degeneracy() {
        let degen = NullHypothesis::categorical(&Q_DEGEN).unwrap();
        let sample = CategoricalSample::new(vec![250, 250, 750, 750]);
        assert!(matches!(
            cat_test(&sample, &degen, 0.05),
            Err(Error::DegenerateNodes { .. })
        ));
        let report = cat_test_auto(&sample, &degen, 0.05).unwrap();
        assert_eq!(report.test_kind, "categorical_degenerate");
    }

    #[test]
    fn zero_count_warning_is_recorded() {
        let null = NullHypothesis::categorical(&Q4).unwrap();
        let sample = CategoricalSample::new(vec![0, 300, 300, 400]);
        let report = cat_test(&sample, &null, 0.05).unwrap();
        assert!(report
            .diagnostics
            .warnings
            .iter()
            .any(|w| w.contains("zero counts")));
    }

    #[test]
    fn forced_flat_partition() {
        let sample = CategoricalSample::new(vec![100, 200, 300, 400]);
        let report = cat_test_flat(&sample, &Q4, 0.05).unwrap();
        assert_eq!(report.d, 1);
        assert!(report.statistics["T_g"] > 0.0);
        assert!(report
            .diagnostics
            .warnings
            .iter()
            .any(|w| w.contains("single cluster")));
    }

    #[test]
    fn shifted_mean_rejects() {
        // One coordinate moved by 10/√n: noncentrality ≈ 100 ≫ χ²₅(.05).
        let null = NullHypothesis::gaussian_mean(&MU5).unwrap();
        let n: f64 = 400.0;
        let mut x = MU5.to_vec();
        x[2] += 10.0 / n.sqrt();
        let report = gauss_test(&GaussianSample { values: x, n }, &null, 0.05).unwrap();
        assert!(report.reject, "T = {}", report.statistics["T"]);
    }

    #[test]
    fn report_round_trips_through_json() {
        let null = NullHypothesis::categorical(&Q_DEGEN).unwrap();
        let sample = CategoricalSample::new(vec![210, 190, 790, 810]);
        let report = cat_test_auto(&sample, &null, 0.05).unwrap();
        let parsed = TestReport::from_json(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
    }
}
