//! Two-sample test: neither side's cell probabilities are known, so both
//! empirical frequency vectors are clustered and the basis / envelope
//! functions are built from the fitted cluster centers. The null law is the
//! mixture ½βχ²_{k−d} + ½(1−β)χ²_{k−d} + χ²_{d−1} with β = m/(n+m).

use std::collections::BTreeMap;

use crate::distributions::{mixture_cdf_cached, mixture_critical_value_cached, MixtureNull};
use crate::error::{Error, Result};
use crate::polynomials::{LagrangeBasis, Nodes};
use crate::report::{crate_version, ConditionDiagnostics, NullSpec, TestReport};
use crate::testing::diagnostics::max_abs_eta;
use crate::testing::one_sample::g_envelope;
use crate::testing::partition::{cluster_empirical, Partition};

/// Data-driven side of one sample: its fitted partition and the √-scale
/// machinery derived from the cluster centers.
struct ClusteredSide {
    partition: Partition,
    sqrt_centers: Vec<f64>,
    basis: Option<LagrangeBasis>,
}

impl ClusteredSide {
    fn build(p_hat: &[f64], n: u64, lambda: f64) -> Result<Self> {
        let mut partition = cluster_empirical(p_hat, n, lambda);
        // Cluster centers can in principle land within the node-distinctness
        // tolerance of each other; merge such neighbors rather than fail.
        loop {
            if partition.d() == 1 {
                let sqrt_centers = vec![partition.centers()[0].sqrt()];
                return Ok(Self {
                    partition,
                    sqrt_centers,
                    basis: None,
                });
            }
            let sqrt_centers: Vec<f64> = partition.centers().iter().map(|c| c.sqrt()).collect();
            let nodes = Nodes::new(sqrt_centers.clone())?;
            match LagrangeBasis::new(&nodes) {
                Ok(basis) => {
                    return Ok(Self {
                        partition,
                        sqrt_centers,
                        basis: Some(basis),
                    });
                }
                Err(Error::DegenerateNodes { .. }) => {
                    partition = merge_closest_clusters(&partition, p_hat);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Σ_j f_h(v_j) for every h, where v is a probability vector and the
    /// basis acts on √v. With d = 1 the single basis function is √t.
    fn basis_sums(&self, v: &[f64]) -> Vec<f64> {
        let sqrt_v: Vec<f64> = v.iter().map(|x| x.max(0.0).sqrt()).collect();
        match &self.basis {
            Some(basis) => basis.sums(&sqrt_v),
            None => vec![sqrt_v.iter().sum()],
        }
    }

    /// Σ_j g(v_j) with g built on this side's centers.
    fn envelope_sum(&self, v: &[f64]) -> f64 {
        v.iter()
            .map(|&x| {
                let s = x.max(0.0).sqrt();
                if self.sqrt_centers.len() == 1 {
                    (s - self.sqrt_centers[0]).powi(2)
                } else {
                    g_envelope(s, &self.sqrt_centers)
                }
            })
            .sum()
    }

    /// Σ_h (1/|C_h|)(F_h(a) − F_h(b))².
    fn weighted_gap(&self, a: &[f64], b: &[f64]) -> f64 {
        let fa = self.basis_sums(a);
        let fb = self.basis_sums(b);
        self.partition
            .cluster_sizes()
            .iter()
            .enumerate()
            .map(|(h, &size)| (fa[h] - fb[h]).powi(2) / size as f64)
            .sum()
    }
}

fn merge_closest_clusters(partition: &Partition, p_hat: &[f64]) -> Partition {
    let centers = partition.centers();
    let mut best = 0;
    for i in 1..centers.len() - 1 {
        if centers[i + 1] - centers[i] < centers[best + 1] - centers[best] {
            best = i;
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(partition.d() - 1);
    let mut new_centers = Vec::with_capacity(partition.d() - 1);
    for (h, cluster) in partition.clusters().iter().enumerate() {
        if h == best + 1 {
            let merged = clusters.last_mut().unwrap();
            merged.extend_from_slice(cluster);
            let mean_sqrt: f64 = merged
                .iter()
                .map(|&j| p_hat[j].max(0.0).sqrt())
                .sum::<f64>()
                / merged.len() as f64;
            *new_centers.last_mut().unwrap() = mean_sqrt * mean_sqrt;
        } else {
            clusters.push(cluster.clone());
            new_centers.push(partition.centers()[h]);
        }
    }
    Partition::new(clusters, new_centers).expect("merge preserves partition validity")
}

/// Two-sample permutation-invariant test on count vectors of equal length.
/// `lambda` overrides the clustering threshold for both samples; the default
/// is ln of each sample's own size.
pub fn two_sample_test(
    x_counts: &[u64],
    y_counts: &[u64],
    alpha: f64,
    lambda: Option<f64>,
) -> Result<TestReport> {
    if x_counts.len() != y_counts.len() {
        return Err(Error::LengthMismatch {
            left: x_counts.len(),
            right: y_counts.len(),
        });
    }
    let k = x_counts.len();
    if k < 2 {
        return Err(Error::InvalidArgument("need at least 2 categories".into()));
    }
    let n: u64 = x_counts.iter().sum();
    let m: u64 = y_counts.iter().sum();
    if n == 0 || m == 0 {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;
    let mf = m as f64;
    let p_hat: Vec<f64> = x_counts.iter().map(|&c| c as f64 / nf).collect();
    let q_hat: Vec<f64> = y_counts.iter().map(|&c| c as f64 / mf).collect();

    let lambda_x = lambda.unwrap_or_else(|| nf.ln());
    let lambda_y = lambda.unwrap_or_else(|| mf.ln());
    let side_x = ClusteredSide::build(&p_hat, n, lambda_x)?;
    let side_y = ClusteredSide::build(&q_hat, m, lambda_y)?;

    let scale = 2.0 * nf * mf / (nf + mf);
    let t_f = scale * (side_x.weighted_gap(&p_hat, &q_hat) + side_y.weighted_gap(&p_hat, &q_hat));
    let t_g = scale * (side_x.envelope_sum(&q_hat) + side_y.envelope_sum(&p_hat));

    let d_x = side_x.partition.d();
    let d_y = side_y.partition.d();
    // The mixture mean grows with d, so the larger estimate yields the
    // conservative critical value when the two clusterings disagree.
    let d_hat = d_x.max(d_y);
    let beta = mf / (nf + mf);
    let mix = MixtureNull::new(k, d_hat, beta)?;
    let threshold = mixture_critical_value_cached(mix, alpha);
    let cdf = mixture_cdf_cached(mix);

    let mut diag = ConditionDiagnostics::default();
    if d_x != d_y {
        diag.warnings.push(format!(
            "cluster counts disagree between samples: {d_x} vs {d_y}; using d = {d_hat}"
        ));
    }
    let min_nq = p_hat
        .iter()
        .map(|&p| nf * p * (1.0 - p))
        .chain(q_hat.iter().map(|&q| mf * q * (1.0 - q)))
        .fold(f64::INFINITY, f64::min);
    diag.min_nq = Some(min_nq);
    if min_nq < 10.0 {
        diag.warnings.push(format!(
            "cell frequency near boundary: min n*p*(1-p) = {min_nq:.2} is below 10"
        ));
    }
    let scaled_zeta = |side: &ClusteredSide, size: f64| -> Option<f64> {
        (side.sqrt_centers.len() >= 2).then(|| max_abs_eta(&side.sqrt_centers) / size.sqrt())
    };
    diag.zeta_bar_max = match (scaled_zeta(&side_x, nf), scaled_zeta(&side_y, mf)) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };

    let mut statistics = BTreeMap::new();
    statistics.insert("T_f".to_string(), t_f);
    statistics.insert("T_g".to_string(), t_g);
    let mut dof = BTreeMap::new();
    dof.insert("T_f".to_string(), (d_hat - 1) as f64);
    let mut thresholds = BTreeMap::new();
    thresholds.insert("T_f".to_string(), threshold);
    thresholds.insert("T_g".to_string(), threshold);
    let mut p_values = BTreeMap::new();
    p_values.insert("T_f".to_string(), 1.0 - cdf.cdf(t_f));
    p_values.insert("T_g".to_string(), 1.0 - cdf.cdf(t_g));

    Ok(TestReport {
        test_kind: "two_sample".to_string(),
        k,
        d: d_hat,
        d_x: Some(d_x),
        d_y: Some(d_y),
        n: nf,
        m: Some(mf),
        statistics,
        dof,
        thresholds,
        p_values,
        reject: t_f > threshold || t_g > threshold,
        alpha,
        null_spec: NullSpec::Mixture {
            k,
            d: d_hat,
            beta,
            components: mix.component_dofs(),
        },
        diagnostics: diag,
        categories: None,
        seed: None,
        version: crate_version(),
    })
}

/// Per-replication internals used by the study harness and acceptance suite.
#[derive(Debug, Clone, Copy)]
pub struct TwoSampleDraw {
    pub t_f: f64,
    pub t_g: f64,
    pub d_x: usize,
    pub d_y: usize,
    pub reject: bool,
}

/// Thin wrapper around [`two_sample_test`] exposing the raw pieces.
pub fn two_sample_draw(
    x_counts: &[u64],
    y_counts: &[u64],
    alpha: f64,
    lambda: Option<f64>,
) -> Result<TwoSampleDraw> {
    let report = two_sample_test(x_counts, y_counts, alpha, lambda)?;
    Ok(TwoSampleDraw {
        t_f: report.statistics["T_f"],
        t_g: report.statistics["T_g"],
        d_x: report.d_x.expect("two-sample report carries d_x"),
        d_y: report.d_y.expect("two-sample report carries d_y"),
        reject: report.reject,
    })
}
