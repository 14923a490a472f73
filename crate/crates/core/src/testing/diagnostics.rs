//! Condition quantities from the local-alternative theory, surfaced as
//! report diagnostics. Near-degenerate or near-boundary configurations get
//! warnings; nothing here ever blocks a test.

use crate::metrics::cat_distance;
use crate::report::ConditionDiagnostics;
use crate::testing::one_sample::{CategoricalSample, NullHypothesis, NullKind};
use crate::testing::partition::Partition;
use crate::Result;

/// Scaled condition quantity above which a near-degeneracy warning fires.
const ETA_WARN: f64 = 0.1;
/// Lower bound on min n·q(1−q) below which a boundary warning fires.
const MIN_NQ_WARN: f64 = 10.0;

/// η_jl = 1/(v_j − v_l) · Π_{h∉{j,l}} (v_l − v_h)/(v_j − v_h):
/// the relative difference of v_j and v_l in the background of the set.
pub fn eta(values: &[f64], j: usize, l: usize) -> f64 {
    debug_assert!(j != l);
    let mut out = 1.0 / (values[j] - values[l]);
    for (h, &v) in values.iter().enumerate() {
        if h != j && h != l {
            out *= (values[l] - v) / (values[j] - v);
        }
    }
    out
}

/// max_{j≠l} |η_jl| over all ordered pairs.
pub fn max_abs_eta(values: &[f64]) -> f64 {
    let k = values.len();
    let mut best = 0.0f64;
    for j in 0..k {
        for l in 0..k {
            if j != l {
                best = best.max(eta(values, j, l).abs());
            }
        }
    }
    best
}

/// τ² = n · Σ_h Σ_{j∈C_h} (v_j − ν̄_h)² with ν̄_h the within-cluster mean;
/// the within-cluster spread that noncentralizes the null law.
pub fn tau_squared(reference: &[f64], partition: &Partition, n: f64) -> f64 {
    let mut total = 0.0;
    for cluster in partition.clusters() {
        let mean: f64 = cluster.iter().map(|&j| reference[j]).sum::<f64>() / cluster.len() as f64;
        total += cluster
            .iter()
            .map(|&j| (reference[j] - mean).powi(2))
            .sum::<f64>();
    }
    n * total
}

/// Noncentrality split for the categorical local alternative:
/// δ₁² = 4n Σ (1−p_l)(√p_l − √q_{π(l)})², δ₂² = 4n Σ p_l(√p_l − √q_{π(l)})²
/// with π the optimal matching of √p onto √q.
pub fn noncentrality_split(p: &[f64], q: &[f64], n: f64) -> Result<(f64, f64)> {
    let matching = cat_distance(p, q)?;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (l, &pl) in p.iter().enumerate() {
        let gap = pl.sqrt() - q[matching.permutation[l]].sqrt();
        d1 += (1.0 - pl) * gap * gap;
        d2 += pl * gap * gap;
    }
    Ok((4.0 * n * d1, 4.0 * n * d2))
}

/// Populate the diagnostics block for a one-sample null. For categorical
/// nulls an observed sample adds the noncentrality split of p̂ against q.
pub fn condition_diagnostics(
    null: &NullHypothesis,
    sample: Option<&CategoricalSample>,
    n: f64,
) -> ConditionDiagnostics {
    let sqrt_n = n.max(1.0).sqrt();
    let mut diag = ConditionDiagnostics::default();
    let partition = null.partition();
    let d = partition.d();
    let k = null.k();

    match null.kind() {
        NullKind::GaussianMean => {
            if d == k {
                diag.eta_max = Some(max_abs_eta(null.reference()) / sqrt_n);
            }
            if d >= 2 && d < k {
                diag.eta_bar_max = Some(max_abs_eta(partition.centers()) / sqrt_n);
            }
            diag.tau_sq = Some(tau_squared(null.reference(), partition, n));
        }
        NullKind::Categorical => {
            let sqrt_q: Vec<f64> = null.reference().iter().map(|v| v.sqrt()).collect();
            if d == k {
                diag.zeta_max = Some(max_abs_eta(&sqrt_q) / sqrt_n);
            }
            if d >= 2 && d < k {
                let sqrt_r: Vec<f64> = partition.centers().iter().map(|v| v.sqrt()).collect();
                diag.zeta_bar_max = Some(max_abs_eta(&sqrt_r) / sqrt_n);
            }
            diag.min_nq = Some(
                null.reference()
                    .iter()
                    .map(|&q| n * q * (1.0 - q))
                    .fold(f64::INFINITY, f64::min),
            );
            if let Some(s) = sample {
                if let Ok((d1, d2)) = noncentrality_split(&s.p_hat(), null.reference(), n) {
                    diag.delta1_sq = Some(d1);
                    diag.delta2_sq = Some(d2);
                }
            }
        }
    }

    let scaled_condition = diag
        .eta_max
        .or(diag.eta_bar_max)
        .or(diag.zeta_max)
        .or(diag.zeta_bar_max);
    if let Some(v) = scaled_condition {
        if v > ETA_WARN {
            diag.warnings.push(format!(
                "near-degenerate reference: scaled condition quantity {v:.3} exceeds {ETA_WARN}"
            ));
        }
    }
    if let Some(v) = diag.min_nq {
        if v < MIN_NQ_WARN {
            diag.warnings.push(format!(
                "cell probability near boundary: min n*q*(1-q) = {v:.2} is below {MIN_NQ_WARN}"
            ));
        }
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::partition::detect_null_partition;

    #[test]
    fn eta_worked_example() {
        // v = (1,2,3), j=1, l=2 (1-based): 1/(1−2) · (2−3)/(1−3) = −0.5
        let v = [1.0, 2.0, 3.0];
        assert!((eta(&v, 0, 1) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau_squared_zero_for_exact_clusters() {
        let mu = [1.0, 3.0, 3.0, 3.0, 5.0, 5.0];
        let part = detect_null_partition(&mu);
        assert_eq!(tau_squared(&mu, &part, 200.0), 0.0);
    }

    #[test]
    fn tau_squared_positive_for_spread_clusters() {
        let mu = [1.0, 1.1, 3.0];
        let part = Partition::new(vec![vec![0, 1], vec![2]], vec![1.05, 3.0]).unwrap();
        let got = tau_squared(&mu, &part, 100.0);
        // Within-cluster spread: (1−1.05)² + (1.1−1.05)² = 0.005
        assert!((got - 0.5).abs() < 1e-12);
    }

    #[test]
    fn split_vanishes_when_p_equals_q() {
        let q = [0.1, 0.2, 0.3, 0.4];
        let (d1, d2) = noncentrality_split(&q, &q, 500.0).unwrap();
        assert_eq!(d1, 0.0);
        assert_eq!(d2, 0.0);
    }

    #[test]
    fn split_sums_to_total_noncentrality() {
        let p = [0.12, 0.18, 0.31, 0.39];
        let q = [0.1, 0.2, 0.3, 0.4];
        let n = 800.0;
        let (d1, d2) = noncentrality_split(&p, &q, n).unwrap();
        let matching = cat_distance(&p, &q).unwrap();
        let total = 4.0
            * n
            * p.iter()
                .enumerate()
                .map(|(l, &pl)| (pl.sqrt() - q[matching.permutation[l]].sqrt()).powi(2))
                .sum::<f64>();
        assert!((d1 + d2 - total).abs() < 1e-10 * total.max(1.0));
    }

    #[test]
    fn boundary_warning_fires() {
        let null = NullHypothesis::categorical(&[0.001, 0.4, 0.599]).unwrap();
        let diag = condition_diagnostics(&null, None, 100.0);
        assert!(diag.min_nq.unwrap() < 10.0);
        assert!(diag.warnings.iter().any(|w| w.contains("boundary")));
    }
}
