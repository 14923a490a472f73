//! Test reports and their JSON document form. The emitted JSON round-trips
//! losslessly; the schema ships in `docs/report-schema.json`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The asymptotic null law a report's thresholds and p-values refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NullSpec {
    /// Single statistic T against a central χ²_df.
    CentralChi2 { df: usize },
    /// Statistic pair (T_f, T_g) against central χ² laws with the given
    /// degrees of freedom; the decision is the OR of the two exceedances.
    Chi2Pair { df_f: usize, df_g: usize },
    /// Noncentral χ² null for ambiguous-cluster boundaries.
    NoncentralChi2 { df: usize, noncentrality: f64 },
    /// Two-sample mixture ½βχ²_{k−d} + ½(1−β)χ²_{k−d} + χ²_{d−1}.
    Mixture {
        k: usize,
        d: usize,
        beta: f64,
        /// Component degrees of freedom (k−d, k−d, d−1).
        components: (usize, usize, usize),
    },
}

/// Condition quantities of the local-alternative theory, reported as
/// diagnostics. None of these block a test; warnings flag near-degenerate or
/// near-boundary configurations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionDiagnostics {
    /// max_{j≠l} |η_jl| / √n over the reference means (Gaussian).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    /// max_{g≠h} |η̄_gh| / √n over the cluster centers (Gaussian, degenerate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_bar_max: Option<f64>,
    /// max_{j≠l} |ζ_jl| / √n over √q (categorical).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_max: Option<f64>,
    /// max_{g≠h} |ζ̄_gh| / √n over √r (categorical, degenerate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_bar_max: Option<f64>,
    /// min_j n·q_j(1−q_j), the variance-degeneracy margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_nq: Option<f64>,
    /// Within-cluster spread n·ΣΣ(μ_j − ν_h)² for the null's own partition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_sq: Option<f64>,
    /// Noncentrality carried by directions orthogonal to √p.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1_sq: Option<f64>,
    /// Noncentrality carried along √p.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2_sq: Option<f64>,
    pub warnings: Vec<String>,
}

/// Outcome of one test invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_kind: String,
    pub k: usize,
    pub d: usize,
    /// Fitted cluster counts of each sample (two-sample test only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_y: Option<usize>,
    /// Sample size (noise precision scale in the Gaussian case).
    pub n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub statistics: BTreeMap<String, f64>,
    pub dof: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub reject: bool,
    pub alpha: f64,
    pub null_spec: NullSpec,
    pub diagnostics: ConditionDiagnostics,
    /// Category labels carried through from the input file; decoration only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

pub(crate) fn crate_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_round_trips() {
        let mut statistics = BTreeMap::new();
        statistics.insert("T_f".to_string(), 1.25);
        statistics.insert("T_g".to_string(), 3.5);
        let mut dof = BTreeMap::new();
        dof.insert("T_f".to_string(), 3.0);
        dof.insert("T_g".to_string(), 6.0);
        let report = TestReport {
            test_kind: "gaussian_degenerate".into(),
            k: 6,
            d: 3,
            d_x: None,
            d_y: None,
            n: 200.0,
            m: None,
            statistics,
            dof,
            thresholds: BTreeMap::new(),
            p_values: BTreeMap::new(),
            reject: false,
            alpha: 0.05,
            null_spec: NullSpec::Chi2Pair { df_f: 3, df_g: 6 },
            diagnostics: ConditionDiagnostics {
                eta_bar_max: Some(0.01),
                tau_sq: Some(0.0),
                warnings: vec![],
                ..Default::default()
            },
            categories: None,
            seed: None,
            version: crate_version(),
        };
        let json = report.to_json();
        let parsed = TestReport::from_json(&json).unwrap();
        assert_eq!(parsed, report);
    }
}
