//! Minimax-optimal rejection thresholds against a local alternative at scale
//! δ: t* minimizing Type-1 plus (worst-case) Type-2 error, for the Gaussian
//! and categorical limiting laws, plus the noncentral-null threshold for
//! ambiguous-cluster boundaries.

use serde::{Deserialize, Serialize};

use crate::distributions::ChiSquared;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Gaussian,
    Categorical,
}

/// An optimized threshold with the total-error value it attains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub k: usize,
    pub delta: f64,
    pub kind: ThresholdKind,
    pub t_star: f64,
    pub total_error: f64,
}

/// Coarse-grid size over (0, hi] before golden-section refinement.
const GRID_POINTS: usize = 512;
/// Grid resolution of the inner sup over noncentrality splits.
const SPLIT_POINTS: usize = 201;
/// Golden-section interval width at which refinement stops.
const REFINE_TOL: f64 = 1e-6;

/// t* = argmin_t P(χ²_k > t) + P(χ²_{k,δ²} ≤ t).
pub fn optimal_threshold_gauss(k: usize, delta: f64) -> ThresholdSpec {
    debug_assert!(k >= 2 && delta > 0.0);
    let null = ChiSquared::central(k as u32);
    let alt = ChiSquared::noncentral(k as u32, delta * delta);
    let objective = |t: f64| (1.0 - null.cdf(t)) + alt.cdf(t);
    let (t_star, total_error) = minimize_on_grid(&objective, k as f64, delta);
    ThresholdSpec {
        k,
        delta,
        kind: ThresholdKind::Gaussian,
        t_star,
        total_error,
    }
}

/// t* = argmin_t P(χ²_{k−1} > t) + sup over δ₁² + δ₂² = δ² of
/// P(χ²_{k−1,δ₁²} + δ₂² ≤ t). The inner sup runs on a δ₁² grid over [0, δ²]
/// with ternary refinement around the best grid point.
pub fn optimal_threshold_cat(k: usize, delta: f64) -> ThresholdSpec {
    debug_assert!(k >= 2 && delta > 0.0);
    let df = (k - 1) as u32;
    let null = ChiSquared::central(df);
    let delta_sq = delta * delta;
    let objective = |t: f64| (1.0 - null.cdf(t)) + sup_over_splits(df, delta_sq, t);
    let (t_star, total_error) = minimize_on_grid(&objective, (k - 1) as f64, delta);
    ThresholdSpec {
        k,
        delta,
        kind: ThresholdKind::Categorical,
        t_star,
        total_error,
    }
}

/// sup_{δ₁² ∈ [0, δ²]} P(χ²_{df,δ₁²} ≤ t − (δ² − δ₁²)).
pub(crate) fn sup_over_splits(df: u32, delta_sq: f64, t: f64) -> f64 {
    let type2 = |d1_sq: f64| -> f64 {
        let d2_sq = delta_sq - d1_sq;
        ChiSquared::noncentral(df, d1_sq).cdf(t - d2_sq)
    };
    let step = delta_sq / (SPLIT_POINTS - 1) as f64;
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..SPLIT_POINTS {
        let v = type2(i as f64 * step);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    // Ternary refinement inside the neighboring grid cells.
    let mut lo = (best_idx.saturating_sub(1)) as f64 * step;
    let mut hi = ((best_idx + 1).min(SPLIT_POINTS - 1)) as f64 * step;
    for _ in 0..60 {
        if hi - lo < 1e-10 * (1.0 + delta_sq) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if type2(m1) < type2(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(type2(0.5 * (lo + hi)))
}

/// Minimize over t > 0: coarse grid over (0, mean + 12 sd], then
/// golden-section inside the bracket around the best grid point. The
/// objective is not assumed unimodal; the refined point must beat every
/// coarse-grid value.
fn minimize_on_grid(objective: &dyn Fn(f64) -> f64, df: f64, delta: f64) -> (f64, f64) {
    let delta_sq = delta * delta;
    let hi = df + delta_sq + 12.0 * (2.0 * df + 4.0 * delta_sq).sqrt();
    let step = hi / GRID_POINTS as f64;
    let mut best_idx = 1;
    let mut best = f64::INFINITY;
    for i in 1..=GRID_POINTS {
        let v = objective(i as f64 * step);
        if v < best {
            best = v;
            best_idx = i;
        }
    }
    let mut lo = (best_idx as f64 - 1.0).max(0.5) * step;
    let mut hi_t = (best_idx + 1).min(GRID_POINTS) as f64 * step;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi_t - phi * (hi_t - lo);
    let mut x2 = lo + phi * (hi_t - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    while hi_t - lo > REFINE_TOL {
        if f1 < f2 {
            hi_t = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi_t - phi * (hi_t - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi_t - lo);
            f2 = objective(x2);
        }
    }
    let t_refined = 0.5 * (lo + hi_t);
    let f_refined = objective(t_refined);
    if f_refined <= best {
        (t_refined, f_refined)
    } else {
        (best_idx as f64 * step, best)
    }
}

/// χ²_{k,τ²}(α): the α-level threshold when the null law is noncentral due
/// to an ambiguous clustering structure. Reduces to the central quantile at
/// τ² = 0.
pub fn noncentral_null_threshold(k: usize, tau_sq: f64, alpha: f64) -> f64 {
    debug_assert!(tau_sq >= 0.0);
    ChiSquared::noncentral(k as u32, tau_sq).critical_value(alpha)
}
