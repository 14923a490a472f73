//! Permutation-minimized distances between real vectors and between
//! probability vectors, with the optimal matching recovered explicitly.

use crate::error::{Error, Result};

/// Tolerance on Σp_j = 1 for probability-vector inputs.
const SIMPLEX_TOL: f64 = 1e-8;

/// An optimal matching: `permutation[j]` is the index in the second vector
/// paired with entry j of the first, and `distance` is the minimum over all
/// k! pairings.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub permutation: Vec<usize>,
    pub distance: f64,
}

/// ℓ(θ, μ) = min over permutations of √Σ (θ_j − μ_{π(j)})².
///
/// For scalar values under squared-difference cost the sorted pairing is
/// optimal, so both vectors are sorted and matched in order; the permutation
/// is recovered through the two sort orders. O(k log k).
pub fn gauss_distance(theta: &[f64], mu: &[f64]) -> Result<Matching> {
    if theta.len() != mu.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: mu.len(),
        });
    }
    Ok(sorted_matching(theta, mu, 1.0))
}

/// ℓ(p, q) = min over permutations of 2√Σ (√p_j − √q_{π(j)})².
pub fn cat_distance(p: &[f64], q: &[f64]) -> Result<Matching> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    validate_probability_vector(p)?;
    validate_probability_vector(q)?;
    let sp: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
    let sq: Vec<f64> = q.iter().map(|v| v.sqrt()).collect();
    Ok(sorted_matching(&sp, &sq, 2.0))
}

pub(crate) fn validate_probability_vector(p: &[f64]) -> Result<()> {
    if p.iter()
        .any(|&v| !(0.0..=1.0).contains(&v) || !v.is_finite())
    {
        return Err(Error::NotAProbabilityVector(
            "entries must lie in [0, 1]".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotAProbabilityVector(format!(
            "entries sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn sorted_matching(a: &[f64], b: &[f64], scale: f64) -> Matching {
    let k = a.len();
    let mut order_a: Vec<usize> = (0..k).collect();
    let mut order_b: Vec<usize> = (0..k).collect();
    // Stable sorts: ties resolve by original index, so any tie-optimal
    // permutation is acceptable and the distance value is unique.
    order_a.sort_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap());
    order_b.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap());
    let mut permutation = vec![0usize; k];
    let mut sq_sum = 0.0;
    for r in 0..k {
        let ia = order_a[r];
        let ib = order_b[r];
        permutation[ia] = ib;
        let diff = a[ia] - b[ib];
        sq_sum += diff * diff;
    }
    Matching {
        permutation,
        distance: scale * sq_sum.sqrt(),
    }
}
