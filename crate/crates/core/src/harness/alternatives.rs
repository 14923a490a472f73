//! Construction of local alternatives at an exact permutation-distance from
//! a reference vector, in a seeded random direction. Every output is
//! verified against the metrics module before use.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::metrics::{cat_distance, gauss_distance};
use crate::testing::NullKind;

/// Absolute tolerance on the achieved distance.
pub const DISTANCE_TOL: f64 = 1e-9;

/// Direction attempts before declaring the target infeasible.
const MAX_ATTEMPTS: usize = 64;

/// Seeded wrapper over the rng-driven constructors.
pub fn alternative_at_distance(
    reference: &[f64],
    target: f64,
    direction_seed: u64,
    kind: NullKind,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(direction_seed);
    match kind {
        NullKind::GaussianMean => gaussian_alternative(reference, target, &mut rng),
        NullKind::Categorical => categorical_alternative(reference, target, &mut rng),
    }
}

/// θ with ℓ(θ, μ) = target, built as μ + s·u for a random unit direction u
/// and s solved by bisection (the matched distance never exceeds s, so a
/// bracket always exists).
pub fn gaussian_alternative<R: Rng + ?Sized>(
    reference: &[f64],
    target: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if target < 0.0 {
        return Err(Error::InvalidArgument(
            "distance must be nonnegative".into(),
        ));
    }
    if target == 0.0 {
        return Ok(reference.to_vec());
    }
    let k = reference.len();
    let u = random_unit_vector(k, rng);
    let candidate = |s: f64| -> Vec<f64> {
        reference
            .iter()
            .zip(&u)
            .map(|(&mu, &uj)| mu + s * uj)
            .collect()
    };
    let dist = |s: f64| -> f64 {
        gauss_distance(&candidate(s), reference)
            .expect("equal lengths by construction")
            .distance
    };
    let mut s_hi = target;
    let mut grow = 0;
    while dist(s_hi) < target {
        s_hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::InfeasibleDistance { target });
        }
    }
    let mut lo = 0.0;
    let mut hi = s_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let out = candidate(0.5 * (lo + hi));
    let achieved = gauss_distance(&out, reference)?.distance;
    if (achieved - target).abs() > DISTANCE_TOL {
        return Err(Error::InfeasibleDistance { target });
    }
    Ok(out)
}

/// p with ℓ(p, q) = target on the probability simplex. The point moves along
/// a great circle of the √-sphere, √p(s) = cos(s)·√q + sin(s)·w with w a
/// random tangent direction; squaring the coordinates keeps Σp = 1 exactly
/// for every s, so only the distance equation needs solving.
pub fn categorical_alternative<R: Rng + ?Sized>(
    reference: &[f64],
    target: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if target < 0.0 {
        return Err(Error::InvalidArgument(
            "distance must be nonnegative".into(),
        ));
    }
    if target == 0.0 {
        return Ok(reference.to_vec());
    }
    let k = reference.len();
    let mut v: Vec<f64> = reference.iter().map(|&q| q.max(0.0).sqrt()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    for _ in 0..MAX_ATTEMPTS {
        let z = random_unit_vector(k, rng);
        let dot: f64 = z.iter().zip(&v).map(|(a, b)| a * b).sum();
        let mut w: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a - dot * b).collect();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn < 1e-9 {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= wn);

        let candidate = |s: f64| -> Vec<f64> {
            let (c, sn) = (s.cos(), s.sin());
            v.iter()
                .zip(&w)
                .map(|(&vj, &wj)| {
                    let sp = c * vj + sn * wj;
                    sp * sp
                })
                .collect()
        };
        let dist = |s: f64| -> f64 {
            cat_distance(&candidate(s), reference)
                .expect("great-circle points stay on the simplex")
                .distance
        };
        // Chord geometry: ‖√p(s) − √q‖ = 2 sin(s/2), so start near the
        // unmatched solution and grow until the matched distance brackets.
        let mut s_hi = 2.0 * (target / 4.0).min(1.0).asin().max(1e-3);
        let mut grew = false;
        while dist(s_hi) < target {
            s_hi *= 1.3;
            if s_hi > std::f64::consts::PI {
                grew = true;
                break;
            }
        }
        if grew {
            continue; // this direction cannot reach the target
        }
        let mut lo = 0.0;
        let mut hi = s_hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dist(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let out = candidate(0.5 * (lo + hi));
        let achieved = cat_distance(&out, reference)?.distance;
        if (achieved - target).abs() <= DISTANCE_TOL {
            return Ok(out);
        }
    }
    Err(Error::InfeasibleDistance { target })
}

fn random_unit_vector<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return z.into_iter().map(|x| x / norm).collect();
        }
    }
}
