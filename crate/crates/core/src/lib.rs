//! Permutation-invariant goodness-of-fit tests.
//!
//! Tests whether a categorical distribution equals a reference vector up to a
//! relabeling of its categories, and the Gaussian-mean analogue. The test
//! statistics are node sums of integrated Lagrange basis polynomials, which
//! are symmetric in the observations and therefore blind to the unknown
//! label permutation. Includes degenerate (tied-value) nulls, a two-sample
//! variant with data-driven clustering, minimax-optimal thresholds against
//! local alternatives, and a reproducible Monte Carlo study harness.
//!
//! ```
//! use permutest::testing::{cat_test_auto, CategoricalSample, NullHypothesis};
//!
//! // Counts permuted relative to the reference: the statistic is blind to it.
//! let null = NullHypothesis::categorical(&[0.1, 0.2, 0.3, 0.4])?;
//! let sample = CategoricalSample::new(vec![400, 300, 200, 100]);
//! let report = cat_test_auto(&sample, &null, 0.05)?;
//! assert!(!report.reject);
//! assert!(report.statistics["T"].abs() < 1e-10);
//! # Ok::<(), permutest::Error>(())
//! ```

pub mod distributions;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod polynomials;
pub mod report;
pub mod special;
pub mod testing;
pub mod thresholds;

pub use error::{Error, Result};
