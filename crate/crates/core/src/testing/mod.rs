//! Test statistics and decision rules: one-sample Gaussian and categorical
//! tests (with degenerate tied-value variants), the two-sample test with
//! data-driven clustering, and condition diagnostics.

pub mod diagnostics;
pub mod one_sample;
pub mod partition;
pub mod two_sample;

pub use diagnostics::{condition_diagnostics, eta, noncentrality_split, tau_squared};
pub use one_sample::{
    cat_test, cat_test_auto, cat_test_degenerate, cat_test_flat, g_envelope, gauss_test,
    gauss_test_auto, gauss_test_degenerate, CategoricalSample, GaussianSample, NullHypothesis,
    NullKind,
};
pub use partition::{cluster_empirical, detect_null_partition, Partition};
pub use two_sample::{two_sample_draw, two_sample_test, TwoSampleDraw};
