//! Homodyne sampling, Gaussian conditioning and the uncertainty and
//! entanglement criteria evaluated on states or on sampled records.

pub mod criteria;
pub mod sampling;
pub mod stats;

pub use criteria::{
    CriterionReport, DEGENERATE_VARIANCE, Direction, ModePair, conditional_state,
    duan_combination_variances, duan_product, duan_product_sampled, heisenberg_product,
    inferred_variance, prediction_residuals, regression_coefficient, reid_epr_product,
};
pub use sampling::{CHUNK_SIZE, Provenance, SamplingPlan, ShotBatch, derive_seed, sample_shots};
pub use stats::Estimate;
