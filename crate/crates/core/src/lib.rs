//! Covariance-matrix simulation of continuous-variable EPR entanglement.
//!
//! Two squeezed beams, one squeezed in amplitude and one in phase, are
//! mixed on a balanced beam splitter. The outputs carry correlated amplitude
//! and anticorrelated phase quadratures (or the reverse, depending on the
//! [`SignConvention`]). The crate builds those states exactly, samples
//! homodyne records from them, and evaluates the uncertainty product, the
//! sum/difference inseparability product and the conditional-variance
//! inference product both analytically and from samples.
//!
//! A classical dice model with perfectly anticorrelated faces is included
//! for comparison.

pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod io;
pub mod measurement;

pub use error::{Error, Result};
pub use experiments::{
    DiceEnsemble, DiceReport, EprExperimentConfig, EprReport, EprRun, Histogram, SweepRow,
    epr_state, run_dice_experiment, run_epr_experiment, sweep_squeeze,
};
pub use gaussian::{
    BeamSplitterParams, GaussianState, ModeQuadrature, PhysicalityReport, Quadrature,
    SignConvention, SqueezeParams, SymplecticOp, symplectic_form, validate_physicality,
    validate_physicality_compensated,
};
pub use measurement::{
    CriterionReport, Direction, Estimate, ModePair, SamplingPlan, ShotBatch, conditional_state,
    duan_product, duan_product_sampled, heisenberg_product, inferred_variance, reid_epr_product,
    sample_shots,
};
