//! End-to-end experiments: the squeezed-light EPR pipeline, squeeze sweeps
//! and the dice analogue.

pub mod dice;
pub mod epr;
pub mod histogram;

pub use dice::{DiceEnsemble, DiceReport, run_dice_experiment};
pub use epr::{
    EprExperimentConfig, EprReport, EprRun, MAX_SQUEEZE, SCHEMA_VERSION, SweepRow, epr_state,
    input_state, run_epr_experiment, sample_ensembles, sweep_squeeze,
};
pub use histogram::Histogram;
