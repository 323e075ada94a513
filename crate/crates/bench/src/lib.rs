//! Benchmark fixtures shared by the criterion suites in `benches/`.

use epr_core::experiments::epr_state;
use epr_core::{BeamSplitterParams, GaussianState, SignConvention, SqueezeParams, SymplecticOp};

/// The balanced-splitter output of two inputs squeezed by `r`.
pub fn epr_fixture(r: f64) -> GaussianState {
    epr_state(r, r, SignConvention::default()).expect("r within the squeeze cap")
}

/// `n` modes of alternating amplitude and phase squeezing.
pub fn product_fixture(n: usize, r: f64) -> GaussianState {
    (0..n)
        .map(|k| {
            let p = if k % 2 == 0 {
                SqueezeParams::amplitude(r)
            } else {
                SqueezeParams::phase(r)
            };
            GaussianState::squeezed(p.expect("valid squeeze"))
        })
        .reduce(|a, b| a.tensor(&b))
        .expect("at least one mode")
}

/// A chain of splitters coupling neighbouring modes.
pub fn splitter_chain(n: usize) -> Vec<SymplecticOp> {
    (0..n.saturating_sub(1))
        .map(|i| {
            SymplecticOp::beam_splitter(i, i + 1, BeamSplitterParams::default())
                .expect("distinct modes")
        })
        .collect()
}
