//! Monte-Carlo homodyne sampling.
//!
//! Shots are generated in fixed-size chunks. Chunk `k` draws from a ChaCha8
//! stream seeded by the plan seed with stream id `k`, so the output depends
//! only on `(state, plan)` and never on the thread count.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeQuadrature, Quadrature};

/// Shots per RNG substream.
pub const CHUNK_SIZE: usize = 65_536;

/// Which quadrature to read on each measured mode, how many shots, and the
/// master seed.
///
/// A mode appears at most once: `X` and `Y` of the same mode are alternative
/// measurements and are never read in the same shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    selections: Vec<ModeQuadrature>,
    shots: usize,
    seed: u64,
}

impl SamplingPlan {
    pub fn new(selections: Vec<ModeQuadrature>, shots: usize, seed: u64) -> Result<Self> {
        if selections.is_empty() {
            return Err(Error::InvalidPlan("no quadratures selected".into()));
        }
        if shots == 0 {
            return Err(Error::InvalidPlan("shot count must be at least 1".into()));
        }
        for (k, sel) in selections.iter().enumerate() {
            if let Some(prev) = selections[..k].iter().find(|p| p.mode == sel.mode) {
                return Err(Error::InvalidPlan(format!(
                    "mode {} selected twice ({prev} and {sel}); X and Y of one mode cannot be read jointly",
                    sel.mode
                )));
            }
        }
        Ok(Self {
            selections,
            shots,
            seed,
        })
    }

    /// Read the same quadrature on every listed mode.
    pub fn uniform(
        modes: &[usize],
        quadrature: Quadrature,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            modes
                .iter()
                .map(|&m| ModeQuadrature::new(m, quadrature))
                .collect(),
            shots,
            seed,
        )
    }

    pub fn selections(&self) -> &[ModeQuadrature] {
        &self.selections
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Where a batch came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub state_hash: String,
    pub seed: u64,
    pub chunk_size: usize,
}

/// `shots × k` homodyne outcomes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotBatch {
    plan: SamplingPlan,
    samples: Vec<f64>,
    provenance: Provenance,
}

impl ShotBatch {
    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn shots(&self) -> usize {
        self.plan.shots
    }

    pub fn width(&self) -> usize {
        self.plan.selections.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.width();
        &self.samples[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.width())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Column holding `q`, if the plan measured it.
    pub fn column_of(&self, q: ModeQuadrature) -> Option<Vec<f64>> {
        self.plan
            .selections
            .iter()
            .position(|&s| s == q)
            .map(|j| self.column(j))
    }

    /// Column labels in `mode:quad` form.
    pub fn labels(&self) -> Vec<String> {
        self.plan.selections.iter().map(|s| s.to_string()).collect()
    }
}

/// Draw `plan.shots()` independent homodyne records from `state`.
///
/// Each row is `μ + L·z` with `L` the Cholesky factor of the selected
/// covariance block and `z` standard normal. Physicality of `state` is
/// guaranteed by [`GaussianState`]'s constructors.
pub fn sample_shots(state: &GaussianState, plan: &SamplingPlan) -> Result<ShotBatch> {
    for sel in &plan.selections {
        if sel.mode >= state.n_modes() {
            return Err(Error::InvalidPlan(format!(
                "mode {} not present in a {}-mode state",
                sel.mode,
                state.n_modes()
            )));
        }
    }
    let idx: Vec<usize> = plan.selections.iter().map(|s| s.index()).collect();
    let k = idx.len();
    let mu = DVector::from_iterator(k, idx.iter().map(|&i| state.mean()[i]));
    let block = DMatrix::from_fn(k, k, |r, c| state.cov()[(idx[r], idx[c])]);
    let chol = block.cholesky().ok_or_else(|| {
        Error::InvalidState("selected covariance block is not positive definite".into())
    })?;
    let lower = chol.l();

    let n = plan.shots;
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let rows = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(c as u64);
            let mut out = Vec::with_capacity(rows * k);
            let mut z = vec![0.0; k];
            for _ in 0..rows {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for r in 0..k {
                    let mut v = mu[r];
                    for (c, zc) in z.iter().enumerate().take(r + 1) {
                        v += lower[(r, c)] * zc;
                    }
                    out.push(v);
                }
            }
            out
        })
        .collect();

    Ok(ShotBatch {
        plan: plan.clone(),
        samples: chunks.concat(),
        provenance: Provenance {
            state_hash: state.fingerprint(),
            seed: plan.seed,
            chunk_size: CHUNK_SIZE,
        },
    })
}

/// Decorrelate a master seed into a labelled child seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut z = master ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
