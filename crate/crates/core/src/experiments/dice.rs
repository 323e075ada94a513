//! Classical dice: the top face is pseudo-random, the bottom face is its
//! 7-complement, so observing one face predicts the other exactly.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Significance level of the uniformity test.
pub const UNIFORMITY_ALPHA: f64 = 0.01;

/// Opposite faces of a standard die sum to seven.
pub fn opposite_face(face: u8) -> u8 {
    7 - face
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiceEnsemble {
    pub seed: u64,
    pub top: Vec<u8>,
    pub bottom: Vec<u8>,
}

impl DiceEnsemble {
    /// Throw `n_throws` dice from a seeded ChaCha8 generator.
    pub fn throw(n_throws: usize, seed: u64) -> Result<Self> {
        if n_throws == 0 {
            return Err(Error::InvalidArgument("need at least one throw".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top: Vec<u8> = (0..n_throws).map(|_| rng.random_range(1..=6u8)).collect();
        let bottom = top.iter().map(|&t| opposite_face(t)).collect();
        Ok(Self { seed, top, bottom })
    }

    pub fn n_throws(&self) -> usize {
        self.top.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiceReport {
    pub schema_version: String,
    pub n_throws: usize,
    pub seed: u64,
    /// Relative frequency of faces 1..=6.
    pub top_frequencies: [f64; 6],
    pub bottom_frequencies: [f64; 6],
    /// `joint_counts[top − 1][bottom − 1]`.
    pub joint_counts: [[u64; 6]; 6],
    pub constraint_violations: u64,
    pub prediction_accuracy: f64,
    pub top_entropy_bits: f64,
    pub bottom_entropy_bits: f64,
    /// Plug-in `H(bottom | top)`.
    pub conditional_entropy_bits: f64,
    pub chi_square: f64,
    pub chi_square_p_value: f64,
    pub uniform: bool,
}

fn entropy_bits(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum::<f64>()
        + 0.0 // normalizes -0.0
}

impl DiceReport {
    pub fn from_ensemble(ens: &DiceEnsemble) -> Self {
        let n = ens.n_throws();
        let mut joint = [[0u64; 6]; 6];
        let mut violations = 0;
        let mut correct = 0usize;
        for (&t, &b) in ens.top.iter().zip(&ens.bottom) {
            joint[usize::from(t - 1)][usize::from(b - 1)] += 1;
            if t + b != 7 {
                violations += 1;
            }
            if opposite_face(t) == b {
                correct += 1;
            }
        }
        let top_counts: Vec<u64> = joint.iter().map(|row| row.iter().sum()).collect();
        let bottom_counts: Vec<u64> = (0..6)
            .map(|j| joint.iter().map(|row| row[j]).sum())
            .collect();
        let freq = |counts: &[u64]| {
            let mut f = [0.0; 6];
            for (fi, &c) in f.iter_mut().zip(counts) {
                *fi = c as f64 / n as f64;
            }
            f
        };
        // H(B|T) = Σ_t p(t)·H(B | T = t)
        let conditional_entropy_bits = joint
            .iter()
            .zip(&top_counts)
            .filter(|&(_, &c)| c > 0)
            .map(|(row, &c)| c as f64 / n as f64 * entropy_bits(row))
            .sum();
        let expected = n as f64 / 6.0;
        let chi_square: f64 = top_counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let chi = ChiSquared::new(5.0).expect("5 degrees of freedom is valid");
        let chi_square_p_value = chi.sf(chi_square);
        Self {
            schema_version: super::epr::SCHEMA_VERSION.to_string(),
            n_throws: n,
            seed: ens.seed,
            top_frequencies: freq(&top_counts),
            bottom_frequencies: freq(&bottom_counts),
            joint_counts: joint,
            constraint_violations: violations,
            prediction_accuracy: correct as f64 / n as f64,
            top_entropy_bits: entropy_bits(&top_counts),
            bottom_entropy_bits: entropy_bits(&bottom_counts),
            conditional_entropy_bits,
            chi_square,
            chi_square_p_value,
            uniform: chi_square_p_value >= UNIFORMITY_ALPHA,
        }
    }
}

pub fn run_dice_experiment(n_throws: usize, seed: u64) -> Result<DiceReport> {
    Ok(DiceReport::from_ensemble(&DiceEnsemble::throw(
        n_throws, seed,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_mapping() {
        assert_eq!(opposite_face(6), 1);
        assert_eq!(opposite_face(1), 6);
        assert_eq!(opposite_face(5), 2);
    }

    #[test]
    fn zero_throws_rejected() {
        assert!(DiceEnsemble::throw(0, 1).is_err());
    }

    #[test]
    fn single_throw_report() {
        let rep = run_dice_experiment(1, 4).unwrap();
        assert_eq!(rep.n_throws, 1);
        assert_eq!(rep.prediction_accuracy, 1.0);
        assert_eq!(rep.conditional_entropy_bits, 0.0);
        assert_eq!(rep.top_entropy_bits, 0.0);
    }

    #[test]
    fn faces_in_range_and_constrained() {
        let ens = DiceEnsemble::throw(10_000, 9).unwrap();
        assert!(ens.top.iter().all(|f| (1..=6).contains(f)));
        assert!(ens.top.iter().zip(&ens.bottom).all(|(t, b)| t + b == 7));
    }

    #[test]
    fn entropy_of_uniform_counts() {
        assert!((entropy_bits(&[5; 6]) - 6f64.log2()).abs() < 1e-14);
        assert_eq!(entropy_bits(&[0, 7, 0]), 0.0);
    }

    #[test]
    fn chi_square_detects_bias() {
        let ens = DiceEnsemble {
            seed: 0,
            top: [vec![6u8; 400], vec![1u8; 100]].concat(),
            bottom: [vec![1u8; 400], vec![6u8; 100]].concat(),
        };
        let rep = DiceReport::from_ensemble(&ens);
        assert!(!rep.uniform);
        assert!(rep.chi_square_p_value < 1e-10);
    }
}
