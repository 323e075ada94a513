use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-width histogram over `[−half_width, half_width)` with explicit
/// underflow and overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn from_samples(values: &[f64], bins: usize, half_width: f64) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "histogram half-width must be positive and finite, got {half_width}"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {bad}")));
        }
        let span = 2.0 * half_width;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| -half_width + span * i as f64 / bins as f64)
            .collect();
        let mut counts = vec![0u64; bins];
        let (mut underflow, mut overflow) = (0, 0);
        for &v in values {
            if v < -half_width {
                underflow += 1;
            } else if v >= half_width {
                overflow += 1;
            } else {
                let mut k = ((v + half_width) / span * bins as f64) as usize;
                k = k.min(bins - 1);
                // float rounding near an edge
                if v < edges[k] {
                    k -= 1;
                } else if v >= edges[k + 1] && k + 1 < bins {
                    k += 1;
                }
                counts[k] += 1;
            }
        }
        Ok(Self {
            edges,
            counts,
            underflow,
            overflow,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// `(lo, hi, count)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(e, &c)| (e[0], e[1], c))
    }
}
