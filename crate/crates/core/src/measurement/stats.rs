//! Finite-sample estimators with delete-one jackknife standard errors.
//!
//! Leave-one-out variances and covariances are computed in closed form from
//! centered running sums, so each jackknife is a single O(n) pass.

use serde::{Deserialize, Serialize};

/// A value with an optional standard error (absent for analytic values or
/// when too few samples exist).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_err: None,
        }
    }

    pub fn sampled(value: f64, std_err: Option<f64>) -> Self {
        Self { value, std_err }
    }

    /// `|value − target| / std_err`, or `None` without an error bar.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        self.std_err.map(|se| {
            if se > 0.0 {
                (self.value - target).abs() / se
            } else if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    /// True when within `k` standard errors of `target`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target).is_some_and(|z| z <= k)
    }
}

pub fn mean(u: &[f64]) -> f64 {
    u.iter().sum::<f64>() / u.len() as f64
}

/// Unbiased (n − 1) sample variance. `NaN` for fewer than two samples.
pub fn sample_variance(u: &[f64]) -> f64 {
    sample_covariance(u, u)
}

pub fn sample_covariance(u: &[f64], w: &[f64]) -> f64 {
    assert_eq!(u.len(), w.len(), "paired samples must have equal length");
    let n = u.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mu, mw) = (mean(u), mean(w));
    u.iter()
        .zip(w)
        .map(|(a, b)| (a - mu) * (b - mw))
        .sum::<f64>()
        / (n - 1) as f64
}

/// Leave-one-out unbiased covariances of paired samples.
fn leave_one_out_covariances(u: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let n = u.len();
    if n < 3 {
        return None;
    }
    let (mu, mw) = (mean(u), mean(w));
    let du: Vec<f64> = u.iter().map(|a| a - mu).collect();
    let dw: Vec<f64> = w.iter().map(|b| b - mw).collect();
    let su: f64 = du.iter().sum();
    let sw: f64 = dw.iter().sum();
    let suw: f64 = du.iter().zip(&dw).map(|(a, b)| a * b).sum();
    let m = (n - 1) as f64;
    Some(
        du.iter()
            .zip(&dw)
            .map(|(a, b)| (suw - a * b - (su - a) * (sw - b) / m) / (m - 1.0))
            .collect(),
    )
}

/// Jackknife variance contribution `(n−1)/n · Σ (θᵢ − θ̄)²`.
fn jackknife_spread(replicates: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let nf = n as f64;
    let avg = replicates.clone().sum::<f64>() / nf;
    (nf - 1.0) / nf * replicates.map(|t| (t - avg) * (t - avg)).sum::<f64>()
}

/// Sample variance with jackknife standard error.
pub fn variance_estimate(u: &[f64]) -> Estimate {
    covariance_estimate(u, u)
}

/// Sample covariance with jackknife standard error.
pub fn covariance_estimate(u: &[f64], w: &[f64]) -> Estimate {
    let value = sample_covariance(u, w);
    let se = leave_one_out_covariances(u, w)
        .map(|loo| jackknife_spread(loo.iter().copied(), u.len()).sqrt());
    Estimate::sampled(value, se)
}

/// `f(Var(u), Var(w))` for samples `u`, `w` drawn from independent
/// ensembles. The jackknife variance is the sum of the per-ensemble
/// delete-one spreads, holding the other ensemble fixed.
pub fn independent_variance_function<F>(u: &[f64], w: &[f64], f: F) -> Estimate
where
    F: Fn(f64, f64) -> f64,
{
    let (vu, vw) = (sample_variance(u), sample_variance(w));
    let value = f(vu, vw);
    let se = match (
        leave_one_out_covariances(u, u),
        leave_one_out_covariances(w, w),
    ) {
        (Some(lu), Some(lw)) => {
            let su = jackknife_spread(lu.iter().map(|&v| f(v, vw)), u.len());
            let sw = jackknife_spread(lw.iter().map(|&v| f(vu, v)), w.len());
            Some((su + sw).sqrt())
        }
        _ => None,
    };
    Estimate::sampled(value, se)
}

/// `ΔU·ΔW` (product of sample standard deviations) from independent ensembles.
pub fn std_product(u: &[f64], w: &[f64]) -> Estimate {
    independent_variance_function(u, w, |a, b| (a * b).sqrt())
}

/// `Var(U)·Var(W)` from independent ensembles.
pub fn variance_product(u: &[f64], w: &[f64]) -> Estimate {
    independent_variance_function(u, w, |a, b| a * b)
}
