//! Gaussian conditioning and the uncertainty / entanglement criteria.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeQuadrature, Quadrature, SignConvention};
use crate::measurement::sampling::ShotBatch;
use crate::measurement::stats::{self, Estimate};

/// Witness variances below this are treated as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

fn check_witness(variance: f64) -> Result<()> {
    if variance < DEGENERATE_VARIANCE {
        return Err(Error::DegenerateConditioning {
            variance,
            threshold: DEGENERATE_VARIANCE,
        });
    }
    Ok(())
}

/// The two parties of a bipartite test, `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModePair {
    pub a: usize,
    pub b: usize,
}

impl ModePair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "mode pair needs distinct modes, got ({a}, {a})"
            )));
        }
        Ok(Self { a, b })
    }

    fn check(&self, s: &GaussianState) -> Result<()> {
        if self.a == self.b {
            return Err(Error::InvalidArgument(
                "mode pair needs distinct modes".into(),
            ));
        }
        s.check_mode(self.a)?;
        s.check_mode(self.b)
    }
}

impl Default for ModePair {
    fn default() -> Self {
        Self { a: 0, b: 1 }
    }
}

/// Which party is predicted from which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Infer `B` from measurements on `A`.
    AToB,
    /// Infer `A` from measurements on `B`.
    BToA,
}

/// Post-measurement state after reading `quadrature` of `mode` as `value`.
///
/// The measured mode is removed. The remaining moments follow from the Schur
/// complement of the measured quadrature:
/// `μ' = μ_r + Σ_rm (value − μ_m) / Σ_mm`, `Σ' = Σ_rr − Σ_rm Σ_mr / Σ_mm`.
pub fn conditional_state(
    s: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
    value: f64,
) -> Result<GaussianState> {
    s.check_mode(mode)?;
    if s.n_modes() < 2 {
        return Err(Error::InvalidArgument(
            "conditioning a single-mode state leaves nothing behind".into(),
        ));
    }
    let m = ModeQuadrature::new(mode, quadrature).index();
    let var_m = s.cov()[(m, m)];
    check_witness(var_m)?;
    let keep: Vec<usize> = (0..2 * s.n_modes()).filter(|&i| i / 2 != mode).collect();
    let shift = value - s.mean()[m];
    let mean = DVector::from_iterator(
        keep.len(),
        keep.iter()
            .map(|&i| s.mean()[i] + s.cov()[(i, m)] * shift / var_m),
    );
    let cov = DMatrix::from_fn(keep.len(), keep.len(), |r, c| {
        let (i, j) = (keep[r], keep[c]);
        s.cov()[(i, j)] - s.cov()[(i, m)] * s.cov()[(m, j)] / var_m
    });
    Ok(GaussianState::from_trusted(mean, cov))
}

/// `Cov(target, witness) / Var(witness)`: the slope of the conditional mean.
pub fn regression_coefficient(
    s: &GaussianState,
    target: ModeQuadrature,
    witness: ModeQuadrature,
) -> Result<f64> {
    let vw = s.variance(witness)?;
    check_witness(vw)?;
    Ok(s.covariance(target, witness)? / vw)
}

/// `Var(target | witness) = Var(t) − Cov(t, w)² / Var(w)`.
pub fn inferred_variance(
    s: &GaussianState,
    target: ModeQuadrature,
    witness: ModeQuadrature,
) -> Result<f64> {
    if target.mode == witness.mode {
        return Err(Error::InvalidArgument(format!(
            "target {target} and witness {witness} share a mode"
        )));
    }
    let vw = s.variance(witness)?;
    check_witness(vw)?;
    let c = s.covariance(target, witness)?;
    Ok(s.variance(target)? - c * c / vw)
}

/// `ΔX·ΔY` of one mode.
pub fn heisenberg_product(s: &GaussianState, mode: usize) -> Result<f64> {
    let vx = s.variance(ModeQuadrature::x(mode))?;
    let vy = s.variance(ModeQuadrature::y(mode))?;
    Ok((vx * vy).sqrt())
}

/// Variances of the two signed combinations entering the inseparability
/// product, `(Var(X_A ± X_B), Var(Y_A ∓ Y_B))`.
pub fn duan_combination_variances(
    s: &GaussianState,
    pair: ModePair,
    convention: SignConvention,
) -> Result<(f64, f64)> {
    pair.check(s)?;
    let (sx, sy) = convention.combination_signs();
    let vx = s.combination_variance(&[
        (ModeQuadrature::x(pair.a), 1.0),
        (ModeQuadrature::x(pair.b), sx),
    ])?;
    let vy = s.combination_variance(&[
        (ModeQuadrature::y(pair.a), 1.0),
        (ModeQuadrature::y(pair.b), sy),
    ])?;
    Ok((vx, vy))
}

/// Product of standard deviations of the signed sum/difference quadratures.
/// Values below 1 certify entanglement.
pub fn duan_product(s: &GaussianState, pair: ModePair, convention: SignConvention) -> Result<f64> {
    let (vx, vy) = duan_combination_variances(s, pair, convention)?;
    Ok((vx * vy).sqrt())
}

fn inference_terms(pair: ModePair, direction: Direction) -> (usize, usize) {
    match direction {
        Direction::AToB => (pair.b, pair.a),
        Direction::BToA => (pair.a, pair.b),
    }
}

/// Product of conditional variances `Var(X_t|X_w)·Var(Y_t|Y_w)` for the
/// chosen inference direction. Below 1 means one party's outcomes are
/// predicted better than the vacuum bound allows.
pub fn reid_epr_product(s: &GaussianState, pair: ModePair, direction: Direction) -> Result<f64> {
    pair.check(s)?;
    let (t, w) = inference_terms(pair, direction);
    let vx = inferred_variance(s, ModeQuadrature::x(t), ModeQuadrature::x(w))?;
    let vy = inferred_variance(s, ModeQuadrature::y(t), ModeQuadrature::y(w))?;
    Ok(vx * vy)
}

/// Check that `bx` read `X` and `by` read `Y` on the same ordered pair from
/// the same state, as two distinct ensembles. Returns the pair.
fn check_ensembles(bx: &ShotBatch, by: &ShotBatch) -> Result<ModePair> {
    if bx.provenance().state_hash != by.provenance().state_hash {
        return Err(Error::ProvenanceMismatch(format!(
            "batches come from different states ({} vs {})",
            bx.provenance().state_hash,
            by.provenance().state_hash
        )));
    }
    if bx.plan() == by.plan() {
        return Err(Error::InvalidPlan(
            "the X and Y records must come from two different plans".into(),
        ));
    }
    if bx.plan().seed() == by.plan().seed() {
        return Err(Error::InvalidPlan(
            "the X and Y ensembles share a seed and are not independent".into(),
        ));
    }
    let (sx, sy) = (bx.plan().selections(), by.plan().selections());
    let pair_ok = sx.len() == 2
        && sy.len() == 2
        && sx.iter().all(|q| q.quadrature == Quadrature::X)
        && sy.iter().all(|q| q.quadrature == Quadrature::Y)
        && sx[0].mode == sy[0].mode
        && sx[1].mode == sy[1].mode;
    if !pair_ok {
        return Err(Error::InvalidPlan(format!(
            "expected plans {{X_A, X_B}} and {{Y_A, Y_B}} on one mode pair, got {:?} and {:?}",
            bx.labels(),
            by.labels()
        )));
    }
    ModePair::new(sx[0].mode, sx[1].mode)
}

fn signed_sum(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + sign * y).collect()
}

/// Plug-in inseparability product from an `{X_A, X_B}` ensemble and an
/// independent `{Y_A, Y_B}` ensemble, with jackknife standard error.
pub fn duan_product_sampled(
    bx: &ShotBatch,
    by: &ShotBatch,
    convention: SignConvention,
) -> Result<Estimate> {
    check_ensembles(bx, by)?;
    let (sx, sy) = convention.combination_signs();
    let u = signed_sum(&bx.column(0), &bx.column(1), sx);
    let w = signed_sum(&by.column(0), &by.column(1), sy);
    Ok(stats::std_product(&u, &w))
}

/// Every criterion for one mode pair, analytic or sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub pair: ModePair,
    pub convention: SignConvention,
    /// `ΔX·ΔY` of mode A then mode B.
    pub heisenberg: [Estimate; 2],
    pub duan: Estimate,
    pub reid_a_to_b: Estimate,
    pub reid_b_to_a: Estimate,
    /// `duan < 1`.
    pub duan_violated: bool,
    /// Either inference direction below 1.
    pub reid_violated: bool,
}

impl CriterionReport {
    fn assemble(
        pair: ModePair,
        convention: SignConvention,
        heisenberg: [Estimate; 2],
        duan: Estimate,
        reid_a_to_b: Estimate,
        reid_b_to_a: Estimate,
    ) -> Self {
        Self {
            pair,
            convention,
            heisenberg,
            duan_violated: duan.value < 1.0,
            reid_violated: reid_a_to_b.value < 1.0 || reid_b_to_a.value < 1.0,
            duan,
            reid_a_to_b,
            reid_b_to_a,
        }
    }

    pub fn analytic(s: &GaussianState, pair: ModePair, convention: SignConvention) -> Result<Self> {
        pair.check(s)?;
        Ok(Self::assemble(
            pair,
            convention,
            [
                Estimate::exact(heisenberg_product(s, pair.a)?),
                Estimate::exact(heisenberg_product(s, pair.b)?),
            ],
            Estimate::exact(duan_product(s, pair, convention)?),
            Estimate::exact(reid_epr_product(s, pair, Direction::AToB)?),
            Estimate::exact(reid_epr_product(s, pair, Direction::BToA)?),
        ))
    }

    /// Estimates from two disjoint ensembles of `state`. Inference residuals
    /// use the regression coefficients of `state`, not a refit.
    pub fn sampled(
        state: &GaussianState,
        bx: &ShotBatch,
        by: &ShotBatch,
        convention: SignConvention,
    ) -> Result<Self> {
        let pair = check_ensembles(bx, by)?;
        if bx.provenance().state_hash != state.fingerprint() {
            return Err(Error::ProvenanceMismatch(
                "batches were not sampled from the supplied state".into(),
            ));
        }
        let (xa, xb) = (bx.column(0), bx.column(1));
        let (ya, yb) = (by.column(0), by.column(1));

        let reid = |direction| -> Result<Estimate> {
            let (t, w) = inference_terms(pair, direction);
            let (xt, xw, yt, yw) = if t == pair.b {
                (&xb, &xa, &yb, &ya)
            } else {
                (&xa, &xb, &ya, &yb)
            };
            let gx = regression_coefficient(state, ModeQuadrature::x(t), ModeQuadrature::x(w))?;
            let gy = regression_coefficient(state, ModeQuadrature::y(t), ModeQuadrature::y(w))?;
            Ok(stats::variance_product(
                &signed_sum(xt, xw, -gx),
                &signed_sum(yt, yw, -gy),
            ))
        };

        Ok(Self::assemble(
            pair,
            convention,
            [stats::std_product(&xa, &ya), stats::std_product(&xb, &yb)],
            duan_product_sampled(bx, by, convention)?,
            reid(Direction::AToB)?,
            reid(Direction::BToA)?,
        ))
    }
}

/// Prediction residuals `target − (μ_t + g·(witness − μ_w))` with the
/// analytic regression slope `g`.
pub fn prediction_residuals(
    state: &GaussianState,
    target: ModeQuadrature,
    witness: ModeQuadrature,
    target_samples: &[f64],
    witness_samples: &[f64],
) -> Result<Vec<f64>> {
    let g = regression_coefficient(state, target, witness)?;
    let (mt, mw) = (state.mean()[target.index()], state.mean()[witness.index()]);
    Ok(target_samples
        .iter()
        .zip(witness_samples)
        .map(|(t, w)| t - (mt + g * (w - mw)))
        .collect())
}
