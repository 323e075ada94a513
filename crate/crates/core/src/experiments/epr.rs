//! Two orthogonally squeezed beams mixed on a balanced beam splitter,
//! read out by homodyne detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::histogram::Histogram;
use crate::gaussian::{
    BeamSplitterParams, GaussianState, ModeQuadrature, SignConvention, SqueezeParams,
};
use crate::measurement::stats::{self, Estimate};
use crate::measurement::{
    CriterionReport, Direction, ModePair, SamplingPlan, ShotBatch, derive_seed, duan_product,
    heisenberg_product, inferred_variance, prediction_residuals, regression_coefficient,
    reid_epr_product, sample_shots,
};

/// Largest accepted squeeze factor.
pub const MAX_SQUEEZE: f64 = 10.0;

/// Sampled quantities further than this many standard errors from their
/// analytic value are flagged.
pub const DISCREPANCY_SIGMA: f64 = 4.0;

pub const SCHEMA_VERSION: &str = "1";

const X_ENSEMBLE: u64 = 1;
const Y_ENSEMBLE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EprExperimentConfig {
    /// Squeeze factor of the amplitude-squeezed input `a`.
    pub r_a: f64,
    /// Squeeze factor of the phase-squeezed input `b`.
    pub r_b: f64,
    /// Shots per ensemble; the X and Y ensembles each get this many.
    pub shots: usize,
    pub seed: u64,
    pub bins: usize,
    /// Histogram half-width; `None` picks `5·√(max marginal variance)`.
    pub half_width: Option<f64>,
    pub convention: SignConvention,
}

impl Default for EprExperimentConfig {
    fn default() -> Self {
        Self {
            r_a: 1.0,
            r_b: 1.0,
            shots: 100_000,
            seed: 0,
            bins: 100,
            half_width: None,
            convention: SignConvention::default(),
        }
    }
}

pub(crate) fn check_squeeze(name: &str, r: f64) -> Result<()> {
    if !r.is_finite() || !(0.0..=MAX_SQUEEZE).contains(&r) {
        return Err(Error::InvalidConfig(format!(
            "{name} = {r} is outside [0, {MAX_SQUEEZE}]"
        )));
    }
    Ok(())
}

impl EprExperimentConfig {
    pub fn symmetric(r: f64, shots: usize, seed: u64) -> Self {
        Self {
            r_a: r,
            r_b: r,
            shots,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_squeeze("r_a", self.r_a)?;
        check_squeeze("r_b", self.r_b)?;
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidConfig(format!(
                "bins = {} must be at least 2",
                self.bins
            )));
        }
        if let Some(h) = self.half_width
            && (!h.is_finite() || h <= 0.0)
        {
            return Err(Error::InvalidConfig(format!(
                "half_width = {h} must be positive"
            )));
        }
        Ok(())
    }
}

/// The two-mode output state for amplitude-squeezed `a` (factor `r_a`) and
/// phase-squeezed `b` (factor `r_b`) on a balanced splitter.
pub fn epr_state(r_a: f64, r_b: f64, convention: SignConvention) -> Result<GaussianState> {
    let a = GaussianState::squeezed(SqueezeParams::amplitude(r_a)?);
    let b = GaussianState::squeezed(SqueezeParams::phase(r_b)?);
    a.tensor(&b)
        .apply_beam_splitter(0, 1, BeamSplitterParams::balanced(convention))
}

/// Input product state before the splitter.
pub fn input_state(r_a: f64, r_b: f64) -> Result<GaussianState> {
    let a = GaussianState::squeezed(SqueezeParams::amplitude(r_a)?);
    let b = GaussianState::squeezed(SqueezeParams::phase(r_b)?);
    Ok(a.tensor(&b))
}

/// Analytic and sampled statistics of one output quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub quadrature: ModeQuadrature,
    pub analytic_variance: f64,
    /// `(Var_a + Var_b)/2` of the matching input quadratures.
    pub input_half_sum: f64,
    pub sampled_variance: Estimate,
    pub histogram: Histogram,
}

/// How well one party predicts the other for one quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub target: ModeQuadrature,
    pub witness: ModeQuadrature,
    pub coefficient: f64,
    pub analytic_variance: f64,
    pub sampled_variance: Estimate,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub analytic: f64,
    pub sampled: f64,
    pub std_err: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCovariance {
    pub a: ModeQuadrature,
    pub b: ModeQuadrature,
    pub analytic: f64,
    pub sampled: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EprReport {
    pub schema_version: String,
    pub config: EprExperimentConfig,
    pub state_hash: String,
    pub analytic: CriterionReport,
    pub sampled: CriterionReport,
    /// `X_A`, `Y_A`, `X_B`, `Y_B`.
    pub marginals: Vec<MarginalSummary>,
    pub cross_covariances: Vec<CrossCovariance>,
    /// Prediction of `X_B` from `X_A` and of `Y_B` from `Y_A`.
    pub residuals: Vec<ResidualSummary>,
    pub discrepancies: Vec<Discrepancy>,
    /// No discrepancy beyond [`DISCREPANCY_SIGMA`].
    pub consistent: bool,
}

/// Everything produced by one run, including the raw ensembles.
#[derive(Debug, Clone)]
pub struct EprRun {
    pub state: GaussianState,
    pub x_batch: ShotBatch,
    pub y_batch: ShotBatch,
    pub report: EprReport,
}

struct DiscrepancyLog(Vec<Discrepancy>);

impl DiscrepancyLog {
    fn check(&mut self, quantity: impl Into<String>, analytic: f64, sampled: Estimate) {
        let z = sampled.z_score(analytic);
        if z.is_none_or(|z| z > DISCREPANCY_SIGMA) {
            self.0.push(Discrepancy {
                quantity: quantity.into(),
                analytic,
                sampled: sampled.value,
                std_err: sampled.std_err,
                z,
            });
        }
    }
}

/// Draw the `{X_A, X_B}` and `{Y_A, Y_B}` ensembles for `state`.
pub fn sample_ensembles(
    state: &GaussianState,
    shots: usize,
    seed: u64,
) -> Result<(ShotBatch, ShotBatch)> {
    let pair = ModePair::default();
    let px = SamplingPlan::new(
        vec![ModeQuadrature::x(pair.a), ModeQuadrature::x(pair.b)],
        shots,
        derive_seed(seed, X_ENSEMBLE),
    )?;
    let py = SamplingPlan::new(
        vec![ModeQuadrature::y(pair.a), ModeQuadrature::y(pair.b)],
        shots,
        derive_seed(seed, Y_ENSEMBLE),
    )?;
    Ok((sample_shots(state, &px)?, sample_shots(state, &py)?))
}

impl EprRun {
    pub fn execute(cfg: &EprExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let pair = ModePair::default();
        let inputs = input_state(cfg.r_a, cfg.r_b)?;
        let state = epr_state(cfg.r_a, cfg.r_b, cfg.convention)?;
        let analytic = CriterionReport::analytic(&state, pair, cfg.convention)?;
        let (x_batch, y_batch) = sample_ensembles(&state, cfg.shots, cfg.seed)?;
        let sampled = CriterionReport::sampled(&state, &x_batch, &y_batch, cfg.convention)?;

        let mut log = DiscrepancyLog(Vec::new());
        log.check("duan", analytic.duan.value, sampled.duan);
        log.check(
            "heisenberg_a",
            analytic.heisenberg[0].value,
            sampled.heisenberg[0],
        );
        log.check(
            "heisenberg_b",
            analytic.heisenberg[1].value,
            sampled.heisenberg[1],
        );
        log.check(
            "reid_a_to_b",
            analytic.reid_a_to_b.value,
            sampled.reid_a_to_b,
        );
        log.check(
            "reid_b_to_a",
            analytic.reid_b_to_a.value,
            sampled.reid_b_to_a,
        );

        let quads = [
            (ModeQuadrature::x(pair.a), &x_batch, 0),
            (ModeQuadrature::y(pair.a), &y_batch, 0),
            (ModeQuadrature::x(pair.b), &x_batch, 1),
            (ModeQuadrature::y(pair.b), &y_batch, 1),
        ];
        let max_var = quads
            .iter()
            .map(|(q, _, _)| state.variance(*q))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let half_width = cfg.half_width.unwrap_or(5.0 * max_var.sqrt());

        let mut marginals = Vec::with_capacity(4);
        for (q, batch, col) in quads {
            let samples = batch.column(col);
            let analytic_variance = state.variance(q)?;
            let input_half_sum = 0.5
                * (inputs.variance(ModeQuadrature::new(0, q.quadrature))?
                    + inputs.variance(ModeQuadrature::new(1, q.quadrature))?);
            let sampled_variance = stats::variance_estimate(&samples);
            log.check(format!("var_{q}"), analytic_variance, sampled_variance);
            marginals.push(MarginalSummary {
                quadrature: q,
                analytic_variance,
                input_half_sum,
                sampled_variance,
                histogram: Histogram::from_samples(&samples, cfg.bins, half_width)?,
            });
        }

        let mut cross_covariances = Vec::with_capacity(2);
        let mut residuals = Vec::with_capacity(2);
        for batch in [&x_batch, &y_batch] {
            let (qa, qb) = (batch.plan().selections()[0], batch.plan().selections()[1]);
            let (sa, sb) = (batch.column(0), batch.column(1));
            let analytic_cov = state.covariance(qa, qb)?;
            let sampled_cov = stats::covariance_estimate(&sa, &sb);
            log.check(format!("cov_{qa}_{qb}"), analytic_cov, sampled_cov);
            cross_covariances.push(CrossCovariance {
                a: qa,
                b: qb,
                analytic: analytic_cov,
                sampled: sampled_cov,
            });

            let res = prediction_residuals(&state, qb, qa, &sb, &sa)?;
            let analytic_variance = inferred_variance(&state, qb, qa)?;
            let sampled_variance = stats::variance_estimate(&res);
            log.check(
                format!("residual_{qb}"),
                analytic_variance,
                sampled_variance,
            );
            let res_width = cfg.half_width.unwrap_or(5.0 * analytic_variance.sqrt());
            residuals.push(ResidualSummary {
                target: qb,
                witness: qa,
                coefficient: regression_coefficient(&state, qb, qa)?,
                analytic_variance,
                sampled_variance,
                histogram: Histogram::from_samples(&res, cfg.bins, res_width)?,
            });
        }

        let discrepancies = log.0;
        let report = EprReport {
            schema_version: SCHEMA_VERSION.to_string(),
            config: cfg.clone(),
            state_hash: state.fingerprint(),
            analytic,
            sampled,
            marginals,
            cross_covariances,
            residuals,
            consistent: discrepancies.is_empty(),
            discrepancies,
        };
        Ok(Self {
            state,
            x_batch,
            y_batch,
            report,
        })
    }
}

/// Run the full pipeline and keep only the report.
pub fn run_epr_experiment(cfg: &EprExperimentConfig) -> Result<EprReport> {
    EprRun::execute(cfg).map(|run| run.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub duan_analytic: f64,
    pub duan_sampled: f64,
    pub duan_se: Option<f64>,
    pub reid: f64,
    pub heisenberg: f64,
}

/// Evaluate the criteria over ascending squeeze factors with `r_a = r_b = r`.
/// Each row samples its own pair of ensembles of `template.shots`.
pub fn sweep_squeeze(r_values: &[f64], template: &EprExperimentConfig) -> Result<Vec<SweepRow>> {
    if r_values.is_empty() {
        return Err(Error::InvalidConfig(
            "squeeze sweep needs at least one value".into(),
        ));
    }
    for (k, &r) in r_values.iter().enumerate() {
        check_squeeze("r", r)?;
        if k > 0 && r <= r_values[k - 1] {
            return Err(Error::InvalidConfig(format!(
                "sweep values must be strictly ascending ({} then {r})",
                r_values[k - 1]
            )));
        }
    }
    if template.shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let pair = ModePair::default();
    r_values
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let state = epr_state(r, r, template.convention)?;
            let (bx, by) = sample_ensembles(
                &state,
                template.shots,
                derive_seed(template.seed, 16 + k as u64),
            )?;
            let sampled = crate::measurement::duan_product_sampled(&bx, &by, template.convention)?;
            Ok(SweepRow {
                r,
                duan_analytic: duan_product(&state, pair, template.convention)?,
                duan_sampled: sampled.value,
                duan_se: sampled.std_err,
                reid: reid_epr_product(&state, pair, Direction::AToB)?,
                heisenberg: heisenberg_product(&state, pair.a)?,
            })
        })
        .collect()
}
