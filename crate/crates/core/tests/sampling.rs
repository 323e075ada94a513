use epr_core::experiments::{epr_state, input_state, sample_ensembles};
use epr_core::measurement::stats::{covariance_estimate, mean, variance_estimate};
use epr_core::measurement::{derive_seed, prediction_residuals, regression_coefficient};
use epr_core::{
    BeamSplitterParams, Error, GaussianState, ModeQuadrature, Quadrature, SamplingPlan,
    SignConvention, SqueezeParams, duan_product_sampled, run_dice_experiment, sample_shots,
};
use statrs::distribution::{ContinuousCDF, Normal};

const SHOTS: usize = 1_000_000;

fn four_mode_state() -> GaussianState {
    let a = GaussianState::squeezed(SqueezeParams::new(0.6, 0.4).unwrap());
    let b = GaussianState::squeezed(SqueezeParams::phase(0.9).unwrap());
    let c = GaussianState::vacuum(1).unwrap();
    let d = GaussianState::squeezed(SqueezeParams::amplitude(0.3).unwrap());
    a.tensor(&b)
        .tensor(&c)
        .tensor(&d)
        .apply_beam_splitter(0, 1, BeamSplitterParams::default())
        .unwrap()
        .apply_beam_splitter(
            1,
            2,
            BeamSplitterParams::new(0.3, SignConvention::default()).unwrap(),
        )
        .unwrap()
        .apply_beam_splitter(2, 3, BeamSplitterParams::default())
        .unwrap()
        .apply_rotation(3, 0.7)
        .unwrap()
}

fn displaced(s: GaussianState, shift: &[f64]) -> GaussianState {
    let mean = s.mean() + nalgebra::DVector::from_column_slice(shift);
    GaussianState::new(mean, s.cov().clone()).unwrap()
}

/// Every sampled mean and (co)variance agrees with the state within `k`
/// jackknife standard errors.
fn assert_moments(state: &GaussianState, selections: Vec<ModeQuadrature>, seed: u64, k: f64) {
    let plan = SamplingPlan::new(selections.clone(), SHOTS, seed).unwrap();
    let batch = sample_shots(state, &plan).unwrap();
    let cols: Vec<Vec<f64>> = (0..selections.len()).map(|j| batch.column(j)).collect();
    for (i, qi) in selections.iter().enumerate() {
        let mu = mean(&cols[i]);
        let sd = state.variance(*qi).unwrap().sqrt() / (SHOTS as f64).sqrt();
        let target = state.mean()[qi.index()];
        assert!((mu - target).abs() < k * sd, "{qi} mean {mu} vs {target}");
        for (j, qj) in selections.iter().enumerate().skip(i) {
            let est = covariance_estimate(&cols[i], &cols[j]);
            let target = state.covariance(*qi, *qj).unwrap();
            assert!(est.within(target, k), "cov({qi},{qj}) {est:?} vs {target}");
        }
    }
}

#[test]
fn moments_converge_one_mode() {
    let s = displaced(
        GaussianState::squeezed(SqueezeParams::new(0.8, 1.1).unwrap()),
        &[0.5, -1.0],
    );
    assert_moments(&s, vec![ModeQuadrature::x(0)], 11, 4.0);
    assert_moments(&s, vec![ModeQuadrature::y(0)], 12, 4.0);
}

#[test]
fn moments_converge_two_modes() {
    let s = epr_state(1.0, 0.7, SignConvention::default()).unwrap();
    for (k, q) in [Quadrature::X, Quadrature::Y].into_iter().enumerate() {
        let plan = vec![ModeQuadrature::new(0, q), ModeQuadrature::new(1, q)];
        assert_moments(&s, plan, 20 + k as u64, 4.0);
    }
    let mixed = vec![ModeQuadrature::x(0), ModeQuadrature::y(1)];
    assert_moments(&s, mixed, 30, 4.0);
}

#[test]
fn moments_converge_four_modes() {
    let s = displaced(
        four_mode_state(),
        &[0.1, 0.2, -0.3, 0.4, 0.0, 1.5, -2.0, 0.25],
    );
    let plan = vec![
        ModeQuadrature::x(0),
        ModeQuadrature::y(1),
        ModeQuadrature::x(2),
        ModeQuadrature::y(3),
    ];
    assert_moments(&s, plan, 40, 4.0);
}

#[test]
fn epr_cross_covariance_matches_sinh() {
    let s = epr_state(1.0, 1.0, SignConvention::default()).unwrap();
    let (bx, by) = sample_ensembles(&s, SHOTS, 5).unwrap();
    let cx = covariance_estimate(&bx.column(0), &bx.column(1));
    let cy = covariance_estimate(&by.column(0), &by.column(1));
    let sinh2 = 2f64.sinh();
    assert!(
        (s.covariance(ModeQuadrature::x(0), ModeQuadrature::x(1))
            .unwrap()
            + sinh2)
            .abs()
            < 1e-12
    );
    assert!(cx.within(-sinh2, 3.0), "{cx:?}");
    assert!(cy.within(sinh2, 3.0), "{cy:?}");
}

#[test]
fn residuals_match_conditional_variance() {
    let s = epr_state(1.0, 1.0, SignConvention::default()).unwrap();
    let (bx, _) = sample_ensembles(&s, SHOTS, 6).unwrap();
    let (xa, xb) = (bx.column(0), bx.column(1));
    let res =
        prediction_residuals(&s, ModeQuadrature::x(1), ModeQuadrature::x(0), &xb, &xa).unwrap();
    let est = variance_estimate(&res);
    assert!(est.within(1.0 / 2f64.cosh(), 3.0), "{est:?}");
    assert!(mean(&res).abs() < 3.0 * est.value.sqrt() / (SHOTS as f64).sqrt());
    let g = regression_coefficient(&s, ModeQuadrature::x(1), ModeQuadrature::x(0)).unwrap();
    assert!((g + 2f64.tanh()).abs() < 1e-12);
}

#[test]
fn sampled_duan_vacuum_and_entangled() {
    let conv = SignConvention::default();
    let vac = GaussianState::vacuum(2).unwrap();
    let (bx, by) = sample_ensembles(&vac, SHOTS, 7).unwrap();
    let d = duan_product_sampled(&bx, &by, conv).unwrap();
    assert!(d.within(2.0, 3.0), "{d:?}");

    let s = epr_state(1.0, 1.0, conv).unwrap();
    let (bx, by) = sample_ensembles(&s, SHOTS, 8).unwrap();
    let d = duan_product_sampled(&bx, &by, conv).unwrap();
    assert!(d.within(2.0 * (-2f64).exp(), 3.0), "{d:?}");
}

#[test]
fn sampled_duan_with_swapped_convention() {
    let conv = SignConvention::YAnticorrelated;
    let s = epr_state(0.5, 0.5, conv).unwrap();
    let (bx, by) = sample_ensembles(&s, SHOTS, 9).unwrap();
    let d = duan_product_sampled(&bx, &by, conv).unwrap();
    assert!(d.within(2.0 * (-1f64).exp(), 3.0), "{d:?}");
}

#[test]
fn sampled_duan_rejects_reused_or_mismatched_batches() {
    let conv = SignConvention::default();
    let s = epr_state(1.0, 1.0, conv).unwrap();
    let (bx, by) = sample_ensembles(&s, 1000, 10).unwrap();
    assert!(matches!(
        duan_product_sampled(&bx, &bx, conv),
        Err(Error::InvalidPlan(_))
    ));

    let other = epr_state(0.5, 0.5, conv).unwrap();
    let (_, by_other) = sample_ensembles(&other, 1000, 10).unwrap();
    assert!(matches!(
        duan_product_sampled(&bx, &by_other, conv),
        Err(Error::ProvenanceMismatch(_))
    ));

    let same_seed = SamplingPlan::new(
        vec![ModeQuadrature::y(0), ModeQuadrature::y(1)],
        1000,
        bx.plan().seed(),
    )
    .unwrap();
    let by_same = sample_shots(&s, &same_seed).unwrap();
    assert!(matches!(
        duan_product_sampled(&bx, &by_same, conv),
        Err(Error::InvalidPlan(_))
    ));
    assert!(duan_product_sampled(&bx, &by, conv).is_ok());
    assert!(duan_product_sampled(&by, &bx, conv).is_err());
}

#[test]
fn vacuum_histogram_passes_ks_bound() {
    let vac = GaussianState::vacuum(1).unwrap();
    let plan = SamplingPlan::uniform(&[0], Quadrature::X, SHOTS, derive_seed(3, 1)).unwrap();
    let xs = sample_shots(&vac, &plan).unwrap().column(0);
    let h = epr_core::Histogram::from_samples(&xs, 100, 5.0).unwrap();
    assert_eq!(h.total(), SHOTS as u64);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = SHOTS as f64;
    let mut below = h.underflow;
    let mut worst: f64 = 0.0;
    for (i, &count) in h.counts.iter().enumerate() {
        below += count;
        let ecdf = below as f64 / n;
        worst = worst.max((ecdf - normal.cdf(h.edges[i + 1])).abs());
    }
    assert!(worst < 1.63 / n.sqrt(), "KS distance {worst}");
}

#[test]
fn unsplit_inputs_sampled_products() {
    let conv = SignConvention::default();
    for (k, r) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let s = input_state(r, r).unwrap();
        let (bx, by) = sample_ensembles(&s, 200_000, 100 + k as u64).unwrap();
        let d = duan_product_sampled(&bx, &by, conv).unwrap();
        assert!(d.value >= 1.0, "r={r}: {d:?}");
        assert!(d.within(2.0 * (2.0 * r).cosh(), 3.0), "r={r}: {d:?}");
    }
}

#[test]
fn dice_frequencies_within_three_sigma() {
    let n = 600_000;
    let rep = run_dice_experiment(n, 2024).unwrap();
    let sigma = (1.0 / 6.0 * 5.0 / 6.0 / n as f64).sqrt();
    for f in rep.top_frequencies.iter().chain(&rep.bottom_frequencies) {
        assert!((f - 1.0 / 6.0).abs() < 3.0 * sigma, "{f}");
    }
    assert_eq!(rep.constraint_violations, 0);
    assert_eq!(rep.prediction_accuracy, 1.0);
}
