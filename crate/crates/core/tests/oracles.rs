//! Library results against the brute-force 4×4 oracles.

mod common;

use common::*;
use epr_core::experiments::{epr_state, input_state};
use epr_core::measurement::{conditional_state, inferred_variance, regression_coefficient};
use epr_core::{
    Direction, GaussianState, ModePair, ModeQuadrature, Quadrature, SignConvention, SqueezeParams,
    duan_product, heisenberg_product, reid_epr_product,
};
use nalgebra::{DMatrix, DVector};

const GRID: [f64; 9] = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];

#[test]
fn output_covariance_matches_congruence_oracle() {
    for &ra in &GRID {
        for &rb in &GRID {
            let lib = from_dmatrix(epr_state(ra, rb, SignConvention::default()).unwrap().cov());
            let oracle = output_cov(ra, rb);
            let scale = oracle.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(
                max_abs_diff(&lib, &oracle) <= 1e-13 * scale,
                "ra={ra} rb={rb}"
            );
        }
    }
}

#[test]
fn symmetric_closed_forms() {
    for &r in &GRID {
        let v = output_cov(r, r);
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        assert!(rel(v[0][0], c) < 1e-13);
        assert!((v[0][2] + s).abs() <= 1e-13 * c);
        assert!((v[1][3] - s).abs() <= 1e-13 * c);
        assert!(rel(lin_var(&v, [1.0, 0.0, 1.0, 0.0]), 2.0 * (-2.0 * r).exp()) < 1e-10);
        assert!(rel(lin_var(&v, [0.0, 1.0, 0.0, -1.0]), 2.0 * (-2.0 * r).exp()) < 1e-10);
    }
}

#[test]
fn criteria_match_oracle() {
    for &ra in &GRID {
        for &rb in &GRID {
            let s = epr_state(ra, rb, SignConvention::default()).unwrap();
            let v = output_cov(ra, rb);
            let pair = ModePair::default();
            let d = duan_product(&s, pair, SignConvention::default()).unwrap();
            assert!(rel(d, duan(&v)) < 1e-10, "duan ra={ra} rb={rb}");
            // X_A + X_B = √2·X_a and Y_A − Y_B = √2·Y_b
            assert!(rel(d, 2.0 * (-(ra + rb)).exp()) < 1e-10);
            let reid = reid_epr_product(&s, pair, Direction::AToB).unwrap();
            assert!(rel(reid, reid_a_to_b(&v)) < 1e-10, "reid ra={ra} rb={rb}");
            let h = heisenberg_product(&s, 0).unwrap();
            assert!(rel(h, (v[0][0] * v[1][1]).sqrt()) < 1e-10);
            let iv = inferred_variance(&s, ModeQuadrature::x(1), ModeQuadrature::x(0)).unwrap();
            assert!(rel(iv, schur(&v, 2, 0)) < 1e-10);
            // balanced splitter keeps the two outputs' variances equal
            assert!(rel(v[0][0], v[2][2]) < 1e-12);
            assert!(rel(s.cov()[(0, 0)], s.cov()[(2, 2)]) < 1e-12);
        }
    }
}

#[test]
fn marginal_variance_is_half_sum_of_inputs() {
    for &ra in &GRID {
        for &rb in &GRID {
            let inp = input_cov(ra, rb);
            let out = epr_state(ra, rb, SignConvention::default()).unwrap();
            assert!(rel(out.cov()[(0, 0)], 0.5 * (inp[0][0] + inp[2][2])) < 1e-12);
            assert!(rel(out.cov()[(1, 1)], 0.5 * (inp[1][1] + inp[3][3])) < 1e-12);
        }
    }
}

#[test]
fn conditional_state_matches_schur_oracle() {
    let s = epr_state(1.0, 1.0, SignConvention::default()).unwrap();
    let v = output_cov(1.0, 1.0);
    for value in [-2.0, 0.0, 1.0, 3.5] {
        let c = conditional_state(&s, 0, Quadrature::X, value).unwrap();
        assert!((c.cov()[(0, 0)] - schur(&v, 2, 0)).abs() < 1e-12);
        assert!((c.cov()[(0, 0)] - 1.0 / 2f64.cosh()).abs() < 1e-12);
        let slope = v[2][0] / v[0][0];
        assert!((c.mean()[0] - slope * value).abs() < 1e-12);
    }
    let g = regression_coefficient(&s, ModeQuadrature::x(1), ModeQuadrature::x(0)).unwrap();
    assert!((g + 2f64.tanh()).abs() < 1e-12);
}

#[test]
fn symplectic_eigenvalues_match_invariant_formula() {
    let states = [
        epr_state(1.0, 1.0, SignConvention::default()).unwrap(),
        epr_state(0.3, 1.7, SignConvention::YAnticorrelated).unwrap(),
        GaussianState::new(
            DVector::zeros(4),
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    3.0, 0.2, 1.0, 0.0, //
                    0.2, 2.0, 0.0, -0.5, //
                    1.0, 0.0, 2.5, 0.1, //
                    0.0, -0.5, 0.1, 1.8,
                ],
            ),
        )
        .unwrap(),
    ];
    for s in &states {
        let (delta, det) = symplectic_invariants(&from_dmatrix(s.cov()));
        let nu = s.validate_physicality().symplectic_eigenvalues;
        assert!(
            rel(nu[0] * nu[0] + nu[1] * nu[1], delta) < 1e-9,
            "{nu:?} vs Δ={delta}"
        );
        assert!(rel(nu[0] * nu[1], det.sqrt()) < 1e-9, "{nu:?} vs det={det}");
    }
    // well separated spectrum: the direct formula is accurate
    let (lo, hi) = two_mode_symplectic(&from_dmatrix(states[2].cov()));
    let nu = states[2].validate_physicality().symplectic_eigenvalues;
    assert!(
        rel(nu[0], lo) < 1e-9 && rel(nu[1], hi) < 1e-9,
        "{nu:?} vs {lo} {hi}"
    );
}

#[test]
fn tensor_symplectic_spectrum_is_union() {
    let thermal = GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 2.5).unwrap();
    let sq = GaussianState::squeezed(SqueezeParams::new(0.8, 0.4).unwrap());
    let t = thermal.tensor(&sq);
    let (lo, hi) = two_mode_symplectic(&from_dmatrix(t.cov()));
    let nu = t.validate_physicality().symplectic_eigenvalues;
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 2.5).abs() < 1e-12);
    assert!((nu[0] - 1.0).abs() < 1e-9 && (nu[1] - 2.5).abs() < 1e-9);

    let a = GaussianState::squeezed(SqueezeParams::amplitude(1.0).unwrap());
    let b = GaussianState::squeezed(SqueezeParams::amplitude(1.0).unwrap());
    let ab = a.tensor(&b);
    let expect = input_cov(1.0, 0.0);
    assert!((ab.cov()[(0, 0)] - expect[0][0]).abs() < 1e-14);
    assert_eq!(ab.cov()[(0, 2)], 0.0);
    assert_eq!(
        GaussianState::vacuum(1)
            .unwrap()
            .tensor(&GaussianState::vacuum(1).unwrap()),
        GaussianState::vacuum(2).unwrap()
    );
}

#[test]
fn input_state_matches_oracle() {
    let s = input_state(0.4, 1.2).unwrap();
    assert!(max_abs_diff(&from_dmatrix(s.cov()), &input_cov(0.4, 1.2)) < 1e-13);
}

#[test]
fn complex_eigenvalue_route_agrees() {
    // moduli of the eigenvalues of i·Ω·V, computed independently
    let s = epr_state(0.6, 0.9, SignConvention::default())
        .unwrap()
        .tensor(&GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 1.7).unwrap());
    let omega = epr_core::symplectic_form(3);
    let mut moduli: Vec<f64> = (&omega * s.cov())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(f64::total_cmp);
    let nu = s.validate_physicality().symplectic_eigenvalues;
    for (k, v) in nu.iter().enumerate() {
        assert!((v - moduli[2 * k]).abs() < 1e-9, "{nu:?} {moduli:?}");
    }
}
