//! Gaussian states in the covariance-matrix formalism.
//!
//! Quadratures are interleaved per mode, `(X₁, Y₁, X₂, Y₂, …)`, and
//! normalized so the vacuum has unit covariance. In these units the
//! uncertainty relation reads `ΔX·ΔY ≥ 1`, and a covariance matrix is
//! physical iff all of its symplectic eigenvalues are at least one.
//!
//! Every linear-optical element (squeezer, phase rotation, beam splitter) is
//! a [`SymplecticOp`]; applying it maps `mean → S·mean` and
//! `cov → S·cov·Sᵀ`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Element-wise absolute tolerance for covariance symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Slack allowed below the unit symplectic eigenvalue bound.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// One of the two field quadratures of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    /// Amplitude quadrature.
    X,
    /// Phase quadrature.
    Y,
}

impl Quadrature {
    pub(crate) fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::Y => 1,
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::X => f.write_str("X"),
            Quadrature::Y => f.write_str("Y"),
        }
    }
}

/// A single quadrature of a single mode, e.g. `X` of mode 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeQuadrature {
    pub mode: usize,
    pub quadrature: Quadrature,
}

impl ModeQuadrature {
    pub fn new(mode: usize, quadrature: Quadrature) -> Self {
        Self { mode, quadrature }
    }

    pub fn x(mode: usize) -> Self {
        Self::new(mode, Quadrature::X)
    }

    pub fn y(mode: usize) -> Self {
        Self::new(mode, Quadrature::Y)
    }

    /// Position of this quadrature in the interleaved phase-space vector.
    pub fn index(self) -> usize {
        2 * self.mode + self.quadrature.offset()
    }
}

impl fmt::Display for ModeQuadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.mode, self.quadrature)
    }
}

/// Which pair of output quadratures ends up anticorrelated.
///
/// A lossless beam splitter must put a 180° phase flip on one reflected
/// contribution. With an amplitude-squeezed input on port `a` and a
/// phase-squeezed input on port `b`, the choice of where the flip sits
/// decides whether the outputs satisfy `X_A ≈ −X_B, Y_A ≈ +Y_B` or the
/// swapped pattern. The same flag selects the matching signed
/// combinations in the inseparability product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `X_A ≈ −X_B`, `Y_A ≈ +Y_B`; the product uses `Δ(X_A + X_B)·Δ(Y_A − Y_B)`.
    ///
    /// Beam splitter: `out_i = t·in_i + ρ·in_j`, `out_j = ρ·in_i − t·in_j`.
    #[default]
    XAnticorrelated,
    /// `X_A ≈ +X_B`, `Y_A ≈ −Y_B`; the product uses `Δ(X_A − X_B)·Δ(Y_A + Y_B)`.
    ///
    /// Beam splitter: `out_i = t·in_i + ρ·in_j`, `out_j = −ρ·in_i + t·in_j`.
    YAnticorrelated,
}

impl SignConvention {
    /// Coefficient of mode B in the `X` and `Y` combinations whose variances
    /// enter the inseparability product (mode A always has coefficient +1).
    pub fn combination_signs(self) -> (f64, f64) {
        match self {
            SignConvention::XAnticorrelated => (1.0, -1.0),
            SignConvention::YAnticorrelated => (-1.0, 1.0),
        }
    }
}

/// Single-mode squeezing: `r` is the squeeze factor, `theta` the angle of
/// the squeezed axis. `theta = 0` squeezes `X`, `theta = π/2` squeezes `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    r: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "squeeze factor must be finite and non-negative, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "squeeze angle must be finite, got {theta}"
            )));
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self { r, theta })
    }

    /// Amplitude squeezing, `Var(X) = e^(−2r)`.
    pub fn amplitude(r: f64) -> Result<Self> {
        Self::new(r, 0.0)
    }

    /// Phase squeezing, `Var(Y) = e^(−2r)`.
    pub fn phase(r: f64) -> Result<Self> {
        Self::new(r, PI / 2.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Two-mode beam splitter with intensity transmissivity `T ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterParams {
    transmissivity: f64,
    convention: SignConvention,
}

impl BeamSplitterParams {
    pub fn new(transmissivity: f64, convention: SignConvention) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::InvalidArgument(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        Ok(Self {
            transmissivity,
            convention,
        })
    }

    /// The 50/50 splitter.
    pub fn balanced(convention: SignConvention) -> Self {
        Self {
            transmissivity: 0.5,
            convention,
        }
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    /// The real 2×2 mode-mixing matrix applied identically to `X` and `Y`.
    fn mixing(&self) -> [[f64; 2]; 2] {
        let t = self.transmissivity.sqrt();
        let rho = (1.0 - self.transmissivity).sqrt();
        match self.convention {
            SignConvention::XAnticorrelated => [[t, rho], [rho, -t]],
            SignConvention::YAnticorrelated => [[t, rho], [-rho, t]],
        }
    }
}

impl Default for BeamSplitterParams {
    fn default() -> Self {
        Self::balanced(SignConvention::default())
    }
}

/// The symplectic form `Ω = ⊕ [[0, 1], [−1, 0]]` for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn rotation_block(phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// A linear phase-space transform acting on a subset of modes.
///
/// `matrix` is `2k × 2k` for the `k` listed modes, in the same interleaved
/// ordering as the state.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    modes: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl SymplecticOp {
    /// Wrap an arbitrary local matrix. The modes must be distinct and the
    /// matrix must be symplectic within `1e-10`.
    pub fn new(modes: Vec<usize>, matrix: DMatrix<f64>) -> Result<Self> {
        check_distinct(&modes)?;
        let dim = 2 * modes.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidArgument(format!(
                "expected a {dim}x{dim} matrix for {} modes, got {:?}",
                modes.len(),
                matrix.shape()
            )));
        }
        let op = Self { modes, matrix };
        let defect = op.symplectic_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symplectic (max |SΩSᵀ − Ω| = {defect:e})"
            )));
        }
        Ok(op)
    }

    pub fn squeeze(mode: usize, params: SqueezeParams) -> Self {
        let rot = rotation_block(params.theta());
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![
            (-params.r()).exp(),
            params.r().exp(),
        ]));
        Self {
            modes: vec![mode],
            matrix: &rot * diag * rot.transpose(),
        }
    }

    /// Phase-space rotation by `phi` radians on one mode.
    pub fn rotation(mode: usize, phi: f64) -> Self {
        Self {
            modes: vec![mode],
            matrix: rotation_block(phi),
        }
    }

    pub fn beam_splitter(mode_i: usize, mode_j: usize, params: BeamSplitterParams) -> Result<Self> {
        if mode_i == mode_j {
            return Err(Error::InvalidArgument(format!(
                "beam splitter needs two distinct modes, got {mode_i} twice"
            )));
        }
        let b = params.mixing();
        let mut m = DMatrix::zeros(4, 4);
        for (out, row) in b.iter().enumerate() {
            for (inp, &coef) in row.iter().enumerate() {
                m[(2 * out, 2 * inp)] = coef;
                m[(2 * out + 1, 2 * inp + 1)] = coef;
            }
        }
        Ok(Self {
            modes: vec![mode_i, mode_j],
            matrix: m,
        })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `S⁻¹ = Ω·Sᵀ·Ωᵀ`.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.modes.len());
        Self {
            modes: self.modes.clone(),
            matrix: &omega * self.matrix.transpose() * omega.transpose(),
        }
    }

    /// `max |S·Ω·Sᵀ − Ω|` over the local matrix.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.modes.len());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// Embed into the full `2n × 2n` phase space, identity on untouched modes.
    pub fn embed(&self, n_modes: usize) -> Result<DMatrix<f64>> {
        if let Some(&bad) = self.modes.iter().find(|&&m| m >= n_modes) {
            return Err(Error::InvalidArgument(format!(
                "mode {bad} out of range for a {n_modes}-mode state"
            )));
        }
        let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for (a, &ma) in self.modes.iter().enumerate() {
            for (b, &mb) in self.modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        full[(2 * ma + qa, 2 * mb + qb)] = self.matrix[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        Ok(full)
    }
}

fn check_distinct(modes: &[usize]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("mode list is empty".into()));
    }
    for (k, m) in modes.iter().enumerate() {
        if modes[..k].contains(m) {
            return Err(Error::InvalidArgument(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Result of checking a covariance matrix against the uncertainty bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    /// Symplectic eigenvalues, ascending, one per mode.
    pub symplectic_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub physical: bool,
}

/// Compute the symplectic spectrum of `cov` and decide physicality.
///
/// Accepts raw data so that unphysical candidates can be inspected; the
/// only hard error is a malformed or asymmetric matrix.
pub fn validate_physicality(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<PhysicalityReport> {
    validate_physicality_compensated(mean, cov, &DMatrix::zeros(cov.nrows(), cov.ncols()))
}

/// [`validate_physicality`] for the covariance `cov + cov_lo`, where
/// `cov_lo` holds the rounding error of `cov`.
pub fn validate_physicality_compensated(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    cov_lo: &DMatrix<f64>,
) -> Result<PhysicalityReport> {
    let dim = cov.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || cov.ncols() != dim {
        return Err(Error::InvalidState(format!(
            "covariance must be a non-empty 2n×2n matrix, got {:?}",
            cov.shape()
        )));
    }
    if mean.len() != dim {
        return Err(Error::InvalidState(format!(
            "mean has length {} but covariance is {dim}x{dim}",
            mean.len()
        )));
    }
    if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let asym = (cov - cov.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::InvalidState(format!(
            "covariance is asymmetric (max |V − Vᵀ| = {asym:e})"
        )));
    }
    if cov_lo.shape() != cov.shape() || cov_lo.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState(
            "covariance correction must be finite and match the covariance shape".into(),
        ));
    }
    if (cov_lo - cov_lo.transpose()).amax() > SYMMETRY_TOLERANCE {
        return Err(Error::InvalidState(
            "covariance correction is asymmetric".into(),
        ));
    }
    let (eigenvalues, positive_definite) = symplectic_eigenvalues(cov, cov_lo);
    let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PhysicalityReport {
        physical: positive_definite && min_eigenvalue >= 1.0 - PHYSICALITY_TOLERANCE,
        symplectic_eigenvalues: eigenvalues,
        min_eigenvalue,
    })
}

/// Lower Cholesky factor of `hi + lo` in double-double precision, or `None`
/// if the matrix is not positive definite.
fn cholesky_dd(hi: &DMatrix<f64>, lo: &DMatrix<f64>) -> Option<Vec<Vec<TwoFloat>>> {
    let n = hi.nrows();
    let mut l = vec![vec![TwoFloat::from(0.0); n]; n];
    for j in 0..n {
        let mut d = dd(hi[(j, j)], lo[(j, j)]);
        for &ljk in &l[j][..j] {
            d -= ljk * ljk;
        }
        if d.hi().is_nan() || d.hi() <= 0.0 {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let mut v = dd(hi[(i, j)], lo[(i, j)]);
            for (&lik, &ljk) in l[i][..j].iter().zip(&l[j][..j]) {
                v -= lik * ljk;
            }
            l[i][j] = dd_div(v, l[j][j]);
        }
    }
    Some(l)
}

/// Symplectic eigenvalues of the symmetric `2n × 2n` matrix `hi + lo`,
/// ascending, and whether it is positive definite.
///
/// For positive-definite `V = L·Lᵀ` these are the singular values of the
/// antisymmetric matrix `Lᵀ·Ω·L`, each of which appears twice. The factor
/// and the product are formed in double-double precision: for pure states
/// `Lᵀ·Ω·L` is orthogonal even when the entries of `L` are large, so the
/// result stays accurate for strongly squeezed states. Matrices that are
/// not positive definite fall back to the moduli of the eigenvalues of
/// `Ω·V`.
fn symplectic_eigenvalues(hi: &DMatrix<f64>, lo: &DMatrix<f64>) -> (Vec<f64>, bool) {
    let n = hi.nrows() / 2;
    let chol = cholesky_dd(hi, lo);
    let positive_definite = chol.is_some();
    let mut nu2: Vec<f64> = match chol {
        Some(l) => {
            // (Lᵀ Ω L)_{ab} = Σ_k L_{2k,a} L_{2k+1,b} − L_{2k+1,a} L_{2k,b}
            let m = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
                let mut v = TwoFloat::from(0.0);
                for k in 0..n {
                    v += l[2 * k][a] * l[2 * k + 1][b] - l[2 * k + 1][a] * l[2 * k][b];
                }
                f64::from(v)
            });
            m.singular_values().iter().map(|&v| v * v).collect()
        }
        None => (&symplectic_form(n) * hi)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm_sqr())
            .collect(),
    };
    nu2.sort_by(f64::total_cmp);
    let nu = nu2
        .chunks(2)
        .map(|pair| ((pair[0] + pair[1]) * 0.5).sqrt())
        .collect();
    (nu, positive_definite)
}

/// A physical Gaussian state of `n_modes` optical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    /// Rounding error of `cov`: the represented covariance is `cov + cov_lo`.
    cov_lo: DMatrix<f64>,
}

fn dd(hi: f64, lo: f64) -> TwoFloat {
    TwoFloat::new_add(hi, lo)
}

/// `a / b` with one Newton correction; `TwoFloat` division alone is only
/// accurate to about one `f64` ulp.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b;
    q + (a - q * b) / b
}

impl GaussianState {
    /// Build a state from raw moments, rejecting anything unphysical.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let report = validate_physicality(&mean, &cov)?;
        if !report.physical {
            return Err(Error::InvalidState(format!(
                "minimum symplectic eigenvalue {} is below 1",
                report.min_eigenvalue
            )));
        }
        Ok(Self::exact(mean, cov))
    }

    /// Like [`new`](Self::new) for the covariance `cov + cov_lo`, where
    /// `cov_lo` carries the rounding error of `cov` (see
    /// [`cov_correction`](Self::cov_correction)).
    pub fn new_compensated(
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        cov_lo: DMatrix<f64>,
    ) -> Result<Self> {
        let report = validate_physicality_compensated(&mean, &cov, &cov_lo)?;
        if !report.physical {
            return Err(Error::InvalidState(format!(
                "minimum symplectic eigenvalue {} is below 1",
                report.min_eigenvalue
            )));
        }
        Ok(Self { mean, cov, cov_lo })
    }

    fn exact(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let cov_lo = DMatrix::zeros(cov.nrows(), cov.ncols());
        Self { mean, cov, cov_lo }
    }

    /// Internal constructor for results of physicality-preserving maps.
    pub(crate) fn from_trusted(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let cov = (&cov + cov.transpose()) * 0.5;
        Self::exact(mean, cov)
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument(
                "vacuum needs at least one mode".into(),
            ));
        }
        Ok(Self::exact(
            DVector::zeros(2 * n_modes),
            DMatrix::identity(2 * n_modes, 2 * n_modes),
        ))
    }

    /// Pure single-mode squeezed vacuum.
    ///
    /// The covariance `R·diag(e^{−2r}, e^{2r})·Rᵀ` is formed in
    /// double-double precision.
    pub fn squeezed(params: SqueezeParams) -> Self {
        let rot = rotation_block(params.theta());
        let d = [(-2.0 * params.r()).exp(), (2.0 * params.r()).exp()];
        let mut cov = DMatrix::zeros(2, 2);
        let mut cov_lo = DMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let mut v = TwoFloat::from(0.0);
                for (k, &dk) in d.iter().enumerate() {
                    v += TwoFloat::new_mul(rot[(i, k)], rot[(j, k)]) * dk;
                }
                cov[(i, j)] = v.hi();
                cov_lo[(i, j)] = v.lo();
            }
        }
        Self {
            mean: DVector::zeros(2),
            cov,
            cov_lo,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Low-order part of the covariance. Operations that can cancel large
    /// entries (beam splitters, squeezers, linear-combination variances)
    /// work with `cov + cov_correction` in double-double precision; the
    /// correction is zero for states built from plain `f64` moments.
    pub fn cov_correction(&self) -> &DMatrix<f64> {
        &self.cov_lo
    }

    /// Product state with `self` on the first modes and `other` after.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (na, nb) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(na + nb);
        mean.rows_mut(0, na).copy_from(&self.mean);
        mean.rows_mut(na, nb).copy_from(&other.mean);
        let block = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            let mut m = DMatrix::zeros(na + nb, na + nb);
            m.view_mut((0, 0), (na, na)).copy_from(a);
            m.view_mut((na, na), (nb, nb)).copy_from(b);
            m
        };
        GaussianState {
            mean,
            cov: block(&self.cov, &other.cov),
            cov_lo: block(&self.cov_lo, &other.cov_lo),
        }
    }

    pub fn apply(&self, op: &SymplecticOp) -> Result<GaussianState> {
        let s = op.embed(self.n_modes())?;
        let n = s.nrows();
        // S·V in double-double, then (S·V)·Sᵀ
        let sv: Vec<Vec<TwoFloat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .filter(|&k| s[(i, k)] != 0.0)
                            .fold(TwoFloat::from(0.0), |acc, k| {
                                acc + s[(i, k)] * dd(self.cov[(k, j)], self.cov_lo[(k, j)])
                            })
                    })
                    .collect()
            })
            .collect();
        let mut cov = DMatrix::zeros(n, n);
        let mut cov_lo = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: TwoFloat = (0..n)
                    .filter(|&k| s[(j, k)] != 0.0)
                    .fold(TwoFloat::from(0.0), |acc, k| acc + sv[i][k] * s[(j, k)]);
                cov[(i, j)] = v.hi();
                cov[(j, i)] = v.hi();
                cov_lo[(i, j)] = v.lo();
                cov_lo[(j, i)] = v.lo();
            }
        }
        Ok(Self {
            mean: &s * &self.mean,
            cov,
            cov_lo,
        })
    }

    /// Mix two modes on a beam splitter.
    ///
    /// Equivalent to [`apply`](Self::apply) with
    /// [`SymplecticOp::beam_splitter`], but quadratic terms use `T`, `1 − T`
    /// and `√(T(1 − T))` directly instead of squaring rounded square roots,
    /// so a balanced splitter maps the vacuum to itself exactly. The mixed
    /// block is accumulated in double-double precision, which keeps
    /// sum/difference variances of strongly squeezed outputs accurate.
    pub fn apply_beam_splitter(
        &self,
        mode_i: usize,
        mode_j: usize,
        params: BeamSplitterParams,
    ) -> Result<GaussianState> {
        if mode_i == mode_j {
            return Err(Error::InvalidArgument(format!(
                "beam splitter needs two distinct modes, got {mode_i} twice"
            )));
        }
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        let b = params.mixing();
        let t2 = params.transmissivity;
        let r2 = 1.0 - t2;
        let tr = (t2 * r2).sqrt();
        // |b[o][k]|·|b[p][l]| without rounding through the square roots
        let weight = |o: usize, k: usize, p: usize, l: usize| -> f64 {
            let sign = (b[o][k] * b[p][l]).signum();
            let mag = match ((o + k) % 2, (p + l) % 2) {
                (0, 0) => t2,
                (1, 1) => r2,
                _ => tr,
            };
            if b[o][k] == 0.0 || b[p][l] == 0.0 {
                0.0
            } else {
                sign * mag
            }
        };
        let modes = [mode_i, mode_j];
        let n = 2 * self.n_modes();
        let mut mean = self.mean.clone();
        let mut cov = self.cov.clone();
        let mut cov_lo = self.cov_lo.clone();
        for o in 0..2 {
            for q in 0..2 {
                let row = 2 * modes[o] + q;
                mean[row] = (0..2).map(|k| b[o][k] * self.mean[2 * modes[k] + q]).sum();
                for col in 0..n {
                    if col / 2 == mode_i || col / 2 == mode_j {
                        continue;
                    }
                    let mut acc = TwoFloat::from(0.0);
                    for k in 0..2 {
                        let src = (2 * modes[k] + q, col);
                        acc += b[o][k] * dd(self.cov[src], self.cov_lo[src]);
                    }
                    let (hi, lo) = (acc.hi(), acc.lo());
                    cov[(row, col)] = hi;
                    cov[(col, row)] = hi;
                    cov_lo[(row, col)] = lo;
                    cov_lo[(col, row)] = lo;
                }
                for p in 0..2 {
                    for qq in 0..2 {
                        let mut acc = TwoFloat::from(0.0);
                        for k in 0..2 {
                            for l in 0..2 {
                                let src = (2 * modes[k] + q, 2 * modes[l] + qq);
                                acc += weight(o, k, p, l) * dd(self.cov[src], self.cov_lo[src]);
                            }
                        }
                        let (hi, lo) = (acc.hi(), acc.lo());
                        cov[(row, 2 * modes[p] + qq)] = hi;
                        cov_lo[(row, 2 * modes[p] + qq)] = lo;
                    }
                }
            }
        }
        let symmetrize = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
        Ok(Self {
            mean,
            cov: symmetrize(cov),
            cov_lo: symmetrize(cov_lo),
        })
    }

    pub fn apply_rotation(&self, mode: usize, phi: f64) -> Result<GaussianState> {
        self.apply(&SymplecticOp::rotation(mode, phi))
    }

    pub fn apply_squeeze(&self, mode: usize, params: SqueezeParams) -> Result<GaussianState> {
        self.apply(&SymplecticOp::squeeze(mode, params))
    }

    /// Reduced state of `modes`, in the order given.
    pub fn marginal(&self, modes: &[usize]) -> Result<GaussianState> {
        check_distinct(modes)?;
        self.check_mode(modes.iter().copied().max().unwrap_or(0))?;
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let sub =
            |m: &DMatrix<f64>| DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        Ok(GaussianState {
            mean,
            cov: sub(&self.cov),
            cov_lo: sub(&self.cov_lo),
        })
    }

    pub fn validate_physicality(&self) -> PhysicalityReport {
        validate_physicality_compensated(&self.mean, &self.cov, &self.cov_lo)
            .expect("GaussianState holds validated moments")
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes()
            )));
        }
        Ok(())
    }

    pub fn variance(&self, q: ModeQuadrature) -> Result<f64> {
        self.check_mode(q.mode)?;
        Ok(self.cov[(q.index(), q.index())])
    }

    pub fn covariance(&self, a: ModeQuadrature, b: ModeQuadrature) -> Result<f64> {
        self.check_mode(a.mode)?;
        self.check_mode(b.mode)?;
        Ok(self.cov[(a.index(), b.index())])
    }

    /// `Var(Σ cₖ qₖ) = cᵀ·V·c` for a linear combination of quadratures.
    ///
    /// Evaluated in double-double precision, so large entries that cancel
    /// (as in the sum quadrature of a strongly entangled pair) do not lose
    /// the small result.
    pub fn combination_variance(&self, terms: &[(ModeQuadrature, f64)]) -> Result<f64> {
        let mut acc = TwoFloat::from(0.0);
        for &(qa, ca) in terms {
            self.check_mode(qa.mode)?;
            for &(qb, cb) in terms {
                self.check_mode(qb.mode)?;
                let (i, j) = (qa.index(), qb.index());
                acc += TwoFloat::new_mul(ca, cb) * dd(self.cov[(i, j)], self.cov_lo[(i, j)]);
            }
        }
        Ok(f64::from(acc))
    }

    /// SHA-256 over the mode count, mean and covariance (little-endian
    /// IEEE-754), as lowercase hex.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_modes() as u64).to_le_bytes());
        for v in self.mean.iter() {
            hasher.update(v.to_le_bytes());
        }
        // column-major; symmetric anyway
        for v in self.cov.iter() {
            hasher.update(v.to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
