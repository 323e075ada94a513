//! Brute-force oracles on plain 4×4 arrays, independent of the library's
//! matrix code.

#![allow(dead_code)]

pub type Mat4 = [[f64; 4]; 4];

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// Input covariance: `a` amplitude-squeezed by `ra`, `b` phase-squeezed by
/// `rb`, ordering `(X_a, Y_a, X_b, Y_b)`.
pub fn input_cov(ra: f64, rb: f64) -> Mat4 {
    let mut v = [[0.0; 4]; 4];
    v[0][0] = (-2.0 * ra).exp();
    v[1][1] = (2.0 * ra).exp();
    v[2][2] = (2.0 * rb).exp();
    v[3][3] = (-2.0 * rb).exp();
    v
}

/// Balanced splitter, `X_A = (X_a + X_b)/√2`, `X_B = (X_a − X_b)/√2`, same
/// for `Y`.
pub fn balanced_splitter() -> Mat4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [h, 0.0, h, 0.0],
        [0.0, h, 0.0, h],
        [h, 0.0, -h, 0.0],
        [0.0, h, 0.0, -h],
    ]
}

/// `S·V·Sᵀ` by explicit triple loop.
pub fn congruence(s: &Mat4, v: &Mat4) -> Mat4 {
    matmul(&matmul(s, v), &transpose(s))
}

pub fn output_cov(ra: f64, rb: f64) -> Mat4 {
    congruence(&balanced_splitter(), &input_cov(ra, rb))
}

/// `cᵀ·V·c`.
pub fn lin_var(v: &Mat4, c: [f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += c[i] * v[i][j] * c[j];
        }
    }
    s
}

/// Schur complement `V_tt − V_tw² / V_ww`.
pub fn schur(v: &Mat4, t: usize, w: usize) -> f64 {
    v[t][t] - v[t][w] * v[t][w] / v[w][w]
}

/// `Δ(X_A + X_B)·Δ(Y_A − Y_B)`.
pub fn duan(v: &Mat4) -> f64 {
    (lin_var(v, [1.0, 0.0, 1.0, 0.0]) * lin_var(v, [0.0, 1.0, 0.0, -1.0])).sqrt()
}

/// `Var(X_B|X_A)·Var(Y_B|Y_A)`.
pub fn reid_a_to_b(v: &Mat4) -> f64 {
    schur(v, 2, 0) * schur(v, 3, 1)
}

fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

/// Symplectic invariants `Δ = det A + det B + 2 det C = ν₁² + ν₂²` and
/// `det V = ν₁²·ν₂²`.
pub fn symplectic_invariants(v: &Mat4) -> (f64, f64) {
    let da = det2(v[0][0], v[0][1], v[1][0], v[1][1]);
    let db = det2(v[2][2], v[2][3], v[3][2], v[3][3]);
    let dc = det2(v[0][2], v[0][3], v[1][2], v[1][3]);
    (da + db + 2.0 * dc, det4(v))
}

/// Two-mode symplectic eigenvalues solved from the invariants. Loses
/// accuracy when the two eigenvalues are nearly degenerate.
pub fn two_mode_symplectic(v: &Mat4) -> (f64, f64) {
    let (delta, dv) = symplectic_invariants(v);
    let disc = (delta * delta - 4.0 * dv).max(0.0).sqrt();
    (((delta - disc) / 2.0).sqrt(), ((delta + disc) / 2.0).sqrt())
}

/// Laplace expansion along the first row.
pub fn det4(m: &Mat4) -> f64 {
    let minor = |skip: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a = |r: usize, c: usize| m[r][cols[c]];
        a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1))
            - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
    };
    (0..4)
        .map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * m[0][c] * minor(c))
        .sum()
}

pub fn from_dmatrix(m: &nalgebra::DMatrix<f64>) -> Mat4 {
    assert_eq!(m.shape(), (4, 4));
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

/// `|a − b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
