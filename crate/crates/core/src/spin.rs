//! Single-site spin-1/2 operators in the register basis.
//!
//! Basis order is `(|0⟩, |1⟩)` with `|0⟩ = |1/2,-1/2⟩` and `|1⟩ = |1/2,+1/2⟩`,
//! so `j_z = diag(-1/2, 1/2)`. `j_y` is chosen so that `[j_x, j_y] = i j_z`.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF: Complex64 = Complex64::new(0.5, 0.0);

pub fn jx() -> Mat2 {
    [[ZERO, HALF], [HALF, ZERO]]
}

pub fn jy() -> Mat2 {
    [
        [ZERO, Complex64::new(0.0, 0.5)],
        [Complex64::new(0.0, -0.5), ZERO],
    ]
}

pub fn jz() -> Mat2 {
    [[-HALF, ZERO], [ZERO, HALF]]
}

pub fn identity2() -> Mat2 {
    [
        [Complex64::new(1.0, 0.0), ZERO],
        [ZERO, Complex64::new(1.0, 0.0)],
    ]
}

pub fn identity4() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `a ⊗ b` in the two-site ordering `(00, 01, 10, 11)` where the first label
/// belongs to the site acted on by `a`.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (ia, ib, ja, jb) in itertools4() {
        out[2 * ia + ib][2 * ja + jb] = a[ia][ja] * b[ib][jb];
    }
    out
}

fn itertools4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|n| ((n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1))
}

pub fn is_unitary4(u: &Mat4, tol: f64) -> bool {
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for row in u {
                acc += row[i].conj() * row[j];
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            if (acc - Complex64::new(expected, 0.0)).norm() > tol {
                return false;
            }
        }
    }
    true
}
