//! Small dense linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real embedding of a complex matrix acting on `(Q, P)` quadrature blocks.
///
/// A complex `m x n` matrix `c` maps to the real `2m x 2n` matrix
/// `[[Re c, -Im c], [Im c, Re c]]`. The map is an algebra homomorphism:
/// `embed(a b) = embed(a) embed(b)` and `embed(a^H) = embed(a)^T`.
pub fn embed(c: &CMatrix) -> RMatrix {
    let (m, n) = c.shape();
    let mut out = RMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = c[(i, j)];
            out[(i, j)] = z.re;
            out[(i, n + j)] = -z.im;
            out[(m + i, j)] = z.im;
            out[(m + i, n + j)] = z.re;
        }
    }
    out
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(c: &CMatrix) -> f64 {
    c.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// All eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Option<Vec<Complex64>> {
    if m.nrows() == 1 {
        return Some(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), 1e-15, 100_000)?;
    let (_, t) = schur.unpack();
    Some((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Largest absolute deviation from symmetry, relative to the largest entry.
pub fn asymmetry(m: &RMatrix) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}
