//! Dense complex linear algebra over weighted inner-product spaces.
//!
//! Every operator in the crate is carried as a dense [`ComplexMatrix`]. The
//! factorizations themselves (Hessenberg-QR eigensolver, SVD, Cholesky, LU)
//! come from `faer`; this module layers the weighted-space semantics on top:
//! inner products `<x, y>_W = y^* W x`, adjoints with respect to two weights,
//! numerical abscissae, null spaces, principal angles and the matrix
//! exponential.

mod eig;
mod expm;
mod space;
mod subspace;

use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::{Error, Result};

pub use eig::{eig, eigenvalues, hermitian_eigen, one_norm, Eigensystem, SpectralReport, DEFAULT_PERIPHERAL_REL_TOL};
pub use expm::expm;
pub use num_complex::Complex64 as c64;
pub use space::WeightedSpace;
pub use subspace::{null_space, principal_angle, rank, singular_values, w_orthonormalize};

/// Dense complex matrix, row/column indexed from zero.
pub type ComplexMatrix = Mat<c64>;
/// Dense complex column vector.
pub type ComplexVector = faer::Col<c64>;

/// Default relative rank tolerance for singular values.
pub const RANK_TOL: f64 = 1e-10;

pub const I: c64 = c64::new(0.0, 1.0);

#[inline]
pub fn cplx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn check_finite(a: MatRef<'_, c64>, what: &'static str) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite(what));
            }
        }
    }
    Ok(())
}

pub fn check_square(a: MatRef<'_, c64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub(crate) fn expect_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Builds a matrix from row-major nested rows. Panics on ragged input.
pub fn from_rows(rows: &[&[c64]]) -> ComplexMatrix {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
    Mat::from_fn(m, n, |i, j| rows[i][j])
}

/// Real-valued convenience variant of [`from_rows`].
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
    Mat::from_fn(m, n, |i, j| real(rows[i][j]))
}

pub fn diag(entries: &[c64]) -> ComplexMatrix {
    let n = entries.len();
    Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { c64::new(0.0, 0.0) })
}

pub fn real_diag(entries: &[f64]) -> ComplexMatrix {
    let n = entries.len();
    Mat::from_fn(n, n, |i, j| if i == j { real(entries[i]) } else { c64::new(0.0, 0.0) })
}

pub fn identity(n: usize) -> ComplexMatrix {
    Mat::identity(n, n)
}

pub fn zeros(m: usize, n: usize) -> ComplexMatrix {
    Mat::zeros(m, n)
}

pub fn adjoint(a: MatRef<'_, c64>) -> ComplexMatrix {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn scale(a: MatRef<'_, c64>, s: c64) -> ComplexMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> ComplexMatrix {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn sub(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> ComplexMatrix {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn mul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    a * b
}

pub fn mul3(a: MatRef<'_, c64>, b: MatRef<'_, c64>, c: MatRef<'_, c64>) -> ComplexMatrix {
    mul(mul(a, b).as_ref(), c)
}

pub fn matvec(a: MatRef<'_, c64>, x: &ComplexVector) -> ComplexVector {
    assert_eq!(a.ncols(), x.nrows(), "matrix-vector dimensions differ");
    a * x
}

/// `a - shift * I` for square `a`.
pub fn shift(a: MatRef<'_, c64>, shift: c64) -> ComplexMatrix {
    let mut out = a.to_owned();
    for i in 0..a.nrows().min(a.ncols()) {
        out[(i, i)] -= shift;
    }
    out
}

/// `shift * I - a`, the resolvent-side convention.
pub fn shifted_from(shift: c64, a: MatRef<'_, c64>) -> ComplexMatrix {
    let mut out = scale(a, real(-1.0));
    for i in 0..a.nrows().min(a.ncols()) {
        out[(i, i)] += shift;
    }
    out
}

/// Hermitian part `(a + a^*) / 2`.
pub fn hermitian_part(a: MatRef<'_, c64>) -> ComplexMatrix {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Frobenius norm.
pub fn frobenius(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Spectral (operator 2-) norm.
pub fn norm2(a: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn vec_norm(x: &ComplexVector) -> f64 {
    x.norm_l2()
}

pub fn column(a: MatRef<'_, c64>, j: usize) -> ComplexVector {
    faer::Col::from_fn(a.nrows(), |i| a[(i, j)])
}

pub fn vector(entries: &[c64]) -> ComplexVector {
    faer::Col::from_fn(entries.len(), |i| entries[i])
}

pub fn vector_to_vec(x: &ComplexVector) -> Vec<c64> {
    (0..x.nrows()).map(|i| x[i]).collect()
}

/// Kronecker product `p ⊗ d`; row index of the result is `a * d.nrows() + i`.
pub fn kron(p: MatRef<'_, c64>, d: MatRef<'_, c64>) -> ComplexMatrix {
    let (pr, pc) = (p.nrows(), p.ncols());
    let (dr, dc) = (d.nrows(), d.ncols());
    let mut out = Mat::zeros(pr * dr, pc * dc);
    for a in 0..pr {
        for b in 0..pc {
            let s = p[(a, b)];
            if s == c64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dc {
                for i in 0..dr {
                    out[(a * dr + i, b * dc + j)] = s * d[(i, j)];
                }
            }
        }
    }
    out
}

/// Block-diagonal concatenation.
pub fn block_diag(blocks: &[MatRef<'_, c64>]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.as_mut()
            .submatrix_mut(r0, c0, b.nrows(), b.ncols())
            .copy_from(*b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Assembles a 2x2 block matrix `[[a, b], [c, d]]`.
pub fn block2(
    a: MatRef<'_, c64>,
    b: MatRef<'_, c64>,
    c: MatRef<'_, c64>,
    d: MatRef<'_, c64>,
) -> ComplexMatrix {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(c.nrows(), d.nrows());
    assert_eq!(a.ncols(), c.ncols());
    assert_eq!(b.ncols(), d.ncols());
    let (n1, n2) = (a.nrows(), c.nrows());
    let (m1, m2) = (a.ncols(), b.ncols());
    let mut out = Mat::zeros(n1 + n2, m1 + m2);
    out.as_mut().submatrix_mut(0, 0, n1, m1).copy_from(a);
    out.as_mut().submatrix_mut(0, m1, n1, m2).copy_from(b);
    out.as_mut().submatrix_mut(n1, 0, n2, m1).copy_from(c);
    out.as_mut().submatrix_mut(n1, m1, n2, m2).copy_from(d);
    out
}

/// Stacks matrices vertically; all must share the column count.
pub fn vstack(blocks: &[MatRef<'_, c64>]) -> ComplexMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    assert!(blocks.iter().all(|b| b.ncols() == cols), "column counts differ");
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.as_mut().submatrix_mut(r0, 0, b.nrows(), cols).copy_from(*b);
        r0 += b.nrows();
    }
    out
}

/// Concatenates matrices horizontally; all must share the row count.
pub fn hstack(blocks: &[MatRef<'_, c64>]) -> ComplexMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    assert!(blocks.iter().all(|b| b.nrows() == rows), "row counts differ");
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        out.as_mut().submatrix_mut(0, c0, rows, b.ncols()).copy_from(*b);
        c0 += b.ncols();
    }
    out
}

/// Solves `a x = b` by partial-pivot LU; fails on (numerically) singular `a`.
pub fn solve(a: MatRef<'_, c64>, b: MatRef<'_, c64>, context: &'static str) -> Result<ComplexMatrix> {
    use faer::linalg::solvers::Solve;
    let n = check_square(a)?;
    expect_dim(context, n, b.nrows())?;
    let lu = a.partial_piv_lu();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let u = lu.U();
    for i in 0..n {
        if u[(i, i)].norm() <= 1e-14 * scale {
            return Err(Error::Singular(context));
        }
    }
    let x = lu.solve(b);
    check_finite(x.as_ref(), context)?;
    Ok(x)
}

/// Weighted adjoint `W_dom^{-1} A^* W_codom`: the unique `B` with
/// `<A x, y>_codom = <x, B y>_dom`.
pub fn weighted_adjoint(
    a: MatRef<'_, c64>,
    dom: &WeightedSpace,
    codom: &WeightedSpace,
) -> Result<ComplexMatrix> {
    expect_dim("weighted_adjoint (columns vs domain)", dom.dim(), a.ncols())?;
    expect_dim("weighted_adjoint (rows vs codomain)", codom.dim(), a.nrows())?;
    let rhs = mul(adjoint(a).as_ref(), codom.weight().as_ref());
    dom.solve_weight(rhs.as_ref())
}

/// Numerical abscissa `sup Re<A h, h>_W / <h, h>_W`, the largest eigenvalue of
/// the Hermitian pencil `((W A + A^* W) / 2, W)`.
pub fn numerical_abscissa(a: MatRef<'_, c64>, space: &WeightedSpace) -> Result<f64> {
    let n = check_square(a)?;
    expect_dim("numerical_abscissa", space.dim(), n)?;
    if n == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let form = hermitian_part(mul(space.weight().as_ref(), a).as_ref());
    let vals = space.pencil_eigenvalues(form.as_ref())?;
    Ok(*vals.last().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn adjoint_with_identity_weights_is_conjugate_transpose() {
        let a = from_rows(&[&[cplx(1.0, 2.0), cplx(0.0, -1.0)], &[cplx(3.0, 0.0), cplx(0.5, 0.5)]]);
        let s = WeightedSpace::identity(2);
        let b = weighted_adjoint(a.as_ref(), &s, &s).unwrap();
        assert!(frobenius(sub(b.as_ref(), adjoint(a.as_ref()).as_ref()).as_ref()) < 1e-15);
    }

    #[test]
    fn adjoint_of_imaginary_diagonal_is_negation() {
        let entries: Vec<c64> = (1..=6).map(|k| cplx(0.0, k as f64)).collect();
        let a = diag(&entries);
        let s = WeightedSpace::identity(6);
        let b = weighted_adjoint(a.as_ref(), &s, &s).unwrap();
        assert!(frobenius(add(a.as_ref(), b.as_ref()).as_ref()) < 1e-15);
    }

    #[test]
    fn adjoint_between_differently_weighted_spaces() {
        // <Ax, y> = conj(y) x1 and <x, By>_{2I} = 2 conj(b1 y) x1 + 2 conj(b2 y) x2,
        // so b = (1/2, 0).
        let a = from_real_rows(&[&[1.0, 0.0]]);
        let dom = WeightedSpace::new(scale(identity(2).as_ref(), real(2.0))).unwrap();
        let codom = WeightedSpace::identity(1);
        let b = weighted_adjoint(a.as_ref(), &dom, &codom).unwrap();
        let expected = from_real_rows(&[&[0.5], &[0.0]]);
        assert!(frobenius(sub(b.as_ref(), expected.as_ref()).as_ref()) < 1e-15);
    }

    #[test]
    fn adjoint_dimension_mismatch() {
        let a = zeros(2, 3);
        let s = WeightedSpace::identity(2);
        assert!(matches!(
            weighted_adjoint(a.as_ref(), &s, &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn abscissa_examples() {
        let s2 = WeightedSpace::identity(2);
        let minus_i = scale(identity(2).as_ref(), real(-1.0));
        assert!(close(numerical_abscissa(minus_i.as_ref(), &s2).unwrap(), -1.0, 1e-14));
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(close(numerical_abscissa(rot.as_ref(), &s2).unwrap(), 0.0, 1e-14));
        // Hermitian part diag(0, 0, -1).
        let turing_a = from_real_rows(&[&[0.0, -1.0, 1.0], &[1.0, 0.0, 0.0], &[-1.0, 0.0, -1.0]]);
        let s3 = WeightedSpace::identity(3);
        assert!(close(numerical_abscissa(turing_a.as_ref(), &s3).unwrap(), 0.0, 1e-14));
    }

    #[test]
    fn abscissa_respects_weight() {
        // A = diag(-1, -3) is W-self-adjoint for diagonal W, so the abscissa
        // stays -1 whatever the positive diagonal weight.
        let a = real_diag(&[-1.0, -3.0]);
        let w = WeightedSpace::from_diagonal(&[5.0, 0.1]).unwrap();
        assert!(close(numerical_abscissa(a.as_ref(), &w).unwrap(), -1.0, 1e-13));
    }

    #[test]
    fn kron_layout() {
        let p = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let d = identity(2);
        let k = kron(p.as_ref(), d.as_ref());
        assert_eq!(k[(0, 2)], real(2.0));
        assert_eq!(k[(3, 1)], real(3.0));
        assert_eq!(k[(1, 0)], real(0.0));
    }

    #[test]
    fn solve_reports_singular() {
        let a = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let b = identity(2);
        assert!(matches!(solve(a.as_ref(), b.as_ref(), "test"), Err(Error::Singular(_))));
    }
}
