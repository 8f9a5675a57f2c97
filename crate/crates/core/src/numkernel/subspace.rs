use alloc::vec::Vec;

use faer::{Mat, MatRef};
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use super::{adjoint, c64, check_finite, expect_dim, mul, sub, ComplexMatrix, WeightedSpace};
use crate::{Error, Result};

/// Singular values, nonincreasing.
pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    check_finite(a, "svd input")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|_| Error::NoConvergence("svd"))
}

/// Numerical rank: singular values above `tol * sigma_max`.
pub fn rank(a: MatRef<'_, c64>, tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * smax).count())
}

/// Orthonormal basis (columns) of the numerical null space of `a`.
///
/// Singular values at or below `tol * sigma_max` count as zero, so
/// `rank + nullity = cols(a)`.
pub fn null_space(a: MatRef<'_, c64>, tol: f64) -> Result<ComplexMatrix> {
    if !(tol > 0.0) {
        return Err(Error::invalid("null_space tolerance", "must be positive"));
    }
    check_finite(a, "null_space input")?;
    let n = a.ncols();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if a.nrows() == 0 {
        return Ok(Mat::identity(n, n));
    }
    let svd = a.svd().map_err(|_| Error::NoConvergence("svd"))?;
    let s = svd.S();
    let k = a.nrows().min(n);
    let smax = if k > 0 { s[0].re } else { 0.0 };
    let r = if smax == 0.0 {
        0
    } else {
        (0..k).filter(|&i| s[i].re > tol * smax).count()
    };
    let v = svd.V();
    Ok(v.subcols(r, n - r).to_owned())
}

/// W-orthonormal basis of the span of the columns of `v`, via modified
/// Gram-Schmidt with one reorthogonalization pass. Columns whose remaining
/// W-norm falls below `drop_tol` times their original norm are dropped.
pub fn w_orthonormalize(v: MatRef<'_, c64>, space: &WeightedSpace, drop_tol: f64) -> Result<ComplexMatrix> {
    expect_dim("w_orthonormalize", space.dim(), v.nrows())?;
    let n = v.nrows();
    let w = space.weight();
    let mut basis: Vec<faer::Col<c64>> = Vec::new();
    let mut wbasis: Vec<faer::Col<c64>> = Vec::new();
    for j in 0..v.ncols() {
        let mut x: faer::Col<c64> = v.col(j).to_owned();
        let orig = space.norm(&x);
        if orig == 0.0 {
            continue;
        }
        for _pass in 0..2 {
            for (q, wq) in basis.iter().zip(&wbasis) {
                // <x, q>_W = q^* W x = (W q)^* x
                let mut c = c64::new(0.0, 0.0);
                for i in 0..n {
                    c += wq[i].conj() * x[i];
                }
                for i in 0..n {
                    x[i] -= c * q[i];
                }
            }
        }
        let nrm = space.norm(&x);
        if nrm <= drop_tol * orig {
            continue;
        }
        for i in 0..n {
            x[i] /= nrm;
        }
        let wx = w * &x;
        basis.push(x);
        wbasis.push(wx);
    }
    Ok(Mat::from_fn(n, basis.len(), |i, j| basis[j][i]))
}

/// Largest principal angle (radians, in `[0, pi/2]`) between the spans of two
/// W-orthonormal bases with equal column counts.
///
/// Small angles come from the sine (norm of the W-projection residual) so that
/// values near zero keep full relative accuracy; large ones from the cosine.
pub fn principal_angle(u: MatRef<'_, c64>, v: MatRef<'_, c64>, space: &WeightedSpace) -> Result<f64> {
    expect_dim("principal_angle (rows of U)", space.dim(), u.nrows())?;
    expect_dim("principal_angle (rows of V)", space.dim(), v.nrows())?;
    expect_dim("principal_angle (column counts)", u.ncols(), v.ncols())?;
    if u.ncols() == 0 {
        return Ok(0.0);
    }
    let m = space.gram(u, v);
    let residual = sub(v, mul(u, m.as_ref()).as_ref());
    let lr = mul(adjoint(space.cholesky().as_ref()).as_ref(), residual.as_ref());
    let sin_max = singular_values(lr.as_ref())?.first().copied().unwrap_or(0.0).min(1.0);
    if sin_max < core::f64::consts::FRAC_1_SQRT_2 {
        return Ok(sin_max.asin());
    }
    let cos_min = singular_values(m.as_ref())?.last().copied().unwrap_or(0.0).min(1.0);
    Ok(cos_min.acos())
}
