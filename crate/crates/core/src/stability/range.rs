use alloc::vec::Vec;

use faer::MatRef;

use crate::numkernel::{c64, check_square, column, expect_dim, expm, hermitian_part, matvec, mul, scale, WeightedSpace};
use crate::{Error, Result};

/// Support points of the W-numerical range by Johnson's rotation method: for
/// each of `angles` equally spaced `theta`, the top eigenvector `v` of the
/// pencil `(Herm(e^{i theta} W A), W)` gives the boundary point `<A v, v>_W`.
pub fn numerical_range_boundary(a: MatRef<'_, c64>, space: &WeightedSpace, angles: usize) -> Result<Vec<c64>> {
    let n = check_square(a)?;
    expect_dim("numerical_range_boundary", space.dim(), n)?;
    if angles < 3 {
        return Err(Error::invalid("angles", "need at least 3"));
    }
    let wa = mul(space.weight().as_ref(), a);
    let mut points = Vec::with_capacity(angles);
    for k in 0..angles {
        let theta = 2.0 * core::f64::consts::PI * k as f64 / angles as f64;
        let rot = c64::from_polar(1.0, theta);
        let form = hermitian_part(scale(wa.as_ref(), rot).as_ref());
        let (_, vecs) = space.pencil_eigen(form.as_ref())?;
        let v = column(vecs.as_ref(), n - 1);
        let av = matvec(a, &v);
        points.push(space.inner(&av, &v));
    }
    Ok(points)
}

/// Largest `|arg(-z)|` over the points: the half-opening of the smallest sector
/// around the negative real axis containing them. Points at the origin are ignored.
pub fn sector_half_angle(points: &[c64]) -> f64 {
    let scale = points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    points
        .iter()
        .filter(|z| z.norm() > 1e-14 * scale)
        .map(|z| (-z).arg().abs())
        .fold(0.0, f64::max)
}

/// True iff every entry of `e^{tA}` has real part `>= -tol` and imaginary
/// part of modulus `<= tol`, for each `t`.
pub fn positivity_probe(a: MatRef<'_, c64>, times: &[f64], tol: f64) -> Result<bool> {
    check_square(a)?;
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("positivity times", "must be positive"));
    }
    for &t in times {
        let e = expm(scale(a, c64::new(t, 0.0)).as_ref())?;
        for j in 0..e.ncols() {
            for i in 0..e.nrows() {
                let z = e[(i, j)];
                if z.re < -tol || z.im.abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{cplx, diag, from_real_rows, identity, real};
    use core::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn range_of_minus_identity() {
        let a = scale(identity(3).as_ref(), real(-1.0));
        let pts = numerical_range_boundary(a.as_ref(), &WeightedSpace::identity(3), 8).unwrap();
        assert!(pts.iter().all(|z| (z - real(-1.0)).norm() < 1e-14));
    }

    #[test]
    fn sector_of_diag_example() {
        let d: Vec<c64> = (1..=5).map(|n| cplx(-(n * n) as f64, -(n * n) as f64)).collect();
        let a = diag(&d);
        let pts = numerical_range_boundary(a.as_ref(), &WeightedSpace::identity(5), 16).unwrap();
        for z in &pts {
            assert!((z.arg() + 3.0 * FRAC_PI_4).abs() < 1e-10);
        }
        assert!((sector_half_angle(&pts) - FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn skew_range_is_imaginary() {
        let a = from_real_rows(&[&[0.0, 2.0], &[-2.0, 0.0]]);
        let pts = numerical_range_boundary(a.as_ref(), &WeightedSpace::identity(2), 6).unwrap();
        assert!(pts.iter().all(|z| z.re.abs() < 1e-13));
        assert!(numerical_range_boundary(a.as_ref(), &WeightedSpace::identity(2), 2).is_err());
    }

    #[test]
    fn positivity() {
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(!positivity_probe(rot.as_ref(), &[PI], 1e-12).unwrap());
        let m = scale(identity(2).as_ref(), real(-1.0));
        assert!(positivity_probe(m.as_ref(), &[0.5, 2.0], 1e-12).unwrap());
    }
}
