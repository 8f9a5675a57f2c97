use alloc::vec::Vec;

use faer::{Mat, MatRef};
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use super::{c64, check_finite, check_square, ComplexMatrix};
use crate::{Error, Result};

/// Relative peripheral tolerance used when none is given: `|Re lambda| <= 1e-8 * ||A||_1`.
pub const DEFAULT_PERIPHERAL_REL_TOL: f64 = 1e-8;

/// Eigenvalues of an operator together with the peripheral (near-imaginary) part.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Sorted by decreasing real part.
    pub eigenvalues: Vec<c64>,
    pub max_real_part: f64,
    pub peripheral: Vec<c64>,
    pub re_tol: f64,
}

impl SpectralReport {
    pub fn new(mut eigenvalues: Vec<c64>, re_tol: f64) -> Self {
        sort_by_real_desc(&mut eigenvalues);
        let max_real_part = eigenvalues
            .first()
            .map_or(f64::NEG_INFINITY, |z| z.re);
        let peripheral = eigenvalues
            .iter()
            .copied()
            .filter(|z| z.re.abs() <= re_tol)
            .collect();
        Self {
            eigenvalues,
            max_real_part,
            peripheral,
            re_tol,
        }
    }

    /// Smallest `|Re lambda|` over eigenvalues with `|Im lambda| > |Re lambda|`
    /// (the oscillatory branch); `None` if there are none.
    pub fn min_abs_real_oscillatory(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|z| z.im.abs() > z.re.abs())
            .map(|z| z.re.abs())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    /// `min |Re lambda|` over all eigenvalues.
    pub fn min_abs_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues with unit-norm right eigenvectors stored column-wise in the same order.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub report: SpectralReport,
    pub vectors: ComplexMatrix,
}

fn sort_by_real_desc(values: &mut [c64]) {
    values.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(core::cmp::Ordering::Equal))
    });
}

/// Induced 1-norm, the scale used for relative tolerances across the crate.
pub fn one_norm(a: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let mut s = 0.0;
        for i in 0..a.nrows() {
            s += a[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

/// Full eigendecomposition of a square matrix.
pub fn eig(a: MatRef<'_, c64>) -> Result<Eigensystem> {
    let n = check_square(a)?;
    check_finite(a, "eig input")?;
    let re_tol = DEFAULT_PERIPHERAL_REL_TOL * one_norm(a);
    if n == 0 {
        return Ok(Eigensystem {
            report: SpectralReport::new(Vec::new(), re_tol),
            vectors: Mat::zeros(0, 0),
        });
    }
    let evd = a.eigen().map_err(|_| Error::NoConvergence("eigensolver"))?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<c64> = (0..n).map(|i| s[i]).collect();
    order.sort_by(|&i, &j| {
        vals[j]
            .re
            .partial_cmp(&vals[i].re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(vals[j].im.partial_cmp(&vals[i].im).unwrap_or(core::cmp::Ordering::Equal))
    });
    let mut vectors = Mat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut nrm = 0.0;
        for i in 0..n {
            nrm += u[(i, src)].norm_sqr();
        }
        let nrm = nrm.sqrt().max(f64::MIN_POSITIVE);
        for i in 0..n {
            vectors[(i, k)] = u[(i, src)] / nrm;
        }
    }
    let sorted: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
    for z in &sorted {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NoConvergence("eigensolver"));
        }
    }
    Ok(Eigensystem {
        report: SpectralReport::new(sorted, re_tol),
        vectors,
    })
}

/// Eigenvalues only (cheaper than [`eig`]), sorted by decreasing real part.
pub fn eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<c64>> {
    let n = check_square(a)?;
    check_finite(a, "eig input")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut vals = a
        .eigenvalues()
        .map_err(|_| Error::NoConvergence("eigensolver"))?;
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence("eigensolver"));
    }
    sort_by_real_desc(&mut vals);
    Ok(vals)
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues,
/// orthonormal eigenvectors as columns. Only the lower triangle is read.
pub fn hermitian_eigen(h: MatRef<'_, c64>) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = check_square(h)?;
    check_finite(h, "hermitian eigen input")?;
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NoConvergence("Hermitian eigensolver"))?;
    let s = evd.S();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{cplx, from_real_rows, mul, real_diag, shift};

    fn residual(a: MatRef<'_, c64>, es: &Eigensystem) -> f64 {
        let mut worst = 0.0_f64;
        for (k, &lam) in es.report.eigenvalues.iter().enumerate() {
            let v = es.vectors.as_ref().subcols(k, 1);
            let r = mul(shift(a, lam).as_ref(), v);
            worst = worst.max(r.norm_l2());
        }
        worst
    }

    #[test]
    fn diagonal_spectrum() {
        let a = real_diag(&[1.0, 2.0, 3.0]);
        let es = eig(a.as_ref()).unwrap();
        let vals = &es.report.eigenvalues;
        for (got, want) in vals.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - cplx(want, 0.0)).norm() < 1e-14);
        }
        assert_eq!(es.report.max_real_part, vals[0].re);
        assert!(residual(a.as_ref(), &es) < 1e-13);
    }

    #[test]
    fn rotation_generator_spectrum() {
        let a = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let es = eig(a.as_ref()).unwrap();
        let mut ims: Vec<f64> = es.report.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(es.report.eigenvalues.iter().all(|z| z.re.abs() < 1e-14));
        assert_eq!(es.report.peripheral.len(), 2);
        assert!(residual(a.as_ref(), &es) < 1e-13);
    }

    #[test]
    fn turing_sum_spectrum() {
        let a = from_real_rows(&[&[0.0, -1.0, 1.0], &[1.0, 0.0, 0.0], &[-1.0, 0.0, -1.0]]);
        let b = from_real_rows(&[&[0.0, 2.0, -1.0], &[-2.0, 0.0, 0.0], &[1.0, 0.0, -1.0]]);
        let sum = crate::numkernel::add(a.as_ref(), b.as_ref());
        let vals = eigenvalues(sum.as_ref()).unwrap();
        let expected = [cplx(0.0, 1.0), cplx(0.0, -1.0), cplx(-2.0, 0.0)];
        for e in expected {
            assert!(vals.iter().any(|z| (z - e).norm() < 1e-12));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let rect = Mat::<c64>::zeros(2, 3);
        assert!(matches!(eig(rect.as_ref()), Err(Error::NotSquare { .. })));
        let mut nan = real_diag(&[1.0, 2.0]);
        nan[(0, 1)] = cplx(f64::NAN, 0.0);
        assert!(matches!(eig(nan.as_ref()), Err(Error::NonFinite(_))));
    }

    #[test]
    fn hermitian_eigen_is_sorted() {
        let h = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (vals, _) = hermitian_eigen(h.as_ref()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
    }
}
