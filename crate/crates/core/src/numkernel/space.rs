use alloc::format;
use alloc::vec::Vec;

use faer::{Mat, MatRef};
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use super::{adjoint, c64, check_finite, check_square, expect_dim, hermitian_eigen, mul, real, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// A finite-dimensional Hilbert space `C^dim` with inner product
/// `<x, y>_W = y^* W x` for a Hermitian positive-definite weight `W`.
///
/// The Cholesky factor `W = L L^*` is computed once at construction; it is
/// what turns every weighted question (abscissa, adjoint, principal angle)
/// into a standard Hermitian one.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    weight: ComplexMatrix,
    chol: ComplexMatrix,
}

impl WeightedSpace {
    pub fn new(weight: ComplexMatrix) -> Result<Self> {
        let n = check_square(weight.as_ref())?;
        check_finite(weight.as_ref(), "weight")?;
        let scale = super::max_abs(weight.as_ref()).max(f64::MIN_POSITIVE);
        let mut asym = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                asym = asym.max((weight[(i, j)] - weight[(j, i)].conj()).norm());
            }
        }
        if asym > 1e-12 * scale {
            return Err(Error::WeightNotPositiveDefinite(format!(
                "not Hermitian, asymmetry {asym:e}"
            )));
        }
        let weight = super::hermitian_part(weight.as_ref());
        if n == 0 {
            return Ok(Self { chol: Mat::zeros(0, 0), weight });
        }
        let llt = weight
            .as_ref()
            .llt(faer::Side::Lower)
            .map_err(|_| Error::WeightNotPositiveDefinite("Cholesky factorization failed".into()))?;
        let chol = llt.L().to_owned();
        for i in 0..n {
            let d = chol[(i, i)].re;
            if !(d > 0.0) || d * d <= 1e-15 * scale {
                return Err(Error::WeightNotPositiveDefinite(format!(
                    "pivot {i} is {:e}",
                    d * d
                )));
            }
        }
        Ok(Self { weight, chol })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            weight: Mat::identity(dim, dim),
            chol: Mat::identity(dim, dim),
        }
    }

    /// Diagonal weight, e.g. a trapezoid quadrature rule.
    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::WeightNotPositiveDefinite(format!(
                "diagonal entry {i} is {w}"
            )));
        }
        let n = weights.len();
        Ok(Self {
            weight: Mat::from_fn(n, n, |i, j| if i == j { real(weights[i]) } else { c64::new(0.0, 0.0) }),
            chol: Mat::from_fn(n, n, |i, j| if i == j { real(weights[i].sqrt()) } else { c64::new(0.0, 0.0) }),
        })
    }

    pub fn dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn weight(&self) -> &ComplexMatrix {
        &self.weight
    }

    /// Lower-triangular Cholesky factor `L` with `W = L L^*`.
    pub fn cholesky(&self) -> &ComplexMatrix {
        &self.chol
    }

    /// Smallest eigenvalue of the weight.
    pub fn min_weight_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = hermitian_eigen(self.weight.as_ref())?;
        Ok(vals.first().copied().unwrap_or(f64::INFINITY))
    }

    pub fn inner(&self, x: &ComplexVector, y: &ComplexVector) -> c64 {
        let wx = &self.weight * x;
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..wx.nrows() {
            acc += y[i].conj() * wx[i];
        }
        acc
    }

    pub fn norm(&self, x: &ComplexVector) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// Weighted Gram matrix `U^* W V`.
    pub fn gram(&self, u: MatRef<'_, c64>, v: MatRef<'_, c64>) -> ComplexMatrix {
        mul(adjoint(u).as_ref(), mul(self.weight.as_ref(), v).as_ref())
    }

    /// `W^{-1} rhs`.
    pub fn solve_weight(&self, rhs: MatRef<'_, c64>) -> Result<ComplexMatrix> {
        expect_dim("solve_weight", self.dim(), rhs.nrows())?;
        let mut x = rhs.to_owned();
        self.chol.as_ref().solve_lower_triangular_in_place(x.as_mut());
        let lh = adjoint(self.chol.as_ref());
        lh.as_ref().solve_upper_triangular_in_place(x.as_mut());
        Ok(x)
    }

    /// `L^{-1} M L^{-*}` for a square `M` on this space.
    fn congruence_inverse(&self, m: MatRef<'_, c64>) -> ComplexMatrix {
        let mut y = m.to_owned();
        self.chol.as_ref().solve_lower_triangular_in_place(y.as_mut());
        let mut z = adjoint(y.as_ref());
        self.chol.as_ref().solve_lower_triangular_in_place(z.as_mut());
        adjoint(z.as_ref())
    }

    /// Eigenvalues (ascending) of the Hermitian pencil `(form, W)`.
    pub fn pencil_eigenvalues(&self, form: MatRef<'_, c64>) -> Result<Vec<f64>> {
        Ok(self.pencil_eigen(form)?.0)
    }

    /// Eigenpairs of the Hermitian pencil `(form, W)`: `form x = lambda W x`,
    /// eigenvalues ascending, eigenvectors W-orthonormal (as columns).
    pub fn pencil_eigen(&self, form: MatRef<'_, c64>) -> Result<(Vec<f64>, ComplexMatrix)> {
        let n = check_square(form)?;
        expect_dim("pencil_eigen", self.dim(), n)?;
        let reduced = super::hermitian_part(self.congruence_inverse(form).as_ref());
        let (vals, mut vecs) = hermitian_eigen(reduced.as_ref())?;
        let lh = adjoint(self.chol.as_ref());
        lh.as_ref().solve_upper_triangular_in_place(vecs.as_mut());
        Ok((vals, vecs))
    }

    /// The operator `a` expressed in W-orthonormal coordinates, `L^* A L^{-*}`.
    /// Its Euclidean numerical range equals the W-numerical range of `a`.
    pub fn to_orthonormal_coords(&self, a: MatRef<'_, c64>) -> Result<ComplexMatrix> {
        let n = check_square(a)?;
        expect_dim("to_orthonormal_coords", self.dim(), n)?;
        let b = mul(adjoint(self.chol.as_ref()).as_ref(), a);
        let mut bt = adjoint(b.as_ref());
        self.chol.as_ref().solve_lower_triangular_in_place(bt.as_mut());
        Ok(adjoint(bt.as_ref()))
    }

    /// Product space with block-diagonal weight.
    pub fn product(&self, other: &WeightedSpace) -> WeightedSpace {
        WeightedSpace {
            weight: super::block_diag(&[self.weight.as_ref(), other.weight.as_ref()]),
            chol: super::block_diag(&[self.chol.as_ref(), other.chol.as_ref()]),
        }
    }

    /// Direct sum of several spaces.
    pub fn direct_sum(spaces: &[&WeightedSpace]) -> WeightedSpace {
        let w: Vec<MatRef<'_, c64>> = spaces.iter().map(|s| s.weight.as_ref()).collect();
        let l: Vec<MatRef<'_, c64>> = spaces.iter().map(|s| s.chol.as_ref()).collect();
        WeightedSpace {
            weight: super::block_diag(&w),
            chol: super::block_diag(&l),
        }
    }

    /// Same space with weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<WeightedSpace> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::WeightNotPositiveDefinite(format!("scale factor {factor}")));
        }
        Ok(WeightedSpace {
            weight: super::scale(self.weight.as_ref(), real(factor)),
            chol: super::scale(self.chol.as_ref(), real(factor.sqrt())),
        })
    }
}
