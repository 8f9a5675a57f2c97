//! Summation-by-parts discretizations on an interval, coefficient sampling,
//! and Galerkin restriction onto boundary-constraint kernels.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::numkernel::{
    adjoint, c64, check_finite, check_square, expect_dim, frobenius, mul, mul3, null_space, rank, real,
    scale, sub, w_orthonormalize, ComplexMatrix, ComplexVector, WeightedSpace, RANK_TOL,
};
use crate::{Error, Result};

/// Uniform grid on `[a, b]` with `n_nodes` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n_nodes: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid("grid interval", format!("need a < b, got [{a}, {b}]")));
        }
        if n_nodes < 2 {
            return Err(Error::invalid("grid nodes", format!("need at least 2, got {n_nodes}")));
        }
        Ok(Self { a, b, n_nodes })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n_nodes - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n_nodes)
            .map(|j| if j + 1 == self.n_nodes { self.b } else { self.a + j as f64 * h })
            .collect()
    }

    pub fn cell_midpoints(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n_nodes - 1).map(|j| self.a + (j as f64 + 0.5) * h).collect()
    }

    /// Trapezoid weights `h * (1/2, 1, ..., 1, 1/2)`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        let n = self.n_nodes;
        (0..n).map(|j| if j == 0 || j + 1 == n { 0.5 * h } else { h }).collect()
    }
}

/// Second-order SBP first derivative `D` with norm `W`:
/// `W D + D^* W = e_N e_N^* - e_0 e_0^*`.
#[derive(Debug, Clone)]
pub struct SBPOperator {
    pub d: ComplexMatrix,
    pub w: WeightedSpace,
    pub e0: ComplexVector,
    pub en: ComplexVector,
}

impl SBPOperator {
    /// `||W D + D^* W - (e_N e_N^* - e_0 e_0^*)||_F / ||W D||_F`.
    pub fn identity_residual(&self) -> f64 {
        let wd = mul(self.w.weight().as_ref(), self.d.as_ref());
        let mut sym = crate::numkernel::add(wd.as_ref(), adjoint(wd.as_ref()).as_ref());
        let n = self.d.nrows();
        sym[(n - 1, n - 1)] -= real(1.0);
        sym[(0, 0)] += real(1.0);
        frobenius(sym.as_ref()) / frobenius(wd.as_ref())
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }
}

fn unit(n: usize, k: usize) -> ComplexVector {
    faer::Col::from_fn(n, |i| if i == k { real(1.0) } else { c64::new(0.0, 0.0) })
}

/// Centered interior stencil, first-order one-sided boundary rows, trapezoid norm.
pub fn sbp_first_derivative(grid: &Grid1D) -> Result<SBPOperator> {
    let n = grid.n_nodes;
    if n < 3 {
        return Err(Error::invalid("SBP grid", format!("need at least 3 nodes, got {n}")));
    }
    let h = grid.h();
    let mut d = Mat::zeros(n, n);
    d[(0, 0)] = real(-1.0 / h);
    d[(0, 1)] = real(1.0 / h);
    for i in 1..n - 1 {
        d[(i, i - 1)] = real(-0.5 / h);
        d[(i, i + 1)] = real(0.5 / h);
    }
    d[(n - 1, n - 2)] = real(-1.0 / h);
    d[(n - 1, n - 1)] = real(1.0 / h);
    Ok(SBPOperator {
        d,
        w: WeightedSpace::from_diagonal(&grid.trapezoid_weights())?,
        e0: unit(n, 0),
        en: unit(n, n - 1),
    })
}

/// Forward difference from nodes to cells with its two weighted spaces.
#[derive(Debug, Clone)]
pub struct StaggeredPair {
    pub d_plus: ComplexMatrix,
    pub w_nodes: WeightedSpace,
    pub w_cells: WeightedSpace,
}

impl StaggeredPair {
    /// `adj(d_plus)` between the node and cell weights (a negative divergence).
    pub fn adjoint(&self) -> Result<ComplexMatrix> {
        crate::numkernel::weighted_adjoint(self.d_plus.as_ref(), &self.w_nodes, &self.w_cells)
    }

    /// `-adj(d_plus) S d_plus` for a coefficient `s` sampled on cells.
    pub fn divergence_form(&self, s: MatRef<'_, c64>) -> Result<ComplexMatrix> {
        expect_dim("coefficient on cells", self.d_plus.nrows(), s.nrows())?;
        let adj = self.adjoint()?;
        Ok(scale(mul3(adj.as_ref(), s, self.d_plus.as_ref()).as_ref(), real(-1.0)))
    }

    /// Discrete Neumann Laplacian `-adj(d_plus) d_plus`.
    pub fn neumann_laplacian(&self) -> Result<ComplexMatrix> {
        let id = crate::numkernel::identity(self.d_plus.nrows());
        self.divergence_form(id.as_ref())
    }
}

pub fn staggered_gradient(grid: &Grid1D) -> Result<StaggeredPair> {
    let n = grid.n_nodes;
    let h = grid.h();
    let mut d_plus = Mat::zeros(n - 1, n);
    for j in 0..n - 1 {
        d_plus[(j, j)] = real(-1.0 / h);
        d_plus[(j, j + 1)] = real(1.0 / h);
    }
    Ok(StaggeredPair {
        d_plus,
        w_nodes: WeightedSpace::from_diagonal(&grid.trapezoid_weights())?,
        w_cells: WeightedSpace::from_diagonal(&alloc::vec![h; n - 1])?,
    })
}

/// An operator restricted to the kernel of linear constraint rows.
///
/// `a_restricted = K^{*W} A K` acts on coordinates `c` with `x = K c`; since
/// `K` is W-orthonormal, the coordinate space carries the identity weight and
/// Euclidean quantities on `a_restricted` are W-quantities on the subspace.
#[derive(Debug, Clone)]
pub struct ConstrainedOperator {
    pub a_free: ComplexMatrix,
    pub constraints: ComplexMatrix,
    pub space: WeightedSpace,
    pub k_basis: ComplexMatrix,
    pub a_restricted: ComplexMatrix,
}

impl ConstrainedOperator {
    pub fn dim(&self) -> usize {
        self.k_basis.ncols()
    }

    /// Identity-weighted coordinate space of the restriction.
    pub fn coordinate_space(&self) -> WeightedSpace {
        WeightedSpace::identity(self.dim())
    }

    /// `x = K c`.
    pub fn lift(&self, coords: &ComplexVector) -> ComplexVector {
        crate::numkernel::matvec(self.k_basis.as_ref(), coords)
    }

    /// `c = K^* W x`, exact for `x` in the constrained subspace.
    pub fn coordinates(&self, x: &ComplexVector) -> ComplexVector {
        let wx = crate::numkernel::matvec(self.space.weight().as_ref(), x);
        crate::numkernel::matvec(adjoint(self.k_basis.as_ref()).as_ref(), &wx)
    }

    /// `max |constraints * K|`.
    pub fn constraint_residual(&self) -> f64 {
        crate::numkernel::max_abs(mul(self.constraints.as_ref(), self.k_basis.as_ref()).as_ref())
    }

    /// `||K^* W K - I||_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.space.gram(self.k_basis.as_ref(), self.k_basis.as_ref());
        frobenius(sub(g.as_ref(), crate::numkernel::identity(self.dim()).as_ref()).as_ref())
    }
}

/// W-orthonormal basis of `ker(constraints)`; the rows must be independent.
pub fn constraint_kernel(constraints: MatRef<'_, c64>, space: &WeightedSpace) -> Result<ComplexMatrix> {
    let n = space.dim();
    expect_dim("constraint columns", n, constraints.ncols())?;
    check_finite(constraints, "constraints")?;
    let k = constraints.nrows();
    if k == 0 {
        return w_orthonormalize(crate::numkernel::identity(n).as_ref(), space, 1e-12);
    }
    let r = rank(constraints, RANK_TOL)?;
    if r < k {
        return Err(Error::RankDeficientConstraints { rank: r, rows: k });
    }
    if k >= n {
        return Err(Error::invalid(
            "constraints",
            format!("{k} independent rows leave no free subspace in dimension {n}"),
        ));
    }
    let basis = null_space(constraints, RANK_TOL)?;
    expect_dim("constraint kernel dimension", n - k, basis.ncols())?;
    // K = B L^{-*} with B^* W B = L L^*, so K^* W K = I.
    let gram = crate::numkernel::hermitian_part(space.gram(basis.as_ref(), basis.as_ref()).as_ref());
    let llt = gram
        .as_ref()
        .llt(faer::Side::Lower)
        .map_err(|_| Error::WeightNotPositiveDefinite("Gram matrix of the constraint kernel".into()))?;
    let mut kt = adjoint(basis.as_ref());
    llt.L().solve_lower_triangular_in_place(kt.as_mut());
    Ok(adjoint(kt.as_ref()))
}

/// Galerkin restriction of `a_free` to `ker(constraints)`.
pub fn restrict(a_free: ComplexMatrix, constraints: ComplexMatrix, space: WeightedSpace) -> Result<ConstrainedOperator> {
    let n = check_square(a_free.as_ref())?;
    expect_dim("restrict", space.dim(), n)?;
    let k_basis = constraint_kernel(constraints.as_ref(), &space)?;
    let a_restricted = {
        let wak = mul3(space.weight().as_ref(), a_free.as_ref(), k_basis.as_ref());
        mul(adjoint(k_basis.as_ref()).as_ref(), wak.as_ref())
    };
    Ok(ConstrainedOperator {
        a_free,
        constraints,
        space,
        k_basis,
        a_restricted,
    })
}

/// A (possibly matrix-valued) coefficient on an interval.
#[derive(Clone)]
pub enum Coefficient {
    Constant(ComplexMatrix),
    /// Right-continuous piecewise constant: `values[k]` holds on
    /// `[breakpoints[k-1], breakpoints[k])`; `values.len() = breakpoints.len() + 1`.
    Piecewise { breakpoints: Vec<f64>, values: Vec<ComplexMatrix> },
    Function { dim: usize, f: Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync> },
}

impl core::fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Self::Piecewise { breakpoints, values } => f
                .debug_struct("Piecewise")
                .field("breakpoints", breakpoints)
                .field("values", values)
                .finish(),
            Self::Function { dim, .. } => f.debug_struct("Function").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

impl Coefficient {
    pub fn scalar(value: c64) -> Self {
        Self::Constant(Mat::from_fn(1, 1, |_, _| value))
    }

    pub fn scalar_fn(f: impl Fn(f64) -> c64 + Send + Sync + 'static) -> Self {
        Self::Function {
            dim: 1,
            f: Arc::new(move |z| Mat::from_fn(1, 1, |_, _| f(z))),
        }
    }

    pub fn matrix_fn(dim: usize, f: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        Self::Function { dim, f: Arc::new(f) }
    }

    pub fn piecewise_scalar(breakpoints: Vec<f64>, values: &[c64]) -> Result<Self> {
        let values = values.iter().map(|&v| Mat::from_fn(1, 1, |_, _| v)).collect();
        Self::piecewise(breakpoints, values)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<ComplexMatrix>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::invalid(
                "piecewise coefficient",
                format!("{} breakpoints need {} values, got {}", breakpoints.len(), breakpoints.len() + 1, values.len()),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("piecewise coefficient", "breakpoints must be finite and increasing"));
        }
        let dim = values[0].nrows();
        for v in &values {
            check_square(v.as_ref())?;
            expect_dim("piecewise coefficient value", dim, v.nrows())?;
        }
        Ok(Self::Piecewise { breakpoints, values })
    }

    /// Size of the matrix values.
    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(m) => m.nrows(),
            Self::Piecewise { values, .. } => values[0].nrows(),
            Self::Function { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, z: f64) -> Result<ComplexMatrix> {
        let m = match self {
            Self::Constant(m) => m.clone(),
            Self::Piecewise { breakpoints, values } => {
                let k = breakpoints.iter().take_while(|&&b| z >= b).count();
                values[k].clone()
            }
            Self::Function { dim, f } => {
                let m = f(z);
                if m.nrows() != *dim || m.ncols() != *dim {
                    return Err(Error::DimensionMismatch {
                        context: "coefficient function value",
                        expected: *dim,
                        actual: m.nrows(),
                    });
                }
                m
            }
        };
        check_finite(m.as_ref(), "coefficient value")?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Nodes,
    Cells,
}

pub fn sample_points(grid: &Grid1D, location: Location) -> Vec<f64> {
    match location {
        Location::Nodes => grid.nodes(),
        Location::Cells => grid.cell_midpoints(),
    }
}

/// Multiplication operator of a sampled `m x m` coefficient, component-major:
/// entry `(a*N + j, b*N + j)` is `C_ab(z_j)`. For scalars this is a diagonal.
pub fn sample_coefficient(coef: &Coefficient, grid: &Grid1D, location: Location) -> Result<ComplexMatrix> {
    let pts = sample_points(grid, location);
    let samples = pts.iter().map(|&z| coef.eval(z)).collect::<Result<Vec<_>>>()?;
    Ok(block_multiplication(&samples))
}

/// Component-major multiplication operator from pointwise `m x m` samples.
pub fn block_multiplication(samples: &[ComplexMatrix]) -> ComplexMatrix {
    let np = samples.len();
    let m = samples.first().map_or(0, |s| s.nrows());
    let mut out = Mat::zeros(m * np, m * np);
    for (j, s) in samples.iter().enumerate() {
        for a in 0..m {
            for b in 0..m {
                out[(a * np + j, b * np + j)] = s[(a, b)];
            }
        }
    }
    out
}

/// Pointwise coercivity `min_j lambda_min(Herm C(z_j))` over the sample points.
pub fn pointwise_coercivity(coef: &Coefficient, points: &[f64]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &z in points {
        let c = coef.eval(z)?;
        let h = crate::numkernel::hermitian_part(c.as_ref());
        let (vals, _) = crate::numkernel::hermitian_eigen(h.as_ref())?;
        best = best.min(vals[0]);
    }
    Ok(best)
}
