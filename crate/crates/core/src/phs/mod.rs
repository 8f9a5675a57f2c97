//! Second-order dissipative port-Hamiltonian operators on `(0, 1)`:
//!
//! `L x = (P1 d + P0 + (G1 d + G0) S (G1^* d - G0^*)) H x`
//!
//! with boundary conditions `tilde_W_B (Hx(1), x_p(1), Hx(0), x_p(0)) = 0`,
//! where `x_p = S (G1^* d - G0^*) H x`. The extended operator carries `x_p`
//! as an independent field. Both act in the energy inner product `1/2 int g^* H f`.

mod boundary;
mod wave_heat;

pub use boundary::{
    check_boundary, compute_w_b, generation_check, heat_bc_sigma_matrix, heat_stability_conditions,
    tilde_from_w_b, BoundaryCheckReport, GenerationCheck, HeatCondition, HeatConditions, SigmaMatrix,
};
pub use wave_heat::{wave_heat_build, WaveHeatSpec, WaveHeatSystem};

use alloc::format;
use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::closure::{closure_identity_residual, concat};
use crate::discretize::{
    block_multiplication, restrict, sample_coefficient, sbp_first_derivative, Coefficient, ConstrainedOperator, Grid1D,
    Location,
};
use crate::numkernel::{
    adjoint, c64, check_finite, hermitian_eigen, hermitian_part, identity, kron, matvec, max_abs, mul, rank, real,
    scale, sub, zeros, ComplexMatrix, ComplexVector, WeightedSpace, RANK_TOL,
};
use crate::{Error, Result};

/// Tolerance for the symmetry of `P1` and the skew symmetry of `P0`.
pub const STRUCTURE_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct PHSystemSpec {
    pub n: usize,
    pub r: usize,
    pub p0: ComplexMatrix,
    pub p1: ComplexMatrix,
    pub g0: ComplexMatrix,
    pub g1: ComplexMatrix,
    pub hamiltonian: Coefficient,
    pub s: Coefficient,
    pub tilde_wb: ComplexMatrix,
    pub grid: Grid1D,
}

/// Pointwise lower bounds `H >= m I` and `Re S >= nu I` over the grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecBounds {
    pub m: f64,
    pub nu: f64,
}

fn check_shape(what: &'static str, a: MatRef<'_, c64>, rows: usize, cols: usize) -> Result<()> {
    if a.nrows() != rows || a.ncols() != cols {
        return Err(Error::invalid(
            what,
            format!("expected {rows}x{cols}, got {}x{}", a.nrows(), a.ncols()),
        ));
    }
    check_finite(a, what)
}

impl PHSystemSpec {
    /// The heat equation `z' = d(S dz)`: `n = r = 1`, `P1 = P0 = G0 = 0`, `G1 = 1`, `H = 1`.
    pub fn heat(tilde_wb: ComplexMatrix, s: Coefficient, grid: Grid1D) -> Self {
        Self {
            n: 1,
            r: 1,
            p0: zeros(1, 1),
            p1: zeros(1, 1),
            g0: zeros(1, 1),
            g1: identity(1),
            hamiltonian: Coefficient::scalar(real(1.0)),
            s,
            tilde_wb,
            grid,
        }
    }

    pub fn validate(&self) -> Result<SpecBounds> {
        let (n, r) = (self.n, self.r);
        if n == 0 || r == 0 {
            return Err(Error::invalid("port-Hamiltonian sizes", "n and r must be positive"));
        }
        check_shape("P0", self.p0.as_ref(), n, n)?;
        check_shape("P1", self.p1.as_ref(), n, n)?;
        check_shape("G0", self.g0.as_ref(), n, r)?;
        check_shape("G1", self.g1.as_ref(), n, r)?;
        check_shape("tilde W_B", self.tilde_wb.as_ref(), n + r, 2 * (n + r))?;
        let p1_asym = max_abs(sub(self.p1.as_ref(), adjoint(self.p1.as_ref()).as_ref()).as_ref());
        if p1_asym > STRUCTURE_TOL * max_abs(self.p1.as_ref()).max(1.0) {
            return Err(Error::invalid("P1", format!("not self-adjoint (asymmetry {p1_asym:e})")));
        }
        let p0_sym = max_abs(crate::numkernel::add(self.p0.as_ref(), adjoint(self.p0.as_ref()).as_ref()).as_ref());
        if p0_sym > STRUCTURE_TOL * max_abs(self.p0.as_ref()).max(1.0) {
            return Err(Error::invalid("P0", format!("not skew-adjoint (symmetric part {p0_sym:e})")));
        }
        let wb_rank = rank(self.tilde_wb.as_ref(), RANK_TOL)?;
        if wb_rank != n + r {
            return Err(Error::invalid(
                "tilde W_B",
                format!("rank {wb_rank}, need full rank {}", n + r),
            ));
        }
        if self.hamiltonian.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "Hamiltonian density",
                expected: n,
                actual: self.hamiltonian.dim(),
            });
        }
        if self.s.dim() != r {
            return Err(Error::DimensionMismatch {
                context: "dissipation coefficient S",
                expected: r,
                actual: self.s.dim(),
            });
        }
        let mut m = f64::INFINITY;
        let mut nu = f64::INFINITY;
        for z in self.grid.nodes() {
            let h = self.hamiltonian.eval(z)?;
            let asym = max_abs(sub(h.as_ref(), adjoint(h.as_ref()).as_ref()).as_ref());
            if asym > STRUCTURE_TOL * max_abs(h.as_ref()).max(1.0) {
                return Err(Error::invalid("Hamiltonian density", format!("not Hermitian at {z}")));
            }
            m = m.min(hermitian_eigen(hermitian_part(h.as_ref()).as_ref())?.0[0]);
            let s = self.s.eval(z)?;
            nu = nu.min(hermitian_eigen(hermitian_part(s.as_ref()).as_ref())?.0[0]);
        }
        if !(m > 0.0) {
            return Err(Error::WeightNotPositiveDefinite(format!("Hamiltonian lower bound m = {m:e}")));
        }
        if !(nu > 0.0) {
            return Err(Error::NotCoercive { nu });
        }
        Ok(SpecBounds { m, nu })
    }
}

/// `P1ext = [[P1, G1], [G1^*, 0]]` and `P0ext = [[P0, G0], [-G0^*, 0]]`.
pub fn assemble_p_ext(spec: &PHSystemSpec) -> (ComplexMatrix, ComplexMatrix) {
    let r = spec.r;
    let g1s = adjoint(spec.g1.as_ref());
    let g0s = scale(adjoint(spec.g0.as_ref()).as_ref(), real(-1.0));
    let p1ext = crate::numkernel::block2(spec.p1.as_ref(), spec.g1.as_ref(), g1s.as_ref(), zeros(r, r).as_ref());
    let p0ext = crate::numkernel::block2(spec.p0.as_ref(), spec.g0.as_ref(), g0s.as_ref(), zeros(r, r).as_ref());
    (p1ext, p0ext)
}

/// Matched discretizations of `L` (the closure operator `A_S`) and of the
/// extended operator on `(x, x_p)`, sharing the SBP derivative and samples.
#[derive(Debug, Clone)]
pub struct PhsDiscretization {
    pub a_s: ConstrainedOperator,
    pub a_ext: ConstrainedOperator,
    /// `(G1^* D - G0^*) H_op`, mapping `x` to the unclosed port variable.
    pub a21: ComplexMatrix,
    /// `S` sampled at the nodes.
    pub s_op: ComplexMatrix,
    pub bounds: SpecBounds,
}

impl PhsDiscretization {
    /// `(x, S A21 x)`.
    pub fn lift(&self, x: &ComplexVector) -> ComplexVector {
        let xp = matvec(self.s_op.as_ref(), &matvec(self.a21.as_ref(), x));
        concat(x, &xp)
    }

    /// Closure identity on the free operators, relative to `||x||`.
    pub fn closure_identity_residual(&self, x: &ComplexVector) -> Result<f64> {
        closure_identity_residual(
            self.a_ext.a_free.as_ref(),
            self.a_s.a_free.as_ref(),
            self.a21.as_ref(),
            self.s_op.as_ref(),
            x,
        )
    }

    /// `max |C_ext lift(x)|`: zero when `x` satisfies the `A_S` constraints.
    pub fn lift_constraint_residual(&self, x: &ComplexVector) -> f64 {
        let c = matvec(self.a_ext.constraints.as_ref(), &self.lift(x));
        (0..c.nrows()).map(|i| c[i].norm()).fold(0.0, f64::max)
    }
}

fn select_rows(a: MatRef<'_, c64>, rows: &[usize]) -> ComplexMatrix {
    Mat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Rows `component * n_nodes + node` for each component.
fn trace_rows(components: usize, n_nodes: usize, node: usize) -> Vec<usize> {
    (0..components).map(|k| k * n_nodes + node).collect()
}

/// Discrete `A_S` and `A_ext` for a validated spec on its grid.
pub fn discretize_l(spec: &PHSystemSpec) -> Result<PhsDiscretization> {
    let bounds = spec.validate()?;
    let (n, r) = (spec.n, spec.r);
    let grid = spec.grid;
    let nn = grid.n_nodes;
    let sbp = sbp_first_derivative(&grid)?;
    let id_n = identity(nn);

    let h_op = sample_coefficient(&spec.hamiltonian, &grid, Location::Nodes)?;
    let s_op = sample_coefficient(&spec.s, &grid, Location::Nodes)?;

    let nodes = grid.nodes();
    let tw = grid.trapezoid_weights();
    let mut h_weights = Vec::with_capacity(nn);
    for (z, w) in nodes.iter().zip(&tw) {
        h_weights.push(scale(spec.hamiltonian.eval(*z)?.as_ref(), real(0.5 * w)));
    }
    let space1 = WeightedSpace::new(block_multiplication(&h_weights))?;
    let half_w: Vec<ComplexMatrix> = tw
        .iter()
        .map(|w| Mat::from_fn(r, r, |i, j| if i == j { real(0.5 * w) } else { c64::new(0.0, 0.0) }))
        .collect();
    let space2 = WeightedSpace::new(block_multiplication(&half_w))?;

    let d = sbp.d.as_ref();
    let hamiltonian_part = crate::numkernel::add(
        kron(spec.p1.as_ref(), d).as_ref(),
        kron(spec.p0.as_ref(), id_n.as_ref()).as_ref(),
    );
    let a11 = mul(hamiltonian_part.as_ref(), h_op.as_ref());
    let a12 = crate::numkernel::add(
        kron(spec.g1.as_ref(), d).as_ref(),
        kron(spec.g0.as_ref(), id_n.as_ref()).as_ref(),
    );
    let a21 = mul(
        sub(
            kron(adjoint(spec.g1.as_ref()).as_ref(), d).as_ref(),
            kron(adjoint(spec.g0.as_ref()).as_ref(), id_n.as_ref()).as_ref(),
        )
        .as_ref(),
        h_op.as_ref(),
    );
    let sa21 = mul(s_op.as_ref(), a21.as_ref());
    let l_free = crate::numkernel::add(a11.as_ref(), mul(a12.as_ref(), sa21.as_ref()).as_ref());
    let a_ext_free = crate::numkernel::block2(a11.as_ref(), a12.as_ref(), a21.as_ref(), zeros(r * nn, r * nn).as_ref());

    // Trace maps onto (Hx(1), x_p(1), Hx(0), x_p(0)).
    let (right, left) = (nn - 1, 0);
    let hx_r = select_rows(h_op.as_ref(), &trace_rows(n, nn, right));
    let hx_l = select_rows(h_op.as_ref(), &trace_rows(n, nn, left));
    let xp_r = select_rows(sa21.as_ref(), &trace_rows(r, nn, right));
    let xp_l = select_rows(sa21.as_ref(), &trace_rows(r, nn, left));
    let trace_s = crate::numkernel::vstack(&[hx_r.as_ref(), xp_r.as_ref(), hx_l.as_ref(), xp_l.as_ref()]);

    let id_p = identity(r * nn);
    let ext_cols = |x_part: ComplexMatrix, p_part: ComplexMatrix| {
        crate::numkernel::hstack(&[x_part.as_ref(), p_part.as_ref()])
    };
    let zx = |rows: usize| zeros(rows, n * nn);
    let zp = |rows: usize| zeros(rows, r * nn);
    let trace_ext = crate::numkernel::vstack(&[
        ext_cols(hx_r, zp(n)).as_ref(),
        ext_cols(zx(r), select_rows(id_p.as_ref(), &trace_rows(r, nn, right))).as_ref(),
        ext_cols(hx_l, zp(n)).as_ref(),
        ext_cols(zx(r), select_rows(id_p.as_ref(), &trace_rows(r, nn, left))).as_ref(),
    ]);

    let c_s = mul(spec.tilde_wb.as_ref(), trace_s.as_ref());
    let c_ext = mul(spec.tilde_wb.as_ref(), trace_ext.as_ref());
    let product = WeightedSpace::direct_sum(&[&space1, &space2]);
    Ok(PhsDiscretization {
        a_s: restrict(l_free, c_s, space1)?,
        a_ext: restrict(a_ext_free, c_ext, product)?,
        a21,
        s_op,
        bounds,
    })
}

/// The heat equation `z' = d(S dz)` on `grid` with boundary matrix `tilde_wb` (2x4).
pub fn heat_general_bc(tilde_wb: ComplexMatrix, s: Coefficient, grid: Grid1D) -> Result<PhsDiscretization> {
    discretize_l(&PHSystemSpec::heat(tilde_wb, s, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Coefficient;
    use crate::numkernel::{
        eigenvalues, from_real_rows, numerical_abscissa, vector, w_orthonormalize,
    };
    use crate::stability::{limit_projection, LimitProjection};
    use core::f64::consts::PI;

    fn dirichlet() -> ComplexMatrix {
        from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]])
    }

    fn nonlocal() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0, 1.0, -1.0], &[1.0, 1.0, 0.0, 0.0]])
    }

    fn neumann() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]])
    }

    fn max_re(a: MatRef<'_, c64>) -> f64 {
        eigenvalues(a).unwrap().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    fn unit() -> Coefficient {
        Coefficient::scalar(real(1.0))
    }

    #[test]
    fn p_ext_heat_case() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        let spec = PHSystemSpec::heat(dirichlet(), unit(), g);
        let (p1, p0) = assemble_p_ext(&spec);
        assert_eq!(p1, from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(p0, zeros(2, 2));
    }

    #[test]
    fn p_ext_structure_random() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        let p1 = from_real_rows(&[&[2.0, 0.5], &[0.5, -1.0]]);
        let p0 = from_real_rows(&[&[0.0, 0.3], &[-0.3, 0.0]]);
        let g0 = from_real_rows(&[&[0.7], &[-0.2]]);
        let g1 = from_real_rows(&[&[1.5], &[0.4]]);
        let spec = PHSystemSpec {
            n: 2,
            r: 1,
            p0,
            p1,
            g0,
            g1,
            hamiltonian: Coefficient::Constant(identity(2)),
            s: unit(),
            tilde_wb: crate::numkernel::hstack(&[identity(3).as_ref(), zeros(3, 3).as_ref()]),
            grid: g,
        };
        spec.validate().unwrap();
        let (e1, e0) = assemble_p_ext(&spec);
        assert!(max_abs(sub(e1.as_ref(), adjoint(e1.as_ref()).as_ref()).as_ref()) <= 1e-14);
        assert!(max_abs(crate::numkernel::add(e0.as_ref(), adjoint(e0.as_ref()).as_ref()).as_ref()) <= 1e-14);
        assert_eq!(e0[(2, 0)], real(-0.7));
    }

    #[test]
    fn validation_errors() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        let mut spec = PHSystemSpec::heat(dirichlet(), unit(), g);
        spec.p1 = identity(1);
        spec.p0 = identity(1);
        assert!(matches!(spec.validate(), Err(Error::InvalidInput { what: "P0", .. })));
        let spec = PHSystemSpec::heat(from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]]), unit(), g);
        assert!(spec.validate().is_err());
        let spec = PHSystemSpec::heat(dirichlet(), Coefficient::scalar(real(-1.0)), g);
        assert!(matches!(spec.validate(), Err(Error::NotCoercive { .. })));
        let mut spec = PHSystemSpec::heat(dirichlet(), unit(), g);
        spec.hamiltonian = Coefficient::scalar(real(0.0));
        assert!(matches!(spec.validate(), Err(Error::WeightNotPositiveDefinite(_))));
    }

    #[test]
    fn dirichlet_heat_spectrum() {
        let g = Grid1D::new(0.0, 1.0, 401).unwrap();
        let disc = heat_general_bc(dirichlet(), unit(), g).unwrap();
        let mut ev: Vec<f64> = eigenvalues(disc.a_s.a_restricted.as_ref()).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let pi2 = PI * PI;
        assert!((ev[0] + pi2).abs() <= 0.01 * pi2, "leading {}", ev[0]);
        // The wide stencil D S D pairs modes on the even and odd sub-grids.
        assert!(ev.iter().take(6).any(|e| (e + 4.0 * pi2).abs() <= 0.02 * 4.0 * pi2));
    }

    #[test]
    fn closure_identity_and_lift() {
        let g = Grid1D::new(0.0, 1.0, 30).unwrap();
        let s = Coefficient::scalar_fn(|z| c64::new(1.0 + z, 0.3 * z));
        let disc = heat_general_bc(nonlocal(), s, g).unwrap();
        let scale = max_abs(disc.a_ext.a_free.as_ref());
        for k in 0..disc.a_s.dim() {
            let mut c = Mat::zeros(disc.a_s.dim(), 1);
            c[(k, 0)] = real(1.0);
            let x = disc.a_s.lift(&c.col(0).to_owned());
            assert!(disc.closure_identity_residual(&x).unwrap() <= 1e-11 * scale);
            assert!(disc.lift_constraint_residual(&x) <= 1e-9 * scale);
        }
    }

    #[test]
    fn nonlocal_heat_is_exponentially_stable() {
        let mut rates = Vec::new();
        for nodes in [101, 201] {
            let g = Grid1D::new(0.0, 1.0, nodes).unwrap();
            let disc = heat_general_bc(nonlocal(), unit(), g).unwrap();
            let m = max_re(disc.a_s.a_restricted.as_ref());
            assert!(m < -0.5);
            rates.push(m);
        }
        assert!((rates[0] - rates[1]).abs() <= 0.2 * rates[1].abs());
    }

    #[test]
    fn generation_implies_dissipative_extension() {
        let g = Grid1D::new(0.0, 1.0, 40).unwrap();
        for wb in [dirichlet(), nonlocal(), neumann()] {
            let disc = heat_general_bc(wb, unit(), g).unwrap();
            let a = &disc.a_ext;
            let ab = numerical_abscissa(a.a_restricted.as_ref(), &a.coordinate_space()).unwrap();
            assert!(ab <= 1e-10 * max_abs(a.a_restricted.as_ref()), "abscissa {ab}");
        }
    }

    #[test]
    fn neumann_limit_is_mean() {
        let g = Grid1D::new(0.0, 1.0, 25).unwrap();
        let disc = heat_general_bc(neumann(), unit(), g).unwrap();
        let a = &disc.a_s;
        let LimitProjection::Projection(p) = limit_projection(a.a_restricted.as_ref(), &a.coordinate_space(), 1e-8).unwrap()
        else {
            panic!("expected a limit");
        };
        let w = a.space.weight();
        let full = mul(mul(a.k_basis.as_ref(), p.as_ref()).as_ref(), mul(adjoint(a.k_basis.as_ref()).as_ref(), w.as_ref()).as_ref());
        let ones = Mat::from_fn(25, 1, |_, _| real(1.0));
        let q = w_orthonormalize(ones.as_ref(), &a.space, 1e-12).unwrap();
        let mean = crate::stability::w_projection(q.as_ref(), &a.space);
        assert!(max_abs(sub(full.as_ref(), mean.as_ref()).as_ref()) <= 1e-8);
        let x = vector(&[real(1.0); 25]);
        assert!(max_abs(mul(a.a_free.as_ref(), Mat::from_fn(25, 1, |i, _| x[i]).as_ref()).as_ref()) <= 1e-10);
    }

    #[test]
    fn p_ext_singular_for_wide_g1() {
        // r > n forces a kernel in [[P1, G1], [G1^*, 0]].
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        let spec = PHSystemSpec {
            n: 1,
            r: 2,
            p0: zeros(1, 1),
            p1: identity(1),
            g0: zeros(1, 2),
            g1: from_real_rows(&[&[0.3, -1.2]]),
            hamiltonian: unit(),
            s: Coefficient::Constant(identity(2)),
            tilde_wb: crate::numkernel::hstack(&[identity(3).as_ref(), zeros(3, 3).as_ref()]),
            grid: g,
        };
        let (p1ext, _) = assemble_p_ext(&spec);
        assert!(rank(p1ext.as_ref(), RANK_TOL).unwrap() < 3);
        assert!(compute_w_b(spec.tilde_wb.as_ref(), p1ext.as_ref()).is_err());
    }
}
