//! Parabolic systems `x_k' = A_{S_k} x_k + (V x)_k` on an interval, coupled by a
//! piecewise-constant matrix potential `V`, with Neumann-type boundary structure.
//!
//! Each `A_{S_k}` is a closure operator with `A11 = 0`: for heat coupling
//! `A21 = grad` (staggered forward difference) and for biharmonic coupling
//! `A21 = Delta_N`, `A12 = -Delta_N`. The potential enters as `A11 = V_op`.

use alloc::format;
use alloc::vec::Vec;

use faer::Mat;

use crate::closure::{assemble_a_s, SplitClosureSystem};
use crate::discretize::{
    block_multiplication, pointwise_coercivity, sample_coefficient, sample_points, staggered_gradient, Coefficient,
    Grid1D, Location,
};
use crate::numkernel::{
    block_diag, c64, eigenvalues, expm, identity, norm2, null_space, numerical_abscissa, real, scale, shifted_from,
    sub, vstack, w_orthonormalize, ComplexMatrix, ComplexVector, WeightedSpace, I, RANK_TOL,
};
use crate::stability::{propagate, w_projection, Scheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledKind {
    Heat,
    Biharmonic,
}

/// `V` equal to `v` on `(start, end]` (the first piece also owns `start`).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPiece {
    pub start: f64,
    pub end: f64,
    pub v: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct CoupledParabolicSpec {
    pub n_components: usize,
    pub grid: Grid1D,
    pub kind: CoupledKind,
    /// One scalar coefficient per component: `S_k` (heat, on cells) or `s_k`
    /// (biharmonic, at nodes).
    pub coefficients: Vec<Coefficient>,
    pub potential: Vec<PotentialPiece>,
}

impl CoupledParabolicSpec {
    /// Constant potential on the whole grid.
    pub fn constant(grid: Grid1D, kind: CoupledKind, coefficients: Vec<Coefficient>, v: ComplexMatrix) -> Self {
        Self {
            n_components: v.nrows(),
            grid,
            kind,
            coefficients,
            potential: alloc::vec![PotentialPiece { start: grid.a, end: grid.b, v }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_components;
        if n == 0 {
            return Err(Error::invalid("n_components", "must be at least 1"));
        }
        if self.coefficients.len() != n {
            return Err(Error::invalid(
                "coefficients",
                format!("need one per component ({n}), got {}", self.coefficients.len()),
            ));
        }
        if self.potential.is_empty() {
            return Err(Error::invalid("potential", "no pieces given"));
        }
        let tol = 1e-12 * (self.grid.b - self.grid.a);
        let mut at = self.grid.a;
        for (j, p) in self.potential.iter().enumerate() {
            if (p.start - at).abs() > tol || !(p.end > p.start) {
                return Err(Error::invalid(
                    "potential",
                    format!("piece {j} [{}, {}] does not continue the partition at {at}", p.start, p.end),
                ));
            }
            if p.v.nrows() != n || p.v.ncols() != n {
                return Err(Error::invalid("potential", format!("piece {j} is not {n}x{n}")));
            }
            crate::numkernel::check_finite(p.v.as_ref(), "potential piece")?;
            at = p.end;
        }
        if (at - self.grid.b).abs() > tol {
            return Err(Error::invalid("potential", format!("pieces end at {at}, grid at {}", self.grid.b)));
        }
        let loc = self.coefficient_location();
        let pts = sample_points(&self.grid, loc);
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.dim() != 1 {
                return Err(Error::invalid("coefficients", format!("component {k} coefficient must be scalar")));
            }
            let nu = pointwise_coercivity(c, &pts)?;
            if !(nu > 0.0) {
                return Err(Error::NotCoercive { nu });
            }
        }
        Ok(())
    }

    fn coefficient_location(&self) -> Location {
        match self.kind {
            CoupledKind::Heat => Location::Cells,
            CoupledKind::Biharmonic => Location::Nodes,
        }
    }

    /// Index of the piece owning `z`: a node on a breakpoint belongs to the left piece.
    fn piece_at(&self, z: f64) -> usize {
        let tol = 1e-12 * (self.grid.b - self.grid.a);
        self.potential
            .iter()
            .position(|p| z <= p.end + tol)
            .unwrap_or(self.potential.len() - 1)
    }
}

/// The assembled coupled operator with its closure decomposition.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    pub c: ComplexMatrix,
    pub space: WeightedSpace,
    pub system: SplitClosureSystem,
}

impl CoupledOperator {
    pub fn v_op(&self) -> &ComplexMatrix {
        &self.system.a11
    }

    pub fn a21(&self) -> &ComplexMatrix {
        &self.system.a21
    }

    /// `C - V_op`, the block-diagonal part `diag(A_{S_1}, ..., A_{S_N})`.
    pub fn diffusion_part(&self) -> ComplexMatrix {
        sub(self.c.as_ref(), self.system.a11.as_ref())
    }
}

/// Assembles `C = diag(A_{S_k}) + V_op` in component-major order
/// (entry `k * n_nodes + j` is component `k` at node `j`).
pub fn build_coupled_operator(spec: &CoupledParabolicSpec) -> Result<CoupledOperator> {
    spec.validate()?;
    let grid = &spec.grid;
    let n = spec.n_components;
    let pair = staggered_gradient(grid)?;
    let nodes_space = pair.w_nodes.clone();
    let samples: Vec<ComplexMatrix> = grid.nodes().iter().map(|&z| spec.potential[spec.piece_at(z)].v.clone()).collect();
    let v_op = block_multiplication(&samples);
    let space1 = WeightedSpace::direct_sum(&alloc::vec![&nodes_space; n]);
    let coefs = spec
        .coefficients
        .iter()
        .map(|c| sample_coefficient(c, grid, spec.coefficient_location()))
        .collect::<Result<Vec<_>>>()?;
    let coef_refs: Vec<_> = coefs.iter().map(|m| m.as_ref()).collect();
    let s = block_diag(&coef_refs);
    let system = match spec.kind {
        CoupledKind::Heat => {
            let a21 = block_diag(&alloc::vec![pair.d_plus.as_ref(); n]);
            let space2 = WeightedSpace::direct_sum(&alloc::vec![&pair.w_cells; n]);
            SplitClosureSystem::with_skew_pairing(v_op, a21, s, space1, space2)?
        }
        CoupledKind::Biharmonic => {
            let lap = pair.neumann_laplacian()?;
            let a21 = block_diag(&alloc::vec![lap.as_ref(); n]);
            let a12 = scale(a21.as_ref(), real(-1.0));
            let space2 = space1.clone();
            SplitClosureSystem::new(v_op, a12, a21, s, space1, space2)?
        }
    };
    let c = assemble_a_s(&system);
    Ok(CoupledOperator {
        c,
        space: system.space1.clone(),
        system,
    })
}

/// Piece `j` passes iff `numerical_abscissa(V_j) <= tol` (Euclidean weight on `C^N`).
pub fn check_v_dissipative(spec: &CoupledParabolicSpec, tol: f64) -> Result<Vec<bool>> {
    spec.potential
        .iter()
        .map(|p| {
            let space = WeightedSpace::identity(p.v.nrows());
            Ok(numerical_abscissa(p.v.as_ref(), &space)? <= tol)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VConditionVerdict {
    pub holds: bool,
    pub failing_beta: Option<f64>,
    pub witness: Option<ComplexVector>,
    pub per_piece_dissipative: Vec<bool>,
}

/// Decides whether `∩_j ker(i beta - V_j) = {0}` for every real `beta != 0`.
///
/// A nonzero vector in the intersection is an eigenvector of every piece, so
/// `i beta` must be an eigenvalue of the first piece; it suffices to test the
/// nonzero imaginary eigenvalues of that piece (`|Re| <= tol`, `|Im| > tol`).
pub fn check_v_condition(spec: &CoupledParabolicSpec, tol: f64) -> Result<VConditionVerdict> {
    let first = spec
        .potential
        .first()
        .ok_or_else(|| Error::invalid("potential", "no pieces given"))?;
    let per_piece_dissipative = check_v_dissipative(spec, tol)?;
    let mut betas: Vec<f64> = eigenvalues(first.v.as_ref())?
        .into_iter()
        .filter(|z| z.re.abs() <= tol && z.im.abs() > tol)
        .map(|z| z.im)
        .collect();
    betas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    for beta in betas {
        let k = common_kernel(spec, I * beta)?;
        if k.ncols() > 0 {
            let witness = crate::numkernel::column(k.as_ref(), 0);
            return Ok(VConditionVerdict {
                holds: false,
                failing_beta: Some(beta),
                witness: Some(witness),
                per_piece_dissipative,
            });
        }
    }
    Ok(VConditionVerdict {
        holds: true,
        failing_beta: None,
        witness: None,
        per_piece_dissipative,
    })
}

/// Orthonormal basis of `∩_j ker(lambda - V_j)` in `C^N`.
pub fn common_kernel(spec: &CoupledParabolicSpec, lambda: c64) -> Result<ComplexMatrix> {
    let blocks: Vec<ComplexMatrix> = spec.potential.iter().map(|p| shifted_from(lambda, p.v.as_ref())).collect();
    let refs: Vec<_> = blocks.iter().map(|b| b.as_ref()).collect();
    null_space(vstack(&refs).as_ref(), RANK_TOL)
}

/// Spatially constant lift `c -> (c_k * 1)_k` of vectors in `C^N`, as columns.
pub fn constant_lift(spec: &CoupledParabolicSpec, vectors: &ComplexMatrix) -> ComplexMatrix {
    let np = spec.grid.n_nodes;
    Mat::from_fn(spec.n_components * np, vectors.ncols(), |i, j| vectors[(i / np, j)])
}

/// W-orthogonal projection onto `{const ⊗ c : V_j c = 0 for all j}`.
pub fn predict_limit_projection(spec: &CoupledParabolicSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let k = common_kernel(spec, c64::new(0.0, 0.0))?;
    let lifted = constant_lift(spec, &k);
    let nodes = staggered_gradient(&spec.grid)?.w_nodes;
    let space = WeightedSpace::direct_sum(&alloc::vec![&nodes; spec.n_components]);
    let q = w_orthonormalize(lifted.as_ref(), &space, 1e-12)?;
    Ok(w_projection(q.as_ref(), &space))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComparisonReport {
    /// `||e^{T C} - P||_2` at `t_end`.
    Converges { t_end: f64, gap: f64, distance: f64 },
    /// The planted eigenvector `x0 = const ⊗ w` evolves as `e^{i beta t} x0`.
    Oscillates {
        beta: f64,
        x0: ComplexVector,
        /// `||e^{tC} x0 - P x0||_W / ||x0||_W` at `t_end / 2` and `t_end`.
        distances: [f64; 2],
        /// `max_t |(||x(t)||_W - ||x0||_W)| / ||x0||_W` along the trajectory.
        norm_drift: f64,
    },
}

/// Compares `e^{tC}` with the predicted limit projection.
///
/// When the V-condition holds, `t_end` defaults to `60 / gap` where `gap` is
/// the distance of the nonzero spectrum from the imaginary axis. Otherwise the
/// witness of the V-condition is propagated with steps of size `dt`.
pub fn simulate_and_compare(spec: &CoupledParabolicSpec, t_end: Option<f64>, dt: f64) -> Result<ComparisonReport> {
    let op = build_coupled_operator(spec)?;
    let p = predict_limit_projection(spec)?;
    let verdict = check_v_condition(spec, 1e-10)?;
    if verdict.holds {
        let vals = eigenvalues(op.c.as_ref())?;
        let scale_c = crate::numkernel::one_norm(op.c.as_ref()).max(1.0);
        let gap = -vals
            .iter()
            .filter(|z| z.norm() > 1e-9 * scale_c)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(gap > 0.0) {
            return Err(Error::invalid("coupled spectrum", "no spectral gap"));
        }
        let t = t_end.unwrap_or(60.0 / gap);
        let e = expm(scale(op.c.as_ref(), real(t)).as_ref())?;
        let distance = norm2(sub(e.as_ref(), p.as_ref()).as_ref())?;
        return Ok(ComparisonReport::Converges { t_end: t, gap, distance });
    }
    let beta = verdict.failing_beta.expect("set when the condition fails");
    let w = verdict.witness.expect("set when the condition fails");
    let wm = Mat::from_fn(w.nrows(), 1, |i, _| w[i]);
    let x0 = crate::numkernel::column(constant_lift(spec, &wm).as_ref(), 0);
    let t = t_end.unwrap_or(20.0 * core::f64::consts::PI / beta.abs());
    let traj = propagate(op.c.as_ref(), &op.space, &x0, t, dt, Scheme::Expm)?;
    let n0 = op.space.norm(&x0);
    let norm_drift = traj.norms.iter().map(|n| (n - n0).abs() / n0).fold(0.0, f64::max);
    let px0 = crate::numkernel::matvec(p.as_ref(), &x0);
    let dist_at = |time: f64| -> Result<f64> {
        let e = expm(scale(op.c.as_ref(), real(time)).as_ref())?;
        let x = crate::numkernel::matvec(e.as_ref(), &x0);
        Ok(op.space.norm(&(x - &px0)) / n0)
    };
    let distances = [dist_at(0.5 * t)?, dist_at(t)?];
    Ok(ComparisonReport::Oscillates {
        beta,
        x0,
        distances,
        norm_drift,
    })
}

/// Convenience: identity of size `n` as a constant coefficient list.
pub fn unit_coefficients(n: usize) -> Vec<Coefficient> {
    (0..n).map(|_| Coefficient::Constant(identity(1))).collect()
}
