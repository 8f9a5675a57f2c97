//! Boundary-matrix algebra: `W_B`, the generation test, and the heat-case
//! stability conditions on `ker tilde_W_B`.

use alloc::format;

use faer::{Mat, MatRef};
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use super::{assemble_p_ext, PHSystemSpec};
use crate::numkernel::{
    adjoint, c64, check_finite, hermitian_eigen, hermitian_part, identity, max_abs, mul, mul3, null_space,
    rank, real, scale, solve, sub, vec_norm, zeros, ComplexMatrix, RANK_TOL,
};
use crate::{Error, Result};

/// Relative tolerance of the semidefiniteness verdicts.
pub const PSD_REL_TOL: f64 = 1e-12;

/// `W_B = sqrt(2) tilde_W_B [[P, -P], [I, I]]^{-1}`, using
/// `[[P, -P], [I, I]]^{-1} = 1/2 [[P^{-1}, I], [-P^{-1}, I]]`.
pub fn compute_w_b(tilde_wb: MatRef<'_, c64>, p1ext: MatRef<'_, c64>) -> Result<ComplexMatrix> {
    let k = crate::numkernel::check_square(p1ext)?;
    if tilde_wb.ncols() != 2 * k {
        return Err(Error::DimensionMismatch {
            context: "tilde W_B columns",
            expected: 2 * k,
            actual: tilde_wb.ncols(),
        });
    }
    check_finite(tilde_wb, "tilde W_B")?;
    if rank(p1ext, RANK_TOL)? < k {
        return Err(Error::Singular("extended P1 (W_B needs it invertible)"));
    }
    let p_inv = solve(p1ext, identity(k).as_ref(), "extended P1 (W_B needs it invertible)")?;
    let id = identity(k);
    let minus_p_inv = scale(p_inv.as_ref(), real(-1.0));
    let inv = crate::numkernel::block2(p_inv.as_ref(), id.as_ref(), minus_p_inv.as_ref(), id.as_ref());
    Ok(scale(mul(tilde_wb, inv.as_ref()).as_ref(), real(core::f64::consts::FRAC_1_SQRT_2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationCheck {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// Whether `W_B [[0, I], [I, 0]] W_B^*` is positive semidefinite.
pub fn generation_check(wb: MatRef<'_, c64>) -> Result<GenerationCheck> {
    let cols = wb.ncols();
    if cols == 0 || cols % 2 != 0 {
        return Err(Error::invalid("W_B", format!("need an even, positive column count, got {cols}")));
    }
    check_finite(wb, "W_B")?;
    let k = cols / 2;
    let sigma = crate::numkernel::block2(zeros(k, k).as_ref(), identity(k).as_ref(), identity(k).as_ref(), zeros(k, k).as_ref());
    let prod = hermitian_part(mul3(wb, sigma.as_ref(), adjoint(wb).as_ref()).as_ref());
    let min_eigenvalue = hermitian_eigen(prod.as_ref())?.0[0];
    let scale = max_abs(wb).powi(2).max(1.0);
    Ok(GenerationCheck {
        psd: min_eigenvalue >= -PSD_REL_TOL * scale,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMatrix {
    pub matrix: ComplexMatrix,
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub pd: bool,
}

fn check_heat_wb(tilde_wb: MatRef<'_, c64>) -> Result<()> {
    if tilde_wb.nrows() != 2 || tilde_wb.ncols() != 4 {
        return Err(Error::invalid(
            "heat boundary matrix",
            format!("expected 2x4, got {}x{}", tilde_wb.nrows(), tilde_wb.ncols()),
        ));
    }
    check_finite(tilde_wb, "heat boundary matrix")?;
    let r = rank(tilde_wb, RANK_TOL)?;
    if r != 2 {
        return Err(Error::invalid("heat boundary matrix", format!("rank {r}, need 2")));
    }
    Ok(())
}

/// `W1 sigma W1^* - W0 sigma W0^*` with `sigma = [[0, 1], [1, 0]]`, where `W1`
/// and `W0` are the column pairs acting on the traces at 1 and at 0.
pub fn heat_bc_sigma_matrix(tilde_wb: MatRef<'_, c64>) -> Result<SigmaMatrix> {
    check_heat_wb(tilde_wb)?;
    let sigma = crate::numkernel::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let w1 = tilde_wb.subcols(0, 2);
    let w0 = tilde_wb.subcols(2, 2);
    let matrix = sub(
        mul3(w1, sigma.as_ref(), adjoint(w1).as_ref()).as_ref(),
        mul3(w0, sigma.as_ref(), adjoint(w0).as_ref()).as_ref(),
    );
    let min_eigenvalue = hermitian_eigen(hermitian_part(matrix.as_ref()).as_ref())?.0[0];
    let tol = PSD_REL_TOL * max_abs(matrix.as_ref()).max(1.0);
    Ok(SigmaMatrix {
        psd: min_eigenvalue >= -tol,
        pd: min_eigenvalue > tol,
        matrix,
        min_eigenvalue,
    })
}

/// One of the boundary estimates `Q1 <= -c Q2` on the boundary kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCondition {
    pub holds: bool,
    /// Largest admissible `c`; `0` when the condition fails, infinite when
    /// `Q2` vanishes on the kernel.
    pub best_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatConditions {
    /// `Re(b1^* b2 - b3^* b4) <= -c (|b1|^2 + |b2|^2)` on the kernel.
    pub cond1: HeatCondition,
    /// `Re(b1^* b2 - b3^* b4) <= -c (|b3|^2 + |b4|^2)` on the kernel.
    pub cond2: HeatCondition,
    /// The sigma matrix is positive definite.
    pub cond3: bool,
    pub sigma: SigmaMatrix,
}

const FORM_TOL: f64 = 1e-12;

fn lambda_max(h: MatRef<'_, c64>) -> Result<f64> {
    let (vals, _) = hermitian_eigen(hermitian_part(h).as_ref())?;
    Ok(*vals.last().expect("nonempty form"))
}

/// Exact criterion: `R1 <= 0` and `null(R1) ⊆ null(R2)`.
fn decide(r1: MatRef<'_, c64>, r2: MatRef<'_, c64>) -> Result<HeatCondition> {
    let (vals, vecs) = hermitian_eigen(hermitian_part(r1).as_ref())?;
    if *vals.last().expect("nonempty form") > FORM_TOL {
        return Ok(HeatCondition { holds: false, best_c: 0.0 });
    }
    for (j, v) in vals.iter().enumerate() {
        if v.abs() <= FORM_TOL {
            let r2v = crate::numkernel::matvec(r2, &vecs.col(j).to_owned());
            if vec_norm(&r2v) > FORM_TOL {
                return Ok(HeatCondition { holds: false, best_c: 0.0 });
            }
        }
    }
    let (vals2, vecs2) = hermitian_eigen(hermitian_part(r2).as_ref())?;
    let top = *vals2.last().expect("nonempty form");
    if top <= FORM_TOL {
        return Ok(HeatCondition { holds: true, best_c: f64::INFINITY });
    }
    let u = vecs2.col(vals2.len() - 1).to_owned();
    let r1u = crate::numkernel::matvec(r1, &u);
    let quad: c64 = (0..u.nrows()).map(|i| u[i].conj() * r1u[i]).sum();
    let (mut lo, mut hi) = (0.0, (-quad.re / top).max(0.0));
    let feasible = |c: f64| -> Result<bool> {
        let m = crate::numkernel::add(r1, scale(r2, real(c)).as_ref());
        Ok(lambda_max(m.as_ref())? <= FORM_TOL)
    };
    if feasible(hi)? {
        return Ok(HeatCondition { holds: true, best_c: hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(HeatCondition { holds: true, best_c: lo })
}

/// The three boundary conditions guaranteeing exponential stability of the
/// heat equation, restricted to the 2-dimensional `ker tilde_W_B`.
pub fn heat_stability_conditions(tilde_wb: MatRef<'_, c64>) -> Result<HeatConditions> {
    check_heat_wb(tilde_wb)?;
    let k = null_space(tilde_wb, RANK_TOL)?;
    let restrict = |q: &ComplexMatrix| hermitian_part(mul3(adjoint(k.as_ref()).as_ref(), q.as_ref(), k.as_ref()).as_ref());
    let mut q1 = Mat::zeros(4, 4);
    q1[(0, 1)] = real(0.5);
    q1[(1, 0)] = real(0.5);
    q1[(2, 3)] = real(-0.5);
    q1[(3, 2)] = real(-0.5);
    let q2_at_1 = crate::numkernel::real_diag(&[1.0, 1.0, 0.0, 0.0]);
    let q2_at_0 = crate::numkernel::real_diag(&[0.0, 0.0, 1.0, 1.0]);
    let r1 = restrict(&q1);
    Ok(HeatConditions {
        cond1: decide(r1.as_ref(), restrict(&q2_at_1).as_ref())?,
        cond2: decide(r1.as_ref(), restrict(&q2_at_0).as_ref())?,
        cond3: heat_bc_sigma_matrix(tilde_wb)?.pd,
        sigma: heat_bc_sigma_matrix(tilde_wb)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCheckReport {
    pub p1ext_invertible: bool,
    pub wb: Option<ComplexMatrix>,
    pub generation: Option<GenerationCheck>,
    /// `G1` has full rank `n`.
    pub g1_rank_n: bool,
    /// Present only for `n = r = 1`.
    pub heat_conditions: Option<HeatConditions>,
}

pub fn check_boundary(spec: &PHSystemSpec) -> Result<BoundaryCheckReport> {
    spec.validate()?;
    let (p1ext, _) = assemble_p_ext(spec);
    let (wb, generation) = match compute_w_b(spec.tilde_wb.as_ref(), p1ext.as_ref()) {
        Ok(wb) => {
            let g = generation_check(wb.as_ref())?;
            (Some(wb), Some(g))
        }
        Err(Error::Singular(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let heat_conditions = if spec.n == 1 && spec.r == 1 {
        Some(heat_stability_conditions(spec.tilde_wb.as_ref())?)
    } else {
        None
    };
    Ok(BoundaryCheckReport {
        p1ext_invertible: wb.is_some(),
        wb,
        generation,
        g1_rank_n: rank(spec.g1.as_ref(), RANK_TOL)? == spec.n,
        heat_conditions,
    })
}

/// `tilde_W_B` realizing a given `W_B`: `tilde_W_B = W_B [[P, -P], [I, I]] / sqrt(2)`.
pub fn tilde_from_w_b(wb: MatRef<'_, c64>, p1ext: MatRef<'_, c64>) -> Result<ComplexMatrix> {
    let k = crate::numkernel::check_square(p1ext)?;
    crate::numkernel::expect_dim("W_B columns", 2 * k, wb.ncols())?;
    let id = identity(k);
    let minus_p = scale(p1ext, real(-1.0));
    let m = crate::numkernel::block2(p1ext, minus_p.as_ref(), id.as_ref(), id.as_ref());
    Ok(scale(mul(wb, m.as_ref()).as_ref(), real(core::f64::consts::FRAC_1_SQRT_2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{from_real_rows, hstack};
    use core::f64::consts::FRAC_1_SQRT_2;

    fn heat_p() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn w_b_for_dirichlet() {
        let wt = from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
        let wb = compute_w_b(wt.as_ref(), heat_p().as_ref()).unwrap();
        let s = FRAC_1_SQRT_2;
        let expected = from_real_rows(&[&[0.0, s, s, 0.0], &[0.0, -s, s, 0.0]]);
        assert!(max_abs(sub(wb.as_ref(), expected.as_ref()).as_ref()) <= 1e-15);
        let g = generation_check(wb.as_ref()).unwrap();
        assert!(g.psd && g.min_eigenvalue.abs() <= 1e-15);
    }

    #[test]
    fn w_b_inverse_cancellation() {
        let p = heat_p();
        let id = identity(2);
        let minus_p = scale(p.as_ref(), real(-1.0));
        let block = crate::numkernel::block2(p.as_ref(), minus_p.as_ref(), id.as_ref(), id.as_ref());
        let wb = compute_w_b(block.as_ref(), p.as_ref()).unwrap();
        let expected = scale(identity(4).as_ref(), real(2.0f64.sqrt()));
        assert!(max_abs(sub(wb.as_ref(), expected.as_ref()).as_ref()) <= 1e-14);
    }

    #[test]
    fn w_b_matches_direct_solve() {
        let p = from_real_rows(&[&[2.0, 0.5, 0.0], &[0.5, -1.0, 0.3], &[0.0, 0.3, 1.5]]);
        let wt = from_real_rows(&[
            &[1.0, 0.2, -0.4, 0.3, 0.0, 1.1],
            &[0.0, 1.0, 0.5, -0.7, 0.2, 0.0],
            &[0.3, 0.0, 1.0, 0.1, 0.9, -0.5],
        ]);
        let wb = compute_w_b(wt.as_ref(), p.as_ref()).unwrap();
        let id = identity(3);
        let minus_p = scale(p.as_ref(), real(-1.0));
        let m = crate::numkernel::block2(p.as_ref(), minus_p.as_ref(), id.as_ref(), id.as_ref());
        // W_B M = sqrt(2) tilde_W_B  <=>  M^* W_B^* = sqrt(2) tilde_W_B^*.
        let direct = adjoint(
            solve(
                adjoint(m.as_ref()).as_ref(),
                scale(adjoint(wt.as_ref()).as_ref(), real(2.0f64.sqrt())).as_ref(),
                "direct",
            )
            .unwrap()
            .as_ref(),
        );
        assert!(max_abs(sub(wb.as_ref(), direct.as_ref()).as_ref()) <= 1e-13);
        let back = tilde_from_w_b(wb.as_ref(), p.as_ref()).unwrap();
        assert!(max_abs(sub(back.as_ref(), wt.as_ref()).as_ref()) <= 1e-13);
    }

    #[test]
    fn generation_examples() {
        let wb = hstack(&[identity(2).as_ref(), zeros(2, 2).as_ref()]);
        assert!(generation_check(wb.as_ref()).unwrap().psd);
        // Product [[0, 1], [1, 0]], eigenvalues -1 and 1.
        let wb = from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
        let g = generation_check(wb.as_ref()).unwrap();
        assert!(!g.psd);
        assert!((g.min_eigenvalue + 1.0).abs() <= 1e-14);
        assert!(generation_check(from_real_rows(&[&[1.0, 0.0, 0.0]]).as_ref()).is_err());
    }

    #[test]
    fn sigma_examples() {
        let nonlocal = from_real_rows(&[&[0.0, 1.0, 1.0, -1.0], &[1.0, 1.0, 0.0, 0.0]]);
        let s = heat_bc_sigma_matrix(nonlocal.as_ref()).unwrap();
        assert_eq!(s.matrix, from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]));
        assert!(s.pd);
        let dirichlet = from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
        let s = heat_bc_sigma_matrix(dirichlet.as_ref()).unwrap();
        assert_eq!(s.matrix, zeros(2, 2));
        assert!(s.psd && !s.pd);
        assert!(heat_bc_sigma_matrix(from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]]).as_ref()).is_err());
    }

    #[test]
    fn robin_sigma_is_c_plus_c_star() {
        let c = [[c64::new(1.0, 0.5), c64::new(-0.3, 2.0)], [c64::new(0.7, -1.0), c64::new(2.5, 0.1)]];
        let wt = crate::numkernel::from_rows(&[
            &[c[0][1], real(0.0), c[0][0], real(-1.0)],
            &[c[1][1], real(1.0), c[1][0], real(0.0)],
        ]);
        let s = heat_bc_sigma_matrix(wt.as_ref()).unwrap();
        let cm = crate::numkernel::from_rows(&[&[c[0][0], c[0][1]], &[c[1][0], c[1][1]]]);
        let expected = crate::numkernel::add(cm.as_ref(), adjoint(cm.as_ref()).as_ref());
        assert!(max_abs(sub(s.matrix.as_ref(), expected.as_ref()).as_ref()) <= 1e-15);
    }

    #[test]
    fn dirichlet_conditions_all_fail() {
        let wt = from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
        let c = heat_stability_conditions(wt.as_ref()).unwrap();
        assert!(!c.cond1.holds && !c.cond2.holds && !c.cond3);
    }

    #[test]
    fn nonlocal_conditions() {
        let wt = from_real_rows(&[&[0.0, 1.0, 1.0, -1.0], &[1.0, 1.0, 0.0, 0.0]]);
        let c = heat_stability_conditions(wt.as_ref()).unwrap();
        assert!(c.cond1.holds && c.cond1.best_c >= 0.25);
        assert!(c.cond2.holds && c.cond3);
        // Brute force over the kernel b = (-s, s, t - s, t).
        let mut worst1 = f64::INFINITY;
        let mut worst0 = f64::INFINITY;
        for i in 0..400 {
            for j in 0..40 {
                let s = c64::from_polar(1.0, 0.0) * (i as f64 / 399.0 * core::f64::consts::FRAC_PI_2).cos();
                let t = c64::from_polar((i as f64 / 399.0 * core::f64::consts::FRAC_PI_2).sin(), j as f64 / 40.0 * core::f64::consts::TAU);
                let b = [-s, s, t - s, t];
                let q1 = (b[0].conj() * b[1] - b[2].conj() * b[3]).re;
                let q21 = b[0].norm_sqr() + b[1].norm_sqr();
                let q20 = b[2].norm_sqr() + b[3].norm_sqr();
                if q21 > 1e-9 {
                    worst1 = worst1.min(-q1 / q21);
                }
                if q20 > 1e-9 {
                    worst0 = worst0.min(-q1 / q20);
                }
            }
        }
        assert!((c.cond1.best_c - worst1).abs() <= 1e-3 * worst1, "{} vs {worst1}", c.cond1.best_c);
        assert!((c.cond2.best_c - worst0).abs() <= 1e-3 * worst0, "{} vs {worst0}", c.cond2.best_c);
    }
}
