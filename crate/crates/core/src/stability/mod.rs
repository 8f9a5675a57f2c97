//! Spectral stability diagnostics: peripheral spectrum and its transfer
//! between `A_S` and `A_ext`, kernel intersections, strict-dissipativity
//! margins, resolvent scans, limit projections and time stepping.

mod propagate;
mod range;

use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::numkernel::{
    adjoint, c64, check_square, column, eig, eigenvalues, expect_dim, hermitian_part, matvec, mul,
    null_space, numerical_abscissa, one_norm, shifted_from, singular_values, vec_norm, vstack,
    w_orthonormalize, ComplexMatrix, ComplexVector, WeightedSpace, DEFAULT_PERIPHERAL_REL_TOL, I,
    RANK_TOL,
};
use crate::{Error, Result};

pub use propagate::{decay_rate_fit, propagate, Scheme, Trajectory};
pub use range::{numerical_range_boundary, positivity_probe, sector_half_angle};

/// Eigenpairs with `|Re lambda| <= re_tol`.
pub fn peripheral_point_spectrum(a: MatRef<'_, c64>, re_tol: f64) -> Result<Vec<(c64, ComplexVector)>> {
    if !(re_tol > 0.0) {
        return Err(Error::invalid("re_tol", "must be positive"));
    }
    let es = eig(a)?;
    Ok(es
        .report
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re.abs() <= re_tol)
        .map(|(k, &z)| (z, column(es.vectors.as_ref(), k)))
        .collect())
}

/// One peripheral eigenvalue of `A_S` checked on `A_ext`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionWitness {
    pub eigenvalue: c64,
    /// `||(i omega - A_ext) z|| / ||z||` for the lifted eigenvector `z`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralInclusion {
    pub holds: bool,
    pub certified: Vec<InclusionWitness>,
    pub violations: Vec<InclusionWitness>,
}

/// For each peripheral eigenpair `(i omega, v)` of `a_s`, checks that the lifted
/// vector `z = lift(v)` (normally `(v; S A21 v)`) is an approximate eigenvector
/// of `a_ext` for `i omega`.
pub fn check_peripheral_inclusion(
    a_s: MatRef<'_, c64>,
    a_ext: MatRef<'_, c64>,
    lift: impl Fn(&ComplexVector) -> Result<ComplexVector>,
    re_tol: f64,
    tol: f64,
) -> Result<PeripheralInclusion> {
    check_square(a_ext)?;
    let mut certified = Vec::new();
    let mut violations = Vec::new();
    for (lambda, v) in peripheral_point_spectrum(a_s, re_tol)? {
        let z = lift(&v)?;
        expect_dim("lifted eigenvector", a_ext.nrows(), z.nrows())?;
        let iw = I * lambda.im;
        let r = matvec(shifted_from(iw, a_ext).as_ref(), &z);
        let residual = vec_norm(&r) / vec_norm(&z).max(f64::MIN_POSITIVE);
        let w = InclusionWitness { eigenvalue: lambda, residual };
        if residual <= tol {
            certified.push(w);
        } else {
            violations.push(w);
        }
    }
    Ok(PeripheralInclusion {
        holds: violations.is_empty(),
        certified,
        violations,
    })
}

/// W-orthonormal basis of `ker A21 ∩ ker(i omega - A11)`, from the null space
/// of the stacked matrix `[A21; i omega - A11]`.
pub fn kernel_intersection(
    a21: MatRef<'_, c64>,
    a11: MatRef<'_, c64>,
    omega: f64,
    space: &WeightedSpace,
    tol: f64,
) -> Result<ComplexMatrix> {
    let n1 = check_square(a11)?;
    expect_dim("kernel_intersection (A21 cols)", n1, a21.ncols())?;
    expect_dim("kernel_intersection (space)", n1, space.dim())?;
    let shifted = shifted_from(I * omega, a11);
    let stacked = vstack(&[a21, shifted.as_ref()]);
    let basis = null_space(stacked.as_ref(), tol)?;
    w_orthonormalize(basis.as_ref(), space, 1e-12)
}

/// W-orthonormal basis of `ker(lambda - A)`.
pub fn eigenspace(a: MatRef<'_, c64>, lambda: c64, space: &WeightedSpace, tol: f64) -> Result<ComplexMatrix> {
    let basis = null_space(shifted_from(lambda, a).as_ref(), tol)?;
    w_orthonormalize(basis.as_ref(), space, 1e-12)
}

/// `max(0, -numerical_abscissa)`.
pub fn strict_dissipativity_margin(a: MatRef<'_, c64>, space: &WeightedSpace) -> Result<f64> {
    Ok((-numerical_abscissa(a, space)?).max(0.0))
}

/// Largest `eps` with `Herm(W A_ext) + eps * blockdiag(W1, 0) <= 0`, i.e.
/// `Re<A_ext h, h> <= -eps ||h1||^2` for all `h`. Zero if none exists.
///
/// The first `n1` coordinates form the `H1` component; the weight must be
/// block diagonal with respect to this split.
pub fn thm39_condition1_margin(a_ext: MatRef<'_, c64>, space: &WeightedSpace, n1: usize) -> Result<f64> {
    let n = check_square(a_ext)?;
    expect_dim("condition-1 margin", space.dim(), n)?;
    if n1 == 0 || n1 > n {
        return Err(Error::invalid("n1", "must lie in 1..=dim"));
    }
    let w = space.weight();
    let off = w.as_ref().submatrix(0, n1, n1, n - n1);
    if crate::numkernel::max_abs(off) > 0.0 {
        return Err(Error::invalid("weight", "must be block diagonal for the H1 split"));
    }
    let form = hermitian_part(mul(w.as_ref(), a_ext).as_ref());
    let scale = crate::numkernel::max_abs(form.as_ref()).max(crate::numkernel::max_abs(w.as_ref()));
    let gate = 1e-13 * scale;
    let mut b = Mat::<c64>::zeros(n, n);
    b.as_mut()
        .submatrix_mut(0, 0, n1, n1)
        .copy_from(w.as_ref().submatrix(0, 0, n1, n1));
    let top = |eps: f64| -> Result<f64> {
        let shifted = crate::numkernel::add(form.as_ref(), crate::numkernel::scale(b.as_ref(), crate::numkernel::real(eps)).as_ref());
        Ok(*space.pencil_eigenvalues(shifted.as_ref())?.last().expect("nonempty"))
    };
    if top(0.0)? > gate {
        return Ok(0.0);
    }
    let w1 = WeightedSpace::new(w.as_ref().submatrix(0, 0, n1, n1).to_owned())?;
    let h11 = form.as_ref().submatrix(0, 0, n1, n1).to_owned();
    let hi = (-*w1.pencil_eigenvalues(h11.as_ref())?.last().expect("nonempty")).max(0.0);
    if top(hi)? <= gate {
        return Ok(hi);
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if top(mid)? <= gate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(lo)
}

/// Predicted strict-dissipativity margin `nu * c^2` when `A21` is bounded below
/// by `c` between the weighted spaces and `S` is coercive with constant `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition2Bound {
    pub nu: f64,
    pub c: f64,
    pub bound: f64,
}

pub fn thm39_condition2_bound(
    a21: MatRef<'_, c64>,
    s: MatRef<'_, c64>,
    space1: &WeightedSpace,
    space2: &WeightedSpace,
) -> Result<Condition2Bound> {
    let nu = crate::closure::coercivity_constant(s, space2)?;
    let c = weighted_lower_bound(a21, space1, space2)?;
    Ok(Condition2Bound { nu, c, bound: nu * c * c })
}

/// `inf ||A x||_W2 / ||x||_W1`, the smallest singular value of
/// `L2^* A L1^{-*}`; zero when `A` cannot be injective.
pub fn weighted_lower_bound(a: MatRef<'_, c64>, dom: &WeightedSpace, codom: &WeightedSpace) -> Result<f64> {
    expect_dim("lower bound (cols)", dom.dim(), a.ncols())?;
    expect_dim("lower bound (rows)", codom.dim(), a.nrows())?;
    if a.nrows() < a.ncols() {
        return Ok(0.0);
    }
    let b = mul(adjoint(codom.cholesky().as_ref()).as_ref(), a);
    let mut bt = adjoint(b.as_ref());
    dom.cholesky().as_ref().solve_lower_triangular_in_place(bt.as_mut());
    let m = adjoint(bt.as_ref());
    Ok(singular_values(m.as_ref())?.last().copied().unwrap_or(0.0))
}

/// `||(i omega - A)^{-1}||_2`, or `None` where `i omega` is numerically an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSample {
    pub omega: f64,
    pub norm: Option<f64>,
}

pub fn resolvent_norm_scan(a: MatRef<'_, c64>, omegas: &[f64]) -> Result<Vec<ResolventSample>> {
    let n = check_square(a)?;
    let scale = one_norm(a).max(1.0);
    let mut out = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let m = shifted_from(I * omega, a);
        let smin = if n == 0 {
            f64::INFINITY
        } else {
            singular_values(m.as_ref())?.last().copied().unwrap_or(0.0)
        };
        let norm = if smin <= 1e-14 * scale { None } else { Some(1.0 / smin) };
        out.push(ResolventSample { omega, norm });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolventSup {
    Finite(f64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    StrictlyDissipative,
    ExponentiallyStable,
    StronglyStableProbePassed,
    Marginal,
    Unstable,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StrictlyDissipative => "strictly-dissipative",
            Self::ExponentiallyStable => "exponentially-stable",
            Self::StronglyStableProbePassed => "strongly-stable-probe-passed",
            Self::Marginal => "marginal",
            Self::Unstable => "unstable",
        }
    }
}

/// Relative gate below which the abscissa counts as strictly negative.
pub const STRICT_REL_TOL: f64 = 1e-10;
/// Relative band around zero in which the growth bound counts as zero.
pub const MARGINAL_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub abscissa: f64,
    pub growth_bound: f64,
    pub strict_margin: f64,
    pub peripheral_eigs: Vec<c64>,
    pub resolvent_sup: ResolventSup,
    pub classification: Classification,
    /// Absolute peripheral tolerance used.
    pub re_tol: f64,
    /// `||A||_1`, the scale of the relative gates.
    pub scale: f64,
}

/// Classifies a W-space operator. With `scale = max(||A||_1, 1)`, first match wins:
///
/// | condition                                   | class                          |
/// |---------------------------------------------|--------------------------------|
/// | abscissa < -1e-10 scale                     | strictly dissipative           |
/// | growth < -re_tol                            | exponentially stable           |
/// | growth < -1e-13 scale                       | strongly stable (probe passed) |
/// | abs(growth) <= 1e-13 scale                  | marginal                       |
/// | otherwise                                   | unstable                       |
///
/// `re_tol` defaults to `1e-8 * ||A||_1`. The third row catches spectra that
/// approach the imaginary axis without touching it, which is how non-uniform
/// decay shows up at a fixed resolution.
pub fn classify(a: MatRef<'_, c64>, space: &WeightedSpace, re_tol: Option<f64>) -> Result<StabilityVerdict> {
    let scale = one_norm(a).max(1.0);
    let re_tol = re_tol.unwrap_or(DEFAULT_PERIPHERAL_REL_TOL * scale);
    let abscissa = numerical_abscissa(a, space)?;
    let vals = eigenvalues(a)?;
    let growth_bound = vals.first().map_or(f64::NEG_INFINITY, |z| z.re);
    let peripheral_eigs: Vec<c64> = vals.iter().copied().filter(|z| z.re.abs() <= re_tol).collect();
    let mut omegas = alloc::vec![0.0];
    omegas.extend(vals.iter().take(8).map(|z| z.im));
    let scan = resolvent_norm_scan(a, &omegas)?;
    let resolvent_sup = if scan.iter().any(|s| s.norm.is_none()) {
        ResolventSup::Unbounded
    } else {
        ResolventSup::Finite(scan.iter().filter_map(|s| s.norm).fold(0.0, f64::max))
    };
    let classification = if abscissa < -STRICT_REL_TOL * scale {
        Classification::StrictlyDissipative
    } else if growth_bound < -re_tol {
        Classification::ExponentiallyStable
    } else if growth_bound < -MARGINAL_REL_TOL * scale {
        Classification::StronglyStableProbePassed
    } else if growth_bound.abs() <= MARGINAL_REL_TOL * scale {
        Classification::Marginal
    } else {
        Classification::Unstable
    };
    Ok(StabilityVerdict {
        abscissa,
        growth_bound,
        strict_margin: (-abscissa).max(0.0),
        peripheral_eigs,
        resolvent_sup,
        classification,
        re_tol,
        scale,
    })
}

/// Long-time limit of `e^{tA}` for a W-dissipative `A`.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitProjection {
    /// W-orthogonal projection onto `ker A`.
    Projection(ComplexMatrix),
    /// A nonzero eigenvalue on (or within `gap_tol` of) the imaginary axis.
    NoLimit { eigenvalue: c64 },
}

/// Returns the W-orthogonal projection onto `ker A` when 0 is the only
/// eigenvalue with `Re >= -gap_tol`; `NoLimit` if a nonzero one exists.
pub fn limit_projection(a: MatRef<'_, c64>, space: &WeightedSpace, gap_tol: f64) -> Result<LimitProjection> {
    let n = check_square(a)?;
    expect_dim("limit_projection", space.dim(), n)?;
    let vals = eigenvalues(a)?;
    let peripheral: Vec<c64> = vals.iter().copied().filter(|z| z.re >= -gap_tol).collect();
    if let Some(&z) = peripheral.iter().find(|z| z.norm() > gap_tol) {
        return Ok(LimitProjection::NoLimit { eigenvalue: z });
    }
    let algebraic = peripheral.len();
    if algebraic == 0 {
        return Ok(LimitProjection::Projection(Mat::zeros(n, n)));
    }
    let q = eigenspace(a, c64::new(0.0, 0.0), space, RANK_TOL)?;
    if q.ncols() != algebraic {
        return Err(Error::DefectivePeripheral {
            algebraic,
            geometric: q.ncols(),
        });
    }
    Ok(LimitProjection::Projection(w_projection(q.as_ref(), space)))
}

/// `Q Q^* W` for a W-orthonormal basis `Q`.
pub fn w_projection(q: MatRef<'_, c64>, space: &WeightedSpace) -> ComplexMatrix {
    crate::numkernel::mul3(q, adjoint(q).as_ref(), space.weight().as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{cplx, diag, from_real_rows, identity, max_abs, real, real_diag, scale, sub};

    #[test]
    fn peripheral_examples() {
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(peripheral_point_spectrum(rot.as_ref(), 1e-8).unwrap().len(), 2);
        let a = from_real_rows(&[&[0.0, -1.0, 1.0], &[1.0, 0.0, 0.0], &[-1.0, 0.0, -1.0]]);
        let b = from_real_rows(&[&[0.0, 2.0, -1.0], &[-2.0, 0.0, 0.0], &[1.0, 0.0, -1.0]]);
        let sum = crate::numkernel::add(a.as_ref(), b.as_ref());
        let p = peripheral_point_spectrum(sum.as_ref(), 1e-8).unwrap();
        assert_eq!(p.len(), 2);
        for (z, v) in &p {
            assert!((z.im.abs() - 1.0).abs() < 1e-12);
            let r = matvec(shifted_from(*z, sum.as_ref()).as_ref(), v);
            assert!(vec_norm(&r) < 1e-10);
        }
        let m = scale(identity(2).as_ref(), real(-1.0));
        assert!(peripheral_point_spectrum(m.as_ref(), 1e-8).unwrap().is_empty());
    }

    #[test]
    fn inclusion_with_explicit_witness() {
        let a21 = from_real_rows(&[&[1.0, 0.0]]);
        let sys = crate::closure::SplitClosureSystem::unweighted(
            diag(&[cplx(0.0, 1.0), cplx(0.0, 2.0)]),
            scale(adjoint(a21.as_ref()).as_ref(), real(-1.0)),
            a21,
            identity(1),
        )
        .unwrap();
        let a_s = crate::closure::assemble_a_s(&sys);
        let a_ext = crate::closure::assemble_a_ext(&sys);
        let r = check_peripheral_inclusion(a_s.as_ref(), a_ext.as_ref(), |v| sys.lift(v), 1e-8, 1e-8).unwrap();
        assert!(r.holds);
        assert_eq!(r.certified.len(), 1);
        assert!((r.certified[0].eigenvalue - cplx(0.0, 2.0)).norm() < 1e-12);

        let k = kernel_intersection(sys.a21.as_ref(), sys.a11.as_ref(), 2.0, &sys.space1, RANK_TOL).unwrap();
        assert_eq!(k.ncols(), 1);
        assert!((k[(1, 0)].norm() - 1.0).abs() < 1e-14);

        let mut bad_s = sys.clone();
        bad_s.s = scale(identity(1).as_ref(), real(2.0));
        let r = check_peripheral_inclusion(a_s.as_ref(), a_ext.as_ref(), |v| bad_s.lift(v), 1e-8, 1e-8).unwrap();
        // e2 has A21 e2 = 0, so any S still certifies; the mismatch shows only off the kernel.
        assert!(r.holds);
        let stable = scale(identity(2).as_ref(), real(-1.0));
        let r = check_peripheral_inclusion(stable.as_ref(), a_ext.as_ref(), |v| sys.lift(v), 1e-8, 1e-8).unwrap();
        assert!(r.holds && r.certified.is_empty());
    }

    #[test]
    fn inclusion_reports_mismatched_pair() {
        // A_S from a different coupling: its peripheral eigenvector is not in ker A21.
        let a_s = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let a_ext = scale(identity(3).as_ref(), real(-1.0));
        let lift = |v: &ComplexVector| Ok(faer::Col::from_fn(3, |i| if i < 2 { v[i] } else { real(0.0) }));
        let r = check_peripheral_inclusion(a_s.as_ref(), a_ext.as_ref(), lift, 1e-8, 1e-8).unwrap();
        assert!(!r.holds && r.violations.len() == 2);
    }

    #[test]
    fn kernel_intersection_injective_is_empty() {
        let a11 = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let k = kernel_intersection(identity(2).as_ref(), a11.as_ref(), 1.0, &WeightedSpace::identity(2), RANK_TOL).unwrap();
        assert_eq!(k.ncols(), 0);
    }

    #[test]
    fn margins() {
        let s = WeightedSpace::identity(2);
        let m = scale(identity(2).as_ref(), real(-3.0));
        assert!((strict_dissipativity_margin(m.as_ref(), &s).unwrap() - 3.0).abs() < 1e-14);
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(strict_dissipativity_margin(rot.as_ref(), &s).unwrap() == 0.0);
        let a_ext = from_real_rows(&[&[-1.0, -1.0], &[1.0, 0.0]]);
        assert!((thm39_condition1_margin(a_ext.as_ref(), &s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(thm39_condition1_margin(rot.as_ref(), &s, 1).unwrap() == 0.0);
    }

    #[test]
    fn condition1_margin_with_coupled_hermitian_part() {
        // Herm part [[-2, 1], [1, -1]]: H + eps diag(1, 0) <= 0 iff eps <= 1.
        let a = from_real_rows(&[&[-2.0, 1.0], &[1.0, -1.0]]);
        let eps = thm39_condition1_margin(a.as_ref(), &WeightedSpace::identity(2), 1).unwrap();
        assert!((eps - 1.0).abs() < 1e-10, "{eps}");
    }

    #[test]
    fn condition2_examples() {
        let s1 = WeightedSpace::identity(2);
        let b = thm39_condition2_bound(identity(2).as_ref(), scale(identity(2).as_ref(), real(0.5)).as_ref(), &s1, &s1).unwrap();
        assert!((b.bound - 0.5).abs() < 1e-14);
        let b = thm39_condition2_bound(scale(identity(2).as_ref(), real(2.0)).as_ref(), identity(2).as_ref(), &s1, &s1).unwrap();
        assert!((b.bound - 4.0).abs() < 1e-13);
        let wide = from_real_rows(&[&[1.0, 0.0]]);
        assert_eq!(weighted_lower_bound(wide.as_ref(), &s1, &WeightedSpace::identity(1)).unwrap(), 0.0);
    }

    #[test]
    fn resolvent_examples() {
        let m = scale(identity(2).as_ref(), real(-1.0));
        let r = resolvent_norm_scan(m.as_ref(), &[0.0, 1.0]).unwrap();
        assert!((r[0].norm.unwrap() - 1.0).abs() < 1e-14);
        assert!((r[1].norm.unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(resolvent_norm_scan(rot.as_ref(), &[1.0]).unwrap()[0].norm.is_none());
    }

    #[test]
    fn limit_projection_examples() {
        let s = WeightedSpace::identity(2);
        let a = real_diag(&[0.0, -1.0]);
        match limit_projection(a.as_ref(), &s, 1e-8).unwrap() {
            LimitProjection::Projection(p) => {
                assert!(max_abs(sub(p.as_ref(), real_diag(&[1.0, 0.0]).as_ref()).as_ref()) < 1e-14)
            }
            other => panic!("{other:?}"),
        }
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(matches!(limit_projection(rot.as_ref(), &s, 1e-8).unwrap(), LimitProjection::NoLimit { .. }));
        let jordan = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(limit_projection(jordan.as_ref(), &s, 1e-8), Err(Error::DefectivePeripheral { .. })));
    }

    #[test]
    fn classification_table() {
        let s = WeightedSpace::identity(2);
        let v = classify(real_diag(&[-1.0, -2.0]).as_ref(), &s, None).unwrap();
        assert_eq!(v.classification, Classification::StrictlyDissipative);
        // Non-normal but stable: abscissa positive, spectrum negative.
        let nn = from_real_rows(&[&[-1.0, 10.0], &[0.0, -1.0]]);
        let v = classify(nn.as_ref(), &s, None).unwrap();
        assert_eq!(v.classification, Classification::ExponentiallyStable);
        assert!(v.growth_bound <= v.abscissa + 1e-10 * v.scale);
        let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let v = classify(rot.as_ref(), &s, None).unwrap();
        assert_eq!(v.classification, Classification::Marginal);
        assert_eq!(v.resolvent_sup, ResolventSup::Unbounded);
        let v = classify(real_diag(&[-1e-11, -1.0]).as_ref(), &s, None).unwrap();
        assert_eq!(v.classification, Classification::StronglyStableProbePassed);
        let v = classify(real_diag(&[0.5, -1.0]).as_ref(), &s, None).unwrap();
        assert_eq!(v.classification, Classification::Unstable);
    }
}
