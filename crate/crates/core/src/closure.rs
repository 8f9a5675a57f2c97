//! The split closure construction: `A_ext = [[A11, A12], [A21, 0]]` on
//! `H1 x H2` and its collapse `A_S = A11 + A12 S A21` on `H1`.

use faer::MatRef;

use crate::numkernel::{
    adjoint, block2, c64, check_square, expect_dim, frobenius, hermitian_part, matvec, mul, mul3,
    numerical_abscissa, vec_norm, ComplexMatrix, ComplexVector, WeightedSpace,
};
use crate::{Error, Result};

/// Default relative tolerance for the skew-pairing residual.
pub const SKEW_PAIRING_TOL: f64 = 1e-10;

/// Dissipativity gate: an abscissa up to this multiple of `||A||_1` counts as `<= 0`.
pub const DISSIPATIVE_REL_TOL: f64 = 1e-12;

/// The quadruple `(A11, A12, A21, S)` with its two weighted spaces.
#[derive(Debug, Clone)]
pub struct SplitClosureSystem {
    pub a11: ComplexMatrix,
    pub a12: ComplexMatrix,
    pub a21: ComplexMatrix,
    pub s: ComplexMatrix,
    pub space1: WeightedSpace,
    pub space2: WeightedSpace,
    nu: f64,
}

impl SplitClosureSystem {
    /// Validates shapes and requires `S` to be coercive on `space2`.
    pub fn new(
        a11: ComplexMatrix,
        a12: ComplexMatrix,
        a21: ComplexMatrix,
        s: ComplexMatrix,
        space1: WeightedSpace,
        space2: WeightedSpace,
    ) -> Result<Self> {
        let n1 = check_square(a11.as_ref())?;
        let n2 = check_square(s.as_ref())?;
        expect_dim("space1 dimension", n1, space1.dim())?;
        expect_dim("space2 dimension", n2, space2.dim())?;
        expect_dim("a12 rows", n1, a12.nrows())?;
        expect_dim("a12 cols", n2, a12.ncols())?;
        expect_dim("a21 rows", n2, a21.nrows())?;
        expect_dim("a21 cols", n1, a21.ncols())?;
        for (m, what) in [(&a11, "a11"), (&a12, "a12"), (&a21, "a21"), (&s, "s")] {
            crate::numkernel::check_finite(m.as_ref(), what)?;
        }
        let nu = coercivity_constant(s.as_ref(), &space2)?;
        if !(nu > 0.0) {
            return Err(Error::NotCoercive { nu });
        }
        Ok(Self {
            a11,
            a12,
            a21,
            s,
            space1,
            space2,
            nu,
        })
    }

    /// Same as [`SplitClosureSystem::new`] with identity weights.
    pub fn unweighted(
        a11: ComplexMatrix,
        a12: ComplexMatrix,
        a21: ComplexMatrix,
        s: ComplexMatrix,
    ) -> Result<Self> {
        let (n1, n2) = (a11.nrows(), s.nrows());
        Self::new(a11, a12, a21, s, WeightedSpace::identity(n1), WeightedSpace::identity(n2))
    }

    /// Builds the system with `A12 = -adj_W(A21)`, so the skew pairing holds by construction.
    pub fn with_skew_pairing(
        a11: ComplexMatrix,
        a21: ComplexMatrix,
        s: ComplexMatrix,
        space1: WeightedSpace,
        space2: WeightedSpace,
    ) -> Result<Self> {
        let a12 = crate::numkernel::scale(
            crate::numkernel::weighted_adjoint(a21.as_ref(), &space1, &space2)?.as_ref(),
            c64::new(-1.0, 0.0),
        );
        Self::new(a11, a12, a21, s, space1, space2)
    }

    pub fn n1(&self) -> usize {
        self.a11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.s.nrows()
    }

    /// Coercivity constant of `S`, computed at construction.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `H1 x H2` with block-diagonal weight.
    pub fn product_space(&self) -> WeightedSpace {
        self.space1.product(&self.space2)
    }

    /// Lift `h1 -> (h1; S A21 h1)` onto the graph of the closure relation.
    pub fn lift(&self, h1: &ComplexVector) -> Result<ComplexVector> {
        expect_dim("lift", self.n1(), h1.nrows())?;
        let h2 = matvec(mul(self.s.as_ref(), self.a21.as_ref()).as_ref(), h1);
        Ok(concat(h1, &h2))
    }
}

pub(crate) fn concat(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let n = a.nrows();
    faer::Col::from_fn(n + b.nrows(), |i| if i < n { a[i] } else { b[i - n] })
}

/// Largest `nu` with `Re<S h, h>_W >= nu ||h||_W^2`: the smallest eigenvalue of
/// the pencil `(Herm(W S), W)`.
pub fn coercivity_constant(s: MatRef<'_, c64>, space: &WeightedSpace) -> Result<f64> {
    let n = check_square(s)?;
    expect_dim("coercivity_constant", space.dim(), n)?;
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let form = hermitian_part(mul(space.weight().as_ref(), s).as_ref());
    Ok(space.pencil_eigenvalues(form.as_ref())?[0])
}

/// `[[A11, A12], [A21, 0]]` on the product space.
pub fn assemble_a_ext(sys: &SplitClosureSystem) -> ComplexMatrix {
    let z = crate::numkernel::zeros(sys.n2(), sys.n2());
    block2(sys.a11.as_ref(), sys.a12.as_ref(), sys.a21.as_ref(), z.as_ref())
}

/// `A11 + A12 S A21`.
pub fn assemble_a_s(sys: &SplitClosureSystem) -> ComplexMatrix {
    let coupling = mul3(sys.a12.as_ref(), sys.s.as_ref(), sys.a21.as_ref());
    crate::numkernel::add(sys.a11.as_ref(), coupling.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewPairing {
    pub holds: bool,
    pub residual: f64,
}

/// Relative residual of `W1 A12 + A21^* W2 = 0`, i.e. of `A12 = -adj_W(A21)`.
pub fn check_skew_pairing(sys: &SplitClosureSystem, tol: f64) -> SkewPairing {
    let left = mul(sys.space1.weight().as_ref(), sys.a12.as_ref());
    let right = mul(adjoint(sys.a21.as_ref()).as_ref(), sys.space2.weight().as_ref());
    let num = frobenius(crate::numkernel::add(left.as_ref(), right.as_ref()).as_ref());
    let den = frobenius(left.as_ref()) + frobenius(right.as_ref()) + f64::EPSILON;
    let residual = num / den;
    SkewPairing {
        holds: residual <= tol,
        residual,
    }
}

/// `||A_ext (h1; S A21 h1) - (A_S h1; A21 h1)|| / ||h1||` for a matched pair
/// of operators. The same formula serves split and constrained models.
pub fn closure_identity_residual(
    a_ext: MatRef<'_, c64>,
    a_s: MatRef<'_, c64>,
    a21: MatRef<'_, c64>,
    s: MatRef<'_, c64>,
    h1: &ComplexVector,
) -> Result<f64> {
    let n1 = check_square(a_s)?;
    let n2 = check_square(s)?;
    let n = check_square(a_ext)?;
    expect_dim("closure identity (A_ext size)", n1 + n2, n)?;
    expect_dim("closure identity (A21 rows)", n2, a21.nrows())?;
    expect_dim("closure identity (A21 cols)", n1, a21.ncols())?;
    expect_dim("closure identity (h1)", n1, h1.nrows())?;
    let norm_h = vec_norm(h1);
    if norm_h == 0.0 {
        return Err(Error::invalid("h1", "must be nonzero"));
    }
    let a21h = matvec(a21, h1);
    let h2 = matvec(s, &a21h);
    let lhs = matvec(a_ext, &concat(h1, &h2));
    let rhs = concat(&matvec(a_s, h1), &a21h);
    Ok(vec_norm(&(lhs - rhs)) / norm_h)
}

impl SplitClosureSystem {
    pub fn closure_identity_residual(&self, h1: &ComplexVector) -> Result<f64> {
        closure_identity_residual(
            assemble_a_ext(self).as_ref(),
            assemble_a_s(self).as_ref(),
            self.a21.as_ref(),
            self.s.as_ref(),
            h1,
        )
    }
}

/// `|<-A_S u, v>_W1 - a(u, v)|` with `a(u, v) = <S A21 u, A21 v>_W2 - <A11 u, v>_W1`.
///
/// The identity needs the skew pairing, which is checked first.
pub fn form_residual(sys: &SplitClosureSystem, u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    let pairing = check_skew_pairing(sys, SKEW_PAIRING_TOL);
    if !pairing.holds {
        return Err(Error::SkewPairingViolated {
            residual: pairing.residual,
            tol: SKEW_PAIRING_TOL,
        });
    }
    Ok((minus_a_s_pairing(sys, u, v)? - sesquilinear_form(sys, u, v)?).norm())
}

/// `a(u, v) = <S A21 u, A21 v>_W2 - <A11 u, v>_W1`.
pub fn sesquilinear_form(sys: &SplitClosureSystem, u: &ComplexVector, v: &ComplexVector) -> Result<c64> {
    expect_dim("form (u)", sys.n1(), u.nrows())?;
    expect_dim("form (v)", sys.n1(), v.nrows())?;
    let a21u = matvec(sys.a21.as_ref(), u);
    let a21v = matvec(sys.a21.as_ref(), v);
    let sa21u = matvec(sys.s.as_ref(), &a21u);
    let a11u = matvec(sys.a11.as_ref(), u);
    Ok(sys.space2.inner(&sa21u, &a21v) - sys.space1.inner(&a11u, v))
}

fn minus_a_s_pairing(sys: &SplitClosureSystem, u: &ComplexVector, v: &ComplexVector) -> Result<c64> {
    let a_s_u = matvec(assemble_a_s(sys).as_ref(), u);
    Ok(-sys.space1.inner(&a_s_u, v))
}

/// Hypotheses of the dissipativity theorem, each with its numeric evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureVerdict {
    pub s_coercive: bool,
    pub nu: f64,
    pub skew_pairing: bool,
    pub skew_residual: f64,
    pub a11_dissipative: bool,
    pub a11_abscissa: f64,
    pub a_ext_dissipative: bool,
    pub a_ext_abscissa: f64,
}

/// Evaluates all structural hypotheses. Dissipativity uses the gate
/// `abscissa <= DISSIPATIVE_REL_TOL * ||A||_1`.
pub fn structure_verdict(sys: &SplitClosureSystem, pairing_tol: f64) -> Result<StructureVerdict> {
    let pairing = check_skew_pairing(sys, pairing_tol);
    let a11_abscissa = numerical_abscissa(sys.a11.as_ref(), &sys.space1)?;
    let a_ext = assemble_a_ext(sys);
    let a_ext_abscissa = numerical_abscissa(a_ext.as_ref(), &sys.product_space())?;
    let gate = |a: MatRef<'_, c64>| DISSIPATIVE_REL_TOL * crate::numkernel::one_norm(a).max(1.0);
    Ok(StructureVerdict {
        s_coercive: sys.nu > 0.0,
        nu: sys.nu,
        skew_pairing: pairing.holds,
        skew_residual: pairing.residual,
        a11_dissipative: a11_abscissa <= gate(sys.a11.as_ref()),
        a11_abscissa,
        a_ext_dissipative: a_ext_abscissa <= gate(a_ext.as_ref()),
        a_ext_abscissa,
    })
}
