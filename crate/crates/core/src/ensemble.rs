//! Seeded random generators for the property and acceptance suites: split
//! systems with planted peripheral eigenvectors, heat boundary matrices, and
//! piecewise coupled specs.

use alloc::vec::Vec;

use faer::Mat;
use rand_core::RngCore;

use crate::closure::SplitClosureSystem;
use crate::coupled::{CoupledKind, CoupledParabolicSpec, PotentialPiece};
use crate::discretize::{Coefficient, Grid1D};
use crate::numkernel::{
    adjoint, c64, hstack, identity, mul, mul3, norm2, rank, real, scale, solve, sub, w_orthonormalize, ComplexMatrix,
    WeightedSpace, RANK_TOL,
};
use crate::phs::tilde_from_w_b;
use crate::Result;

/// Uniform sample from `[-1, 1)`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Uniform sample from `[lo, hi)`.
pub fn uniform_in(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * 0.5 * (uniform(rng) + 1.0)
}

/// Uniform integer in `lo..=hi`.
pub fn uniform_usize(rng: &mut impl RngCore, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_complex(rng: &mut impl RngCore, rows: usize, cols: usize) -> ComplexMatrix {
    Mat::from_fn(rows, cols, |_, _| c64::new(uniform(rng), uniform(rng)))
}

/// Random skew-Hermitian matrix.
pub fn random_skew(rng: &mut impl RngCore, n: usize) -> ComplexMatrix {
    let b = random_complex(rng, n, n);
    scale(sub(b.as_ref(), adjoint(b.as_ref()).as_ref()).as_ref(), real(0.5))
}

/// Well-conditioned Hermitian positive definite `B B^* / n + I / 2`.
pub fn random_hpd(rng: &mut impl RngCore, n: usize) -> ComplexMatrix {
    let b = random_complex(rng, n, n);
    let bb = scale(mul(b.as_ref(), adjoint(b.as_ref()).as_ref()).as_ref(), real(1.0 / n as f64));
    crate::numkernel::add(bb.as_ref(), scale(identity(n).as_ref(), real(0.5)).as_ref())
}

pub fn random_space(rng: &mut impl RngCore, n: usize, weighted: bool) -> Result<WeightedSpace> {
    if weighted {
        WeightedSpace::new(random_hpd(rng, n))
    } else {
        Ok(WeightedSpace::identity(n))
    }
}

/// Random unitary `n x k` block (orthonormal columns).
pub fn random_orthonormal(rng: &mut impl RngCore, n: usize, k: usize) -> Result<ComplexMatrix> {
    w_orthonormalize(random_complex(rng, n, k).as_ref(), &WeightedSpace::identity(n), 1e-8)
}

/// `L^{-*} M L^*`: carries an operator from orthonormal coordinates to the space `W = L L^*`.
fn from_coords(space: &WeightedSpace, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = space.cholesky();
    let lstar = adjoint(l.as_ref());
    solve(lstar.as_ref(), mul(m.as_ref(), lstar.as_ref()).as_ref(), "ensemble coordinate change")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEnsembleParams {
    pub n1: usize,
    pub n2: usize,
    /// Number of planted peripheral eigenvectors `v` with `A21 v = 0` and `A11 v = i omega v`.
    pub planted: usize,
    pub weighted: bool,
    /// Extra strict dissipation `-margin * I` of `A11` off the planted subspace.
    pub a11_margin: f64,
    /// Coercivity floor of `S`.
    pub s_floor: f64,
}

#[derive(Debug, Clone)]
pub struct PlantedSystem {
    pub system: SplitClosureSystem,
    pub omegas: Vec<f64>,
    /// The planted eigenvectors, one per column.
    pub planted: ComplexMatrix,
}

fn separated_omegas(rng: &mut impl RngCore, k: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(k);
    while out.len() < k {
        let w = 3.0 * uniform(rng);
        if out.iter().all(|o| (o - w).abs() > 0.2) {
            out.push(w);
        }
    }
    out
}

/// Split system with skew pairing, `A11` dissipative and `S` coercive, in
/// random weights. Planted vectors span a subspace where `A11` acts as
/// `diag(i omega)` and `A21` vanishes.
pub fn planted_split_system(rng: &mut impl RngCore, p: &SplitEnsembleParams) -> Result<PlantedSystem> {
    let (n1, n2, k) = (p.n1, p.n2, p.planted);
    assert!(k <= n1, "cannot plant more vectors than n1");
    let space1 = random_space(rng, n1, p.weighted)?;
    let space2 = random_space(rng, n2, p.weighted)?;
    let q = random_orthonormal(rng, n1, n1)?;
    let qp = q.as_ref().subcols(0, k).to_owned();
    let qc = q.as_ref().subcols(k, n1 - k).to_owned();
    let omegas = separated_omegas(rng, k);

    // Orthonormal coordinates: A11 = Qp diag(i w) Qp^* + Qc M Qc^*, M dissipative.
    let m = {
        let g = scale(random_complex(rng, n1 - k, n1 - k).as_ref(), real(0.5));
        let gg = mul(g.as_ref(), adjoint(g.as_ref()).as_ref());
        let damp = crate::numkernel::add(gg.as_ref(), scale(identity(n1 - k).as_ref(), real(p.a11_margin)).as_ref());
        sub(random_skew(rng, n1 - k).as_ref(), damp.as_ref())
    };
    let om = crate::numkernel::diag(&omegas.iter().map(|&w| c64::new(0.0, w)).collect::<Vec<_>>());
    let a11_coords = crate::numkernel::add(
        mul3(qp.as_ref(), om.as_ref(), adjoint(qp.as_ref()).as_ref()).as_ref(),
        mul3(qc.as_ref(), m.as_ref(), adjoint(qc.as_ref()).as_ref()).as_ref(),
    );
    let a11 = from_coords(&space1, &a11_coords)?;

    // A21 = R Qc Qc^* L1^*, which annihilates the planted vectors L1^{-*} Qp.
    let l1star = adjoint(space1.cholesky().as_ref());
    let r = random_complex(rng, n2, n1);
    let a21 = mul3(r.as_ref(), mul(qc.as_ref(), adjoint(qc.as_ref()).as_ref()).as_ref(), l1star.as_ref());
    let planted = solve(l1star.as_ref(), qp.as_ref(), "planted vectors")?;

    let s_coords = {
        let g = scale(random_complex(rng, n2, n2).as_ref(), real(0.5));
        let gg = mul(g.as_ref(), adjoint(g.as_ref()).as_ref());
        let floor = scale(identity(n2).as_ref(), real(p.s_floor));
        crate::numkernel::add(crate::numkernel::add(gg.as_ref(), floor.as_ref()).as_ref(), random_skew(rng, n2).as_ref())
    };
    let s = from_coords(&space2, &s_coords)?;
    let system = SplitClosureSystem::with_skew_pairing(a11, a21, s, space1, space2)?;
    Ok(PlantedSystem { system, omegas, planted })
}

/// Dimensions and planting drawn at random with `n1 + n2 <= max_dim`.
pub fn random_split_params(rng: &mut impl RngCore, max_dim: usize, weighted: bool) -> SplitEnsembleParams {
    let n1 = uniform_usize(rng, 2, (max_dim / 2).max(2));
    let n2 = uniform_usize(rng, 1, (max_dim - n1).max(1));
    SplitEnsembleParams {
        n1,
        n2,
        planted: uniform_usize(rng, 0, n1.min(3)),
        weighted,
        a11_margin: 0.0,
        s_floor: uniform_in(rng, 0.1, 1.0),
    }
}

/// Random complex `2 x 4` heat boundary matrix of rank 2.
pub fn random_heat_boundary(rng: &mut impl RngCore) -> ComplexMatrix {
    loop {
        let w = random_complex(rng, 2, 4);
        if rank(w.as_ref(), 1e-6).unwrap_or(0) == 2 {
            return w;
        }
    }
}

/// Heat boundary matrix whose `W_B = U [I + V, I - V]` has `||V|| < 1`, so
/// the generation test passes.
pub fn random_generating_heat_boundary(rng: &mut impl RngCore) -> Result<ComplexMatrix> {
    let p1ext = crate::numkernel::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    loop {
        let u = random_complex(rng, 2, 2);
        if rank(u.as_ref(), 1e-3)? < 2 {
            continue;
        }
        let v0 = random_complex(rng, 2, 2);
        let v = scale(v0.as_ref(), real(uniform_in(rng, 0.0, 0.999) / norm2(v0.as_ref())?.max(1e-12)));
        let id = identity(2);
        let wb = mul(
            u.as_ref(),
            hstack(&[
                crate::numkernel::add(id.as_ref(), v.as_ref()).as_ref(),
                sub(id.as_ref(), v.as_ref()).as_ref(),
            ])
            .as_ref(),
        );
        let tilde = tilde_from_w_b(wb.as_ref(), p1ext.as_ref())?;
        if rank(tilde.as_ref(), RANK_TOL)? == 2 {
            return Ok(tilde);
        }
    }
}

/// Piecewise coupled heat spec with `N <= 3` components, `<= 3` pieces and
/// dissipative pieces `V_j = K - G_j G_j^*` sharing a skew part `K`. Half of
/// the draws protect an eigenvector of `K` from every damping term, which
/// plants a peripheral eigenvalue.
pub fn random_coupled_spec(rng: &mut impl RngCore, n_nodes: usize) -> Result<CoupledParabolicSpec> {
    let n = uniform_usize(rng, 1, 3);
    let pieces = uniform_usize(rng, 1, 3);
    let grid = Grid1D::new(0.0, 1.0, n_nodes)?;
    let k = scale(random_skew(rng, n).as_ref(), real(2.0));
    let protect = rng.next_u64() % 2 == 0;
    let (_, kvecs) = crate::numkernel::hermitian_eigen(scale(k.as_ref(), c64::new(0.0, 1.0)).as_ref())?;
    let q = kvecs.as_ref().subcols(0, 1).to_owned();
    let guard = sub(identity(n).as_ref(), mul(q.as_ref(), adjoint(q.as_ref()).as_ref()).as_ref());
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| uniform_in(rng, 0.1, 0.9)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut bounds = alloc::vec![0.0];
    bounds.extend(cuts);
    bounds.push(1.0);
    let mut potential = Vec::with_capacity(pieces);
    for j in 0..pieces {
        let mut g = random_complex(rng, n, n);
        if rng.next_u64() % 3 == 0 {
            g = crate::numkernel::zeros(n, n);
        }
        if protect {
            g = mul(guard.as_ref(), g.as_ref());
        }
        let v = sub(k.as_ref(), mul(g.as_ref(), adjoint(g.as_ref()).as_ref()).as_ref());
        potential.push(PotentialPiece { start: bounds[j], end: bounds[j + 1], v });
    }
    let coefficients = (0..n).map(|_| Coefficient::scalar(real(uniform_in(rng, 0.5, 2.0)))).collect();
    Ok(CoupledParabolicSpec {
        n_components: n,
        grid,
        kind: CoupledKind::Heat,
        coefficients,
        potential,
    })
}
