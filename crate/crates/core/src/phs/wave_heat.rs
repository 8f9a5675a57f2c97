//! A wave equation on `(0, 1)` coupled at `z = 1` to a heat equation
//! `w_t = (S w_z)_z` on `(1, 2)`.
//!
//! Unknowns of `A_S` are `(v1, v2, w1)`; `A_ext` adds `w2` as a free field.

use alloc::format;

use faer::Mat;

use crate::closure::{closure_identity_residual, concat};
use crate::discretize::{pointwise_coercivity, restrict, sample_coefficient, sbp_first_derivative, Coefficient, ConstrainedOperator, Grid1D, Location};
use crate::numkernel::{c64, hstack, matvec, mul, real, zeros, ComplexMatrix, ComplexVector, WeightedSpace};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct WaveHeatSpec {
    /// Grid on `[0, 1]` carrying the wave variables.
    pub grid1: Grid1D,
    /// Grid on `[1, 2]` carrying the heat variable.
    pub grid2: Grid1D,
    pub s: Coefficient,
}

impl WaveHeatSpec {
    pub fn uniform(nodes_per_interval: usize, s: Coefficient) -> Result<Self> {
        Ok(Self {
            grid1: Grid1D::new(0.0, 1.0, nodes_per_interval)?,
            grid2: Grid1D::new(1.0, 2.0, nodes_per_interval)?,
            s,
        })
    }

    /// Returns `nu = min Re S` over the heat nodes.
    pub fn validate(&self) -> Result<f64> {
        if self.grid1.a != 0.0 || self.grid1.b != 1.0 {
            return Err(Error::invalid("wave grid", format!("must span [0, 1], got [{}, {}]", self.grid1.a, self.grid1.b)));
        }
        if self.grid2.a != 1.0 || self.grid2.b != 2.0 {
            return Err(Error::invalid("heat grid", format!("must span [1, 2], got [{}, {}]", self.grid2.a, self.grid2.b)));
        }
        if self.s.dim() != 1 {
            return Err(Error::invalid("S", "must be scalar"));
        }
        let nu = pointwise_coercivity(&self.s, &self.grid2.nodes())?;
        if !(nu > 0.0) {
            return Err(Error::NotCoercive { nu });
        }
        Ok(nu)
    }
}

#[derive(Debug, Clone)]
pub struct WaveHeatSystem {
    pub a_ext: ConstrainedOperator,
    pub a_s: ConstrainedOperator,
    /// `[0, 0, D2]`: `(v1, v2, w1) -> w1'`.
    pub a21: ComplexMatrix,
    pub s_op: ComplexMatrix,
    pub nu: f64,
}

impl WaveHeatSystem {
    pub fn lift(&self, h1: &ComplexVector) -> ComplexVector {
        concat(h1, &matvec(self.s_op.as_ref(), &matvec(self.a21.as_ref(), h1)))
    }

    pub fn closure_identity_residual(&self, h1: &ComplexVector) -> Result<f64> {
        closure_identity_residual(
            self.a_ext.a_free.as_ref(),
            self.a_s.a_free.as_ref(),
            self.a21.as_ref(),
            self.s_op.as_ref(),
            h1,
        )
    }

    /// `max |C_ext lift(h1)|`.
    pub fn lift_constraint_residual(&self, h1: &ComplexVector) -> f64 {
        let c = matvec(self.a_ext.constraints.as_ref(), &self.lift(h1));
        (0..c.nrows()).map(|i| c[i].norm()).fold(0.0, f64::max)
    }
}

fn row(width: usize, entries: &[(usize, c64)]) -> ComplexMatrix {
    let mut m = Mat::zeros(1, width);
    for &(j, v) in entries {
        m[(0, j)] += v;
    }
    m
}

pub fn wave_heat_build(spec: &WaveHeatSpec) -> Result<WaveHeatSystem> {
    let nu = spec.validate()?;
    let sbp1 = sbp_first_derivative(&spec.grid1)?;
    let sbp2 = sbp_first_derivative(&spec.grid2)?;
    let (n1, n2) = (spec.grid1.n_nodes, spec.grid2.n_nodes);
    let (d1, d2) = (sbp1.d.as_ref(), sbp2.d.as_ref());
    let s_op = sample_coefficient(&spec.s, &spec.grid2, Location::Nodes)?;

    let wave = crate::numkernel::block2(d1.as_ref(), d1, d1, zeros(n1, n1).as_ref());
    let wave = {
        // [[0, D1], [D1, 0]]
        let mut w = wave;
        w.as_mut().submatrix_mut(0, 0, n1, n1).fill(c64::new(0.0, 0.0));
        w
    };
    let dim1 = 2 * n1 + n2;
    let a11 = crate::numkernel::block_diag(&[wave.as_ref(), zeros(n2, n2).as_ref()]);
    let a21 = hstack(&[zeros(n2, 2 * n1).as_ref(), d2]);
    let a12 = crate::numkernel::vstack(&[zeros(2 * n1, n2).as_ref(), d2]);
    let sa21 = mul(s_op.as_ref(), a21.as_ref());
    let a_s_free = crate::numkernel::add(a11.as_ref(), mul(a12.as_ref(), sa21.as_ref()).as_ref());
    let a_ext_free = crate::numkernel::block2(a11.as_ref(), a12.as_ref(), a21.as_ref(), zeros(n2, n2).as_ref());

    let (v1, v2, w1, w2) = (0, n1, 2 * n1, 2 * n1 + n2);
    let one = real(1.0);
    let common = |width: usize| {
        [
            row(width, &[(v1, one)]),
            row(width, &[(w1 + n2 - 1, one)]),
            row(width, &[(v1 + n1 - 1, one), (w1, -one)]),
        ]
    };
    let [c0, c1, c2] = common(dim1);
    let mut flux = row(dim1, &[(v2 + n1 - 1, one)]);
    for j in 0..dim1 {
        flux[(0, j)] -= sa21[(0, j)];
    }
    let c_s = crate::numkernel::vstack(&[c0.as_ref(), c1.as_ref(), c2.as_ref(), flux.as_ref()]);
    let [e0, e1, e2] = common(dim1 + n2);
    let e3 = row(dim1 + n2, &[(v2 + n1 - 1, one), (w2, -one)]);
    let c_ext = crate::numkernel::vstack(&[e0.as_ref(), e1.as_ref(), e2.as_ref(), e3.as_ref()]);

    let (wv, wh) = (&sbp1.w, &sbp2.w);
    let space_s = WeightedSpace::direct_sum(&[wv, wv, wh]);
    let space_ext = WeightedSpace::direct_sum(&[wv, wv, wh, wh]);
    Ok(WaveHeatSystem {
        a_ext: restrict(a_ext_free, c_ext, space_ext)?,
        a_s: restrict(a_s_free, c_s, space_s)?,
        a21,
        s_op,
        nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{eigenvalues, max_abs, numerical_abscissa, null_space, SpectralReport};

    fn build(nodes: usize) -> WaveHeatSystem {
        wave_heat_build(&WaveHeatSpec::uniform(nodes, Coefficient::scalar(real(1.0))).unwrap()).unwrap()
    }

    #[test]
    fn operator_blocks() {
        let sys = build(6);
        assert_eq!(sys.a_s.a_free.nrows(), 18);
        assert_eq!(sys.a_ext.a_free.nrows(), 24);
        assert_eq!(sys.a_s.dim(), 14);
        assert_eq!(sys.a_ext.dim(), 20);
        assert_eq!(sys.a_s.a_free[(0, 0)], real(0.0));
        assert!(sys.a_s.constraint_residual() <= 1e-12);
    }

    #[test]
    fn spectrum_in_open_left_half_plane() {
        let sys = build(41);
        let ev = eigenvalues(sys.a_s.a_restricted.as_ref()).unwrap();
        assert!(ev.iter().all(|z| z.re < -1e-8), "max re {}", ev.iter().map(|z| z.re).fold(f64::MIN, f64::max));
        let ab = numerical_abscissa(sys.a_s.a_restricted.as_ref(), &sys.a_s.coordinate_space()).unwrap();
        assert!(ab <= 1e-10 * max_abs(sys.a_s.a_restricted.as_ref()));
    }

    #[test]
    fn zero_is_not_an_eigenvalue() {
        let sys = build(21);
        let ker = null_space(sys.a_s.a_restricted.as_ref(), 1e-10).unwrap();
        assert_eq!(ker.ncols(), 0);
    }

    #[test]
    fn extension_is_conservative() {
        let sys = build(21);
        let a = &sys.a_ext;
        let ab = numerical_abscissa(a.a_restricted.as_ref(), &a.coordinate_space()).unwrap();
        assert!(ab.abs() <= 1e-10 * max_abs(a.a_restricted.as_ref()));
    }

    #[test]
    fn closure_identity_on_constrained_vectors() {
        let spec = WaveHeatSpec::uniform(15, Coefficient::scalar_fn(|z| c64::new(z, 0.2))).unwrap();
        let sys = wave_heat_build(&spec).unwrap();
        let scale = max_abs(sys.a_ext.a_free.as_ref());
        for k in 0..sys.a_s.dim() {
            let h1 = sys.a_s.k_basis.col(k).to_owned();
            assert!(sys.closure_identity_residual(&h1).unwrap() <= 1e-11 * scale);
            assert!(sys.lift_constraint_residual(&h1) <= 1e-9 * scale);
        }
    }

    #[test]
    fn hyperbolic_gap_shrinks() {
        let gaps: alloc::vec::Vec<f64> = [21, 41]
            .iter()
            .map(|&n| {
                let ev = eigenvalues(build(n).a_s.a_restricted.as_ref()).unwrap();
                SpectralReport::new(ev, 1e-8).min_abs_real_oscillatory().unwrap()
            })
            .collect();
        assert!(gaps[1] < gaps[0], "{gaps:?}");
    }

    #[test]
    fn rejects_bad_specs() {
        let s = Coefficient::scalar(real(1.0));
        let bad = WaveHeatSpec { grid1: Grid1D::new(0.0, 2.0, 5).unwrap(), grid2: Grid1D::new(1.0, 2.0, 5).unwrap(), s };
        assert!(bad.validate().is_err());
        let spec = WaveHeatSpec::uniform(5, Coefficient::scalar(real(0.0))).unwrap();
        assert!(matches!(wave_heat_build(&spec), Err(Error::NotCoercive { .. })));
    }
}
