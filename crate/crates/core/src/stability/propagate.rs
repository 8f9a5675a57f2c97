use alloc::vec::Vec;

use faer::MatRef;
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use crate::numkernel::{
    c64, check_square, expect_dim, expm, identity, matvec, real, scale, solve, sub, ComplexMatrix, ComplexVector,
    WeightedSpace,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson,
    BackwardEuler,
    Expm,
}

impl Scheme {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "crank-nicolson" | "cn" => Some(Self::CrankNicolson),
            "backward-euler" | "be" => Some(Self::BackwardEuler),
            "expm" => Some(Self::Expm),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CrankNicolson => "crank-nicolson",
            Self::BackwardEuler => "backward-euler",
            Self::Expm => "expm",
        }
    }
}

/// Sampled weighted norms of a trajectory `x(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub final_state: ComplexVector,
}

impl Trajectory {
    /// Largest relative increase `(n_{k+1} - n_k) / n_0` between consecutive samples.
    pub fn max_relative_increase(&self) -> f64 {
        let base = self.norms.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        self.norms
            .windows(2)
            .map(|w| (w[1] - w[0]) / base)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn step_matrix(a: MatRef<'_, c64>, dt: f64, scheme: Scheme) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let id = identity(n);
    match scheme {
        Scheme::CrankNicolson => {
            let half = scale(a, real(0.5 * dt));
            let lhs = sub(id.as_ref(), half.as_ref());
            let rhs = crate::numkernel::add(id.as_ref(), half.as_ref());
            solve(lhs.as_ref(), rhs.as_ref(), "Crank-Nicolson step matrix")
        }
        Scheme::BackwardEuler => {
            let lhs = sub(id.as_ref(), scale(a, real(dt)).as_ref());
            solve(lhs.as_ref(), id.as_ref(), "backward Euler step matrix")
        }
        Scheme::Expm => expm(scale(a, real(dt)).as_ref()),
    }
}

/// Integrates `x' = A x` from `x0` up to `t_end` with `ceil(t_end / dt)` equal
/// steps (the step is shortened so the last sample lands on `t_end`), recording
/// the W-norm after every step.
pub fn propagate(
    a: MatRef<'_, c64>,
    space: &WeightedSpace,
    x0: &ComplexVector,
    t_end: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Trajectory> {
    let n = check_square(a)?;
    expect_dim("propagate (space)", n, space.dim())?;
    expect_dim("propagate (x0)", n, x0.nrows())?;
    if !(dt > 0.0) || !(t_end >= 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(Error::invalid("time stepping", "need dt > 0 and t_end >= 0"));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { dt } else { t_end / steps as f64 };
    let m = step_matrix(a, h, scheme)?;
    let mut x = x0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    times.push(0.0);
    norms.push(space.norm(&x));
    for k in 1..=steps {
        x = matvec(m.as_ref(), &x);
        times.push(if k == steps { t_end } else { k as f64 * h });
        norms.push(space.norm(&x));
    }
    Ok(Trajectory {
        times,
        norms,
        final_state: x,
    })
}

/// Least-squares slope of `log ||x(t)||` over the trailing `window` fraction of samples.
pub fn decay_rate_fit(traj: &Trajectory, window: f64) -> Result<f64> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::invalid("fit window", "must lie in (0, 1]"));
    }
    let len = traj.norms.len();
    let take = ((len as f64 * window).ceil() as usize).clamp(2, len.max(2));
    if len < 2 {
        return Err(Error::invalid("trajectory", "need at least two samples"));
    }
    let start = len - take;
    let ts = &traj.times[start..];
    let ns = &traj.norms[start..];
    if ns.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("trajectory", "norms must be positive in the fit window"));
    }
    let ys: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let m = ts.len() as f64;
    let tbar = ts.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        sxy += (t - tbar) * (y - ybar);
        sxx += (t - tbar) * (t - tbar);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("trajectory", "fit window has a single time"));
    }
    Ok(sxy / sxx)
}
