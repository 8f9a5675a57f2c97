//! Canned reproductions of the worked examples, each with recorded
//! expectations and tolerances.

use std::f64::consts::{FRAC_PI_4, PI};

use closurekit_core::coupled::{build_coupled_operator, simulate_and_compare, unit_coefficients, ComparisonReport, CoupledKind, CoupledParabolicSpec};
use closurekit_core::discretize::{Coefficient, Grid1D};
use closurekit_core::numkernel::{
    add, cplx, diag, eigenvalues, from_real_rows, max_abs, numerical_abscissa, one_norm, real, ComplexMatrix, SpectralReport,
};
use closurekit_core::phs::{heat_bc_sigma_matrix, heat_general_bc, heat_stability_conditions, wave_heat_build, WaveHeatSpec};
use closurekit_core::stability::{
    classify, decay_rate_fit, numerical_range_boundary, propagate, sector_half_angle, Classification, Scheme,
};
use closurekit_core::WeightedSpace;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{numerical, CliError, CliResult};

pub const CASES: [&str; 8] = [
    "turing",
    "sector-diag",
    "heat-nonlocal",
    "heat-dirichlet",
    "heat-robin",
    "wave-heat",
    "coupled-heat",
    "coupled-biharmonic",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// `|observed - expected| <= tolerance`.
    fn close(&mut self, name: &str, observed: f64, expected: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.into(),
            passed: (observed - expected).abs() <= tolerance,
            observed,
            expected,
            tolerance,
            detail: format!("|{observed:e} - {expected:e}| <= {tolerance:e}"),
        });
    }

    /// `observed <= bound`.
    fn at_most(&mut self, name: &str, observed: f64, bound: f64) {
        self.0.push(Check {
            name: name.into(),
            passed: observed <= bound,
            observed,
            expected: bound,
            tolerance: 0.0,
            detail: format!("{observed:e} <= {bound:e}"),
        });
    }

    fn holds(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(Check {
            name: name.into(),
            passed,
            observed: if passed { 1.0 } else { 0.0 },
            expected: 1.0,
            tolerance: 0.0,
            detail,
        });
    }

    fn finish(self, case: &str) -> CaseOutcome {
        CaseOutcome {
            case: case.into(),
            passed: self.0.iter().all(|c| c.passed),
            checks: self.0,
        }
    }
}

pub fn run_case(name: &str) -> CliResult<CaseOutcome> {
    let checks = match name {
        "turing" => turing()?,
        "sector-diag" => sector_diag()?,
        "heat-nonlocal" => heat_nonlocal()?,
        "heat-dirichlet" => heat_dirichlet()?,
        "heat-robin" => heat_robin()?,
        "wave-heat" => wave_heat()?,
        "coupled-heat" => coupled(CoupledKind::Heat)?,
        "coupled-biharmonic" => coupled(CoupledKind::Biharmonic)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown case `{other}`; expected one of {}",
                CASES.join(", ")
            )))
        }
    };
    Ok(checks.finish(name))
}

fn max_re(vals: &[closurekit_core::c64]) -> f64 {
    vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

pub fn turing_matrices() -> (ComplexMatrix, ComplexMatrix) {
    let a = from_real_rows(&[&[0.0, -1.0, 1.0], &[1.0, 0.0, 0.0], &[-1.0, 0.0, -1.0]]);
    let b = from_real_rows(&[&[0.0, 2.0, -1.0], &[-2.0, 0.0, 0.0], &[1.0, 0.0, -1.0]]);
    (a, b)
}

/// Largest distance from an expected value to the nearest computed one, and vice versa.
pub fn spectrum_deviation(got: &[closurekit_core::c64], want: &[closurekit_core::c64]) -> f64 {
    let one_way = |xs: &[closurekit_core::c64], ys: &[closurekit_core::c64]| {
        xs.iter()
            .map(|x| ys.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    one_way(got, want).max(one_way(want, got))
}

fn turing() -> CliResult<Checks> {
    let mut c = Checks::default();
    let (a, b) = turing_matrices();
    let space = WeightedSpace::identity(3);
    let sum = add(a.as_ref(), b.as_ref());
    let got = eigenvalues(sum.as_ref()).map_err(numerical("eigensolve"))?;
    let want = [real(-2.0), cplx(0.0, 1.0), cplx(0.0, -1.0)];
    c.at_most("spectrum of A+B is {-2, i, -i}", spectrum_deviation(&got, &want), 1e-10);
    for (m, label) in [(&a, "A"), (&b, "B")] {
        let ab = numerical_abscissa(m.as_ref(), &space).map_err(numerical("numerical abscissa"))?;
        c.close(&format!("abscissa({label}) = 0"), ab, 0.0, 1e-12);
        let ev = eigenvalues(m.as_ref()).map_err(numerical("eigensolve"))?;
        c.at_most(&format!("max Re eig({label}) < 0"), max_re(&ev), -1e-8);
    }
    Ok(c)
}

pub fn sector_matrix(n: usize) -> ComplexMatrix {
    let d: Vec<_> = (1..=n).map(|k| cplx(-((k * k) as f64), -((k * k) as f64))).collect();
    diag(&d)
}

fn sector_diag() -> CliResult<Checks> {
    let mut c = Checks::default();
    let a = sector_matrix(10);
    let space = WeightedSpace::identity(10);
    let pts = numerical_range_boundary(a.as_ref(), &space, 64).map_err(numerical("numerical range"))?;
    let off_ray = pts.iter().map(|z| (z.arg() + 3.0 * FRAC_PI_4).abs()).fold(0.0, f64::max);
    c.at_most("numerical range on the ray arg z = -3pi/4", off_ray, 1e-10);
    c.close("sector half-angle", sector_half_angle(&pts), FRAC_PI_4, 1e-10);
    let v = classify(a.as_ref(), &space, None).map_err(numerical("classify"))?;
    c.holds(
        "strictly dissipative",
        v.classification == Classification::StrictlyDissipative,
        v.classification.as_str().into(),
    );
    Ok(c)
}

pub fn nonlocal_wb() -> ComplexMatrix {
    from_real_rows(&[&[0.0, 1.0, 1.0, -1.0], &[1.0, 1.0, 0.0, 0.0]])
}

pub fn dirichlet_wb() -> ComplexMatrix {
    from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]])
}

pub fn robin_wb(kappa: f64) -> ComplexMatrix {
    from_real_rows(&[&[0.0, 0.0, kappa, -1.0], &[kappa, 1.0, 0.0, 0.0]])
}

/// Unit-conductivity heat equation on `[0, 1]` with `n` intervals.
pub fn heat_spectrum(tilde_wb: &ComplexMatrix, n: usize) -> CliResult<(ComplexMatrix, Vec<closurekit_core::c64>)> {
    let grid = Grid1D::new(0.0, 1.0, n + 1).map_err(numerical("grid"))?;
    let disc = heat_general_bc(tilde_wb.clone(), Coefficient::scalar(real(1.0)), grid)
        .map_err(numerical("heat discretization"))?;
    let a = disc.a_s.a_restricted;
    let ev = eigenvalues(a.as_ref()).map_err(numerical("eigensolve"))?;
    Ok((a, ev))
}

fn heat_nonlocal() -> CliResult<Checks> {
    let mut c = Checks::default();
    let sigma = heat_bc_sigma_matrix(nonlocal_wb().as_ref()).map_err(numerical("sigma matrix"))?;
    let want = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let dev = max_abs((sigma.matrix.clone() - want).as_ref());
    c.at_most("sigma matrix = [[2,1],[1,2]]", dev, 1e-14);
    c.holds("sigma matrix positive definite", sigma.pd, format!("min eigenvalue {:e}", sigma.min_eigenvalue));

    let mut deltas = Vec::new();
    let mut at_200 = None;
    for n in [100, 200, 400] {
        let (a, ev) = heat_spectrum(&nonlocal_wb(), n)?;
        let delta = -max_re(&ev);
        c.at_most(&format!("max Re eig < 0 at n = {n}"), -delta, -1e-8);
        deltas.push(delta);
        if n == 200 {
            at_200 = Some((a, delta));
        }
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    c.at_most("decay margin stable across n (max/min - 1)", hi / lo - 1.0, 0.2);

    let (a, delta) = at_200.expect("n = 200 is in the sweep");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x0 = closurekit_core::ensemble::random_complex(&mut rng, a.nrows(), 1).col(0).to_owned();
    let t_end = 20.0 / delta;
    let traj = propagate(a.as_ref(), &WeightedSpace::identity(a.nrows()), &x0, t_end, t_end / 400.0, Scheme::Expm)
        .map_err(numerical("propagate"))?;
    let rate = decay_rate_fit(&traj, 0.5).map_err(numerical("decay fit"))?;
    c.close("fitted decay rate matches max Re eig (relative)", rate / -delta, 1.0, 0.1);
    Ok(c)
}

fn heat_dirichlet() -> CliResult<Checks> {
    let mut c = Checks::default();
    let conds = heat_stability_conditions(dirichlet_wb().as_ref()).map_err(numerical("heat conditions"))?;
    c.holds("condition 1 fails", !conds.cond1.holds, format!("best c {}", conds.cond1.best_c));
    c.holds("condition 2 fails", !conds.cond2.holds, format!("best c {}", conds.cond2.best_c));
    c.holds("condition 3 fails", !conds.cond3, format!("sigma min eigenvalue {:e}", conds.sigma.min_eigenvalue));
    let (_, ev) = heat_spectrum(&dirichlet_wb(), 400)?;
    c.close("leading eigenvalue / -pi^2", max_re(&ev) / -(PI * PI), 1.0, 0.01);
    Ok(c)
}

/// Smallest positive root of `(mu^2 - kappa^2) sin mu = 2 kappa mu cos mu`:
/// the first Robin eigenvalue is `-mu^2`.
pub fn robin_mu(kappa: f64) -> f64 {
    let f = |mu: f64| (mu * mu - kappa * kappa) * mu.sin() - 2.0 * kappa * mu * mu.cos();
    let (mut lo, mut hi) = (1e-9, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn heat_robin() -> CliResult<Checks> {
    let mut c = Checks::default();
    let kappa = 1.0;
    let sigma = heat_bc_sigma_matrix(robin_wb(kappa).as_ref()).map_err(numerical("sigma matrix"))?;
    let want = from_real_rows(&[&[2.0 * kappa, 0.0], &[0.0, 2.0 * kappa]]);
    c.at_most("sigma matrix = C + C*", max_abs((sigma.matrix.clone() - want).as_ref()), 1e-14);
    let conds = heat_stability_conditions(robin_wb(kappa).as_ref()).map_err(numerical("heat conditions"))?;
    c.holds("condition 3 holds", conds.cond3, format!("sigma min eigenvalue {:e}", conds.sigma.min_eigenvalue));
    let (_, ev) = heat_spectrum(&robin_wb(kappa), 400)?;
    let mu = robin_mu(kappa);
    c.close("leading eigenvalue / -mu1^2", max_re(&ev) / -(mu * mu), 1.0, 0.01);
    Ok(c)
}

/// Smallest `|Re lambda|` over eigenvalues off the real axis.
pub fn wave_heat_gap(n: usize) -> CliResult<f64> {
    let spec = WaveHeatSpec::uniform(n + 1, Coefficient::scalar(real(1.0))).map_err(numerical("wave-heat spec"))?;
    let sys = wave_heat_build(&spec).map_err(numerical("wave-heat assembly"))?;
    let ev = eigenvalues(sys.a_s.a_restricted.as_ref()).map_err(numerical("eigensolve"))?;
    oscillatory_gap(&ev)
}

fn wave_heat() -> CliResult<Checks> {
    let mut c = Checks::default();
    let spec = WaveHeatSpec::uniform(101, Coefficient::scalar(real(1.0))).map_err(numerical("wave-heat spec"))?;
    let sys = wave_heat_build(&spec).map_err(numerical("wave-heat assembly"))?;
    let a = &sys.a_s.a_restricted;
    let ev = eigenvalues(a.as_ref()).map_err(numerical("eigensolve"))?;
    let min_abs = ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    c.holds("no eigenvalue with |Re| <= 1e-8", min_abs > 1e-8, format!("min |Re| {min_abs:e}"));
    c.holds("all Re eig < 0", max_re(&ev) < 0.0, format!("max Re {:e}", max_re(&ev)));

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x0 = closurekit_core::ensemble::random_complex(&mut rng, a.nrows(), 1).col(0).to_owned();
    let traj = propagate(a.as_ref(), &sys.a_s.coordinate_space(), &x0, 2.0, 0.01, Scheme::CrankNicolson)
        .map_err(numerical("propagate"))?;
    c.at_most("Crank-Nicolson norms nonincreasing", traj.max_relative_increase(), 1e-12);

    let gaps = [wave_heat_gap(50)?, oscillatory_gap(&ev)?, wave_heat_gap(200)?];
    c.holds(
        "hyperbolic gap decreases over n = 50, 100, 200",
        gaps[0] > gaps[1] && gaps[1] > gaps[2],
        format!("{gaps:?}"),
    );
    Ok(c)
}

fn oscillatory_gap(ev: &[closurekit_core::c64]) -> CliResult<f64> {
    SpectralReport::new(ev.to_vec(), 1e-8)
        .min_abs_real_oscillatory()
        .ok_or_else(|| CliError::Mismatch("wave-heat: no oscillatory eigenvalues".into()))
}

pub fn coupled_spec(kind: CoupledKind, v: ComplexMatrix, nodes: usize) -> CliResult<CoupledParabolicSpec> {
    let grid = Grid1D::new(0.0, 1.0, nodes).map_err(numerical("grid"))?;
    Ok(CoupledParabolicSpec::constant(grid, kind, unit_coefficients(v.nrows()), v))
}

fn coupled(kind: CoupledKind) -> CliResult<Checks> {
    let mut c = Checks::default();
    let nodes = 21;
    let damped = from_real_rows(&[&[0.0, 0.0], &[0.0, -1.0]]);
    match simulate_and_compare(&coupled_spec(kind, damped, nodes)?, None, 0.01).map_err(numerical("simulate and compare"))? {
        ComparisonReport::Converges { distance, .. } => c.at_most("||expm(TC) - P|| (damped V)", distance, 1e-4),
        other => c.holds("damped V converges", false, format!("{other:?}")),
    }
    let rot = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let spec = coupled_spec(kind, rot, nodes)?;
    // Exponential propagation of the invariant vector is exact up to round-off
    // of order eps * ||C||_1, which for the h^-4 biharmonic operator exceeds 1e-10.
    let c_norm = one_norm(build_coupled_operator(&spec).map_err(numerical("coupled operator"))?.c.as_ref());
    let drift_tol = match kind {
        CoupledKind::Heat => 1e-10,
        CoupledKind::Biharmonic => 1e-10_f64.max(100.0 * f64::EPSILON * c_norm),
    };
    match simulate_and_compare(&spec, None, 0.5).map_err(numerical("simulate and compare"))? {
        ComparisonReport::Oscillates { norm_drift, beta, .. } => {
            c.close("oscillation frequency |beta|", beta.abs(), 1.0, 1e-10);
            c.at_most("norm drift of the planted eigenvector", norm_drift, drift_tol);
        }
        other => c.holds("rotation V oscillates", false, format!("{other:?}")),
    }
    Ok(c)
}
