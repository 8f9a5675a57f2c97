//! Acceptance suite: one PASS/FAIL line per criterion, with runtime limits.
//! Runs without the libtest harness so the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use closurekit::cases::{run_case, CaseOutcome};
use closurekit_core::closure::{
    assemble_a_ext, assemble_a_s, check_skew_pairing, form_residual, SplitClosureSystem,
};
use closurekit_core::coupled::{build_coupled_operator, check_v_condition};
use closurekit_core::discretize::{sbp_first_derivative, staggered_gradient, Coefficient, Grid1D};
use closurekit_core::ensemble::{
    planted_split_system, random_complex, random_coupled_spec, random_generating_heat_boundary, random_split_params,
    SplitEnsembleParams,
};
use closurekit_core::numkernel::{
    c64, column, max_abs, numerical_abscissa, one_norm, principal_angle, rank, real, ComplexVector, I,
};
use closurekit_core::phs::{check_boundary, heat_general_bc, wave_heat_build, PHSystemSpec, WaveHeatSpec};
use closurekit_core::stability::{
    check_peripheral_inclusion, eigenspace, kernel_intersection, peripheral_point_spectrum, thm39_condition1_margin,
    thm39_condition2_bound,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn from_case(name: &str) -> Outcome {
    let out: CaseOutcome = run_case(name).map_err(|e| e.to_string())?;
    let failed: Vec<String> = out
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} checks", out.checks.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn vec_of(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    column(random_complex(rng, n, 1).as_ref(), 0)
}

fn turing() -> Outcome {
    from_case("turing")
}

fn heat_nonlocal() -> Outcome {
    from_case("heat-nonlocal")
}

fn heat_dirichlet() -> Outcome {
    from_case("heat-dirichlet")
}

fn kernel_theorems() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut planted_eigs, mut worst_angle, mut worst_residual) = (0, 0.0f64, 0.0f64);
    for k in 0..100 {
        let p = random_split_params(&mut rng, 20, true);
        let ps = planted_split_system(&mut rng, &p).map_err(|e| e.to_string())?;
        let sys = &ps.system;
        let a_s = assemble_a_s(sys);
        for &w in &ps.omegas {
            let e = eigenspace(a_s.as_ref(), I * w, &sys.space1, 1e-9).map_err(|e| e.to_string())?;
            let kern = kernel_intersection(sys.a21.as_ref(), sys.a11.as_ref(), w, &sys.space1, 1e-9)
                .map_err(|e| e.to_string())?;
            ensure(e.ncols() == kern.ncols() && e.ncols() > 0, || {
                format!("system {k}: eigenspace dim {} vs kernel dim {}", e.ncols(), kern.ncols())
            })?;
            worst_angle = worst_angle.max(principal_angle(e.as_ref(), kern.as_ref(), &sys.space1).map_err(|e| e.to_string())?);
            planted_eigs += 1;
        }
        let inc = check_peripheral_inclusion(a_s.as_ref(), assemble_a_ext(sys).as_ref(), |v| sys.lift(v), 1e-8, 1e-8)
            .map_err(|e| e.to_string())?;
        ensure(inc.holds, || format!("system {k}: inclusion violations {:?}", inc.violations))?;
        for wit in &inc.certified {
            worst_residual = worst_residual.max(wit.residual);
        }
    }
    ensure(worst_angle <= 1e-8, || format!("principal angle {worst_angle:e}"))?;
    ensure(worst_residual <= 1e-8, || format!("witness residual {worst_residual:e}"))?;

    let mut counterexamples = 0;
    for sys in injective_ensemble(100, 41)? {
        let a_s = assemble_a_s(&sys);
        if !peripheral_point_spectrum(a_s.as_ref(), 1e-8).map_err(|e| e.to_string())?.is_empty() {
            counterexamples += 1;
        }
    }
    ensure(counterexamples == 0, || format!("{counterexamples} injective systems with peripheral eigenvalues"))?;
    Ok(format!(
        "{planted_eigs} planted eigenvalues, angle <= {worst_angle:.1e}, residual <= {worst_residual:.1e}, 100 injective systems"
    ))
}

/// Random systems with injective `A21` (`n2 >= n1`), no planted kernel.
fn injective_ensemble(count: usize, seed: u64) -> Result<Vec<SplitClosureSystem>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let n1 = 1 + k % 10;
        let n2 = n1 + k % 7;
        let p = SplitEnsembleParams { n1, n2, planted: 0, weighted: true, a11_margin: 0.0, s_floor: 0.2 };
        let sys = planted_split_system(&mut rng, &p).map_err(|e| e.to_string())?.system;
        let r = rank(sys.a21.as_ref(), 1e-10).map_err(|e| e.to_string())?;
        ensure(r == n1, || format!("ensemble member {k}: A21 rank {r} < {n1}"))?;
        out.push(sys);
    }
    Ok(out)
}

fn margins() -> Outcome {
    let mut worst2 = f64::NEG_INFINITY;
    for sys in injective_ensemble(100, 7)? {
        let a_s = assemble_a_s(&sys);
        let b = thm39_condition2_bound(sys.a21.as_ref(), sys.s.as_ref(), &sys.space1, &sys.space2)
            .map_err(|e| e.to_string())?;
        let ab = numerical_abscissa(a_s.as_ref(), &sys.space1).map_err(|e| e.to_string())?;
        let slack = 1e-10 * one_norm(a_s.as_ref()).max(1.0);
        ensure(ab <= -b.bound + slack, || format!("abscissa {ab:e} > -nu c^2 = {:e}", -b.bound))?;
        worst2 = worst2.max(ab + b.bound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_eps = f64::INFINITY;
    for k in 0..40 {
        let p = SplitEnsembleParams {
            n1: 2 + k % 9,
            n2: 1 + k % 5,
            planted: 0,
            weighted: true,
            a11_margin: 0.5,
            s_floor: 0.2,
        };
        let sys = planted_split_system(&mut rng, &p).map_err(|e| e.to_string())?.system;
        let eps = thm39_condition1_margin(assemble_a_ext(&sys).as_ref(), &sys.product_space(), sys.n1())
            .map_err(|e| e.to_string())?;
        ensure(eps > 0.0, || format!("instance {k}: condition-1 margin is zero"))?;
        let a_s = assemble_a_s(&sys);
        let ab = numerical_abscissa(a_s.as_ref(), &sys.space1).map_err(|e| e.to_string())?;
        ensure(ab <= -eps + 1e-12 * one_norm(a_s.as_ref()).max(1.0), || {
            format!("instance {k}: abscissa {ab:e} > -eps = {:e}", -eps)
        })?;
        min_eps = min_eps.min(eps);
    }
    Ok(format!("condition 2: max(abscissa + nu c^2) = {worst2:.1e} over 100; condition 1: 40 instances, min eps {min_eps:.2e}"))
}

fn wave_heat() -> Outcome {
    from_case("wave-heat")
}

fn coupled() -> Outcome {
    from_case("coupled-heat")?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut held, mut failed) = (0, 0);
    for k in 0..50 {
        let spec = random_coupled_spec(&mut rng, 10).map_err(|e| e.to_string())?;
        let verdict = check_v_condition(&spec, 1e-10).map_err(|e| e.to_string())?;
        let op = build_coupled_operator(&spec).map_err(|e| e.to_string())?;
        let only_zero = peripheral_point_spectrum(op.c.as_ref(), 1e-8)
            .map_err(|e| e.to_string())?
            .iter()
            .all(|(z, _)| z.norm() <= 1e-8);
        ensure(verdict.holds == only_zero, || {
            format!("instance {k}: V-condition {} but peripheral spectrum in {{0}} is {only_zero}", verdict.holds)
        })?;
        if verdict.holds {
            held += 1;
        } else {
            failed += 1;
        }
    }
    Ok(format!("damped and rotation cases pass; 50 random specs agree ({held} hold, {failed} fail)"))
}

fn structural_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    let mut track = |res: f64, scale: f64, what: &str| -> Result<(), String> {
        worst = worst.max(res / scale.max(1.0));
        ensure(res <= 1e-11 * scale.max(1.0), || format!("{what}: closure residual {res:e}, scale {scale:e}"))
    };

    for _ in 0..20 {
        let p = random_split_params(&mut rng, 12, true);
        let sys = planted_split_system(&mut rng, &p).map_err(|e| e.to_string())?.system;
        let scale = one_norm(assemble_a_ext(&sys).as_ref());
        let h1 = vec_of(&mut rng, sys.n1());
        track(sys.closure_identity_residual(&h1).map_err(|e| e.to_string())?, scale, "split")?;
        let scale_s = max_abs(assemble_a_s(&sys).as_ref()).max(1.0);
        for _ in 0..3 {
            let (u, v) = (vec_of(&mut rng, sys.n1()), vec_of(&mut rng, sys.n1()));
            let fr = form_residual(&sys, &u, &v).map_err(|e| e.to_string())?;
            let bound = 1e-12 * scale_s * sys.space1.norm(&u) * sys.space1.norm(&v);
            ensure(fr <= bound, || format!("form residual {fr:e} > {bound:e}"))?;
        }
    }

    let wh = wave_heat_build(
        &WaveHeatSpec::uniform(21, Coefficient::scalar_fn(|z| c64::new(1.0 + z, 0.1))).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let scale = max_abs(wh.a_ext.a_free.as_ref());
    for k in (0..wh.a_s.dim()).step_by(5) {
        track(wh.closure_identity_residual(&column(wh.a_s.k_basis.as_ref(), k)).map_err(|e| e.to_string())?, scale, "wave-heat")?;
    }

    let grid = Grid1D::new(0.0, 1.0, 31).map_err(|e| e.to_string())?;
    for wb in [closurekit::cases::nonlocal_wb(), closurekit::cases::robin_wb(2.0)] {
        let disc = heat_general_bc(wb, Coefficient::scalar_fn(|z| c64::new(1.0 + z * z, 0.2)), grid)
            .map_err(|e| e.to_string())?;
        let scale = max_abs(disc.a_ext.a_free.as_ref());
        for k in (0..disc.a_s.dim()).step_by(4) {
            track(disc.closure_identity_residual(&column(disc.a_s.k_basis.as_ref(), k)).map_err(|e| e.to_string())?, scale, "port-Hamiltonian")?;
        }
    }

    let mut worst_pairing = 0.0f64;
    for _ in 0..10 {
        let spec = random_coupled_spec(&mut rng, 12).map_err(|e| e.to_string())?;
        let op = build_coupled_operator(&spec).map_err(|e| e.to_string())?;
        let scale = one_norm(assemble_a_ext(&op.system).as_ref());
        let h1 = vec_of(&mut rng, op.system.n1());
        track(op.system.closure_identity_residual(&h1).map_err(|e| e.to_string())?, scale, "coupled")?;
        worst_pairing = worst_pairing.max(check_skew_pairing(&op.system, 1e-14).residual);
    }
    for nodes in [3, 10, 41, 100] {
        let g = Grid1D::new(0.0, 1.0, nodes).map_err(|e| e.to_string())?;
        let pair = staggered_gradient(&g).map_err(|e| e.to_string())?;
        let a12 = pair.adjoint().map_err(|e| e.to_string())?;
        let sys = SplitClosureSystem::new(
            closurekit_core::numkernel::zeros(nodes, nodes),
            closurekit_core::numkernel::scale(a12.as_ref(), real(-1.0)),
            pair.d_plus.clone(),
            closurekit_core::numkernel::identity(nodes - 1),
            pair.w_nodes.clone(),
            pair.w_cells.clone(),
        )
        .map_err(|e| e.to_string())?;
        worst_pairing = worst_pairing.max(check_skew_pairing(&sys, 1e-14).residual);
        let sbp = sbp_first_derivative(&g).map_err(|e| e.to_string())?.identity_residual();
        ensure(sbp <= 1e-13, || format!("SBP residual {sbp:e} at {nodes} nodes"))?;
    }
    ensure(worst_pairing <= 1e-14, || format!("staggered skew-pairing residual {worst_pairing:e}"))?;
    Ok(format!("closure residual / scale <= {worst:.1e}, staggered pairing <= {worst_pairing:.1e}"))
}

fn sector() -> Outcome {
    from_case("sector-diag")
}

fn inheritance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let grid = Grid1D::new(0.0, 1.0, 30).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let wt = random_generating_heat_boundary(&mut rng).map_err(|e| e.to_string())?;
        let spec = PHSystemSpec::heat(wt.clone(), Coefficient::scalar(real(1.0)), grid);
        let report = check_boundary(&spec).map_err(|e| e.to_string())?;
        let generation = report.generation.ok_or_else(|| format!("boundary {k}: W_B undefined"))?;
        ensure(generation.psd, || format!("boundary {k}: generation check false ({:e})", generation.min_eigenvalue))?;
        let disc = heat_general_bc(wt, Coefficient::scalar(real(1.0)), grid).map_err(|e| e.to_string())?;
        let a = &disc.a_ext.a_restricted;
        let ab = numerical_abscissa(a.as_ref(), &disc.a_ext.coordinate_space()).map_err(|e| e.to_string())?;
        let scale = max_abs(a.as_ref());
        ensure(ab <= 1e-10 * scale, || format!("boundary {k}: abscissa {ab:e} > 1e-10 * {scale:e}"))?;
        worst = worst.max(ab / scale);
    }
    Ok(format!("100 generating boundaries, max abscissa / scale = {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("1 turing example spectrum and dissipative summands", 1, turing),
        ("2 nonlocal heat boundary: sigma matrix and discrete decay", 30, heat_nonlocal),
        ("3 Dirichlet heat: leading eigenvalue and failed conditions", 10, heat_dirichlet),
        ("4 kernel equality, peripheral inclusion, injective coupling", 60, kernel_theorems),
        ("5 strict dissipativity margins", 30, margins),
        ("6 wave-heat strong stability shadow", 60, wave_heat),
        ("7 coupled parabolic limits and V-condition equivalence", 60, coupled),
        ("8 structural identities", 10, structural_identities),
        ("9 sector example half-angle", 10, sector),
        ("10 generation implies discrete dissipativity", 60, inheritance),
    ];
    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(limit) {
                Ok(detail)
            } else {
                Err(format!("{detail}; runtime {:.1}s exceeds {limit}s", elapsed.as_secs_f64()))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{:.2}s]: {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {name} [{:.2}s]: {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
