//! Assembles the configured model and exposes its generator.

use closurekit_core::closure::{assemble_a_s, structure_verdict, SplitClosureSystem};
use closurekit_core::coupled::{build_coupled_operator, check_v_condition, CoupledOperator, CoupledParabolicSpec};
use closurekit_core::numkernel::{max_abs, ComplexMatrix, ComplexVector};
use closurekit_core::phs::{check_boundary, discretize_l, wave_heat_build, PHSystemSpec, PhsDiscretization, WaveHeatSystem};
use closurekit_core::WeightedSpace;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{matrix, weight, AnalysisConfig, ModelParams};
use crate::error::{numerical, CliError, CliResult};
use crate::report::{complex_json, matrix_json};

pub enum Model {
    Split {
        system: SplitClosureSystem,
        initial: Option<ComplexVector>,
    },
    Coupled {
        spec: CoupledParabolicSpec,
        op: CoupledOperator,
    },
    WaveHeat(WaveHeatSystem),
    Phs {
        spec: PHSystemSpec,
        disc: PhsDiscretization,
    },
}

/// Structural findings: JSON evidence plus the list of violated hypotheses.
pub struct StructureReport {
    pub evidence: Value,
    pub violations: Vec<String>,
}

impl Model {
    pub fn build(cfg: &AnalysisConfig) -> CliResult<Self> {
        match cfg.model_params()? {
            ModelParams::Split(p) => {
                let a11 = matrix("params.a11", &p.a11)?;
                let a21 = matrix("params.a21", &p.a21)?;
                let s = matrix("params.s", &p.s)?;
                let (n1, n2) = (a11.nrows(), s.nrows());
                let space1 = weight("params.w1", &p.w1, n1)?;
                let space2 = weight("params.w2", &p.w2, n2)?;
                let system = match &p.a12 {
                    Some(rows) => {
                        let a12 = matrix("params.a12", rows)?;
                        SplitClosureSystem::new(a11, a12, a21, s, space1, space2)
                    }
                    None => SplitClosureSystem::with_skew_pairing(a11, a21, s, space1, space2),
                }
                .map_err(numerical("split system"))?;
                let initial = match &p.initial {
                    None => None,
                    Some(v) if v.len() == n1 => Some(ComplexVector::from_fn(n1, |i| v[i].value())),
                    Some(v) => {
                        return Err(CliError::schema("params.initial", format!("length {} != {n1}", v.len())));
                    }
                };
                Ok(Self::Split { system, initial })
            }
            ModelParams::Coupled(kind, p) => {
                let spec = p.spec(kind)?;
                let op = build_coupled_operator(&spec).map_err(numerical("coupled operator"))?;
                Ok(Self::Coupled { spec, op })
            }
            ModelParams::WaveHeat(p) => Ok(Self::WaveHeat(
                wave_heat_build(&p.spec()?).map_err(numerical("wave-heat assembly"))?,
            )),
            ModelParams::Phs(p) => Self::phs(p.spec()?),
            ModelParams::HeatGeneralBc(p) => Self::phs(p.spec()?),
        }
    }

    fn phs(spec: PHSystemSpec) -> CliResult<Self> {
        let disc = discretize_l(&spec).map_err(|e| match e {
            closurekit_core::Error::InvalidInput { .. } | closurekit_core::Error::DimensionMismatch { .. } => {
                CliError::schema("params", e.to_string())
            }
            e => numerical("port-Hamiltonian discretization")(e),
        })?;
        Ok(Self::Phs { spec, disc })
    }

    /// The evolution operator and the space in which it is analysed.
    pub fn generator(&self) -> (ComplexMatrix, WeightedSpace) {
        match self {
            Self::Split { system, .. } => (assemble_a_s(system), system.space1.clone()),
            Self::Coupled { op, .. } => (op.c.clone(), op.space.clone()),
            Self::WaveHeat(sys) => (sys.a_s.a_restricted.clone(), sys.a_s.coordinate_space()),
            Self::Phs { disc, .. } => (disc.a_s.a_restricted.clone(), disc.a_s.coordinate_space()),
        }
    }

    /// Initial state: the configured one or a seeded random unit vector.
    pub fn initial_state(&self, seed: u64) -> ComplexVector {
        if let Self::Split { initial: Some(x), .. } = self {
            return x.clone();
        }
        let (a, space) = self.generator();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = closurekit_core::ensemble::random_complex(&mut rng, a.nrows(), 1).col(0).to_owned();
        let n = space.norm(&x);
        ComplexVector::from_fn(x.nrows(), |i| x[i] / n)
    }

    pub fn structure(&self, cfg: &AnalysisConfig) -> CliResult<StructureReport> {
        let mut violations = Vec::new();
        let evidence = match self {
            Self::Split { system, .. } => {
                let v = structure_verdict(system, cfg.tolerances.pairing_tol).map_err(numerical("structure verdict"))?;
                if !v.s_coercive {
                    violations.push(format!("S is not coercive (nu = {:e})", v.nu));
                }
                if !v.skew_pairing {
                    violations.push(format!("skew pairing fails (residual {:e})", v.skew_residual));
                }
                if !v.a11_dissipative {
                    violations.push(format!("A11 is not dissipative (abscissa {:e})", v.a11_abscissa));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let h1 = closurekit_core::ensemble::random_complex(&mut rng, system.n1(), 1).col(0).to_owned();
                json!({
                    "s_coercive": v.s_coercive,
                    "nu": v.nu,
                    "skew_pairing": v.skew_pairing,
                    "skew_residual": v.skew_residual,
                    "a11_dissipative": v.a11_dissipative,
                    "a11_abscissa": v.a11_abscissa,
                    "a_ext_dissipative": v.a_ext_dissipative,
                    "a_ext_abscissa": v.a_ext_abscissa,
                    "closure_identity_residual": system.closure_identity_residual(&h1).map_err(numerical("closure identity"))?,
                })
            }
            Self::Coupled { spec, op } => {
                let v = check_v_condition(spec, 1e-10).map_err(numerical("V condition"))?;
                for (j, ok) in v.per_piece_dissipative.iter().enumerate() {
                    if !ok {
                        violations.push(format!("potential piece {j} is not dissipative"));
                    }
                }
                let sv = structure_verdict(&op.system, cfg.tolerances.pairing_tol).map_err(numerical("structure verdict"))?;
                json!({
                    "pieces_dissipative": v.per_piece_dissipative,
                    "v_condition": v.holds,
                    "failing_beta": v.failing_beta,
                    "witness": v.witness.as_ref().map(|w| (0..w.nrows()).map(|i| complex_json(w[i])).collect::<Vec<_>>()),
                    "nu": sv.nu,
                    "skew_pairing": sv.skew_pairing,
                    "skew_residual": sv.skew_residual,
                })
            }
            Self::WaveHeat(sys) => {
                let h1 = sys.a_s.k_basis.col(0).to_owned();
                json!({
                    "nu": sys.nu,
                    "closure_identity_residual": sys.closure_identity_residual(&h1).map_err(numerical("closure identity"))?,
                    "lift_constraint_residual": sys.lift_constraint_residual(&h1),
                    "a_ext_abscissa": closurekit_core::numkernel::numerical_abscissa(
                        sys.a_ext.a_restricted.as_ref(),
                        &sys.a_ext.coordinate_space(),
                    ).map_err(numerical("numerical abscissa"))?,
                    "scale": max_abs(sys.a_ext.a_free.as_ref()),
                })
            }
            Self::Phs { spec, disc } => {
                let b = check_boundary(spec).map_err(numerical("boundary check"))?;
                if !b.p1ext_invertible {
                    violations.push("extended P1 is singular, W_B undefined".into());
                }
                if let Some(g) = b.generation {
                    if !g.psd {
                        violations.push(format!("W_B fails the generation test (min eigenvalue {:e})", g.min_eigenvalue));
                    }
                }
                let h1 = disc.a_s.k_basis.col(0).to_owned();
                let heat = b.heat_conditions.as_ref().map(|h| {
                    json!({
                        "cond1": {"holds": h.cond1.holds, "best_c": h.cond1.best_c},
                        "cond2": {"holds": h.cond2.holds, "best_c": h.cond2.best_c},
                        "cond3": h.cond3,
                        "sigma_matrix": matrix_json(&h.sigma.matrix),
                        "sigma_min_eigenvalue": h.sigma.min_eigenvalue,
                    })
                });
                json!({
                    "m": disc.bounds.m,
                    "nu": disc.bounds.nu,
                    "p1ext_invertible": b.p1ext_invertible,
                    "w_b": b.wb.as_ref().map(matrix_json),
                    "generation_psd": b.generation.map(|g| g.psd),
                    "generation_min_eigenvalue": b.generation.map(|g| g.min_eigenvalue),
                    "g1_rank_n": b.g1_rank_n,
                    "heat_conditions": heat,
                    "closure_identity_residual": disc.closure_identity_residual(&h1).map_err(numerical("closure identity"))?,
                    "a_ext_abscissa": closurekit_core::numkernel::numerical_abscissa(
                        disc.a_ext.a_restricted.as_ref(),
                        &disc.a_ext.coordinate_space(),
                    ).map_err(numerical("numerical abscissa"))?,
                })
            }
        };
        Ok(StructureReport { evidence, violations })
    }
}
