//! Command implementations. Each returns a [`Report`] report.

use closurekit_core::numkernel::{eigenvalues, SpectralReport};
use closurekit_core::stability::{
    classify, decay_rate_fit, numerical_range_boundary, propagate, resolvent_norm_scan, sector_half_angle, ResolventSup,
    Scheme,
};
use serde_json::{json, Value};

use crate::cases::{run_case, CaseOutcome};
use crate::config::AnalysisConfig;
use crate::error::{numerical, CliError, CliResult};
use crate::model::Model;
use crate::report::{complex_json, num, provenance, Report, Table};

/// A loaded config with its hash.
pub struct Loaded {
    pub config: AnalysisConfig,
    pub sha256: Option<String>,
}

impl Loaded {
    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), json!(command));
        m.insert("model".into(), json!(self.config.model.as_str()));
        m.insert("provenance".into(), provenance(self.sha256.as_deref(), self.config.seed));
        m
    }
}

const RANGE_ANGLES: usize = 32;

/// Hypothesis checks and the stability verdict. Returns the report and
/// whether every structural hypothesis held.
pub fn check(loaded: &Loaded) -> CliResult<(Report, bool)> {
    let cfg = &loaded.config;
    let model = Model::build(cfg)?;
    let structure = model.structure(cfg)?;
    let (a, space) = model.generator();
    let v = classify(a.as_ref(), &space, cfg.tolerances.re_tol).map_err(numerical("classify"))?;
    let pts = numerical_range_boundary(a.as_ref(), &space, RANGE_ANGLES).map_err(numerical("numerical range"))?;
    let half_angle = sector_half_angle(&pts);
    let ok = structure.violations.is_empty();
    let mut out = loaded.header("check");
    out.insert("dimension".into(), json!(a.nrows()));
    out.insert("hypotheses".into(), json!({"ok": ok, "violations": structure.violations}));
    out.insert("structure".into(), structure.evidence);
    out.insert(
        "stability".into(),
        json!({
            "classification": v.classification.as_str(),
            "abscissa": v.abscissa,
            "growth_bound": v.growth_bound,
            "strict_margin": v.strict_margin,
            "peripheral_eigenvalues": v.peripheral_eigs.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
            "resolvent_sup": match v.resolvent_sup {
                ResolventSup::Finite(x) => json!(x),
                ResolventSup::Unbounded => json!("unbounded"),
            },
            "re_tol": v.re_tol,
            "scale": v.scale,
        }),
    );
    out.insert("sector_half_angle".into(), json!(half_angle));
    let json = Value::Object(out);
    let table = Table::from_json(&json);
    Ok((Report { json, table }, ok))
}

pub fn spectrum(loaded: &Loaded) -> CliResult<Report> {
    let model = Model::build(&loaded.config)?;
    let (a, _) = model.generator();
    let ev = eigenvalues(a.as_ref()).map_err(numerical("eigensolve"))?;
    let mut table = Table::new(&["index", "re", "im"]);
    for (i, z) in ev.iter().enumerate() {
        table.push(vec![i.to_string(), num(z.re), num(z.im)]);
    }
    let mut out = loaded.header("spectrum");
    out.insert("dimension".into(), json!(a.nrows()));
    out.insert("eigenvalues".into(), ev.iter().map(|z| complex_json(*z)).collect());
    Ok(Report { json: Value::Object(out), table })
}

pub fn simulate(loaded: &Loaded, t_end: f64, dt: f64, scheme: Scheme) -> CliResult<Report> {
    let model = Model::build(&loaded.config)?;
    let (a, space) = model.generator();
    let x0 = model.initial_state(loaded.config.seed);
    let traj = propagate(a.as_ref(), &space, &x0, t_end, dt, scheme).map_err(numerical("propagate"))?;
    let mut table = Table::new(&["t", "norm"]);
    for (t, n) in traj.times.iter().zip(&traj.norms) {
        table.push(vec![num(*t), num(*n)]);
    }
    let mut out = loaded.header("simulate");
    out.insert("scheme".into(), json!(scheme.as_str()));
    out.insert("t_end".into(), json!(t_end));
    out.insert("dt".into(), json!(dt));
    out.insert("max_relative_increase".into(), json!(traj.max_relative_increase()));
    out.insert("decay_rate_fit".into(), json!(decay_rate_fit(&traj, 0.5).ok()));
    out.insert("times".into(), json!(traj.times));
    out.insert("norms".into(), json!(traj.norms));
    Ok(Report { json: Value::Object(out), table })
}

pub fn resolvent(loaded: &Loaded, omega_min: f64, omega_max: f64, samples: usize) -> CliResult<Report> {
    if samples == 0 || !(omega_max >= omega_min) {
        return Err(CliError::Usage("need samples >= 1 and omega-max >= omega-min".into()));
    }
    let model = Model::build(&loaded.config)?;
    let (a, _) = model.generator();
    let omegas: Vec<f64> = if samples == 1 {
        vec![omega_min]
    } else {
        (0..samples)
            .map(|k| omega_min + (omega_max - omega_min) * k as f64 / (samples - 1) as f64)
            .collect()
    };
    let scan = resolvent_norm_scan(a.as_ref(), &omegas).map_err(numerical("resolvent scan"))?;
    let mut table = Table::new(&["omega", "norm"]);
    for s in &scan {
        table.push(vec![num(s.omega), s.norm.map_or_else(|| "inf".into(), num)]);
    }
    let mut out = loaded.header("resolvent");
    out.insert(
        "samples".into(),
        scan.iter().map(|s| json!({"omega": s.omega, "norm": s.norm})).collect(),
    );
    Ok(Report { json: Value::Object(out), table })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nodes: usize,
    pub dimension: usize,
    pub max_re: f64,
    pub abscissa: f64,
    pub oscillatory_gap: Option<f64>,
    pub classification: &'static str,
}

fn sweep_one(cfg: &AnalysisConfig, nodes: usize) -> CliResult<SweepRow> {
    let model = Model::build(&cfg.with_nodes(nodes)?)?;
    let (a, space) = model.generator();
    let v = classify(a.as_ref(), &space, cfg.tolerances.re_tol).map_err(numerical("classify"))?;
    let ev = eigenvalues(a.as_ref()).map_err(numerical("eigensolve"))?;
    Ok(SweepRow {
        nodes,
        dimension: a.nrows(),
        max_re: v.growth_bound,
        abscissa: v.abscissa,
        oscillatory_gap: SpectralReport::new(ev, v.re_tol).min_abs_real_oscillatory(),
        classification: v.classification.as_str(),
    })
}

/// Worker count: `THREADS` if set, else the available parallelism.
fn worker_count(jobs: usize) -> usize {
    let wanted = std::env::var("THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    wanted.min(jobs).max(1)
}

/// Refinement study. Grid sizes run in parallel; rows keep the input order.
pub fn sweep(loaded: &Loaded, grids: &[usize]) -> CliResult<Report> {
    if grids.is_empty() {
        return Err(CliError::Usage("--grids needs at least one size".into()));
    }
    let cfg = &loaded.config;
    let workers = worker_count(grids.len());
    let mut slots: Vec<Option<CliResult<SweepRow>>> = (0..grids.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = grids.len().div_ceil(workers);
        for (ids, out) in grids.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (n, slot) in ids.iter().zip(out.iter_mut()) {
                    *slot = Some(sweep_one(cfg, *n));
                }
            });
        }
    });
    let rows = slots
        .into_iter()
        .map(|s| s.expect("every slot is filled"))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&["nodes", "dimension", "max_re", "abscissa", "oscillatory_gap", "classification"]);
    for r in &rows {
        table.push(vec![
            r.nodes.to_string(),
            r.dimension.to_string(),
            num(r.max_re),
            num(r.abscissa),
            r.oscillatory_gap.map_or_else(String::new, num),
            r.classification.to_string(),
        ]);
    }
    let mut out = loaded.header("sweep");
    out.insert(
        "rows".into(),
        rows.iter()
            .map(|r| {
                json!({
                    "nodes": r.nodes,
                    "dimension": r.dimension,
                    "max_re": r.max_re,
                    "abscissa": r.abscissa,
                    "oscillatory_gap": r.oscillatory_gap,
                    "classification": r.classification,
                })
            })
            .collect(),
    );
    Ok(Report { json: Value::Object(out), table })
}

pub fn reproduce(cases: &[&str]) -> CliResult<(Report, Vec<CaseOutcome>)> {
    let outcomes = cases.iter().map(|c| run_case(c)).collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&["case", "check", "passed", "observed", "expected", "tolerance"]);
    for o in &outcomes {
        for c in &o.checks {
            table.push(vec![
                o.case.clone(),
                c.name.clone(),
                c.passed.to_string(),
                num(c.observed),
                num(c.expected),
                num(c.tolerance),
            ]);
        }
    }
    let json = json!({
        "command": "reproduce",
        "provenance": provenance(None, 0),
        "passed": outcomes.iter().all(|o| o.passed),
        "cases": serde_json::to_value(&outcomes).expect("outcomes serialize"),
    });
    Ok((Report { json, table }, outcomes))
}
