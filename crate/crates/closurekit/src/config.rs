//! JSON analysis configs. Complex numbers are a bare number or `[re, im]`;
//! matrices are nested row arrays of those.

use std::path::Path;

use closurekit_core::coupled::{CoupledKind, CoupledParabolicSpec, PotentialPiece};
use closurekit_core::discretize::{Coefficient, Grid1D};
use closurekit_core::numkernel::{c64, ComplexMatrix};
use closurekit_core::phs::{PHSystemSpec, WaveHeatSpec};
use closurekit_core::WeightedSpace;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{numerical, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Split,
    CoupledHeat,
    CoupledBiharmonic,
    WaveHeat,
    Phs,
    HeatGeneralBc,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Split => "split",
            Self::CoupledHeat => "coupled-heat",
            Self::CoupledBiharmonic => "coupled-biharmonic",
            Self::WaveHeat => "wave-heat",
            Self::Phs => "phs",
            Self::HeatGeneralBc => "heat-general-bc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Peripheral threshold on `|Re lambda|`; defaults to `1e-8 ||A||_1`.
    #[serde(default)]
    pub re_tol: Option<f64>,
    #[serde(default = "default_pairing_tol")]
    pub pairing_tol: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
}

fn default_pairing_tol() -> f64 {
    1e-10
}

fn default_gap_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            re_tol: None,
            pairing_tol: default_pairing_tol(),
            gap_tol: default_gap_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub model: ModelKind,
    pub params: serde_json::Value,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexNumber {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexNumber {
    pub fn value(self) -> c64 {
        match self {
            Self::Real(re) => c64::new(re, 0.0),
            Self::Pair([re, im]) => c64::new(re, im),
        }
    }
}

pub type MatrixRows = Vec<Vec<ComplexNumber>>;

pub fn matrix(field: &str, rows: &MatrixRows) -> CliResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::schema(field, "matrix must be nonempty"));
    }
    if let Some(bad) = rows.iter().position(|row| row.len() != c) {
        return Err(CliError::schema(
            field,
            format!("row {bad} has {} entries, expected {c}", rows[bad].len()),
        ));
    }
    Ok(ComplexMatrix::from_fn(r, c, |i, j| rows[i][j].value()))
}

/// Scalar coefficient: a constant or `{breakpoints, values}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarCoefficient {
    Constant(ComplexNumber),
    Piecewise { breakpoints: Vec<f64>, values: Vec<ComplexNumber> },
}

impl Default for ScalarCoefficient {
    fn default() -> Self {
        Self::Constant(ComplexNumber::Real(1.0))
    }
}

impl ScalarCoefficient {
    pub fn build(&self, field: &str) -> CliResult<Coefficient> {
        match self {
            Self::Constant(v) => Ok(Coefficient::scalar(v.value())),
            Self::Piecewise { breakpoints, values } => {
                let vals: Vec<c64> = values.iter().map(|v| v.value()).collect();
                Coefficient::piecewise_scalar(breakpoints.clone(), &vals)
                    .map_err(|e| CliError::schema(field, e.to_string()))
            }
        }
    }
}

/// Matrix coefficient: a constant matrix or `{breakpoints, values}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixCoefficient {
    Constant(MatrixRows),
    Piecewise { breakpoints: Vec<f64>, values: Vec<MatrixRows> },
}

impl MatrixCoefficient {
    pub fn build(&self, field: &str) -> CliResult<Coefficient> {
        match self {
            Self::Constant(rows) => Ok(Coefficient::Constant(matrix(field, rows)?)),
            Self::Piecewise { breakpoints, values } => {
                let vals = values.iter().map(|v| matrix(field, v)).collect::<CliResult<Vec<_>>>()?;
                Coefficient::piecewise(breakpoints.clone(), vals).map_err(|e| CliError::schema(field, e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitParams {
    pub a11: MatrixRows,
    /// Defaults to `-adj(a21)`, which enforces the skew pairing.
    #[serde(default)]
    pub a12: Option<MatrixRows>,
    pub a21: MatrixRows,
    pub s: MatrixRows,
    #[serde(default)]
    pub w1: Option<MatrixRows>,
    #[serde(default)]
    pub w2: Option<MatrixRows>,
    #[serde(default)]
    pub initial: Option<Vec<ComplexNumber>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub start: f64,
    pub end: f64,
    pub v: MatrixRows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Constant(MatrixRows),
    Pieces(Vec<PieceConfig>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledParams {
    pub nodes: usize,
    #[serde(default = "unit_interval")]
    pub interval: [f64; 2],
    /// One scalar coefficient per component; defaults to all ones.
    #[serde(default)]
    pub coefficients: Option<Vec<ScalarCoefficient>>,
    pub potential: PotentialConfig,
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveHeatParams {
    /// Nodes on each of the two subintervals.
    pub nodes: usize,
    #[serde(default)]
    pub s: ScalarCoefficient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhsParams {
    pub nodes: usize,
    pub p0: MatrixRows,
    pub p1: MatrixRows,
    pub g0: MatrixRows,
    pub g1: MatrixRows,
    pub hamiltonian: MatrixCoefficient,
    pub s: MatrixCoefficient,
    pub tilde_wb: MatrixRows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatBcParams {
    pub nodes: usize,
    pub tilde_wb: MatrixRows,
    #[serde(default)]
    pub s: ScalarCoefficient,
}

/// Model parameters after schema validation.
#[derive(Debug, Clone)]
pub enum ModelParams {
    Split(SplitParams),
    Coupled(CoupledKind, CoupledParams),
    WaveHeat(WaveHeatParams),
    Phs(PhsParams),
    HeatGeneralBc(HeatBcParams),
}

fn typed<T: DeserializeOwned>(value: &serde_json::Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "params".to_string() } else { format!("params.{path}") };
        CliError::schema(field, e.into_inner().to_string())
    })
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::schema(field, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> CliResult<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_json(&text)?;
        Ok((cfg, sha256_hex(text.as_bytes())))
    }

    pub fn model_params(&self) -> CliResult<ModelParams> {
        Ok(match self.model {
            ModelKind::Split => ModelParams::Split(typed(&self.params)?),
            ModelKind::CoupledHeat => ModelParams::Coupled(CoupledKind::Heat, typed(&self.params)?),
            ModelKind::CoupledBiharmonic => ModelParams::Coupled(CoupledKind::Biharmonic, typed(&self.params)?),
            ModelKind::WaveHeat => ModelParams::WaveHeat(typed(&self.params)?),
            ModelKind::Phs => ModelParams::Phs(typed(&self.params)?),
            ModelKind::HeatGeneralBc => ModelParams::HeatGeneralBc(typed(&self.params)?),
        })
    }

    /// Returns a copy with the grid size replaced (`sweep`).
    pub fn with_nodes(&self, nodes: usize) -> CliResult<Self> {
        if self.model == ModelKind::Split {
            return Err(CliError::Usage("the split model has no grid to refine".into()));
        }
        let mut out = self.clone();
        match out.params.as_object_mut() {
            Some(obj) => {
                obj.insert("nodes".into(), serde_json::Value::from(nodes));
            }
            None => return Err(CliError::schema("params", "must be an object")),
        }
        Ok(out)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn weight(field: &str, rows: &Option<MatrixRows>, n: usize) -> CliResult<WeightedSpace> {
    match rows {
        None => Ok(WeightedSpace::identity(n)),
        Some(rows) => {
            let w = matrix(field, rows)?;
            if w.nrows() != n || w.ncols() != n {
                return Err(CliError::schema(field, format!("must be {n}x{n}")));
            }
            WeightedSpace::new(w).map_err(numerical("weight"))
        }
    }
}

fn grid(field: &str, a: f64, b: f64, nodes: usize) -> CliResult<Grid1D> {
    Grid1D::new(a, b, nodes).map_err(|e| CliError::schema(field, e.to_string()))
}

impl CoupledParams {
    pub fn spec(&self, kind: CoupledKind) -> CliResult<CoupledParabolicSpec> {
        let g = grid("params.nodes", self.interval[0], self.interval[1], self.nodes)?;
        let potential = match &self.potential {
            PotentialConfig::Constant(rows) => vec![PotentialPiece {
                start: g.a,
                end: g.b,
                v: matrix("params.potential", rows)?,
            }],
            PotentialConfig::Pieces(pieces) => pieces
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    Ok(PotentialPiece {
                        start: p.start,
                        end: p.end,
                        v: matrix(&format!("params.potential[{j}].v"), &p.v)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?,
        };
        let n = potential[0].v.nrows();
        let coefficients = match &self.coefficients {
            None => closurekit_core::coupled::unit_coefficients(n),
            Some(cs) => cs
                .iter()
                .enumerate()
                .map(|(k, c)| c.build(&format!("params.coefficients[{k}]")))
                .collect::<CliResult<Vec<_>>>()?,
        };
        let spec = CoupledParabolicSpec {
            n_components: n,
            grid: g,
            kind,
            coefficients,
            potential,
        };
        spec.validate().map_err(|e| match e {
            closurekit_core::Error::NotCoercive { .. } => numerical("coupled spec")(e),
            e => CliError::schema("params", e.to_string()),
        })?;
        Ok(spec)
    }
}

impl WaveHeatParams {
    pub fn spec(&self) -> CliResult<WaveHeatSpec> {
        Ok(WaveHeatSpec {
            grid1: grid("params.nodes", 0.0, 1.0, self.nodes)?,
            grid2: grid("params.nodes", 1.0, 2.0, self.nodes)?,
            s: self.s.build("params.s")?,
        })
    }
}

impl PhsParams {
    pub fn spec(&self) -> CliResult<PHSystemSpec> {
        let p1 = matrix("params.p1", &self.p1)?;
        let g1 = matrix("params.g1", &self.g1)?;
        Ok(PHSystemSpec {
            n: p1.nrows(),
            r: g1.ncols(),
            p0: matrix("params.p0", &self.p0)?,
            p1,
            g0: matrix("params.g0", &self.g0)?,
            g1,
            hamiltonian: self.hamiltonian.build("params.hamiltonian")?,
            s: self.s.build("params.s")?,
            tilde_wb: matrix("params.tilde_wb", &self.tilde_wb)?,
            grid: grid("params.nodes", 0.0, 1.0, self.nodes)?,
        })
    }
}

impl HeatBcParams {
    pub fn spec(&self) -> CliResult<PHSystemSpec> {
        Ok(PHSystemSpec::heat(
            matrix("params.tilde_wb", &self.tilde_wb)?,
            self.s.build("params.s")?,
            grid("params.nodes", 0.0, 1.0, self.nodes)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_entries() {
        let cfg = AnalysisConfig::from_json(
            r#"{"model": "split", "params": {"a11": [[0]], "a21": [[[0, 1]]], "s": [[[1, 1]]]}}"#,
        )
        .unwrap();
        let ModelParams::Split(p) = cfg.model_params().unwrap() else { panic!() };
        let a21 = matrix("a21", &p.a21).unwrap();
        assert_eq!(a21[(0, 0)], c64::new(0.0, 1.0));
        assert_eq!(cfg.output, OutputFormat::Json);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = AnalysisConfig::from_json(r#"{"model": "nope", "params": {}}"#).unwrap_err();
        assert!(matches!(err, CliError::Schema { ref field, .. } if field == "model"), "{err}");
        let cfg = AnalysisConfig::from_json(r#"{"model": "wave-heat", "params": {"nodes": "x"}}"#).unwrap();
        let err = cfg.model_params().unwrap_err();
        assert!(matches!(err, CliError::Schema { ref field, .. } if field == "params.nodes"), "{err}");
        let cfg = AnalysisConfig::from_json(r#"{"model": "wave-heat", "params": {"nodes": 5, "extra": 1}}"#).unwrap();
        assert!(cfg.model_params().is_err());
        let err = matrix("m", &vec![vec![ComplexNumber::Real(1.0)], vec![]]).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn piecewise_coefficients() {
        let c: ScalarCoefficient = serde_json::from_str(r#"{"breakpoints": [0.5], "values": [1, [2, 1]]}"#).unwrap();
        let coef = c.build("s").unwrap();
        assert_eq!(coef.eval(0.75).unwrap()[(0, 0)], c64::new(2.0, 1.0));
    }

    #[test]
    fn sweep_overrides_nodes() {
        let cfg = AnalysisConfig::from_json(r#"{"model": "wave-heat", "params": {"nodes": 5}}"#).unwrap();
        let ModelParams::WaveHeat(p) = cfg.with_nodes(9).unwrap().model_params().unwrap() else { panic!() };
        assert_eq!(p.nodes, 9);
    }
}
