/// Serde adapter for an `f64` that may be given as a number or as `"inf"`.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let e = crate::exponents::ExtExponent::deserialize(d)?;
        Ok(e.to_f64())
    }
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{Coefficient, CoefficientKind, Density, DensityError};
use crate::discretization::{DiscretizationError, Grid, WeightRule};
use crate::exponents::{ExponentError, ExponentProfile, ExtExponent};
use crate::solver::{BoundaryData, Method, SolveOptions};

/// Version of the configuration schema shipped in `docs/config.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Exponents,
    Solve,
    OracleCompare,
    EstimateCheck,
    Moser,
    Lavrentiev,
    Counterexample,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exponents => "exponents",
            Self::Solve => "solve",
            Self::OracleCompare => "oracle-compare",
            Self::EstimateCheck => "estimate-check",
            Self::Moser => "moser",
            Self::Lavrentiev => "lavrentiev",
            Self::Counterexample => "counterexample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    PowerWeight { a: CoefficientKind, p: f64 },
    DoublePhase { a: CoefficientKind, p: f64, b: CoefficientKind, q: f64 },
    Regularized { base: Box<DensitySpec>, h: f64, #[serde(with = "ext_f64")] s: f64 },
}

impl DensitySpec {
    pub fn build(&self, dim: usize) -> Result<Density, DensityError> {
        match self {
            Self::PowerWeight { a, p } => Density::power_weight(Coefficient::new(a.clone(), dim)?, *p),
            Self::DoublePhase { a, p, b, q } => {
                Density::double_phase(Coefficient::new(a.clone(), dim)?, *p, Coefficient::new(b.clone(), dim)?, *q)
            }
            Self::Regularized { base, h, s } => Density::regularized(base.build(dim)?, *h, *s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub p: ExtExponent,
    pub q: ExtExponent,
    pub n: u32,
    pub r: ExtExponent,
    pub s: ExtExponent,
}

impl ProfileSpec {
    pub fn build(&self) -> Result<ExponentProfile, ExponentError> {
        ExponentProfile::new(self.p.clone(), self.q.clone(), self.n, self.r.clone(), self.s.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n_nodes: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, DiscretizationError> {
        Grid::new(self.dim, self.n_nodes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub method: Method,
    pub tol_grad: f64,
    pub tol_energy: f64,
    pub max_iter: usize,
    pub weight_rule: WeightRule,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self { method: o.method, tol_grad: o.tol_grad, tol_energy: o.tol_energy, max_iter: o.max_iter, weight_rule: o.weight_rule }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            method: self.method,
            tol_grad: self.tol_grad,
            tol_energy: self.tol_energy,
            max_iter: self.max_iter,
            weight_rule: self.weight_rule,
            ..SolveOptions::default()
        }
    }
}

/// The one-dimensional power-weight problem with Dirichlet values `u(-1) = a`, `u(1) = b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub alpha: f64,
    pub p: f64,
    #[serde(default = "zero")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

/// Radii for the estimate checks; regions are concentric sub-squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSpec {
    pub r0: f64,
    pub theta: f64,
    pub rho: f64,
    pub big_r: f64,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        Self { r0: 1.0, theta: 1.0, rho: 0.25, big_r: 0.5 }
    }
}

fn zero() -> f64 {
    0.0
}

fn one() -> f64 {
    1.0
}

fn default_moser_region() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub grids: Vec<GridSpec>,
    #[serde(default)]
    pub boundary: Option<BoundaryData>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    /// Node counts per axis for the refinement study.
    #[serde(default)]
    pub refinements: Vec<usize>,
    #[serde(default)]
    pub caps: Vec<f64>,
    #[serde(default)]
    pub estimate: EstimateSpec,
    /// `None` extends the ladder until the exponent reaches 1000.
    #[serde(default)]
    pub moser_i_max: Option<usize>,
    #[serde(default = "default_moser_region")]
    pub moser_region: f64,
    /// Random points for the growth check of `solve`; 0 disables it.
    #[serde(default)]
    pub growth_samples: usize,
    /// Grids with more nodes than this are written in the binary field format.
    #[serde(default = "default_binary_threshold")]
    pub binary_threshold: usize,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_binary_threshold() -> usize {
    100_000
}

impl ExperimentConfig {
    /// Parses and validates; schema errors carry the serde line and column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cfg.version != SCHEMA_VERSION {
            return Err(ConfigError::Version(cfg.version));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        use ExperimentKind::*;
        let need = |ok: bool, field: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Field { field, message: format!("required by `{}`", self.experiment.name()) })
            }
        };
        match self.experiment {
            Exponents => need(self.profile.is_some(), "profile")?,
            Solve => {
                need(self.density.is_some(), "density")?;
                need(self.grid.is_some(), "grid")?;
                need(self.boundary.is_some(), "boundary")?;
            }
            OracleCompare => {
                need(self.oracle.is_some(), "oracle")?;
                need(self.grid.is_some(), "grid")?;
            }
            EstimateCheck | Moser => {
                need(self.density.is_some(), "density")?;
                need(self.profile.is_some(), "profile")?;
                need(self.grid.is_some(), "grid")?;
                need(self.boundary.is_some(), "boundary")?;
            }
            Lavrentiev => {
                need(self.density.is_some(), "density")?;
                need(!self.grids.is_empty(), "grids")?;
                need(self.boundary.is_some(), "boundary")?;
                need(!self.caps.is_empty(), "caps")?;
            }
            Counterexample => {
                need(self.oracle.is_some(), "oracle")?;
                need(self.refinements.len() >= 2, "refinements")?;
            }
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        for g in &self.grids {
            g.build()?;
        }
        if let Some(p) = &self.profile {
            p.build()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_p_is_a_schema_error() {
        let text = "{\n  \"experiment\": \"exponents\",\n  \"profile\": {\"q\": 2, \"n\": 2, \"r\": \"inf\", \"s\": \"inf\"}\n}";
        match ExperimentConfig::from_json(text) {
            Err(ConfigError::Schema { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("`p`"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"experiment": "exponents", "profle": {}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Schema { .. })));
    }

    #[test]
    fn full_solve_config_parses() {
        let text = r#"{
            "experiment": "solve",
            "density": {"family": "double_phase", "p": 2, "q": 2.5,
                        "a": {"kind": "power_weight", "alpha": 0.5, "center": [-2.5, 0]},
                        "b": {"kind": "constant", "value": 0.3}},
            "grid": {"dim": 2, "n_nodes": 9},
            "boundary": [{"offset": 0, "slope": [1, 0.5]}],
            "solver": {"weight_rule": "harmonic"},
            "seed": 7
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let d = cfg.density.unwrap().build(2).unwrap();
        assert_eq!(d.q(), 2.5);
        assert_eq!(cfg.solver.options().weight_rule, WeightRule::Harmonic);
    }

    #[test]
    fn infinite_exponents_as_strings() {
        let text = r#"{"experiment": "exponents", "profile": {"p": 2, "q": "5/2", "n": 2, "r": "inf", "s": "inf"}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(cfg.profile.unwrap().build().unwrap().s().is_infinite());
    }

    #[test]
    fn missing_section_is_a_field_error() {
        let text = r#"{"experiment": "solve", "grid": {"dim": 1, "n_nodes": 9}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Field { field: "density", .. })));
    }
}
