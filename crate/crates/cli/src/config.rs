//! Declarative experiment configuration.
//!
//! A config is a single TOML file (see `presets/`) selecting domain, mesh
//! source, refinement depth, coefficients, solver and preconditioner. It
//! round-trips losslessly through its textual form; command-line flags may
//! override individual fields.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use convdiff::mesh::SQRT3;
use convdiff::{Mesh, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Hexagon,
    UnitSquare,
}

impl Domain {
    pub fn id(&self) -> &'static str {
        match self {
            Domain::Hexagon => "hexagon",
            Domain::UnitSquare => "unit-square",
        }
    }

    /// Offset of the low-regularity coefficient templates: the kink line
    /// sits strictly inside either domain.
    pub fn y0(&self) -> f64 {
        match self {
            Domain::Hexagon => SQRT3 / 4.0,
            Domain::UnitSquare => 0.5,
        }
    }
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hexagon" => Ok(Domain::Hexagon),
            "unit-square" | "square" => Ok(Domain::UnitSquare),
            other => Err(format!("unknown domain {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSource {
    /// Structured mesh with `base` subdivisions per side at level 0.
    Structured { base: u32 },
    /// Structured mesh displaced by a seeded perturbation, then refined.
    Perturbed { base: u32, alpha: f64 },
    /// Mesh files in Triangle format, refined by midpoints per level.
    UnstructuredFile { node: PathBuf, ele: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientId {
    A1,
    A2,
    A3,
    Const(f64),
}

impl CoefficientId {
    pub fn scalar_field(&self, domain: Domain) -> ScalarField {
        match self {
            CoefficientId::A1 => ScalarField::A1,
            CoefficientId::A2 => ScalarField::A2 { y0: domain.y0() },
            CoefficientId::A3 => ScalarField::A3 { y0: domain.y0() },
            CoefficientId::Const(v) => ScalarField::Constant(*v),
        }
    }
}

impl fmt::Display for CoefficientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientId::A1 => write!(f, "a1"),
            CoefficientId::A2 => write!(f, "a2"),
            CoefficientId::A3 => write!(f, "a3"),
            CoefficientId::Const(v) => write!(f, "const:{v}"),
        }
    }
}

impl FromStr for CoefficientId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a1" => Ok(CoefficientId::A1),
            "a2" => Ok(CoefficientId::A2),
            "a3" => Ok(CoefficientId::A3),
            other => {
                if let Some(v) = other.strip_prefix("const:") {
                    v.parse()
                        .map(CoefficientId::Const)
                        .map_err(|_| format!("bad constant coefficient {v:?}"))
                } else {
                    Err(format!(
                        "unknown coefficient {other:?} (expected a1|a2|a3|const:<v>)"
                    ))
                }
            }
        }
    }
}

impl Serialize for CoefficientId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoefficientId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityId {
    /// The field `[x, y]^T`.
    Linear,
    /// Pure diffusion.
    None,
}

impl VelocityId {
    pub fn vector_field(&self) -> Option<VectorField> {
        match self {
            VelocityId::Linear => Some(VectorField::Linear),
            VelocityId::None => None,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            VelocityId::Linear => "linear",
            VelocityId::None => "none",
        }
    }
}

impl FromStr for VelocityId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(VelocityId::Linear),
            "none" => Ok(VelocityId::None),
            other => Err(format!("unknown velocity {other:?} (expected linear|none)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pcg,
    Pgmres,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::Pcg => "pcg",
            Method::Pgmres => "pgmres",
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcg" => Ok(Method::Pcg),
            "pgmres" => Ok(Method::Pgmres),
            other => Err(format!("unknown method {other:?} (expected pcg|pgmres)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecondChoice {
    Exact,
    Surrogate,
    None,
}

impl PrecondChoice {
    pub fn id(&self) -> &'static str {
        match self {
            PrecondChoice::Exact => "exact",
            PrecondChoice::Surrogate => "surrogate",
            PrecondChoice::None => "none",
        }
    }
}

impl FromStr for PrecondChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(PrecondChoice::Exact),
            "surrogate" => Ok(PrecondChoice::Surrogate),
            "none" => Ok(PrecondChoice::None),
            other => Err(format!(
                "unknown preconditioner {other:?} (expected exact|surrogate|none)"
            )),
        }
    }
}

fn default_tol() -> f64 {
    1e-7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub mesh: MeshSource,
    pub levels: u32,
    pub a: CoefficientId,
    pub b: VelocityId,
    pub method: Method,
    pub preconditioner: PrecondChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::Hexagon,
            mesh: MeshSource::Structured { base: 4 },
            levels: 6,
            a: CoefficientId::A1,
            b: VelocityId::None,
            method: Method::Pcg,
            preconditioner: PrecondChoice::Exact,
            tol: default_tol(),
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, String> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Loads a config file, resolving mesh file paths relative to its
    /// directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = ExperimentConfig::from_toml(&text)?;
        if let MeshSource::UnstructuredFile { node, ele } = &mut config.mesh {
            let base = path.parent().unwrap_or(Path::new("."));
            if node.is_relative() {
                *node = base.join(&node);
            }
            if ele.is_relative() {
                *ele = base.join(&ele);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.levels == 0 {
            return Err("levels must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(format!("tolerance {} outside (0, 1)", self.tol));
        }
        if self.method == Method::Pcg && self.b != VelocityId::None {
            return Err("pcg requires b = none (symmetric system)".into());
        }
        if self.preconditioner == PrecondChoice::Surrogate && self.domain != Domain::Hexagon {
            return Err("the surrogate preconditioner requires the hexagon domain".into());
        }
        match &self.mesh {
            MeshSource::Structured { base } | MeshSource::Perturbed { base, .. } => {
                let min = match self.domain {
                    Domain::Hexagon => 1,
                    Domain::UnitSquare => 2,
                };
                if *base < min {
                    return Err(format!("base {base} too small for {}", self.domain.id()));
                }
                if let MeshSource::Perturbed { alpha, .. } = &self.mesh {
                    if !(0.0..0.5).contains(alpha) {
                        return Err(format!("perturbation alpha {alpha} outside [0, 0.5)"));
                    }
                }
            }
            MeshSource::UnstructuredFile { .. } => {}
        }
        Ok(())
    }

    /// Base mesh of level 0.
    pub fn base_mesh(&self) -> convdiff::Result<Mesh> {
        let structured = |base: u32| match self.domain {
            Domain::Hexagon => Mesh::hex_structured(base),
            Domain::UnitSquare => Mesh::square_fk(base),
        };
        match &self.mesh {
            MeshSource::Structured { base } => structured(*base),
            MeshSource::Perturbed { base, alpha } => structured(*base)?.perturb(*alpha, self.seed),
            MeshSource::UnstructuredFile { node, ele } => {
                let node_text = std::fs::read_to_string(node)?;
                let ele_text = std::fs::read_to_string(ele)?;
                convdiff::mesh_io::import_triangle(&node_text, &ele_text)
            }
        }
    }

    /// Subdivision parameter at a refinement level, when meaningful.
    pub fn m_at_level(&self, level: u32) -> Option<u32> {
        match &self.mesh {
            MeshSource::Structured { base } | MeshSource::Perturbed { base, .. } => {
                Some(base << level)
            }
            MeshSource::UnstructuredFile { .. } => None,
        }
    }

    pub fn scalar_a(&self) -> ScalarField {
        self.a.scalar_field(self.domain)
    }

    pub fn velocity(&self) -> Option<VectorField> {
        self.b.vector_field()
    }
}
