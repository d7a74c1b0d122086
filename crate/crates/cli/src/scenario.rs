//! Scenario files: one surface in one ambient space plus a list of checks.
//!
//! Tolerances live in the scenario (with documented defaults) so acceptance
//! runs are plain JSON files checked into the repository.

use minkowski_lab::ambient::{AmbientSpace, ConformalField, FieldKind};
use minkowski_lab::error::{LabError, Result};
use minkowski_lab::identities::{ChainVariant, TensorSpec};
use minkowski_lab::immersion::Immersion;
use minkowski_lab::quadrature::GridSpec;
use minkowski_lab::rigidity::ProbeVariant;
use minkowski_lab::spectral::BoundaryShape;
use minkowski_lab::weights::WeightSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub label: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// How a check names its conformal field.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// The radial field around the surface's natural pole (the position
    /// field for surfaces centered at the origin of flat space).
    #[default]
    Natural,
    Position,
    Constant {
        v: Vec<f64>,
    },
    Radial {
        pole: Vec<f64>,
    },
    ProjectedConstant {
        z0: Vec<f64>,
    },
}

impl FieldSpec {
    pub fn build(&self, imm: &Immersion) -> Result<ConformalField> {
        let space = imm.ambient;
        match self {
            FieldSpec::Natural => imm.natural_field(),
            FieldSpec::Position => Ok(ConformalField::position(space)),
            FieldSpec::Constant { v } => ConformalField::new(space, FieldKind::Constant(v.clone())),
            FieldSpec::Radial { pole } => ConformalField::radial(space, pole.clone()),
            FieldSpec::ProjectedConstant { z0 } => {
                ConformalField::new(space, FieldKind::PseudoSphereConformal(z0.clone()))
            }
        }
    }
}

fn default_weight() -> WeightSpec {
    WeightSpec::ONE
}

fn default_vertices() -> usize {
    10_000
}

fn default_density() -> usize {
    96
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check_id", rename_all = "snake_case")]
pub enum CheckSpec {
    HmIdentity {
        k: usize,
        #[serde(default = "default_weight")]
        f: WeightSpec,
        #[serde(default)]
        field: FieldSpec,
        /// Run the coarse-to-default refinement ladder (default true).
        #[serde(default = "default_true")]
        refine: bool,
    },
    HmMultiNormal {
        normals: Vec<usize>,
        #[serde(default = "default_weight")]
        f: WeightSpec,
        #[serde(default)]
        field: FieldSpec,
    },
    Closure {
        k: usize,
    },
    Chain {
        #[serde(flatten)]
        variant: ChainVariant,
        k: usize,
    },
    VectorIdentity {
        k: usize,
        #[serde(default = "default_weight")]
        f: WeightSpec,
    },
    DivergenceResidual {
        #[serde(flatten)]
        tensor: TensorSpec,
        #[serde(default = "default_weight")]
        f: WeightSpec,
        #[serde(default)]
        field: FieldSpec,
    },
    RigidityProbe {
        #[serde(flatten)]
        variant: ProbeVariant,
        #[serde(default = "default_weight")]
        f: WeightSpec,
    },
    Lambda1 {
        k: usize,
        #[serde(default = "default_vertices")]
        vertices: usize,
        /// Optional external mesh (OFF file with a `.data.json` sidecar of
        /// per-vertex curvature data) instead of the internal triangulation.
        #[serde(default)]
        mesh: Option<String>,
    },
    Garay {
        k: usize,
        #[serde(default = "default_vertices")]
        vertices: usize,
    },
    Steklov {
        #[serde(flatten)]
        boundary: BoundaryShape,
        #[serde(default = "default_density")]
        density: usize,
    },
}

fn default_true() -> bool {
    true
}

impl CheckSpec {
    pub fn id(&self) -> &'static str {
        match self {
            CheckSpec::HmIdentity { .. } => "hm_identity",
            CheckSpec::HmMultiNormal { .. } => "hm_multi_normal",
            CheckSpec::Closure { .. } => "closure",
            CheckSpec::Chain { .. } => "chain",
            CheckSpec::VectorIdentity { .. } => "vector_identity",
            CheckSpec::DivergenceResidual { .. } => "divergence_residual",
            CheckSpec::RigidityProbe { .. } => "rigidity_probe",
            CheckSpec::Lambda1 { .. } => "lambda1",
            CheckSpec::Garay { .. } => "garay",
            CheckSpec::Steklov { .. } => "steklov",
        }
    }
}

/// Tolerance block; every field has the documented default and is scaled by
/// `--tol-scale`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative-residual tolerance for identity checks.
    pub identity: f64,
    /// Closure tolerance per unit area.
    pub closure_per_area: f64,
    /// Absolute slack under which a chain counts as an equality case.
    pub chain_equality: f64,
    /// Hypothesis-defect threshold for rigidity probes.
    pub eps_h: f64,
    /// Umbilicity-defect threshold for rigidity probes.
    pub eps_u: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-7,
            closure_per_area: 1e-8,
            chain_equality: 1e-9,
            eps_h: 1e-7,
            eps_u: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, s: f64) -> Tolerances {
        Tolerances {
            identity: self.identity * s,
            closure_per_area: self.closure_per_area * s,
            chain_equality: self.chain_equality * s,
            eps_h: self.eps_h * s,
            eps_u: self.eps_u * s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub ambient: String,
    pub surface: SurfaceSpec,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub quadrature: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: String,
}

impl Scenario {
    /// Parse with a JSON-pointer diagnostic on schema violations.
    pub fn parse(text: &str) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            LabError::Config(format!("scenario schema violation at {}: {}", e.path(), e.inner()))
        })
    }

    pub fn ambient_space(&self) -> Result<AmbientSpace> {
        AmbientSpace::parse(&self.ambient)
    }

    pub fn immersion(&self) -> Result<Immersion> {
        let space = self.ambient_space()?;
        let imm =
            minkowski_lab::immersion::builtin(&self.surface.label, &self.surface.params, &space)?;
        // Ambient declared in the scenario must match the surface's home.
        if imm.ambient != space {
            return Err(LabError::Config(format!(
                "surface {} lives in {:?}, scenario says {}",
                self.surface.label, imm.ambient, self.ambient
            )));
        }
        Ok(imm)
    }

    pub fn grid(&self) -> GridSpec {
        self.quadrature.unwrap_or_default()
    }
}
