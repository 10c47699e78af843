//! Run and study configuration files (TOML).

use std::path::{Path, PathBuf};

use psfem::constitutive::{MaterialModel, MaterialParams, ModelKind, VolumetricLaw};
use psfem::scenarios::{default_formulation, CompositeKind};
use psfem::{BoundaryProgram, CondensationSettings, Formulation, Regime, SolveSettings};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    Cook,
    Punch,
    CompositeParticles,
    CompositeFibres,
    /// Mesh read from a file, with boundary data from the config.
    Mesh,
}

impl ScenarioId {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Cook => "cook",
            ScenarioId::Punch => "punch",
            ScenarioId::CompositeParticles => "composite-particles",
            ScenarioId::CompositeFibres => "composite-fibres",
            ScenarioId::Mesh => "mesh",
        }
    }

    pub fn composite_kind(self) -> Option<CompositeKind> {
        match self {
            ScenarioId::CompositeParticles => Some(CompositeKind::Particles),
            ScenarioId::CompositeFibres => Some(CompositeKind::Fibres),
            _ => None,
        }
    }
}

/// Material given by shear modulus and either Poisson's ratio or bulk modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default = "decoupled")]
    pub model: ModelKind,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volumetric: Option<VolumetricLaw>,
}

fn decoupled() -> ModelKind {
    ModelKind::NeoHookeanDecoupled
}

impl MaterialSpec {
    pub fn to_model(&self, path: &str) -> Result<MaterialModel, CliError> {
        let params = match (self.nu, self.kappa) {
            (Some(nu), None) => MaterialParams::from_mu_nu(self.mu, nu),
            (None, Some(k)) => MaterialParams::from_mu_kappa(self.mu, k),
            _ => return Err(CliError::config(path, "give exactly one of `nu` and `kappa`")),
        }
        .map_err(|e| CliError::config(path, e))?;
        let base = match self.model {
            ModelKind::NeoHookeanAlternative => MaterialModel::alternative(params),
            ModelKind::FlatlandNeoHookean => MaterialModel::flatland(params),
            ModelKind::NeoHookeanDecoupled => MaterialModel::decoupled(params),
        };
        match self.volumetric {
            None => Ok(base),
            Some(law) => MaterialModel::new(self.model, params, law).map_err(|e| CliError::config(path, e)),
        }
    }
}

/// Overrides of the composite defaults; unset fields keep the defaults of the kind.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub name: String,
    pub x: [f64; 3],
}

/// External mesh and its boundary data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    /// Mesh file, relative to the config file.
    pub file: PathBuf,
    pub boundary: BoundaryProgram,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VtkSteps {
    All,
    #[default]
    Last,
    None,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub vtk: VtkSteps,
    /// Output directory; defaults to `<output root>/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub scenario: ScenarioId,
    pub regime: Regime,
    /// Defaults to three-field wherever it applies, one-field in plane stress.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulation: Option<Formulation>,
    /// Element order; defaults to 2, or 1 for the composites.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Elements per edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Cook traction, punch load parameter, composite elongation, or a
    /// multiplier on the tractions of an imported mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    #[serde(default)]
    pub walls: bool,
    /// One entry per material id; empty keeps the scenario's materials.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub materials: Vec<MaterialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensation: Option<CondensationSettings>,
    #[serde(default)]
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(m) = &mut cfg.mesh {
            if m.file.is_relative() {
                m.file = path.parent().unwrap_or(Path::new(".")).join(&m.file);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation.unwrap_or_else(|| default_formulation(self.regime))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(CliError::config("name", "must be a non-empty plain file name"));
        }
        psfem::fem::check_compatible(self.regime, self.formulation())
            .map_err(|e| CliError::config("formulation", format!("{e} (plane stress is one-field only)")))?;
        if self.order.is_some_and(|o| !(1..=2).contains(&o)) {
            return Err(CliError::config("order", "must be 1 or 2"));
        }
        if self.n == Some(0) {
            return Err(CliError::config("n", "must be positive"));
        }
        if let Some(l) = self.load {
            if !l.is_finite() {
                return Err(CliError::config("load", "must be finite"));
            }
        }
        if let Some(t) = self.thickness {
            if !(t > 0.0) {
                return Err(CliError::config("thickness", "must be positive"));
            }
        }
        let composite = self.scenario.composite_kind().is_some();
        if composite && self.regime != Regime::PlaneStress {
            return Err(CliError::config("regime", "composite scenarios are plane stress"));
        }
        if self.composite.is_some() && !composite {
            return Err(CliError::config("composite", "only valid for composite scenarios"));
        }
        if (self.thickness.is_some() || self.walls) && self.scenario != ScenarioId::Cook {
            return Err(CliError::config("thickness", "`thickness` and `walls` apply to the cook scenario"));
        }
        if composite && !self.materials.is_empty() {
            return Err(CliError::config("materials", "composite materials are set in [composite]"));
        }
        match (&self.mesh, self.scenario) {
            (None, ScenarioId::Mesh) => return Err(CliError::config("mesh", "the mesh scenario needs a [mesh] table")),
            (Some(_), s) if s != ScenarioId::Mesh => return Err(CliError::config("mesh", "only valid with scenario = \"mesh\"")),
            _ => {}
        }
        for (i, m) in self.materials.iter().enumerate() {
            m.to_model(&format!("materials[{i}]"))?;
        }
        if let Some(s) = &self.solver {
            s.validate().map_err(|e| CliError::config("solver", e))?;
        }
        Ok(())
    }
}

/// Mesh-refinement or thickness study over a grid of cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub scenario: ScenarioId,
    pub regimes: Vec<Regime>,
    pub orders: Vec<usize>,
    pub n: Vec<usize>,
    pub load: f64,
    /// Panel thicknesses (cook only).
    #[serde(default = "unit_thickness")]
    pub thickness: Vec<f64>,
    #[serde(default)]
    pub walls: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveSettings>,
}

fn unit_thickness() -> Vec<f64> {
    vec![1.0]
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.scenario, ScenarioId::Cook | ScenarioId::Punch) {
            return Err(CliError::config("scenario", "studies support cook and punch"));
        }
        if self.regimes.is_empty() || self.orders.is_empty() || self.n.is_empty() || self.thickness.is_empty() {
            return Err(CliError::config("regimes", "regimes, orders, n and thickness must be non-empty"));
        }
        if self.orders.iter().any(|o| !(1..=2).contains(o)) {
            return Err(CliError::config("orders", "must be 1 or 2"));
        }
        if self.n.contains(&0) {
            return Err(CliError::config("n", "must be positive"));
        }
        if self.thickness.iter().any(|t| !(*t > 0.0)) {
            return Err(CliError::config("thickness", "must be positive"));
        }
        if self.scenario == ScenarioId::Punch && self.thickness != [1.0] {
            return Err(CliError::config("thickness", "applies to the cook scenario"));
        }
        if let Some(s) = &self.solver {
            s.validate().map_err(|e| CliError::config("solver", e))?;
        }
        Ok(())
    }
}
