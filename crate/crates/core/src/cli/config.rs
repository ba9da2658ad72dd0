use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::check::CheckConfig;
use crate::energies::{s_plus, BulkSpec, ElasticSpec, SurfaceSpec};
use crate::error::{Error, Result};
use crate::homogenization::{Coefficients, DesignVariant, ParticleShape, RotationField, SphereMeshKind};
use crate::lattice::BoxDomain;
use crate::numerics::Numerics;
use crate::probes::{Lemma35Params, Lemma36Params, Lemma37Params, LscParams, TraceParams};
use crate::solver::{AssemblyOptions, BoundaryDatum, ExperimentSetup, MinimizeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Design,
    Hom,
    Identities,
    Minimize,
    Converge,
    Probe,
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::Hom => "hom",
            Command::Identities => "identities",
            Command::Minimize => "minimize",
            Command::Converge => "converge",
            Command::Probe => "probe",
            Command::Check => "check",
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A run configuration. Only the block of the selected command may appear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional here; when present it must match the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hom: Option<HomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitiesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimize: Option<MinimizeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
}

impl RunConfig {
    /// Defaults for `command`, already resolved.
    pub fn default_for(command: Command) -> Self {
        RunConfig {
            command: None,
            output_dir: default_output_dir(),
            seed: 0,
            numerics: Numerics::default(),
            design: None,
            hom: None,
            identities: None,
            minimize: None,
            converge: None,
            probe: None,
            check: None,
        }
        .resolve(command)
        .expect("an empty config resolves for every command")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn blocks(&self) -> [(Command, bool); 7] {
        [
            (Command::Design, self.design.is_some()),
            (Command::Hom, self.hom.is_some()),
            (Command::Identities, self.identities.is_some()),
            (Command::Minimize, self.minimize.is_some()),
            (Command::Converge, self.converge.is_some()),
            (Command::Probe, self.probe.is_some()),
            (Command::Check, self.check.is_some()),
        ]
    }

    /// Fixes the command, rejects blocks of other commands and materialises
    /// the selected block's defaults.
    pub fn resolve(mut self, command: Command) -> Result<Self> {
        if let Some(c) = self.command {
            if c != command {
                return Err(Error::Config(format!(
                    "config is for command `{}`, invoked as `{}`",
                    c.name(),
                    command.name()
                )));
            }
        }
        for (c, present) in self.blocks() {
            if present && c != command {
                return Err(Error::Config(format!(
                    "block [{}] does not apply to command `{}`",
                    c.name(),
                    command.name()
                )));
            }
        }
        self.command = Some(command);
        match command {
            Command::Design => {
                self.design.get_or_insert_with(DesignConfig::default);
            }
            Command::Hom => {
                self.hom.get_or_insert_with(HomConfig::default);
            }
            Command::Identities => {
                self.identities.get_or_insert_with(IdentitiesConfig::default);
            }
            Command::Minimize => {
                self.minimize.get_or_insert_with(MinimizeConfig::default);
            }
            Command::Converge => {
                self.converge.get_or_insert_with(ConvergeConfig::default);
            }
            Command::Probe => {
                self.probe.get_or_insert_with(ProbeConfig::default);
            }
            Command::Check => {
                self.check.get_or_insert_with(CheckConfig::default);
            }
        }
        Ok(self)
    }
}

fn host() -> Coefficients {
    Coefficients::new(-1.0, 1.0, 1.0)
}

fn target() -> Coefficients {
    Coefficients::new(-0.5, 1.0, 1.0)
}

pub(crate) fn default_surface() -> SurfaceSpec {
    let (h, t) = (host(), target());
    SurfaceSpec::Designed { a: h.a, b: h.b, c: h.c, a_prime: t.a, b_prime: t.b, c_prime: t.c }
}

/// Uniform uniaxial datum along `e₃` at the target's nematic order.
pub(crate) fn default_boundary() -> BoundaryDatum {
    let t = target();
    BoundaryDatum::Uniaxial { director: [0.0, 0.0, 1.0], s: s_plus(t.a, t.b, t.c).expect("c > 0") }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignConfig {
    pub host: Coefficients,
    pub target: Coefficients,
    pub variant: DesignVariant,
    /// Random tensors in the verification table.
    pub samples: usize,
    pub max_norm: f64,
    /// Icosphere frequency of the quadrature mesh.
    pub mesh_resolution: usize,
    /// Largest admissible deviation in the table.
    pub tolerance: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            host: host(),
            target: target(),
            variant: DesignVariant::Designed,
            samples: 100,
            max_norm: 2.0,
            mesh_resolution: 2,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomConfig {
    pub shape: ParticleShape,
    pub rotation: RotationField,
    /// Point at which the rotation field is evaluated.
    pub point: [f64; 3],
    pub surface: SurfaceSpec,
    pub mesh_resolutions: Vec<usize>,
    pub samples: usize,
    pub max_norm: f64,
}

impl Default for HomConfig {
    fn default() -> Self {
        HomConfig {
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            point: [0.5, 0.5, 0.5],
            surface: default_surface(),
            mesh_resolutions: vec![1, 2, 4, 8],
            samples: 10,
            max_norm: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub samples: usize,
    pub max_norm: f64,
    /// Ascending mesh resolutions of the ladder.
    pub resolutions: Vec<usize>,
    pub mesh: SphereMeshKind,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        IdentitiesConfig {
            samples: 20,
            max_norm: 1.0,
            resolutions: vec![16, 32, 64, 128],
            mesh: SphereMeshKind::CubeSphere,
        }
    }
}

/// One minimisation of `F₀` (no `eps`) or of `F_ε` on the periodic family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeConfig {
    pub domain: BoxDomain,
    pub eps: Option<f64>,
    pub alpha: f64,
    pub shape: ParticleShape,
    pub rotation: RotationField,
    pub bulk: BulkSpec,
    pub elastic: ElasticSpec,
    pub surface: SurfaceSpec,
    pub boundary: BoundaryDatum,
    /// Cells per unit length for `F₀`.
    pub cells: usize,
    /// Grid policy `h ≤ h_factor ε^α` for `F_ε`.
    pub h_factor: f64,
    pub mesh_resolution: usize,
    pub limit_mesh_resolution: usize,
    pub options: MinimizeOptions,
    pub assembly: AssemblyOptions,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            domain: BoxDomain::unit_cube(),
            eps: None,
            alpha: 1.25,
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            bulk: host().bulk(),
            elastic: ElasticSpec::Dirichlet,
            surface: default_surface(),
            boundary: default_boundary(),
            cells: 16,
            h_factor: 0.25,
            mesh_resolution: 2,
            limit_mesh_resolution: 1,
            options: MinimizeOptions::default(),
            assembly: AssemblyOptions::default(),
        }
    }
}

pub type ConvergeConfig = ExperimentSetup;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "snake_case")]
pub enum ProbeConfig {
    Lemma35(Lemma35Params),
    Lemma36(Lemma36Params),
    Lemma37(Lemma37Params),
    Lemma39(LscParams),
    Trace(TraceParams),
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig::Lemma36(Lemma36Params::default())
    }
}
