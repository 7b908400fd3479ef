use std::path::{Path, PathBuf};

use mms_core::covering::Ball;
use mms_core::fields::{BumpProfile, FieldSpec};
use mms_core::functionals::YoungKind;
use mms_core::space::SpaceConfig;
use mms_core::{Error, Result};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// A space given inline or as a path to a JSON file holding a space config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum SpaceSource {
    Ref {
        #[serde(rename = "ref")]
        path: PathBuf,
    },
    Inline(SpaceConfig),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub theta: Option<f64>,
    pub s1: Option<f64>,
    pub p1: Option<f64>,
    pub alpha: Option<f64>,
    /// Lipschitz neighbourhood scale.
    pub h: Option<f64>,
    /// Exponent used by the variable-exponent weak functional.
    pub pstar: Option<f64>,
    /// Effective dimension for anisotropic functionals.
    pub n: Option<usize>,
    pub phi: Option<YoungKind>,
    /// Per-point exponent rule.
    pub exponent: Option<FieldSpec>,
    /// Anisotropy matrix, row-major.
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub t: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    /// Sides of one-dimensional unit-interval grids.
    pub n: Option<Vec<usize>>,
}

/// Ball family for the covering experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BallSpec {
    List {
        balls: Vec<Ball>,
    },
    /// Uniform centres and radii in `[r_min, r_max]`.
    Random {
        count: usize,
        r_min: f64,
        r_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CoveringConfig {
    pub balls: BallSpec,
    /// Declared radius bound `R`; defaults to the largest radius.
    pub radius_bound: Option<f64>,
    /// Selects the anisotropic metric `ρ_A` with this matrix.
    pub anisotropy: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    /// Explicit boundary point ids.
    #[serde(default)]
    pub points: Vec<usize>,
    /// Add every grid point on a face of the grid.
    #[serde(default)]
    pub grid_faces: bool,
    /// Boundary values, read off at the boundary points.
    pub values: FieldSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    pub alpha: f64,
    /// Subdomain point ids; defaults to the points at distance ≥ `margin` from the boundary set.
    pub subdomain: Option<Vec<usize>>,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iter: Option<usize>,
    pub residual_tol: Option<f64>,
    pub energy_rtol: Option<f64>,
    pub check_gradient: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub profiles: Vec<BumpProfile>,
    #[serde(default = "half")]
    pub x0: f64,
    #[serde(default = "thirty_two")]
    pub resolution: usize,
}

fn half() -> f64 {
    0.5
}

fn thirty_two() -> usize {
    32
}

/// Random perturbations `g` with values uniform in `[-1, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RandomPerturbations {
    pub count: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub subcommand: Option<String>,
    pub seed: Option<u64>,
    pub space: Option<SpaceSource>,
    pub spaces: Option<Vec<SpaceSource>>,
    pub field: Option<FieldSpec>,
    pub fields: Option<Vec<FieldSpec>>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub grids: Grids,
    pub covering: Option<CoveringConfig>,
    pub ball: Option<Ball>,
    pub rhs: Option<FieldSpec>,
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub holder: Option<HolderConfig>,
    pub sharpness: Option<SharpnessConfig>,
    pub perturbations: Option<RandomPerturbations>,
    /// Emit every `(s, N)` combination in the BBM sweep.
    #[serde(default)]
    pub full_table: bool,
    /// `∫|∇f|^p` for BBM targets that have no built-in value.
    pub gradient_integral: Option<f64>,
}

pub const SUBCOMMANDS: [&str; 16] = [
    "space-gen",
    "bvy",
    "seminorm",
    "orlicz",
    "varexp",
    "anisotropic",
    "covering",
    "nonlocal-apply",
    "nonlocal-solve",
    "poincare",
    "equivalence",
    "kfunc",
    "interp",
    "bbm",
    "sharpness",
    "stability",
];

/// A parsed config with the directory that relative references resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// Raw JSON, used for hashing.
    pub raw: serde_json::Value,
    pub base_dir: PathBuf,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<LoadedConfig> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
    let config: ExperimentConfig = serde_json::from_value(raw.clone())
        .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    Ok(LoadedConfig {
        config,
        raw,
        base_dir: base_dir.to_path_buf(),
    })
}

pub fn resolve_space(source: &SpaceSource, base_dir: &Path) -> Result<SpaceConfig> {
    match source {
        SpaceSource::Inline(c) => Ok(c.clone()),
        SpaceSource::Ref { path } => {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            let text = std::fs::read_to_string(&full).map_err(|source| Error::Io {
                path: full.display().to_string(),
                source,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("invalid space file {}: {e}", full.display())))
        }
    }
}

/// Seeds for randomized components, derived from the experiment seed.
#[derive(Clone, Copy, Debug)]
pub struct SeedSource {
    seed: Option<u64>,
}

impl SeedSource {
    pub fn new(seed: Option<u64>) -> Self {
        Self { seed }
    }

    /// Seed for the `k`-th randomized component.
    pub fn component(&self, k: u64, what: &str) -> Result<u64> {
        self.seed
            .map(|s| s.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
            .ok_or_else(|| Error::Config(format!("{what} is randomized and needs a seed")))
    }
}

pub(crate) fn seeded_space(
    config: &SpaceConfig,
    seeds: &SeedSource,
    k: u64,
) -> Result<SpaceConfig> {
    Ok(match config {
        SpaceConfig::GaussianCloud {
            points,
            dim,
            sigma,
            extent,
            seed: None,
            metric,
        } => SpaceConfig::GaussianCloud {
            points: *points,
            dim: *dim,
            sigma: *sigma,
            extent: *extent,
            seed: Some(seeds.component(k, "gaussian-cloud space")?),
            metric: metric.clone(),
        },
        other => other.clone(),
    })
}

pub(crate) fn seeded_field(spec: &FieldSpec, seeds: &SeedSource, k: u64) -> Result<FieldSpec> {
    if spec.needs_seed() {
        Ok(spec.with_seed(seeds.component(k, "random field")?))
    } else {
        Ok(spec.clone())
    }
}
