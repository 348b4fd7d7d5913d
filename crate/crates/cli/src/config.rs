//! Experiment configuration, read from JSON. Every field has a default
//! except the seed, which randomized suites require.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub gap_tolerance: f64,
    pub epsilon: f64,
    pub out_dir: Option<PathBuf>,
    pub duality: SizeConfig,
    pub quotient_oracle: SizeConfig,
    pub kalton: KaltonConfig,
    pub extfm: SizeConfig,
    pub union: UnionConfig,
    pub godard: GodardConfig,
    pub union2: SizeConfig,
    pub bm4: Bm4Config,
    pub squeeze: SqueezeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: None,
            gap_tolerance: 1e-9,
            epsilon: 0.05,
            out_dir: None,
            duality: SizeConfig { instances: 500, max_n: 30 },
            quotient_oracle: SizeConfig { instances: 200, max_n: 10 },
            kalton: KaltonConfig::default(),
            extfm: SizeConfig { instances: 100, max_n: 10 },
            union: UnionConfig::default(),
            godard: GodardConfig::default(),
            union2: SizeConfig { instances: 50, max_n: 12 },
            bm4: Bm4Config::default(),
            squeeze: SqueezeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SizeConfig {
    pub instances: usize,
    pub max_n: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct KaltonConfig {
    pub instances: usize,
    pub max_support: usize,
    pub min_exp: f64,
    pub max_exp: f64,
    pub separated_instances: usize,
}

impl Default for KaltonConfig {
    fn default() -> Self {
        Self { instances: 200, max_support: 100, min_exp: -8.0, max_exp: 8.0, separated_instances: 100 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct UnionConfig {
    pub instances: usize,
    pub max_legs: usize,
    pub tests_per_instance: usize,
}

impl Default for UnionConfig {
    fn default() -> Self {
        Self { instances: 100, max_legs: 4, tests_per_instance: 5 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GodardConfig {
    pub instances: usize,
    pub max_clusters: usize,
    pub max_cluster_size: usize,
}

impl Default for GodardConfig {
    fn default() -> Self {
        Self { instances: 100, max_clusters: 4, max_cluster_size: 3 }
    }
}

/// Radial net and test functions of the `bm4` suite. The `squeeze` suite
/// uses the same net.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Bm4Config {
    pub dim: usize,
    pub norm_p: f64,
    pub directions: usize,
    pub radius_min_exp: i32,
    pub radius_max_exp: i32,
    /// Radii step `2^radius_step_exp`; its inverse must be an integer.
    pub radius_step_exp: f64,
    pub samples: usize,
    /// Anchor count of the random 1-Lipschitz test functions.
    pub anchors: usize,
    /// Adds the class endpoints `1.5·2^m` to the radius grid.
    pub align_endpoints: bool,
}

impl Default for Bm4Config {
    fn default() -> Self {
        Self {
            dim: 2,
            norm_p: 2.0,
            directions: 64,
            radius_min_exp: -2,
            radius_max_exp: 2,
            radius_step_exp: 0.125,
            samples: 100,
            anchors: 8,
            align_endpoints: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeConfig {
    pub refinement: usize,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self { refinement: 4 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.gap_tolerance > 0.0 && self.gap_tolerance.is_finite()) {
            return Err(format!("gap_tolerance must be positive, got {}", self.gap_tolerance));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        self.bm4.validate()
    }

    pub fn require_seed(&self) -> Result<u64, String> {
        self.seed.ok_or_else(|| "a seed is required for randomized suites (--seed or \"seed\" in the config)".into())
    }
}

impl Bm4Config {
    pub fn validate(&self) -> Result<(), String> {
        if self.dim == 0 || self.directions == 0 {
            return Err("net needs a positive dimension and direction count".into());
        }
        if self.norm_p.is_nan() || self.norm_p < 1.0 {
            return Err(format!("norm_p must lie in [1, inf], got {}", self.norm_p));
        }
        if self.radius_min_exp > self.radius_max_exp {
            return Err("radius_min_exp exceeds radius_max_exp".into());
        }
        self.steps().map(|_| ())
    }

    /// Grid points per octave.
    pub fn steps(&self) -> Result<u32, String> {
        let inv = 1.0 / self.radius_step_exp;
        if !(self.radius_step_exp > 0.0) || (inv - inv.round()).abs() > 1e-9 || inv.round() < 1.0 {
            return Err(format!("radius_step_exp must be 1/k for a positive integer k, got {}", self.radius_step_exp));
        }
        Ok(inv.round() as u32)
    }
}
