use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::band_operator::{Decay, DomainSpec};
use crate::error::{Error, Result};
use crate::group_metric::{GroupSpec, GrowthThresholds};
use crate::spectral_engine::NeumannOptions;

/// Overrides `output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "ROEDECAY_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Growth,
    Admissible,
    Norms,
    Invert,
    PowerLaw,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Growth => "growth",
            Stage::Admissible => "admissible",
            Stage::Norms => "norms",
            Stage::Invert => "invert",
            Stage::PowerLaw => "power-law",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightPoint {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthConfig {
    pub tau_max: u32,
    pub thresholds: GrowthThresholds,
    /// Exponents for the property-P constant.
    pub property_p: WeightPoint,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            tau_max: 20,
            thresholds: GrowthThresholds::default(),
            property_p: WeightPoint { alpha: 2.0, beta: 0.5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmissibleConfig {
    pub r: f64,
    pub tau_max: u32,
    pub t_grid: Vec<f64>,
    pub theta: Option<f64>,
    pub horizon: Option<u32>,
    /// Radius of the exhaustive axiom and splitting checks.
    pub check_radius: u32,
    pub bounded_ratio_c0: Vec<u32>,
}

impl Default for AdmissibleConfig {
    fn default() -> Self {
        AdmissibleConfig {
            r: 2.0,
            tau_max: 40,
            t_grid: vec![1.0, 10.0, 100.0, 1e3, 1e4],
            theta: None,
            horizon: None,
            check_radius: 4,
            bounded_ratio_c0: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// `diagonal·I + coupling·(sum of generator shifts)`.
    Stencil { name: String, diagonal: f64, coupling: f64 },
    /// Seeded random band operator.
    Random {
        name: String,
        propagation: u32,
        #[serde(default = "flat")]
        decay: Decay,
        #[serde(default)]
        perturbation: Option<f64>,
        #[serde(default)]
        self_adjoint: bool,
    },
    /// Operator dump (JSON header path).
    File { name: String, path: PathBuf },
}

fn flat() -> Decay {
    Decay::Flat
}

impl OperatorSpec {
    pub fn name(&self) -> &str {
        match self {
            OperatorSpec::Stencil { name, .. }
            | OperatorSpec::Random { name, .. }
            | OperatorSpec::File { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    /// Random pairs for the submultiplicativity suite.
    pub pairs: usize,
    pub pair_propagation: u32,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            pairs: 200,
            pair_propagation: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerLawConfig {
    pub theta: Option<f64>,
    pub n_max: usize,
    /// Largest power in the spectral-radius comparison.
    pub radius_n_max: usize,
    /// Slack on the growth-slope bound.
    pub slope_tolerance: f64,
    /// Largest accepted relative gap at `radius_n_max`.
    pub radius_gap_max: f64,
}

impl Default for PowerLawConfig {
    fn default() -> Self {
        PowerLawConfig {
            theta: None,
            n_max: 32,
            radius_n_max: 64,
            slope_tolerance: 0.05,
            radius_gap_max: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub stages: Vec<Stage>,
    pub group: GroupSpec,
    #[serde(default = "default_domain")]
    pub domain: DomainSpec,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightPoint>,
    #[serde(default)]
    pub growth: GrowthConfig,
    #[serde(default)]
    pub admissible: AdmissibleConfig,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub invert: NeumannOptions,
    #[serde(default)]
    pub power_law: PowerLawConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_domain() -> DomainSpec {
    DomainSpec::Ball { radius: 6 }
}

fn default_weights() -> Vec<WeightPoint> {
    vec![WeightPoint { alpha: 1.0, beta: 0.5 }]
}

fn bad(field: impl AsRef<str>, reason: impl AsRef<str>) -> Error {
    Error::Config(format!("{}: {}", field.as_ref(), reason.as_ref()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative operator paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for op in &mut cfg.operators {
            if let OperatorSpec::File { path: p, .. } = op {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// The ℤ² configuration used as the reference run.
    pub fn default_z2() -> Self {
        ExperimentConfig {
            seed: 20240611,
            output_dir: default_output_dir(),
            stages: vec![
                Stage::Growth,
                Stage::Admissible,
                Stage::Norms,
                Stage::Invert,
                Stage::PowerLaw,
            ],
            group: GroupSpec {
                kind: "zd".into(),
                rank: 2,
                radius_cap: 120,
                element_cap: 1 << 20,
            },
            domain: default_domain(),
            weights: default_weights(),
            growth: GrowthConfig::default(),
            admissible: AdmissibleConfig::default(),
            operators: vec![
                OperatorSpec::Stencil {
                    name: "stencil".into(),
                    diagonal: 1.0,
                    coupling: 0.2,
                },
                OperatorSpec::Random {
                    name: "perturbed".into(),
                    propagation: 2,
                    decay: Decay::Flat,
                    perturbation: Some(0.5),
                    self_adjoint: false,
                },
            ],
            norms: NormsConfig::default(),
            invert: NeumannOptions::default(),
            power_law: PowerLawConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.group.group_kind().map_err(|e| bad("group", e.to_string()))?;
        if self.weights.is_empty() {
            return Err(bad("weights", "need at least one (alpha, beta) point"));
        }
        for (k, w) in self.weights.iter().enumerate() {
            if !(w.alpha > 0.0 && w.alpha.is_finite()) {
                return Err(bad(
                    format!("weights[{k}].alpha"),
                    format!("must be > 0, got {}", w.alpha),
                ));
            }
            if !(w.beta > 0.0 && w.beta < 1.0) {
                return Err(bad(
                    format!("weights[{k}].beta"),
                    format!("must lie in (0, 1), got {}", w.beta),
                ));
            }
        }
        let pp = self.growth.property_p;
        if !(pp.alpha > 0.0) || !(pp.beta > 0.0 && pp.beta < 1.0) {
            return Err(bad("growth.property_p", "need alpha > 0 and beta in (0, 1)"));
        }
        if self.growth.tau_max < 2 || self.growth.tau_max > self.group.radius_cap {
            return Err(bad("growth.tau_max", "must lie in [2, group.radius_cap]"));
        }
        let adm = &self.admissible;
        if !(adm.r >= 1.0) {
            return Err(bad("admissible.r", "must be ≥ 1"));
        }
        let cap = if self.stages.contains(&Stage::Admissible) {
            self.group.radius_cap
        } else {
            u32::MAX
        };
        if adm.tau_max == 0 || adm.tau_max > cap {
            return Err(bad("admissible.tau_max", "must lie in [1, group.radius_cap]"));
        }
        if adm.t_grid.is_empty() || adm.t_grid.iter().any(|&t| !(t >= 1.0)) {
            return Err(bad("admissible.t_grid", "values must be ≥ 1"));
        }
        if let Some(th) = adm.theta.or(self.power_law.theta) {
            if !(th > 0.0 && th < 1.0) {
                return Err(bad("theta", "must lie in (0, 1)"));
            }
        }
        if let DomainSpec::Ball { radius: 0 } | DomainSpec::Interval { len: 0 } = self.domain {
            return Err(bad("domain", "must be nonempty"));
        }
        let mut names: Vec<&str> = self.operators.iter().map(OperatorSpec::name).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("operators", "names must be unique"));
        }
        for op in &self.operators {
            if op.name().is_empty()
                || !op
                    .name()
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(bad(
                    "operators.name",
                    format!("{:?} must be nonempty [A-Za-z0-9_-]", op.name()),
                ));
            }
            if let OperatorSpec::Random {
                perturbation: Some(s), ..
            } = op
            {
                if !(*s >= 0.0 && *s < 1.0) {
                    return Err(bad(
                        format!("operators.{}.perturbation", op.name()),
                        "must lie in [0, 1)",
                    ));
                }
            }
        }
        if !(self.invert.tol > 0.0) || self.invert.max_terms == 0 {
            return Err(bad("invert", "need tol > 0 and max_terms ≥ 1"));
        }
        let pl = &self.power_law;
        if pl.n_max == 0 || !pl.n_max.is_power_of_two() {
            return Err(bad("power_law.n_max", "must be a power of two"));
        }
        if pl.radius_n_max < 8 || !pl.radius_n_max.is_power_of_two() {
            return Err(bad("power_law.radius_n_max", "must be a power of two ≥ 8"));
        }
        if !(pl.radius_gap_max > 0.0) {
            return Err(bad("power_law.radius_gap_max", "must be positive"));
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    /// Seed of the k-th configured operator.
    pub fn operator_seed(&self, k: usize) -> u64 {
        splitmix64(splitmix64(self.seed ^ 0x6f70_6572_6174_6f72) ^ k as u64)
    }

    /// Sub-seed for a stage and an item within it.
    pub fn sub_seed(&self, stage: Stage, item: u64) -> u64 {
        splitmix64(splitmix64(self.seed ^ stage.id().wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ item)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
stages = ["growth"]
weights = [{ alpha = 1.0, beta = 0.5 }]
[group]
kind = "zd"
d = 1
radius_cap = 30
element_cap = 100000
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.stages, vec![Stage::Growth]);
        assert_eq!(cfg.group.rank, 1);
        assert_eq!(cfg.admissible, AdmissibleConfig::default());
    }

    #[test]
    fn bad_beta_names_the_field() {
        let text = MINIMAL.replace("beta = 0.5", "beta = 1.2");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("weights[0].beta"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\nsede = 2");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
        let text = MINIMAL.replace("radius_cap = 30", "radius_cap = 30\nextra = 1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default_z2();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn sub_seeds_differ_by_stage_and_item() {
        let cfg = ExperimentConfig::default_z2();
        let a = cfg.sub_seed(Stage::Norms, 0);
        assert_eq!(a, cfg.sub_seed(Stage::Norms, 0));
        assert_ne!(a, cfg.sub_seed(Stage::Norms, 1));
        assert_ne!(a, cfg.sub_seed(Stage::Invert, 0));
    }
}
