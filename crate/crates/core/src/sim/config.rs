use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of trigger-children spawned by each cascade member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Offspring {
    #[default]
    Geometric,
    /// Discrete power law on `{0, 1, 2, …}` scaled to the same mean.
    PowerLaw,
}

/// Simulation parameters. Everything after `capability_growth` refines the
/// mechanics; the defaults are the ones used by the presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub n_ai: usize,
    pub n_human: usize,
    /// Steps to simulate; one step is one day-long window.
    pub steps: usize,
    pub modules_init: usize,
    /// Mean trigger-children per cascade member.
    pub branching_ratio: f64,
    /// Specification-interpretation divergence `ε ∈ [0, 1]`.
    pub ambiguity: f64,
    /// Per-step drift `δ ≥ 0`, subtracted cumulatively from true success.
    pub drift: f64,
    /// Reviews per human per step.
    pub review_capacity: f64,
    /// Minimum review depth for semantic review.
    pub review_floor: f64,
    /// Steps between governance rule updates; 0 disables governance.
    pub governance_period: usize,
    /// How strongly AI agents steer away from gated modules.
    pub adaptivity: f64,
    /// Preferential-attachment exponent for new dependency targets.
    pub pref_attach: f64,
    /// Per-step increase in base success probability.
    pub capability_growth: f64,

    /// Ramp the AI head-count linearly in equal stairs up to this value.
    pub n_ai_final: Option<usize>,
    pub offspring: Offspring,
    /// Tail exponent for [`Offspring::PowerLaw`].
    pub offspring_tail: f64,
    pub base_success: f64,
    /// Poisson mean of commits per human per step.
    pub human_rate: f64,
    /// Extra commits per AI agent per other active agent, scaled by `ε`.
    pub integration_rate: f64,
    /// Misalignment defect probability per AI commit at `ε = 1`.
    pub defect_rate: f64,
    /// Boundary-violation probability at full review depth.
    pub violation_base: f64,
    /// Added violation probability as depth falls to zero below the floor.
    pub violation_slope: f64,
    /// Probability that a new dependency closes a triangle.
    pub closure: f64,
    /// Strength of the topology effect on branching.
    pub topology_coupling: f64,
    /// Clustering coefficient at which the clustering term equals one.
    pub clustering_ref: f64,
    /// Link density at which the density term equals one.
    pub density_ref: f64,
    /// Probability a human commit removes one outgoing dependency.
    pub refactor_rate: f64,
    /// New-module probability per commit.
    pub novelty_base: f64,
    /// Additional new-module probability per AI commit at `ε = 1`.
    pub novelty_rate: f64,
    pub gate_friction: f64,
    /// Rework probability per governance rule covering a commit's directory.
    pub gate_rework: f64,
    pub message_rate: f64,
    pub quality_base: f64,
    pub quality_penalty: f64,
    /// EWMA rate of the agents' internal success models.
    pub learning_rate: f64,
    pub loc_mean: f64,
    pub max_cascade: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_ai: 4,
            n_human: 4,
            steps: 200,
            modules_init: 12,
            branching_ratio: 0.5,
            ambiguity: 0.3,
            drift: 0.001,
            review_capacity: 2.5,
            review_floor: 0.5,
            governance_period: 20,
            adaptivity: 0.5,
            pref_attach: 1.0,
            capability_growth: 0.0005,
            n_ai_final: None,
            offspring: Offspring::Geometric,
            offspring_tail: 2.5,
            base_success: 0.9,
            human_rate: 1.0,
            integration_rate: 0.1,
            defect_rate: 0.5,
            violation_base: 0.02,
            violation_slope: 0.3,
            closure: 0.2,
            topology_coupling: 0.2,
            clustering_ref: 0.25,
            density_ref: 0.1,
            refactor_rate: 0.05,
            novelty_base: 0.01,
            novelty_rate: 0.1,
            gate_friction: 1.0,
            gate_rework: 0.1,
            message_rate: 0.2,
            quality_base: 0.9,
            quality_penalty: 0.2,
            learning_rate: 0.05,
            loc_mean: 30.0,
            max_cascade: 10_000,
        }
    }
}

pub const PRESETS: [&str; 5] = [
    "low-agent",
    "high-agent",
    "subcritical",
    "supercritical",
    "null-world",
];

impl SimConfig {
    /// Named configurations: AI commit share below 10% and above 30%, agent
    /// ratios 0.5 and 4, and a world without ambiguity, drift or branching.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let cfg = match name {
            "low-agent" => Self {
                n_ai: 1,
                n_human: 11,
                ..base
            },
            "high-agent" => Self {
                n_ai: 6,
                n_human: 4,
                human_rate: 1.5,
                ..base
            },
            "subcritical" => Self {
                n_ai: 2,
                n_human: 4,
                ..base
            },
            "supercritical" => Self {
                n_ai: 16,
                n_human: 4,
                ..base
            },
            "null-world" => Self {
                n_ai: 8,
                n_human: 4,
                ambiguity: 0.0,
                drift: 0.0,
                branching_ratio: 0.0,
                capability_growth: 0.0,
                governance_period: 0,
                adaptivity: 0.0,
                pref_attach: 0.0,
                closure: 0.0,
                refactor_rate: 0.0,
                review_capacity: 1000.0,
                ..base
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    /// Parse flat `key = value` text. A `preset` key selects the starting
    /// point; remaining keys override it.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let base = match table.remove("preset") {
            Some(toml::Value::String(name)) => Self::preset(&name)?,
            Some(other) => return Err(Error::Config(format!("preset must be a string, got {other}"))),
            None => Self::default(),
        };
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in table {
            merged.insert(k, v);
        }
        let cfg: Self = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be ≥ 0, got {v}")))
            }
        };
        if self.n_human < 1 {
            return Err(Error::Config("n_human must be ≥ 1".into()));
        }
        if self.modules_init < 1 {
            return Err(Error::Config("modules_init must be ≥ 1".into()));
        }
        for (name, v) in [
            ("ambiguity", self.ambiguity),
            ("review_floor", self.review_floor),
            ("adaptivity", self.adaptivity),
            ("base_success", self.base_success),
            ("defect_rate", self.defect_rate),
            ("violation_base", self.violation_base),
            ("violation_slope", self.violation_slope),
            ("closure", self.closure),
            ("refactor_rate", self.refactor_rate),
            ("novelty_base", self.novelty_base),
            ("novelty_rate", self.novelty_rate),
            ("gate_rework", self.gate_rework),
            ("message_rate", self.message_rate),
            ("quality_base", self.quality_base),
            ("quality_penalty", self.quality_penalty),
            ("learning_rate", self.learning_rate),
        ] {
            unit(name, v)?;
        }
        for (name, v) in [
            ("branching_ratio", self.branching_ratio),
            ("drift", self.drift),
            ("review_capacity", self.review_capacity),
            ("pref_attach", self.pref_attach),
            ("capability_growth", self.capability_growth),
            ("human_rate", self.human_rate),
            ("integration_rate", self.integration_rate),
            ("topology_coupling", self.topology_coupling),
            ("gate_friction", self.gate_friction),
            ("loc_mean", self.loc_mean),
        ] {
            nonneg(name, v)?;
        }
        if self.density_ref <= 0.0 || self.clustering_ref <= 0.0 {
            return Err(Error::Config("clustering_ref and density_ref must be > 0".into()));
        }
        if self.offspring == Offspring::PowerLaw && self.offspring_tail <= 2.0 {
            return Err(Error::Config(
                "offspring_tail must exceed 2 for a finite mean".into(),
            ));
        }
        if self.max_cascade < 1 {
            return Err(Error::Config("max_cascade must be ≥ 1".into()));
        }
        Ok(())
    }

    /// AI head-count at `step`.
    pub fn n_ai_at(&self, step: usize) -> usize {
        match self.n_ai_final {
            None => self.n_ai,
            Some(last) if self.steps == 0 => last.min(self.n_ai),
            Some(last) => {
                let (a, b) = (self.n_ai as i64, last as i64);
                let levels = (b - a).abs() + 1;
                let k = (step as i64 * levels / self.steps as i64).min(levels - 1);
                (a + k * (b - a).signum()) as usize
            }
        }
    }

    /// Largest AI head-count over the run.
    pub fn n_ai_max(&self) -> usize {
        self.n_ai.max(self.n_ai_final.unwrap_or(0))
    }

    pub fn ratio_at(&self, step: usize) -> f64 {
        self.n_ai_at(step) as f64 / self.n_human as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_constants() {
        assert_eq!(SimConfig::preset("subcritical").unwrap().ratio_at(0), 0.5);
        assert_eq!(SimConfig::preset("supercritical").unwrap().ratio_at(0), 4.0);
        let null = SimConfig::preset("null-world").unwrap();
        assert_eq!(
            (null.branching_ratio, null.ambiguity, null.drift),
            (0.0, 0.0, 0.0)
        );
        for p in PRESETS {
            SimConfig::preset(p).unwrap().validate().unwrap();
        }
        assert!(SimConfig::preset("nope").is_err());
    }

    #[test]
    fn flat_text_overrides_preset() {
        let cfg = SimConfig::from_toml_str("preset = \"null-world\"\nsteps = 7\nseed = 3\n").unwrap();
        assert_eq!((cfg.steps, cfg.seed, cfg.n_ai), (7, 3, 8));
        assert!(SimConfig::from_toml_str("ambiguity = 2.0").is_err());
        assert!(SimConfig::from_toml_str("unknown_knob = 1").is_err());
        assert!(SimConfig::from_toml_str("n_human = 0").is_err());
        assert!(SimConfig::from_toml_str("steps = [").is_err());
        let back = SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn ramp_uses_equal_stairs() {
        let cfg = SimConfig {
            n_ai: 0,
            n_ai_final: Some(3),
            steps: 8,
            ..SimConfig::default()
        };
        let levels: Vec<usize> = (0..8).map(|t| cfg.n_ai_at(t)).collect();
        assert_eq!(levels, [0, 0, 1, 1, 2, 2, 3, 3]);
    }
}
