//! TOML run configuration.
//!
//! Every key is optional; an empty document yields the standard grid.
//!
//! ```toml
//! trials = 10000
//! budget = 500
//! master_seed = 0
//! confidence = 0.95
//! paired_streams = false
//! r_values = [1, 2, 3]            # or: r_max = 50  (meaning 1..=50)
//! rules = ["fht", "fixed-budget"]
//!
//! [[problems]]
//! kind = "onemax"                 # or "pmax"
//! n = 10
//! noise_mean = 0.0                # onemax only
//! noise_stddev = 1.0              # onemax only
//!
//! [[algorithms]]
//! kind = "opo-ea"                 # or "rmhc"
//! mutation_prob = 0.1             # opo-ea only, defaults to 1/n
//! ```

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmSpec, ResamplingRate};
use crate::error::{Error, Result};
use crate::experiment::{
    ExperimentConfig, DEFAULT_BUDGET, DEFAULT_CONFIDENCE, DEFAULT_DIMENSION, DEFAULT_MASTER_SEED,
    DEFAULT_MAX_R, DEFAULT_TRIALS,
};
use crate::problems::{NoiseModel, ProblemSpec};

/// Serialized form of [`ExperimentConfig`]; also embedded in run manifests.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired_streams: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problems: Option<Vec<ProblemEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<AlgorithmEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_stddev: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_prob: Option<f64>,
}

/// Parse and validate a TOML config, applying defaults for missing keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
    doc.resolve()
}

/// Fully resolved TOML for `cfg`; `parse_config` of the output gives `cfg` back.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(&ConfigDocument::from_config(cfg))
        .expect("config document is always representable in TOML")
}

impl ConfigDocument {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let defaults = ExperimentConfig::default();

        let problems = match &self.problems {
            None => defaults.problems,
            Some(entries) => entries.iter().map(ProblemEntry::resolve).collect::<Result<_>>()?,
        };
        let algorithms = match &self.algorithms {
            None => defaults.algorithms,
            Some(entries) => entries
                .iter()
                .map(AlgorithmEntry::resolve)
                .collect::<Result<_>>()?,
        };
        let rules = match &self.rules {
            None => defaults.rules,
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        };
        let r_values = match (&self.r_values, self.r_max) {
            (Some(_), Some(_)) => {
                return Err(Error::config("r_max", "give either r_values or r_max, not both"));
            }
            (Some(values), None) => values
                .iter()
                .map(|&r| {
                    ResamplingRate::new(r).map_err(|_| Error::config("r_values", "values must be >= 1"))
                })
                .collect::<Result<_>>()?,
            (None, Some(0)) => return Err(Error::config("r_max", "must be >= 1")),
            (None, Some(max)) => (1..=max).map(|r| ResamplingRate::new(r).unwrap()).collect(),
            (None, None) => (1..=DEFAULT_MAX_R)
                .map(|r| ResamplingRate::new(r).unwrap())
                .collect(),
        };

        let cfg = ExperimentConfig {
            problems,
            algorithms,
            rules,
            r_values,
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            master_seed: self.master_seed.unwrap_or(DEFAULT_MASTER_SEED),
            confidence: self.confidence.unwrap_or(DEFAULT_CONFIDENCE),
            paired_streams: self.paired_streams.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fully expanded document: every key present.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        ConfigDocument {
            trials: Some(cfg.trials),
            budget: Some(cfg.budget),
            master_seed: Some(cfg.master_seed),
            confidence: Some(cfg.confidence),
            paired_streams: Some(cfg.paired_streams),
            r_values: Some(cfg.r_values.iter().map(|r| r.get()).collect()),
            r_max: None,
            rules: Some(cfg.rules.iter().map(|r| r.id().to_string()).collect()),
            problems: Some(cfg.problems.iter().map(ProblemEntry::from_spec).collect()),
            algorithms: Some(cfg.algorithms.iter().map(AlgorithmEntry::from_spec).collect()),
        }
    }
}

impl ProblemEntry {
    fn resolve(&self) -> Result<ProblemSpec> {
        let n = self.n.unwrap_or(DEFAULT_DIMENSION);
        let spec = match self.kind.as_str() {
            "onemax" => {
                let defaults = NoiseModel::default();
                ProblemSpec::OneMaxGaussian {
                    n,
                    noise: NoiseModel {
                        mean: self.noise_mean.unwrap_or(defaults.mean),
                        stddev: self.noise_stddev.unwrap_or(defaults.stddev),
                    },
                }
            }
            "pmax" => {
                if self.noise_mean.is_some() {
                    return Err(Error::config("problems.noise_mean", "not applicable to pmax"));
                }
                if self.noise_stddev.is_some() {
                    return Err(Error::config("problems.noise_stddev", "not applicable to pmax"));
                }
                ProblemSpec::PMax { n }
            }
            other => {
                return Err(Error::config(
                    "problems.kind",
                    format!("unknown problem {other:?} (expected \"onemax\" or \"pmax\")"),
                ))
            }
        };
        if let ProblemSpec::OneMaxGaussian { noise, .. } = spec {
            if !(noise.stddev.is_finite() && noise.stddev >= 0.0) {
                return Err(Error::config("problems.noise_stddev", "must be finite and >= 0"));
            }
            if !noise.mean.is_finite() {
                return Err(Error::config("problems.noise_mean", "must be finite"));
            }
        }
        spec.validate()
            .map_err(|e| Error::config("problems.n", e.to_string()))?;
        Ok(spec)
    }

    fn from_spec(spec: &ProblemSpec) -> Self {
        match *spec {
            ProblemSpec::OneMaxGaussian { n, noise } => ProblemEntry {
                kind: "onemax".into(),
                n: Some(n),
                noise_mean: Some(noise.mean),
                noise_stddev: Some(noise.stddev),
            },
            ProblemSpec::PMax { n } => ProblemEntry {
                kind: "pmax".into(),
                n: Some(n),
                noise_mean: None,
                noise_stddev: None,
            },
        }
    }
}

impl AlgorithmEntry {
    fn resolve(&self) -> Result<AlgorithmSpec> {
        let spec = match self.kind.as_str() {
            "rmhc" => {
                if self.mutation_prob.is_some() {
                    return Err(Error::config(
                        "algorithms.mutation_prob",
                        "not applicable to rmhc",
                    ));
                }
                AlgorithmSpec::Rmhc
            }
            "opo-ea" => AlgorithmSpec::OnePlusOneEa {
                mutation_prob: self.mutation_prob,
            },
            other => {
                return Err(Error::config(
                    "algorithms.kind",
                    format!("unknown algorithm {other:?} (expected \"rmhc\" or \"opo-ea\")"),
                ))
            }
        };
        spec.validate()
            .map_err(|e| Error::config("algorithms.mutation_prob", e.to_string()))?;
        Ok(spec)
    }

    fn from_spec(spec: &AlgorithmSpec) -> Self {
        match *spec {
            AlgorithmSpec::Rmhc => AlgorithmEntry {
                kind: "rmhc".into(),
                mutation_prob: None,
            },
            AlgorithmSpec::OnePlusOneEa { mutation_prob } => AlgorithmEntry {
                kind: "opo-ea".into(),
                mutation_prob,
            },
        }
    }
}
