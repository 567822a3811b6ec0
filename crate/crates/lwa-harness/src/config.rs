//! Experiment configuration: JSON schema, validation, environment-variable
//! overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use lwa_mcmc::propose::{AdaptConfig, RwConfig};
use lwa_mcmc::samplers::{
    Budget, MhSubLhdParams, RunConfig, SamplerKind, SubsetProposalConfig,
};
use lwa_mcmc::summary::StatisticKind;
use lwa_mcmc::{Dataset, Flavor, Model, ParamVector, RngStream};

use crate::CliError;

/// Environment prefix for config overrides: `LWA_<KEY>` replaces the config
/// entry `<key>`, with `__` descending into nested objects
/// (e.g. `LWA_PROPOSAL__TARGET_RATE=0.3`).
pub const ENV_PREFIX: &str = "LWA_";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Probit {
        theta_star: f64,
        gamma: f64,
        #[serde(default)]
        prior_mean: f64,
        #[serde(default = "default_probit_prior_sd")]
        prior_sd: f64,
    },
    Arma {
        theta_star: [f64; 3],
        #[serde(default = "default_arma_sigma")]
        sigma: f64,
        #[serde(default = "default_arma_prior_sd")]
        prior_sd: f64,
    },
    Gaussmix {
        mu1: [f64; 2],
        mu2: [f64; 2],
        sigma1: f64,
        sigma2: f64,
    },
}

fn default_probit_prior_sd() -> f64 {
    10.0
}

fn default_arma_sigma() -> f64 {
    1.0
}

fn default_arma_prior_sd() -> f64 {
    5.0
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Probit { .. } => "probit",
            ModelConfig::Arma { .. } => "arma",
            ModelConfig::Gaussmix { .. } => "gaussmix",
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            ModelConfig::Arma { .. } => Flavor::TimeSeries,
            _ => Flavor::Iid,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            ModelConfig::Probit { .. } => 1,
            ModelConfig::Arma { .. } => 3,
            ModelConfig::Gaussmix { .. } => 6,
        }
    }

    pub fn theta_star(&self) -> Vec<f64> {
        match self {
            ModelConfig::Probit { theta_star, .. } => vec![*theta_star],
            ModelConfig::Arma { theta_star, .. } => theta_star.to_vec(),
            ModelConfig::Gaussmix { mu1, mu2, sigma1, sigma2 } => {
                vec![mu1[0], mu1[1], mu2[0], mu2[1], *sigma1, *sigma2]
            }
        }
    }

    pub fn build_model(&self) -> Box<dyn Model> {
        match self {
            ModelConfig::Probit { gamma, prior_mean, prior_sd, .. } => {
                Box::new(lwa_mcmc::models::ProbitModel::new(*gamma, *prior_mean, *prior_sd))
            }
            ModelConfig::Arma { sigma, prior_sd, .. } => {
                Box::new(lwa_mcmc::models::ArmaModel::new(*sigma, *prior_sd))
            }
            ModelConfig::Gaussmix { .. } => {
                Box::new(lwa_mcmc::models::GaussMixClassModel::new())
            }
        }
    }

    pub fn simulate(&self, n: usize, rng: &mut RngStream) -> Dataset {
        match self {
            ModelConfig::Probit { theta_star, gamma, .. } => {
                lwa_mcmc::models::simulate_probit(n, *theta_star, *gamma, rng)
            }
            ModelConfig::Arma { theta_star, sigma, .. } => {
                lwa_mcmc::models::simulate_arma(n, theta_star, *sigma, (0.0, 1.0), rng)
            }
            ModelConfig::Gaussmix { mu1, mu2, sigma1, sigma2 } => {
                lwa_mcmc::models::simulate_gaussmix(n, *mu1, *mu2, *sigma1, *sigma2, rng)
            }
        }
    }

    /// True parameters packed for classification-style diagnostics.
    pub fn theta_star_param(&self) -> ParamVector {
        ParamVector::new(self.theta_star()).expect("finite true parameters")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKindConfig {
    Lwa,
    FullMh,
    Mhsublhd,
    FixedSubset,
    FreeSubset,
}

impl SamplerKindConfig {
    pub fn to_kind(self) -> SamplerKind {
        match self {
            SamplerKindConfig::Lwa => SamplerKind::Lwa,
            SamplerKindConfig::FullMh => SamplerKind::FullMh,
            SamplerKindConfig::Mhsublhd => SamplerKind::MhSubLhd,
            SamplerKindConfig::FixedSubset => SamplerKind::FixedSubset,
            SamplerKindConfig::FreeSubset => SamplerKind::FreeSubset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticConfig {
    IdentityMean,
    ArmaS0,
    ArmaS1,
    ArmaS2,
    ClassCounts,
}

impl StatisticConfig {
    pub fn to_kind(self) -> StatisticKind {
        match self {
            StatisticConfig::IdentityMean => StatisticKind::IdentityMean,
            StatisticConfig::ArmaS0 => StatisticKind::ArmaS0,
            StatisticConfig::ArmaS1 => StatisticKind::ArmaS1,
            StatisticConfig::ArmaS2 => StatisticKind::ArmaS2,
            StatisticConfig::ClassCounts => StatisticKind::ClassCounts,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StatisticConfig::IdentityMean => "identity_mean",
            StatisticConfig::ArmaS0 => "arma_s0",
            StatisticConfig::ArmaS1 => "arma_s1",
            StatisticConfig::ArmaS2 => "arma_s2",
            StatisticConfig::ClassCounts => "class_counts",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetProposalConfigFile {
    UniformSwap {
        #[serde(default)]
        m: Option<usize>,
    },
    WindowShift {
        omega: f64,
        lambda: f64,
    },
}

impl SubsetProposalConfigFile {
    pub fn to_lib(self) -> SubsetProposalConfig {
        match self {
            SubsetProposalConfigFile::UniformSwap { m } => SubsetProposalConfig::UniformSwap { m },
            SubsetProposalConfigFile::WindowShift { omega, lambda } => {
                SubsetProposalConfig::WindowShift { omega, lambda }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProposalConfigFile {
    #[serde(default = "default_initial_scale")]
    pub initial_scale: f64,
    #[serde(default = "default_true")]
    pub adapt: bool,
    #[serde(default = "default_target_rate")]
    pub target_rate: f64,
    #[serde(default = "default_learning_c")]
    pub learning_c: f64,
    #[serde(default = "default_learning_exponent")]
    pub learning_exponent: f64,
    #[serde(default)]
    pub adapt_window: Option<u64>,
}

fn default_initial_scale() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_target_rate() -> f64 {
    0.35
}

fn default_learning_c() -> f64 {
    1.0
}

fn default_learning_exponent() -> f64 {
    0.7
}

impl Default for ProposalConfigFile {
    fn default() -> Self {
        Self {
            initial_scale: default_initial_scale(),
            adapt: true,
            target_rate: default_target_rate(),
            learning_c: default_learning_c(),
            learning_exponent: default_learning_exponent(),
            adapt_window: None,
        }
    }
}

impl ProposalConfigFile {
    pub fn to_lib(self) -> RwConfig {
        RwConfig {
            initial_scale: self.initial_scale,
            adapt: self.adapt.then_some(AdaptConfig {
                target_rate: self.target_rate,
                learning_c: self.learning_c,
                learning_exponent: self.learning_exponent,
                window: self.adapt_window,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_units: Option<u64>,
}

impl BudgetConfig {
    pub fn to_lib(&self) -> Result<Budget, CliError> {
        match (self.iterations, self.cost_units) {
            (Some(i), None) => Ok(Budget::Iterations(i)),
            (None, Some(c)) => Ok(Budget::CostUnits(c)),
            _ => Err(CliError::Config(
                "budget must set exactly one of `iterations` or `cost_units`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MhSubLhdConfigFile {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_batch_base")]
    pub batch_base: usize,
}

fn default_delta() -> f64 {
    0.1
}

fn default_batch_base() -> usize {
    1000
}

impl Default for MhSubLhdConfigFile {
    fn default() -> Self {
        Self { delta: default_delta(), batch_base: default_batch_base() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    SubsetSize,
    Statistic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Settings along the axis. For the epsilon axis the strings `free`
    /// and `fixed` select the corresponding extreme samplers.
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub n_data: usize,
    #[serde(default = "default_data_seed")]
    pub data_seed: u64,
    pub sampler: SamplerKindConfig,
    #[serde(default)]
    pub subset_size: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub statistic: Option<StatisticConfig>,
    #[serde(default)]
    pub statistic_scale: Option<Vec<f64>>,
    #[serde(default)]
    pub subset_proposal: Option<SubsetProposalConfigFile>,
    #[serde(default = "default_inner_steps")]
    pub inner_steps: u64,
    #[serde(default)]
    pub proposal: ProposalConfigFile,
    pub budget: BudgetConfig,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    pub seed: u64,
    #[serde(default)]
    pub mhsublhd: MhSubLhdConfigFile,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Keep per-cell traces during sweeps (large); single runs always
    /// persist traces.
    #[serde(default)]
    pub keep_traces: bool,
}

fn default_data_seed() -> u64 {
    1
}

fn default_inner_steps() -> u64 {
    1
}

fn default_burn_in() -> u64 {
    10_000
}

fn default_replications() -> u32 {
    1
}

impl ExperimentConfig {
    /// Load from a JSON file, apply `LWA_*` environment overrides, validate.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&raw)
            .map_err(|e| CliError::Config(format!("invalid JSON in {}: {e}", path.display())))?;
        apply_env_overrides(&mut value, std::env::vars())?;
        let config: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.n_data < 1 {
            return fail("n_data must be >= 1".into());
        }
        if self.replications < 1 {
            return fail("replications must be >= 1".into());
        }
        self.budget.to_lib()?;
        let needs_subset = !matches!(
            self.sampler,
            SamplerKindConfig::FullMh | SamplerKindConfig::Mhsublhd
        );
        if needs_subset && (self.subset_size == 0 || self.subset_size > self.n_data) {
            return fail(format!(
                "subset_size {} invalid for n_data {}",
                self.subset_size, self.n_data
            ));
        }
        if self.sampler == SamplerKindConfig::Lwa {
            if !(self.epsilon > 0.0) {
                return fail(format!("epsilon must be positive, got {}", self.epsilon));
            }
            let Some(stat) = self.statistic else {
                return fail("the lwa sampler requires a `statistic`".into());
            };
            match stat {
                StatisticConfig::ClassCounts => {
                    if !matches!(self.model, ModelConfig::Gaussmix { .. }) {
                        return fail("class_counts requires the labeled gaussmix model".into());
                    }
                }
                StatisticConfig::ArmaS0 | StatisticConfig::ArmaS1 | StatisticConfig::ArmaS2 => {
                    if self.model.flavor() != Flavor::TimeSeries {
                        return fail(format!(
                            "{} requires a time-series model",
                            stat.name()
                        ));
                    }
                }
                StatisticConfig::IdentityMean => {}
            }
            match self.subset_proposal_file() {
                SubsetProposalConfigFile::WindowShift { .. } => {
                    if self.model.flavor() != Flavor::TimeSeries {
                        return fail(
                            "the window proposal requires a time-series model".into(),
                        );
                    }
                }
                SubsetProposalConfigFile::UniformSwap { m } => {
                    if self.model.flavor() != Flavor::Iid {
                        return fail(
                            "the uniform-swap proposal requires an i.i.d. model".into(),
                        );
                    }
                    if let Some(m) = m {
                        if m == 0 || m > self.subset_size || self.n_data - self.subset_size < m
                        {
                            return fail(format!("swap count {m} out of range"));
                        }
                    }
                }
            }
        }
        if self.sampler == SamplerKindConfig::Mhsublhd && self.model.flavor() != Flavor::Iid {
            return fail("mhsublhd requires an i.i.d. model".into());
        }
        if self.inner_steps == 0 {
            return fail("inner_steps must be >= 1".into());
        }
        if let Some(scale) = &self.statistic_scale {
            if scale.iter().any(|s| !(*s > 0.0)) {
                return fail("statistic_scale entries must be positive".into());
            }
        }
        Ok(())
    }

    /// Default subset proposal by model flavor when none is configured.
    pub fn subset_proposal_file(&self) -> SubsetProposalConfigFile {
        self.subset_proposal.unwrap_or(match self.model.flavor() {
            Flavor::TimeSeries => {
                SubsetProposalConfigFile::WindowShift { omega: 0.9, lambda: 0.1 }
            }
            Flavor::Iid => SubsetProposalConfigFile::UniformSwap { m: None },
        })
    }

    /// Library-level run configuration.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            subset_size: self.subset_size,
            epsilon: self.epsilon,
            inner_steps: self.inner_steps,
            budget: self.budget.to_lib()?,
            subset_proposal: self.subset_proposal_file().to_lib(),
            rw: self.proposal.to_lib(),
            mhsublhd: MhSubLhdParams {
                delta: self.mhsublhd.delta,
                batch_base: self.mhsublhd.batch_base,
            },
        })
    }
}

/// Apply `LWA_*` environment overrides to a JSON config value.
/// Key paths are case-insensitive; `__` separates nesting levels; values
/// are parsed as JSON and fall back to plain strings.
pub fn apply_env_overrides(
    value: &mut serde_json::Value,
    vars: impl Iterator<Item = (String, String)>,
) -> Result<(), CliError> {
    for (key, raw) in vars {
        let Some(path) = key.strip_prefix(ENV_PREFIX) else { continue };
        if path.is_empty() {
            continue;
        }
        let segments: Vec<&str> = path.split("__").collect();
        let (leaf, parents) = segments.split_last().expect("non-empty path");
        let mut node = &mut *value;
        for segment in parents {
            let obj = node.as_object_mut().ok_or_else(|| {
                CliError::Config(format!("override {key}: segment {segment} is not an object"))
            })?;
            let actual = matching_key(obj, segment);
            node = obj
                .entry(actual)
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("override {key}: parent of {leaf} is not an object"))
        })?;
        let actual = matching_key(obj, leaf);
        let parsed =
            serde_json::from_str(&raw).unwrap_or(serde_json::Value::String(raw.clone()));
        obj.insert(actual, parsed);
    }
    Ok(())
}

fn matching_key(obj: &serde_json::Map<String, serde_json::Value>, segment: &str) -> String {
    obj.keys()
        .find(|k| k.eq_ignore_ascii_case(segment))
        .cloned()
        .unwrap_or_else(|| segment.to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> serde_json::Value {
        serde_json::json!({
            "model": {"kind": "probit", "theta_star": 1.0, "gamma": 1.0},
            "n_data": 1000,
            "sampler": "lwa",
            "subset_size": 50,
            "epsilon": 0.1,
            "statistic": "identity_mean",
            "budget": {"iterations": 100},
            "replications": 2,
            "seed": 7
        })
    }

    fn parse(value: serde_json::Value) -> Result<ExperimentConfig, CliError> {
        let config: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    #[test]
    fn valid_config_round_trips() {
        let config = parse(base_config()).unwrap();
        assert_eq!(config.model.name(), "probit");
        assert_eq!(config.burn_in, 10_000);
        assert!(matches!(
            config.subset_proposal_file(),
            SubsetProposalConfigFile::UniformSwap { m: None }
        ));
        config.run_config().unwrap();
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        // window proposal on an i.i.d. model
        let mut v = base_config();
        v["subset_proposal"] = serde_json::json!({"kind": "window_shift", "omega": 0.9, "lambda": 0.1});
        assert!(parse(v).is_err());

        // lwa without a statistic
        let mut v = base_config();
        v["statistic"] = serde_json::Value::Null;
        assert!(parse(v).is_err());

        // both budgets set
        let mut v = base_config();
        v["budget"] = serde_json::json!({"iterations": 10, "cost_units": 10});
        assert!(parse(v).is_err());

        // arma statistic on probit
        let mut v = base_config();
        v["statistic"] = serde_json::json!("arma_s0");
        assert!(parse(v).is_err());

        // subset too large
        let mut v = base_config();
        v["subset_size"] = serde_json::json!(2000);
        assert!(parse(v).is_err());
    }

    #[test]
    fn env_overrides_apply() {
        let mut v = base_config();
        let vars = vec![
            ("LWA_EPSILON".to_string(), "0.25".to_string()),
            ("LWA_PROPOSAL__TARGET_RATE".to_string(), "0.3".to_string()),
            ("LWA_STATISTIC".to_string(), "\"identity_mean\"".to_string()),
            ("OTHER_VAR".to_string(), "ignored".to_string()),
        ];
        apply_env_overrides(&mut v, vars.into_iter()).unwrap();
        let config = parse(v).unwrap();
        assert_eq!(config.epsilon, 0.25);
        assert_eq!(config.proposal.target_rate, 0.3);
    }

    #[test]
    fn env_override_plain_string_fallback() {
        let mut v = base_config();
        let vars = vec![("LWA_SAMPLER".to_string(), "full_mh".to_string())];
        apply_env_overrides(&mut v, vars.into_iter()).unwrap();
        let config = parse(v).unwrap();
        assert_eq!(config.sampler, SamplerKindConfig::FullMh);
    }
}
