//! Subcommand implementations: data generation, configured runs,
//! replication sweeps, analysis reports, and the enumeration-based oracle
//! suite.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lwa_mcmc::analysis::{
    enumerate_marginal, enumerate_nu, grid_posterior_probit, kl_on_grid, mean_distance_curve,
    probit_grid_spec, prop1_bound, tv_discrete, tv_samples_vs_grid,
};
use lwa_mcmc::cost::CostMeter;
use lwa_mcmc::models::ProbitModel;
use lwa_mcmc::propose::{RwConfig, RwProposal};
use lwa_mcmc::samplers::{lwa_transition, run_chain, ChainState, Trace};
use lwa_mcmc::subset::{accept_subset, SubsetProposal, UniformSwap};
use lwa_mcmc::summary::{
    make_statistic, scaled_statistic, StatisticKind, SubsetWeight, SummaryStatistic,
};
use lwa_mcmc::{Dataset, Model, RngStream, SubsetSelection};

use crate::config::{
    ExperimentConfig, SamplerKindConfig, StatisticConfig, SweepAxis, SweepConfig,
};
use crate::io::{
    read_dataset, read_json, read_trace_csv, trace_path, write_dataset, write_json,
    write_trace_csv, DatasetMeta, ReplicationSummary, RunSummary,
};
use crate::CliError;

/// Wall-clock metadata; kept out of every deterministic artifact.
#[derive(Debug, Serialize)]
struct RunMeta {
    wall_seconds: f64,
    finished_unix: u64,
}

fn write_meta(dir: &Path, started: Instant) -> Result<(), CliError> {
    let meta = RunMeta {
        wall_seconds: started.elapsed().as_secs_f64(),
        finished_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write_json(&dir.join("meta.json"), &meta)?;
    Ok(())
}

/// Generate the configured dataset deterministically and write it with its
/// metadata sidecar.
pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> Result<DatasetMeta, CliError> {
    let started = Instant::now();
    let mut rng = RngStream::with_stream(config.data_seed, 0);
    let data = config.model.simulate(config.n_data, &mut rng);
    let model_meta = serde_json::to_value(&config.model).map_err(anyhow::Error::from)?;
    let meta = write_dataset(out, &data, config.data_seed, model_meta)?;
    write_meta(out, started)?;
    Ok(meta)
}

fn check_dataset_matches(config: &ExperimentConfig, data: &Dataset) -> Result<(), CliError> {
    if data.len() != config.n_data {
        return Err(CliError::Config(format!(
            "dataset has {} observations, config expects {}",
            data.len(),
            config.n_data
        )));
    }
    if data.flavor() != config.model.flavor() {
        return Err(CliError::Config("dataset flavor does not match the model".into()));
    }
    if matches!(config.model, crate::config::ModelConfig::Gaussmix { .. })
        != data.labels().is_some()
    {
        return Err(CliError::Config("dataset labels do not match the model".into()));
    }
    Ok(())
}

fn build_statistic(
    config: &ExperimentConfig,
    data: &Dataset,
) -> Result<Option<Box<dyn SummaryStatistic>>, CliError> {
    let Some(kind) = config.statistic else { return Ok(None) };
    let stat = make_statistic(kind.to_kind(), data)?;
    let stat = match &config.statistic_scale {
        Some(scale) => scaled_statistic(stat, scale.clone())?,
        None => stat,
    };
    Ok(Some(stat))
}

fn run_one_replication(
    config: &ExperimentConfig,
    model: &dyn Model,
    data: &Dataset,
    stat: Option<&dyn SummaryStatistic>,
    replication: u32,
) -> Result<Trace, CliError> {
    let mut rng = RngStream::with_stream(config.seed, replication as u64);
    let trace = run_chain(
        config.sampler.to_kind(),
        &config.run_config()?,
        model,
        data,
        stat,
        &mut rng,
    )?;
    Ok(trace)
}

fn install_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run `replications` chains against a generated dataset; one trace CSV per
/// replication (stream ids 0..R-1) plus a summary JSON.
pub fn cmd_run(
    config: &ExperimentConfig,
    data_dir: &Path,
    out: &Path,
    workers: Option<usize>,
) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let (data, _) = read_dataset(data_dir)?;
    check_dataset_matches(config, &data)?;
    let model = config.model.build_model();
    let stat = build_statistic(config, &data)?;
    std::fs::create_dir_all(out).map_err(anyhow::Error::from)?;

    let replications: Vec<ReplicationSummary> = install_pool(workers, || {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<ReplicationSummary, CliError> {
                let trace =
                    run_one_replication(config, model.as_ref(), &data, stat.as_deref(), rep)?;
                write_trace_csv(&trace_path(out, rep), &trace)?;
                Ok(ReplicationSummary::from_trace(&trace, rep, rep as u64, config.burn_in))
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let summary = RunSummary {
        sampler: format!("{:?}", config.sampler).to_lowercase(),
        burn_in: config.burn_in,
        replications,
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_meta(out, started)?;
    Ok(summary)
}

/// One sweep cell: a concrete setting along the axis plus a replication.
#[derive(Debug, Clone)]
pub struct SweepSetting {
    pub label: String,
    pub config: ExperimentConfig,
}

/// Expand the sweep axis into per-setting configs.
pub fn expand_sweep(
    config: &ExperimentConfig,
    sweep: &SweepConfig,
) -> Result<Vec<SweepSetting>, CliError> {
    let mut settings = Vec::new();
    for value in &sweep.values {
        let mut cell = config.clone();
        match sweep.axis {
            SweepAxis::Epsilon => match value.as_str() {
                "free" => cell.sampler = SamplerKindConfig::FreeSubset,
                "fixed" => cell.sampler = SamplerKindConfig::FixedSubset,
                other => {
                    cell.sampler = SamplerKindConfig::Lwa;
                    cell.epsilon = other.parse::<f64>().map_err(|_| {
                        CliError::Config(format!("epsilon sweep value {other} is not a number"))
                    })?;
                }
            },
            SweepAxis::SubsetSize => {
                cell.subset_size = value.parse::<usize>().map_err(|_| {
                    CliError::Config(format!("subset-size sweep value {value} is not an integer"))
                })?;
            }
            SweepAxis::Statistic => {
                let kind: StatisticConfig =
                    serde_json::from_value(serde_json::Value::String(value.clone())).map_err(
                        |_| CliError::Config(format!("unknown statistic sweep value {value}")),
                    )?;
                cell.statistic = Some(kind);
            }
        }
        cell.validate()?;
        settings.push(SweepSetting { label: value.clone(), config: cell });
    }
    Ok(settings)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub setting: String,
    pub replications: u32,
    pub mean_acceptance_rate: f64,
    pub mean_refresh_rate: f64,
    pub mean_cost_units: f64,
    pub mean_data_used: f64,
    /// Across-replication mean of posterior means, per coordinate.
    pub mean_posterior_mean: Vec<f64>,
    /// Per-coordinate RMSE of posterior means against the true parameter.
    pub rmse_vs_truth: Vec<f64>,
    /// Root mean squared Euclidean error of posterior means.
    pub rmse_total: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub aggregates: Vec<SweepAggregate>,
}

/// Run the sweep cross-product (settings x replications), skipping cells
/// whose summaries already exist, then emit a tidy CSV and aggregates.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    data_dir: &Path,
    out: &Path,
    workers: Option<usize>,
) -> Result<SweepReport, CliError> {
    let started = Instant::now();
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep requires a `sweep` config section".into()))?;
    let settings = expand_sweep(config, &sweep)?;
    let (data, _) = read_dataset(data_dir)?;
    check_dataset_matches(config, &data)?;
    std::fs::create_dir_all(out).map_err(anyhow::Error::from)?;

    let cells: Vec<(usize, u32)> = (0..settings.len())
        .flat_map(|s| (0..config.replications).map(move |r| (s, r)))
        .collect();

    install_pool(workers, || {
        cells
            .par_iter()
            .map(|&(si, rep)| -> Result<(), CliError> {
                let setting = &settings[si];
                let cell_dir = out.join("cells").join(&setting.label);
                let cell_file = cell_dir.join(format!("rep_{rep:03}.json"));
                if cell_file.exists() {
                    return Ok(()); // resumable: completed cells are skipped
                }
                let model = setting.config.model.build_model();
                let stat = build_statistic(&setting.config, &data)?;
                let trace = run_one_replication(
                    &setting.config,
                    model.as_ref(),
                    &data,
                    stat.as_deref(),
                    rep,
                )?;
                if config.keep_traces {
                    write_trace_csv(&cell_dir.join(format!("trace_{rep:03}.csv")), &trace)?;
                }
                let summary = ReplicationSummary::from_trace(
                    &trace,
                    rep,
                    rep as u64,
                    setting.config.burn_in,
                );
                write_json(&cell_file, &summary)?;
                Ok(())
            })
            .collect::<Result<Vec<()>, _>>()
    })??;

    // assemble the tidy CSV and aggregates from the cell files
    let dim = config.model.param_dim();
    let theta_star = config.model.theta_star();
    let mut csv_rows = String::new();
    csv_rows.push_str("axis,setting,replication,iterations,lik_evals,stat_touches,cost_units,acceptance_rate,refresh_rate,mean_data_used");
    for d in 0..dim {
        csv_rows.push_str(&format!(",post_mean_{d}"));
    }
    for d in 0..dim {
        csv_rows.push_str(&format!(",post_sd_{d}"));
    }
    csv_rows.push('\n');

    let axis_name = match sweep.axis {
        SweepAxis::Epsilon => "epsilon",
        SweepAxis::SubsetSize => "subset_size",
        SweepAxis::Statistic => "statistic",
    };
    let mut aggregates = Vec::new();
    for setting in &settings {
        let cell_dir = out.join("cells").join(&setting.label);
        let mut acc = SweepAccumulator::new(dim);
        for rep in 0..config.replications {
            let summary: ReplicationSummary =
                read_json(&cell_dir.join(format!("rep_{rep:03}.json")))?;
            csv_rows.push_str(&format!(
                "{axis_name},{},{rep},{},{},{},{},{},{},{}",
                setting.label,
                summary.iterations,
                summary.lik_evals,
                summary.stat_touches,
                summary.cost_units,
                summary.acceptance_rate,
                summary.refresh_rate,
                summary.mean_data_used
            ));
            for v in &summary.posterior_mean {
                csv_rows.push_str(&format!(",{v}"));
            }
            for v in &summary.posterior_sd {
                csv_rows.push_str(&format!(",{v}"));
            }
            csv_rows.push('\n');
            acc.push(&summary, &theta_star);
        }
        aggregates.push(acc.finish(setting.label.clone(), config.replications));
    }
    std::fs::write(out.join("sweep.csv"), csv_rows).map_err(anyhow::Error::from)?;
    let report = SweepReport { axis: axis_name.to_string(), aggregates };
    write_json(&out.join("aggregates.json"), &report)?;
    write_meta(out, started)?;
    Ok(report)
}

struct SweepAccumulator {
    dim: usize,
    acceptance: f64,
    refresh: f64,
    cost: f64,
    data_used: f64,
    mean_sum: Vec<f64>,
    sq_err_sum: Vec<f64>,
}

impl SweepAccumulator {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            acceptance: 0.0,
            refresh: 0.0,
            cost: 0.0,
            data_used: 0.0,
            mean_sum: vec![0.0; dim],
            sq_err_sum: vec![0.0; dim],
        }
    }

    fn push(&mut self, summary: &ReplicationSummary, theta_star: &[f64]) {
        self.acceptance += summary.acceptance_rate;
        self.refresh += summary.refresh_rate;
        self.cost += summary.cost_units as f64;
        self.data_used += summary.mean_data_used;
        for (d, (&mean, &truth)) in
            summary.posterior_mean.iter().zip(theta_star).enumerate()
        {
            self.mean_sum[d] += mean;
            let err = mean - truth;
            self.sq_err_sum[d] += err * err;
        }
    }

    fn finish(self, setting: String, reps: u32) -> SweepAggregate {
        let r = reps as f64;
        let rmse: Vec<f64> = self.sq_err_sum.iter().map(|s| (s / r).sqrt()).collect();
        let rmse_total = (self.sq_err_sum.iter().sum::<f64>() / r).sqrt();
        SweepAggregate {
            setting,
            replications: reps,
            mean_acceptance_rate: self.acceptance / r,
            mean_refresh_rate: self.refresh / r,
            mean_cost_units: self.cost / r,
            mean_data_used: self.data_used / r,
            mean_posterior_mean: self.mean_sum.iter().map(|s| s / r).collect(),
            rmse_vs_truth: rmse,
            rmse_total,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisSpec {
    /// Refresh rates per trace in a run directory.
    RefreshReport { label: String, run_dir: PathBuf, burn_in: u64 },
    /// Mean observations used per transition.
    DataPerTransition { label: String, run_dir: PathBuf, burn_in: u64 },
    /// Running-mean distance to a reference, on the cost-unit axis.
    MeanDistance { label: String, trace: PathBuf, theta_star: Vec<f64>, points: usize },
    /// KL divergences and bound terms across a ladder of statistic
    /// mismatches, computed on grid oracles.
    KlTable {
        gamma: f64,
        prior_mean: f64,
        prior_sd: f64,
        n_full: u64,
        ones_full: u64,
        subset_size: u64,
        r_values: Vec<f64>,
    },
}

#[derive(Debug, Deserialize)]
pub struct AnalyzeFile {
    pub analyses: Vec<AnalysisSpec>,
}

#[derive(Debug, Serialize)]
struct RateReport {
    label: String,
    per_trace: Vec<f64>,
    mean: f64,
}

fn run_dir_traces(run_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut traces: Vec<PathBuf> = std::fs::read_dir(run_dir)
        .with_context(|| format!("listing {}", run_dir.display()))
        .map_err(CliError::from)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace_") && n.ends_with(".csv"))
        })
        .collect();
    traces.sort();
    if traces.is_empty() {
        return Err(CliError::Config(format!("no traces found in {}", run_dir.display())));
    }
    Ok(traces)
}

/// Run the requested analyses, writing one report file per entry.
pub fn cmd_analyze(spec_path: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec: AnalyzeFile = read_json(spec_path)
        .map_err(|e| CliError::Config(format!("invalid analysis spec: {e}")))?;
    std::fs::create_dir_all(out).map_err(anyhow::Error::from)?;
    let mut written = Vec::new();
    for analysis in &spec.analyses {
        match analysis {
            AnalysisSpec::RefreshReport { label, run_dir, burn_in } => {
                let rates: Vec<f64> = run_dir_traces(run_dir)?
                    .iter()
                    .map(|p| -> Result<f64, CliError> {
                        let trace = read_trace_csv(p)?;
                        Ok(trace.refresh_rate(*burn_in)?)
                    })
                    .collect::<Result<_, _>>()?;
                let mean = rates.iter().sum::<f64>() / rates.len() as f64;
                let path = out.join(format!("refresh_{label}.json"));
                write_json(&path, &RateReport { label: label.clone(), per_trace: rates, mean })?;
                written.push(path);
            }
            AnalysisSpec::DataPerTransition { label, run_dir, burn_in } => {
                let rates: Vec<f64> = run_dir_traces(run_dir)?
                    .iter()
                    .map(|p| -> Result<f64, CliError> {
                        let trace = read_trace_csv(p)?;
                        let rows = trace.post_burn_in(*burn_in)?;
                        Ok(rows.iter().map(|r| r.data_used as f64).sum::<f64>()
                            / rows.len() as f64)
                    })
                    .collect::<Result<_, _>>()?;
                let mean = rates.iter().sum::<f64>() / rates.len() as f64;
                let path = out.join(format!("data_per_transition_{label}.json"));
                write_json(&path, &RateReport { label: label.clone(), per_trace: rates, mean })?;
                written.push(path);
            }
            AnalysisSpec::MeanDistance { label, trace, theta_star, points } => {
                let trace = read_trace_csv(trace)?;
                let last_cost = trace.rows.last().map(|r| r.cost()).unwrap_or(0);
                let first_cost = trace.rows.first().map(|r| r.cost()).unwrap_or(0);
                let k = (*points).max(2) as u64;
                let cost_points: Vec<u64> = (0..k)
                    .map(|i| first_cost + (last_cost - first_cost) * i / (k - 1))
                    .collect();
                let curve = mean_distance_curve(&trace, theta_star, &cost_points);
                let mut csv = String::from("cost_units,distance\n");
                for (c, d) in curve {
                    csv.push_str(&format!("{c},{d}\n"));
                }
                let path = out.join(format!("mean_distance_{label}.csv"));
                std::fs::write(&path, csv).map_err(anyhow::Error::from)?;
                written.push(path);
            }
            AnalysisSpec::KlTable {
                gamma,
                prior_mean,
                prior_sd,
                n_full,
                ones_full,
                subset_size,
                r_values,
            } => {
                let path = out.join("kl_table.csv");
                let table = kl_table(
                    *gamma,
                    (*prior_mean, *prior_sd),
                    *n_full,
                    *ones_full,
                    *subset_size,
                    r_values,
                )?;
                std::fs::write(&path, table).map_err(anyhow::Error::from)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// KL-vs-mismatch table on grid oracles. Rows: requested r, achieved r,
/// subset one-count, KL, ratio against the best row, bound terms.
pub fn kl_table(
    gamma: f64,
    prior: (f64, f64),
    n_full: u64,
    ones_full: u64,
    n_sub: u64,
    r_values: &[f64],
) -> Result<String, CliError> {
    let p_hat = ones_full as f64 / n_full as f64;
    let targets: Vec<u64> = r_values
        .iter()
        .map(|r| {
            let ones = ((p_hat + r) * n_sub as f64).round();
            ones.clamp(0.0, n_sub as f64) as u64
        })
        .collect();

    let mut spec = probit_grid_spec(n_full, ones_full, gamma, prior, 8192);
    for &ones_sub in &targets {
        spec = spec.union(&probit_grid_spec(n_sub, ones_sub, gamma, prior, 8192));
    }
    let posterior = grid_posterior_probit(n_full, ones_full, gamma, prior, &spec)?;

    let mut rows = Vec::new();
    for (&r, &ones_sub) in r_values.iter().zip(&targets) {
        let sub = grid_posterior_probit(n_sub, ones_sub, gamma, prior, &spec)?;
        let kl = kl_on_grid(&posterior, &sub)?;
        let bound = prop1_bound(&posterior, gamma, n_full, ones_full, n_sub, ones_sub)?;
        rows.push((r, bound.xi_norm, ones_sub, kl, bound));
    }
    let base_kl = rows
        .iter()
        .map(|row| row.3)
        .fold(f64::INFINITY, f64::min);
    let mut csv = String::from("r,achieved_r,ones_sub,kl,kl_ratio,psi,b,bound\n");
    for (r, achieved, ones_sub, kl, bound) in rows {
        csv.push_str(&format!(
            "{r},{achieved},{ones_sub},{kl},{},{},{},{}\n",
            kl / base_kl,
            bound.psi,
            bound.b,
            bound.psi + bound.b
        ));
    }
    Ok(csv)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub instance: String,
    pub steps: u64,
    pub checks: Vec<OracleCheck>,
    pub pass: bool,
}

/// Enumeration-based stationarity and detailed-balance suite on the
/// default toy instance (probit, N = 8, n = 3, eps = 0.3).
///
/// `inner_steps` is the L of the transition: the kernel is stationary for
/// the data-augmented target asymptotically in L, so the joint-marginal
/// check runs the inner chain long enough to re-equilibrate after each
/// refresh.
pub fn cmd_oracle_check(
    out: &Path,
    steps: u64,
    inner_steps: u64,
) -> Result<OracleReport, CliError> {
    let gamma = 1.0;
    let prior = (0.0, 2.0);
    let (n_data, n_sub, epsilon) = (8usize, 3usize, 0.3);
    let mut data_rng = RngStream::new(7);
    let data = lwa_mcmc::models::simulate_probit(n_data, 0.5, gamma, &mut data_rng);
    let model = ProbitModel::new(gamma, prior.0, prior.1);
    let stat = make_statistic(StatisticKind::IdentityMean, &data)?;
    let nu = enumerate_nu(stat.as_ref(), &data, n_sub, epsilon)?;
    let weight = SubsetWeight::new(stat.as_ref(), &data, epsilon)?;
    let proposal = UniformSwap::new(n_data, n_sub, 1)?;
    let mut checks = Vec::new();

    // (a) enumerated weights form a distribution
    let weight_gap = (nu.weights.iter().sum::<f64>() - 1.0).abs();
    checks.push(OracleCheck {
        name: "nu_sums_to_one".into(),
        measured: weight_gap,
        tolerance: 1e-12,
        pass: weight_gap <= 1e-12,
    });

    // (b) detailed balance over all subset pairs, evaluated directly
    let mut max_violation = 0.0f64;
    for (i, u) in nu.subsets.iter().enumerate() {
        for (j, v) in nu.subsets.iter().enumerate() {
            if i == j {
                continue;
            }
            let q_f = proposal.log_prob(u, v);
            if q_f == f64::NEG_INFINITY {
                continue;
            }
            let q_b = proposal.log_prob(v, u);
            let rho_f = (q_b - q_f + nu.log_weights[j] - nu.log_weights[i]).min(0.0).exp();
            let rho_b = (q_f - q_b + nu.log_weights[i] - nu.log_weights[j]).min(0.0).exp();
            let flow = nu.weights[i] * q_f.exp() * rho_f;
            let back = nu.weights[j] * q_b.exp() * rho_b;
            max_violation = max_violation.max((flow - back).abs());
        }
    }
    checks.push(OracleCheck {
        name: "detailed_balance".into(),
        measured: max_violation,
        tolerance: 1e-10,
        pass: max_violation <= 1e-10,
    });

    // (c) subset-only chain stationarity against exact nu
    let mut rng = RngStream::new(101);
    let mut meter = CostMeter::new();
    let mut current = SubsetSelection::index_set(vec![0, 1, 2])?;
    let (_, mut logw) = weight.evaluate(&data, &current, &mut meter);
    let mut visits = vec![0u64; nu.len()];
    let index_of: std::collections::HashMap<&SubsetSelection, usize> =
        nu.subsets.iter().enumerate().map(|(i, s)| (s, i)).collect();
    for _ in 0..steps {
        let proposed = proposal.propose(&current, &mut rng);
        let (_, logw_prop) = weight.evaluate(&data, &proposed.selection, &mut meter);
        if accept_subset(logw, logw_prop, proposed.log_ratio, &mut rng) {
            current = proposed.selection;
            logw = logw_prop;
        }
        visits[index_of[&current]] += 1;
    }
    let empirical: Vec<f64> = visits.iter().map(|&v| v as f64 / steps as f64).collect();
    let subset_tv = tv_discrete(&empirical, &nu.weights)?;
    checks.push(OracleCheck {
        name: "subset_chain_tv".into(),
        measured: subset_tv,
        tolerance: 0.02,
        pass: subset_tv <= 0.02,
    });

    // (d) joint chain theta-marginal against the enumerated mixture
    let spec = probit_grid_spec(n_sub as u64, 2, gamma, prior, 4096)
        .union(&probit_grid_spec(n_sub as u64, 1, gamma, prior, 4096));
    let marginal = enumerate_marginal(&model, &data, n_sub, epsilon, stat.as_ref(), &spec)?;
    let mut rng = RngStream::new(102);
    let mut rw = RwProposal::new(&model, &RwConfig::default())?;
    let theta0 = model.sample_prior(&mut rng);
    let subset0 = SubsetSelection::index_set(vec![0, 1, 2])?;
    let (stats0, logw0) = weight.evaluate(&data, &subset0, &mut meter);
    let mut lik = model.subset_evaluator(&data, &subset0);
    let log_lik = lik(&theta0);
    let mut state = ChainState {
        log_prior: model.log_prior(&theta0),
        theta: theta0,
        subset: subset0,
        log_lik,
        log_weight: logw0,
        stats: stats0,
    };
    let mut samples = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        lwa_transition(
            &mut state,
            &model,
            &data,
            &weight,
            &proposal,
            &mut rw,
            &mut lik,
            inner_steps,
            &mut rng,
            &mut meter,
        );
        samples.push(state.theta[0]);
    }
    let joint_tv =
        tv_samples_vs_grid(&samples[(steps as usize) / 10..], &marginal, 60)?;
    checks.push(OracleCheck {
        name: "joint_marginal_tv".into(),
        measured: joint_tv,
        tolerance: 0.05,
        pass: joint_tv <= 0.05,
    });

    let pass = checks.iter().all(|c| c.pass);
    let report = OracleReport {
        instance: format!("probit N={n_data} n={n_sub} eps={epsilon} L={inner_steps}"),
        steps,
        checks,
        pass,
    };
    std::fs::create_dir_all(out).map_err(anyhow::Error::from)?;
    write_json(&out.join("oracle_report.json"), &report)?;
    Ok(report)
}
