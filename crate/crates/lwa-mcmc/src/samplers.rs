//! Transition kernels and the chain runner.
//!
//! The subset-weighted transition interleaves two decisions: refresh the
//! latent subset U through a Metropolis–Hastings step on the subset weights
//! (which never reads theta), then update theta against the sub-posterior of
//! the current subset. Exact baselines (full-data M–H, frozen and freshly
//! drawn subsets) and the confidence-subsampling baseline share the same
//! trace format and cost accounting.

use crate::cost::CostMeter;
use crate::data::{Dataset, Flavor, ParamVector, SubsetSelection};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::propose::{RwConfig, RwProposal};
use crate::rng::RngStream;
use crate::subset::{
    accept_subset, uniform_selection, SubsetProposal, UniformSwap, WindowShift,
};
use crate::summary::{SubsetWeight, SummaryStatistic, SummaryVector};

/// Current chain position with cached log-densities and subset statistics.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: ParamVector,
    pub subset: SubsetSelection,
    pub log_prior: f64,
    pub log_lik: f64,
    pub log_weight: f64,
    pub stats: SummaryVector,
}

impl ChainState {
    /// Recompute every cache and compare; used by verification passes.
    pub fn verify_caches(
        &self,
        model: &dyn Model,
        data: &Dataset,
        weight: Option<&SubsetWeight>,
        tol: f64,
    ) -> Result<()> {
        let mut scratch = CostMeter::new();
        let lp = model.log_prior(&self.theta);
        let ll = model.log_lik_subset(data, &self.subset, &self.theta);
        if (lp - self.log_prior).abs() > tol || (ll - self.log_lik).abs() > tol {
            return Err(Error::Config(format!(
                "stale density caches: prior {} vs {}, lik {} vs {}",
                self.log_prior, lp, self.log_lik, ll
            )));
        }
        if let Some(w) = weight {
            let (stats, logw) = w.evaluate(data, &self.subset, &mut scratch);
            if stats != self.stats || (logw - self.log_weight).abs() > tol {
                return Err(Error::Config("stale subset statistics cache".into()));
            }
        }
        Ok(())
    }
}

/// What happened during one transition.
#[derive(Debug, Clone, Copy)]
pub struct StepFlags {
    /// The subset proposal was accepted (controls the inner-step branch;
    /// re-accepting the current subset counts).
    pub subset_accepted: bool,
    /// The subset variable actually changed; this is what the trace's
    /// refresh flag and all reported refresh rates record.
    pub refreshed: bool,
    pub theta_accepted: bool,
    /// Distinct observations whose likelihood terms were evaluated.
    pub data_used: u64,
}

/// One Metropolis–Hastings step on theta against the sub-posterior of the
/// state's current subset. Spends `n` likelihood evaluations on the
/// candidate (the current value is cached) and one uniform draw.
///
/// Non-finite candidate densities are rejections, never errors.
pub fn mh_theta_step(
    state: &mut ChainState,
    model: &dyn Model,
    lik: &dyn Fn(&ParamVector) -> f64,
    rw: &mut RwProposal,
    rng: &mut RngStream,
    meter: &mut CostMeter,
) -> bool {
    let proposed = rw.propose(&state.theta, rng);
    let cand_prior = model.log_prior(&proposed.theta);
    let cand_lik = lik(&proposed.theta);
    meter.add_lik(state.subset.n() as u64);
    let log_acc =
        proposed.log_correction + cand_prior + cand_lik - state.log_prior - state.log_lik;
    let u = rng.uniform();
    // NaN log_acc (degenerate on both sides) compares false: reject.
    let accepted = u.ln() < log_acc;
    if accepted {
        state.theta = proposed.theta;
        state.log_prior = cand_prior;
        state.log_lik = cand_lik;
    }
    rw.adapt(proposed.block, accepted);
    accepted
}

/// One subset-weighted transition (the two-decision kernel).
///
/// Proposes a subset refresh, accepts it on the weight ratio, and then runs
/// theta steps: `inner_steps` of them against the accepted sub-posterior
/// (after re-evaluating the current theta there), or exactly one when the
/// proposal was rejected. The subset decision never reads theta.
///
/// Cost: `n` statistic touches always, plus `n` likelihood evaluations
/// on a rejection or `(inner_steps + 1) * n` on an acceptance.
#[allow(clippy::too_many_arguments)]
pub fn lwa_transition<'a>(
    state: &mut ChainState,
    model: &'a dyn Model,
    data: &'a Dataset,
    weight: &SubsetWeight,
    subset_proposal: &dyn SubsetProposal,
    rw: &mut RwProposal,
    lik: &mut Box<dyn Fn(&ParamVector) -> f64 + Sync + 'a>,
    inner_steps: u64,
    rng: &mut RngStream,
    meter: &mut CostMeter,
) -> StepFlags {
    let n = state.subset.n() as u64;
    let proposed = subset_proposal.propose(&state.subset, rng);
    let (cand_stats, cand_logw) = weight.evaluate(data, &proposed.selection, meter);
    let changed = proposed.selection != state.subset;
    let subset_accepted =
        accept_subset(state.log_weight, cand_logw, proposed.log_ratio, rng);

    let mut theta_accepted = false;
    if subset_accepted {
        state.subset = proposed.selection;
        state.stats = cand_stats;
        state.log_weight = cand_logw;
        *lik = model.subset_evaluator(data, &state.subset);
        // the current theta must be re-evaluated under the accepted subset
        state.log_lik = lik(&state.theta);
        meter.add_lik(n);
        for _ in 0..inner_steps {
            theta_accepted |= mh_theta_step(state, model, lik.as_ref(), rw, rng, meter);
        }
    } else {
        theta_accepted = mh_theta_step(state, model, lik.as_ref(), rw, rng, meter);
    }
    StepFlags {
        subset_accepted,
        refreshed: subset_accepted && changed,
        theta_accepted,
        data_used: n,
    }
}

/// Full-data Metropolis–Hastings baseline: a theta step with U fixed to the
/// whole dataset, costing `N` likelihood evaluations per transition.
pub fn full_mh_transition(
    state: &mut ChainState,
    model: &dyn Model,
    lik: &dyn Fn(&ParamVector) -> f64,
    rw: &mut RwProposal,
    rng: &mut RngStream,
    meter: &mut CostMeter,
) -> bool {
    mh_theta_step(state, model, lik, rw, rng, meter)
}

/// Confidence-subsampling baseline parameters: decisions agree with the
/// exact M–H decision with probability `1 − delta`; stage `l` adds
/// `batch_base * l` fresh observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhSubLhdParams {
    pub delta: f64,
    pub batch_base: usize,
}

impl Default for MhSubLhdParams {
    fn default() -> Self {
        Self { delta: 0.1, batch_base: 1000 }
    }
}

impl MhSubLhdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if self.batch_base == 0 {
            return Err(Error::Config("batch base must be positive".into()));
        }
        Ok(())
    }
}

/// One transition of the sequential-test M–H approximation for i.i.d.
/// models: batches of per-datum log-likelihood ratios are drawn without
/// replacement until an empirical-Bernstein interval at overall level
/// `delta` (stage l gets delta / (l (l + 1))) excludes the rewritten M–H
/// threshold, or the whole dataset has been consumed (exact decision).
/// The range term uses the model's analytic log-ratio bound.
///
/// `delta >= 1` short-circuits to a first-batch decision.
///
/// Returns the acceptance flag and the number of observations used.
#[allow(clippy::too_many_arguments)]
pub fn mhsublhd_transition(
    theta: &mut ParamVector,
    log_prior: &mut f64,
    model: &dyn Model,
    data: &Dataset,
    rw: &mut RwProposal,
    params: &MhSubLhdParams,
    pool: &mut [usize],
    rng: &mut RngStream,
    meter: &mut CostMeter,
) -> (bool, u64) {
    let n_data = data.len();
    debug_assert_eq!(pool.len(), n_data);
    let proposed = rw.propose(theta, rng);
    let cand_prior = model.log_prior(&proposed.theta);
    let u = rng.uniform();
    // M-H decision rewritten per datum: accept iff mean log-ratio > psi
    let psi =
        (u.ln() - proposed.log_correction - (cand_prior - *log_prior)) / n_data as f64;
    let range = model.log_ratio_range(data, theta, &proposed.theta);

    let mut drawn = 0usize;
    let mut mean = 0.0f64;
    let mut sq_dev = 0.0f64; // Welford accumulator
    let mut stage = 0usize;
    let accepted = loop {
        stage += 1;
        let batch = (params.batch_base * stage).min(n_data - drawn);
        for j in drawn..drawn + batch {
            let pick = j + rng.below(n_data - j);
            pool.swap(j, pick);
            let idx = pool[j];
            let ratio = model.log_lik_datum(data, idx, &proposed.theta)
                - model.log_lik_datum(data, idx, theta);
            meter.add_lik(2);
            let delta = ratio - mean;
            mean += delta / (j + 1) as f64;
            sq_dev += delta * (ratio - mean);
        }
        drawn += batch;
        if drawn == n_data {
            break mean > psi; // exact decision
        }
        let halfwidth = if params.delta >= 1.0 {
            0.0
        } else {
            let t = drawn as f64;
            let stage_delta = params.delta / (stage * (stage + 1)) as f64;
            let log_term = (3.0 / stage_delta).ln();
            let sd = (sq_dev / t).max(0.0).sqrt();
            sd * (2.0 * log_term / t).sqrt() + 3.0 * range * log_term / t
        };
        if (mean - psi).abs() > halfwidth {
            break mean > psi;
        }
    };

    if accepted {
        *theta = proposed.theta;
        *log_prior = cand_prior;
    }
    rw.adapt(proposed.block, accepted);
    (accepted, drawn as u64)
}

/// Per-transition record. Counters are cumulative from chain start (the
/// initial subset evaluation included).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub lik_evals: u64,
    pub stat_touches: u64,
    pub data_used: u64,
    pub theta: Vec<f64>,
    pub accepted_theta: bool,
    pub refreshed_subset: bool,
}

impl TraceRow {
    /// Combined cost units at the end of this transition.
    pub fn cost(&self) -> u64 {
        self.lik_evals + self.stat_touches
    }
}

/// Full per-iteration record of a chain; burn-in is applied only at
/// analysis time.
#[derive(Debug, Clone)]
pub struct Trace {
    pub param_dim: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn post_burn_in(&self, burn_in: u64) -> Result<&[TraceRow]> {
        let skip = usize::try_from(burn_in).unwrap_or(usize::MAX);
        if skip >= self.rows.len() {
            return Err(Error::EmptyInput(format!(
                "burn-in {} leaves no rows out of {}",
                burn_in,
                self.rows.len()
            )));
        }
        Ok(&self.rows[skip..])
    }

    pub fn refresh_rate(&self, burn_in: u64) -> Result<f64> {
        let rows = self.post_burn_in(burn_in)?;
        Ok(rows.iter().filter(|r| r.refreshed_subset).count() as f64 / rows.len() as f64)
    }

    pub fn acceptance_rate(&self, burn_in: u64) -> Result<f64> {
        let rows = self.post_burn_in(burn_in)?;
        Ok(rows.iter().filter(|r| r.accepted_theta).count() as f64 / rows.len() as f64)
    }

    pub fn posterior_mean(&self, burn_in: u64) -> Result<Vec<f64>> {
        let rows = self.post_burn_in(burn_in)?;
        let mut mean = vec![0.0; self.param_dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(&row.theta) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= rows.len() as f64;
        }
        Ok(mean)
    }

    pub fn posterior_sd(&self, burn_in: u64) -> Result<Vec<f64>> {
        let rows = self.post_burn_in(burn_in)?;
        let mean = self.posterior_mean(burn_in)?;
        let mut var = vec![0.0; self.param_dim];
        for row in rows {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(&row.theta) {
                *v += (x - m) * (x - m);
            }
        }
        for v in &mut var {
            *v = (*v / rows.len() as f64).sqrt();
        }
        Ok(var)
    }

    /// (likelihood evaluations, statistic touches) at the end of the run.
    pub fn total_cost(&self) -> (u64, u64) {
        self.rows.last().map_or((0, 0), |r| (r.lik_evals, r.stat_touches))
    }
}

/// Stopping rule: a transition count or a combined cost-unit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    CostUnits(u64),
}

impl Budget {
    fn validate(&self) -> Result<()> {
        match self {
            Budget::Iterations(0) => Err(Error::Config("iteration budget must be > 0".into())),
            Budget::CostUnits(0) => Err(Error::Config("cost budget must be > 0".into())),
            _ => Ok(()),
        }
    }

    fn exhausted(&self, iteration: u64, meter: &CostMeter) -> bool {
        match *self {
            Budget::Iterations(k) => iteration >= k,
            Budget::CostUnits(c) => meter.total() >= c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Lwa,
    FullMh,
    MhSubLhd,
    FixedSubset,
    FreeSubset,
}

/// Subset proposal selection for the runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubsetProposalConfig {
    /// Partial refresh of an index set; `None` uses max(1, n/10) replacements.
    UniformSwap { m: Option<usize> },
    /// Discrete-Laplace window move mixed with uniform-centered jumps.
    WindowShift { omega: f64, lambda: f64 },
}

impl Default for SubsetProposalConfig {
    fn default() -> Self {
        SubsetProposalConfig::WindowShift { omega: 0.9, lambda: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subset_size: usize,
    pub epsilon: f64,
    /// Inner theta steps after a subset refresh (L).
    pub inner_steps: u64,
    pub budget: Budget,
    pub subset_proposal: SubsetProposalConfig,
    pub rw: RwConfig,
    pub mhsublhd: MhSubLhdParams,
}

impl RunConfig {
    pub fn new(subset_size: usize, epsilon: f64, budget: Budget) -> Self {
        Self {
            subset_size,
            epsilon,
            inner_steps: 1,
            budget,
            subset_proposal: SubsetProposalConfig::default(),
            rw: RwConfig::default(),
            mhsublhd: MhSubLhdParams::default(),
        }
    }
}

/// Run one chain to its budget and record the full trace.
pub fn run_chain(
    kind: SamplerKind,
    config: &RunConfig,
    model: &dyn Model,
    data: &Dataset,
    stat: Option<&dyn SummaryStatistic>,
    rng: &mut RngStream,
) -> Result<Trace> {
    config.budget.validate()?;
    config.rw.validate()?;
    let n_data = data.len();
    let n = config.subset_size;
    if kind != SamplerKind::FullMh && kind != SamplerKind::MhSubLhd && (n == 0 || n > n_data) {
        return Err(Error::Config(format!(
            "subset size {n} invalid for {n_data} observations"
        )));
    }
    if config.inner_steps == 0 {
        return Err(Error::Config("inner step count L must be >= 1".into()));
    }

    let mut meter = CostMeter::new();
    let mut rw = RwProposal::new(model, &config.rw)?;
    let theta0 = model.sample_prior(rng);
    let mut rows = Vec::new();
    let dim = model.param_dim();

    match kind {
        SamplerKind::Lwa => {
            let stat = stat.ok_or_else(|| {
                Error::Config("the subset-weighted sampler requires a summary statistic".into())
            })?;
            if n < stat.min_subset_size() {
                return Err(Error::Config(format!(
                    "statistic {} needs subsets of at least {} observations",
                    stat.name(),
                    stat.min_subset_size()
                )));
            }
            let weight = SubsetWeight::new(stat, data, config.epsilon)?;
            let (proposal, subset0): (Box<dyn SubsetProposal>, SubsetSelection) =
                match config.subset_proposal {
                    SubsetProposalConfig::UniformSwap { m } => {
                        let m = m.unwrap_or_else(|| UniformSwap::default_m(n));
                        let swap = UniformSwap::new(n_data, n, m)?;
                        let init = {
                            let mut idx: Vec<usize> =
                                rand::seq::index::sample(rng, n_data, n).into_iter().collect();
                            idx.sort_unstable();
                            SubsetSelection::Indices(idx)
                        };
                        (Box::new(swap), init)
                    }
                    SubsetProposalConfig::WindowShift { omega, lambda } => {
                        let shift = WindowShift::new(n_data, n, omega, lambda)?;
                        let start = rng.below(n_data - n + 1);
                        (Box::new(shift), SubsetSelection::window(start, n)?)
                    }
                };
            let (stats0, logw0) = weight.evaluate(data, &subset0, &mut meter);
            let mut lik = model.subset_evaluator(data, &subset0);
            let log_lik = lik(&theta0);
            meter.add_lik(n as u64);
            let mut state = ChainState {
                log_prior: model.log_prior(&theta0),
                theta: theta0,
                subset: subset0,
                log_lik,
                log_weight: logw0,
                stats: stats0,
            };
            let mut iteration = 0;
            while !config.budget.exhausted(iteration, &meter) {
                iteration += 1;
                let flags = lwa_transition(
                    &mut state,
                    model,
                    data,
                    &weight,
                    proposal.as_ref(),
                    &mut rw,
                    &mut lik,
                    config.inner_steps,
                    rng,
                    &mut meter,
                );
                rows.push(make_row(iteration, &meter, &state.theta, flags));
            }
        }
        SamplerKind::FullMh | SamplerKind::FixedSubset => {
            let subset = if kind == SamplerKind::FullMh {
                SubsetSelection::window(0, n_data)?
            } else {
                uniform_selection(data, n, rng)?
            };
            let used = subset.n() as u64;
            let lik = model.subset_evaluator(data, &subset);
            let log_lik = lik(&theta0);
            meter.add_lik(used);
            let mut state = ChainState {
                log_prior: model.log_prior(&theta0),
                theta: theta0,
                subset,
                log_lik,
                log_weight: 0.0,
                stats: SummaryVector(vec![]),
            };
            let mut iteration = 0;
            while !config.budget.exhausted(iteration, &meter) {
                iteration += 1;
                let accepted =
                    mh_theta_step(&mut state, model, lik.as_ref(), &mut rw, rng, &mut meter);
                let flags = StepFlags {
                    subset_accepted: false,
                    refreshed: false,
                    theta_accepted: accepted,
                    data_used: used,
                };
                rows.push(make_row(iteration, &meter, &state.theta, flags));
            }
        }
        SamplerKind::FreeSubset => {
            let subset0 = uniform_selection(data, n, rng)?;
            let mut lik = model.subset_evaluator(data, &subset0);
            let log_lik = lik(&theta0);
            meter.add_lik(n as u64);
            let mut state = ChainState {
                log_prior: model.log_prior(&theta0),
                theta: theta0,
                subset: subset0,
                log_lik,
                log_weight: 0.0,
                stats: SummaryVector(vec![]),
            };
            let mut iteration = 0;
            while !config.budget.exhausted(iteration, &meter) {
                iteration += 1;
                state.subset = uniform_selection(data, n, rng)?;
                lik = model.subset_evaluator(data, &state.subset);
                state.log_lik = lik(&state.theta);
                meter.add_lik(n as u64);
                let accepted =
                    mh_theta_step(&mut state, model, lik.as_ref(), &mut rw, rng, &mut meter);
                let flags = StepFlags {
                    subset_accepted: true,
                    refreshed: true,
                    theta_accepted: accepted,
                    data_used: n as u64,
                };
                rows.push(make_row(iteration, &meter, &state.theta, flags));
            }
        }
        SamplerKind::MhSubLhd => {
            if data.flavor() != Flavor::Iid {
                return Err(Error::Config(
                    "the confidence-subsampling baseline requires i.i.d. data".into(),
                ));
            }
            config.mhsublhd.validate()?;
            let mut theta = theta0;
            let mut log_prior = model.log_prior(&theta);
            let mut pool: Vec<usize> = (0..n_data).collect();
            let mut iteration = 0;
            while !config.budget.exhausted(iteration, &meter) {
                iteration += 1;
                let (accepted, used) = mhsublhd_transition(
                    &mut theta,
                    &mut log_prior,
                    model,
                    data,
                    &mut rw,
                    &config.mhsublhd,
                    &mut pool,
                    rng,
                    &mut meter,
                );
                let flags = StepFlags {
                    subset_accepted: false,
                    refreshed: false,
                    theta_accepted: accepted,
                    data_used: used,
                };
                rows.push(make_row(iteration, &meter, &theta, flags));
            }
        }
    }

    Ok(Trace { param_dim: dim, rows })
}

fn make_row(iteration: u64, meter: &CostMeter, theta: &ParamVector, flags: StepFlags) -> TraceRow {
    TraceRow {
        iteration,
        lik_evals: meter.lik_evals,
        stat_touches: meter.stat_touches,
        data_used: flags.data_used,
        theta: theta.to_vec(),
        accepted_theta: flags.theta_accepted,
        refreshed_subset: flags.refreshed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoordKind;
    use crate::summary::{make_statistic, StatisticKind};

    /// Standard normal target expressed through the prior; likelihood 0.
    struct StdNormalTarget;

    impl Model for StdNormalTarget {
        fn param_dim(&self) -> usize {
            1
        }
        fn log_prior(&self, theta: &ParamVector) -> f64 {
            -0.5 * theta[0] * theta[0]
        }
        fn log_lik_subset(&self, _: &Dataset, _: &SubsetSelection, _: &ParamVector) -> f64 {
            0.0
        }
        fn log_lik_datum(&self, _: &Dataset, _: usize, _: &ParamVector) -> f64 {
            0.0
        }
        fn sample_prior(&self, rng: &mut RngStream) -> ParamVector {
            ParamVector::new(vec![rng.standard_normal()]).unwrap()
        }
    }

    fn dummy_data(n: usize) -> Dataset {
        Dataset::univariate(
            (0..n).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect(),
            Flavor::Iid,
        )
        .unwrap()
    }

    fn toy_state(model: &dyn Model, data: &Dataset, subset: SubsetSelection) -> ChainState {
        let theta = ParamVector::new(vec![0.1]).unwrap();
        let log_lik = model.log_lik_subset(data, &subset, &theta);
        ChainState {
            log_prior: model.log_prior(&theta),
            theta,
            log_lik,
            subset,
            log_weight: 0.0,
            stats: SummaryVector(vec![]),
        }
    }

    #[test]
    fn zero_scale_proposal_always_accepts() {
        let model = StdNormalTarget;
        let data = dummy_data(4);
        let subset = SubsetSelection::window(0, 4).unwrap();
        let mut state = toy_state(&model, &data, subset.clone());
        let before = state.theta.clone();
        let mut rw = RwProposal::new(
            &model,
            &RwConfig { initial_scale: 1e-300, adapt: None },
        )
        .unwrap();
        let lik = model.subset_evaluator(&data, &subset);
        let mut rng = RngStream::new(1);
        let mut meter = CostMeter::new();
        for _ in 0..100 {
            assert!(mh_theta_step(&mut state, &model, lik.as_ref(), &mut rw, &mut rng, &mut meter));
        }
        assert!((state.theta[0] - before[0]).abs() < 1e-290);
        assert_eq!(meter.lik_evals, 400);
    }

    #[test]
    fn dominating_candidate_is_accepted() {
        // make the current density essentially zero: any finite candidate wins
        let model = StdNormalTarget;
        let data = dummy_data(4);
        let subset = SubsetSelection::window(0, 4).unwrap();
        let mut state = toy_state(&model, &data, subset.clone());
        state.log_lik = f64::NEG_INFINITY;
        let mut rw = RwProposal::new(&model, &RwConfig::default()).unwrap();
        let lik = model.subset_evaluator(&data, &subset);
        let mut rng = RngStream::new(2);
        let mut meter = CostMeter::new();
        assert!(mh_theta_step(&mut state, &model, lik.as_ref(), &mut rw, &mut rng, &mut meter));
        assert!(state.log_lik.is_finite());
    }

    /// Subset proposal that always re-proposes the current subset.
    struct StayProposal;

    impl SubsetProposal for StayProposal {
        fn propose(&self, current: &SubsetSelection, _: &mut RngStream) -> crate::subset::ProposedSubset {
            crate::subset::ProposedSubset { selection: current.clone(), log_ratio: 0.0 }
        }
        fn log_prob(&self, _: &SubsetSelection, to: &SubsetSelection) -> f64 {
            let _ = to;
            0.0
        }
    }

    #[test]
    fn transition_cost_accounting() {
        // identical re-proposal is always accepted as a refresh, exercising
        // the (L + 1) * n likelihood charge; a dominated proposal exercises
        // the no-refresh branch at n.
        let data = dummy_data(10);
        let model = StdNormalTarget;
        let stat = make_statistic(StatisticKind::IdentityMean, &data).unwrap();
        let weight = SubsetWeight::new(stat.as_ref(), &data, 0.5).unwrap();
        let subset = SubsetSelection::index_set(vec![0, 1, 2, 3]).unwrap();
        let mut meter = CostMeter::new();
        let (stats, logw) = weight.evaluate(&data, &subset, &mut meter);
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let mut lik = model.subset_evaluator(&data, &subset);
        let log_lik = lik(&theta);
        let mut state = ChainState {
            log_prior: model.log_prior(&theta),
            theta,
            subset,
            log_lik,
            log_weight: logw,
            stats,
        };
        let mut rw = RwProposal::new(&model, &RwConfig::default()).unwrap();
        let mut rng = RngStream::new(3);

        let inner_steps = 3;
        meter = CostMeter::new();
        let flags = lwa_transition(
            &mut state,
            &model,
            &data,
            &weight,
            &StayProposal,
            &mut rw,
            &mut lik,
            inner_steps,
            &mut rng,
            &mut meter,
        );
        assert!(
            flags.subset_accepted,
            "re-proposing the current subset must be accepted and run inner steps"
        );
        assert!(!flags.refreshed, "an unchanged subset is not a refresh");
        assert_eq!(meter.stat_touches, 4);
        assert_eq!(meter.lik_evals, (inner_steps + 1) * 4);

        // a swap to a much worse subset: weight gap forces a rejection
        let far = UniformSwap::new(10, 4, 4).unwrap();
        let weight_tight = SubsetWeight::new(stat.as_ref(), &data, 1e-6).unwrap();
        let (stats, logw) = {
            let mut scratch = CostMeter::new();
            weight_tight.evaluate(&data, &state.subset, &mut scratch)
        };
        state.stats = stats;
        state.log_weight = logw;
        let mut no_refresh_seen = false;
        for _ in 0..50 {
            meter = CostMeter::new();
            let flags = lwa_transition(
                &mut state,
                &model,
                &data,
                &weight_tight,
                &far,
                &mut rw,
                &mut lik,
                inner_steps,
                &mut rng,
                &mut meter,
            );
            if !flags.subset_accepted {
                no_refresh_seen = true;
                assert_eq!(meter.stat_touches, 4);
                assert_eq!(meter.lik_evals, 4);
            }
        }
        assert!(no_refresh_seen);
    }

    #[test]
    fn huge_bandwidth_accepts_every_subset_proposal() {
        // flat weights: acceptance reduces to min(1, exp(log_ratio)),
        // which is 1 for the symmetric swap
        let data = dummy_data(20);
        let model = StdNormalTarget;
        let stat = make_statistic(StatisticKind::IdentityMean, &data).unwrap();
        let weight = SubsetWeight::new(stat.as_ref(), &data, 1e12).unwrap();
        let swap = UniformSwap::new(20, 5, 2).unwrap();
        let subset = SubsetSelection::index_set(vec![0, 1, 2, 3, 4]).unwrap();
        let mut meter = CostMeter::new();
        let (stats, logw) = weight.evaluate(&data, &subset, &mut meter);
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let mut lik = model.subset_evaluator(&data, &subset);
        let log_lik = lik(&theta);
        let mut state = ChainState {
            log_prior: model.log_prior(&theta),
            theta,
            subset,
            log_lik,
            log_weight: logw,
            stats,
        };
        let mut rw = RwProposal::new(&model, &RwConfig::default()).unwrap();
        let mut rng = RngStream::new(10);
        for _ in 0..200 {
            let flags = lwa_transition(
                &mut state,
                &model,
                &data,
                &weight,
                &swap,
                &mut rw,
                &mut lik,
                1,
                &mut rng,
                &mut meter,
            );
            assert!(flags.subset_accepted);
            assert!(flags.refreshed);
        }
    }

    #[test]
    fn run_chain_is_deterministic() {
        let data = dummy_data(40);
        let model = StdNormalTarget;
        let stat = make_statistic(StatisticKind::IdentityMean, &data).unwrap();
        let config = RunConfig {
            subset_proposal: SubsetProposalConfig::UniformSwap { m: None },
            ..RunConfig::new(8, 0.2, Budget::Iterations(500))
        };
        let run = || {
            let mut rng = RngStream::with_stream(77, 3);
            run_chain(SamplerKind::Lwa, &config, &model, &data, Some(stat.as_ref()), &mut rng)
                .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn cost_budget_stops_the_chain() {
        let data = dummy_data(30);
        let model = StdNormalTarget;
        let config = RunConfig::new(30, 1.0, Budget::CostUnits(900));
        let mut rng = RngStream::new(5);
        let trace =
            run_chain(SamplerKind::FullMh, &config, &model, &data, None, &mut rng).unwrap();
        // initialization charges N = 30, then 30 per transition
        assert_eq!(trace.len(), 29);
        assert_eq!(trace.total_cost().0, 900);
    }

    #[test]
    fn fixed_and_free_extremes_have_exact_refresh_rates() {
        let data = dummy_data(30);
        let model = StdNormalTarget;
        let config = RunConfig::new(5, 1.0, Budget::Iterations(200));
        let mut rng = RngStream::new(6);
        let fixed = run_chain(
            SamplerKind::FixedSubset,
            &config,
            &model,
            &data,
            None,
            &mut rng,
        )
        .unwrap();
        assert_eq!(fixed.refresh_rate(0).unwrap(), 0.0);
        let free =
            run_chain(SamplerKind::FreeSubset, &config, &model, &data, None, &mut rng).unwrap();
        assert_eq!(free.refresh_rate(0).unwrap(), 1.0);
        // free subset costs 2n likelihood evaluations per transition
        let (lik, stats) = free.total_cost();
        assert_eq!(stats, 0);
        assert_eq!(lik, 5 + 200 * 10);
    }

    #[test]
    fn budget_validation() {
        let data = dummy_data(10);
        let model = StdNormalTarget;
        let config = RunConfig::new(5, 1.0, Budget::Iterations(0));
        let mut rng = RngStream::new(7);
        assert!(run_chain(SamplerKind::FullMh, &config, &model, &data, None, &mut rng).is_err());
    }

    /// Model whose per-datum log-likelihood is identical across data.
    struct ConstantRatio;

    impl Model for ConstantRatio {
        fn param_dim(&self) -> usize {
            1
        }
        fn log_prior(&self, _: &ParamVector) -> f64 {
            0.0
        }
        fn log_lik_subset(
            &self,
            _: &Dataset,
            subset: &SubsetSelection,
            theta: &ParamVector,
        ) -> f64 {
            subset.n() as f64 * theta[0]
        }
        fn log_lik_datum(&self, _: &Dataset, _: usize, theta: &ParamVector) -> f64 {
            theta[0]
        }
        fn sample_prior(&self, _: &mut RngStream) -> ParamVector {
            ParamVector::new(vec![0.0]).unwrap()
        }
        fn coord_kinds(&self) -> Vec<CoordKind> {
            vec![CoordKind::Location]
        }
    }

    #[test]
    fn mhsublhd_zero_variance_stops_after_first_batch() {
        let data = dummy_data(100);
        let model = ConstantRatio;
        let mut theta = ParamVector::new(vec![0.0]).unwrap();
        let mut log_prior = 0.0;
        let mut rw = RwProposal::new(&model, &RwConfig { initial_scale: 0.5, adapt: None }).unwrap();
        let params = MhSubLhdParams { delta: 0.1, batch_base: 10 };
        let mut pool: Vec<usize> = (0..100).collect();
        let mut rng = RngStream::new(8);
        let mut meter = CostMeter::new();
        for _ in 0..20 {
            let (_, used) = mhsublhd_transition(
                &mut theta,
                &mut log_prior,
                &model,
                &data,
                &mut rw,
                &params,
                &mut pool,
                &mut rng,
                &mut meter,
            );
            assert_eq!(used, 10, "zero-variance ratios must decide on the first batch");
        }
    }

    #[test]
    fn mhsublhd_delta_one_decides_after_first_batch() {
        // a target with real per-datum variation, always-confident limit
        struct Spread;
        impl Model for Spread {
            fn param_dim(&self) -> usize {
                1
            }
            fn log_prior(&self, _: &ParamVector) -> f64 {
                0.0
            }
            fn log_lik_subset(
                &self,
                data: &Dataset,
                subset: &SubsetSelection,
                theta: &ParamVector,
            ) -> f64 {
                subset.iter().map(|i| self.log_lik_datum(data, i, theta)).sum()
            }
            fn log_lik_datum(&self, data: &Dataset, idx: usize, theta: &ParamVector) -> f64 {
                let y = data.value(idx);
                -0.5 * (y - theta[0]) * (y - theta[0])
            }
            fn sample_prior(&self, _: &mut RngStream) -> ParamVector {
                ParamVector::new(vec![0.0]).unwrap()
            }
        }
        let data = dummy_data(200);
        let model = Spread;
        let mut theta = ParamVector::new(vec![0.3]).unwrap();
        let mut log_prior = 0.0;
        let mut rw = RwProposal::new(&model, &RwConfig { initial_scale: 0.5, adapt: None }).unwrap();
        let params = MhSubLhdParams { delta: 1.0, batch_base: 25 };
        let mut pool: Vec<usize> = (0..200).collect();
        let mut rng = RngStream::new(9);
        let mut meter = CostMeter::new();
        for _ in 0..20 {
            let (_, used) = mhsublhd_transition(
                &mut theta,
                &mut log_prior,
                &model,
                &data,
                &mut rw,
                &params,
                &mut pool,
                &mut rng,
                &mut meter,
            );
            assert_eq!(used, 25);
        }
    }
}
