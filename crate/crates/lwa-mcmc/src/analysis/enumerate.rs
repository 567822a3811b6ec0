//! Exact enumeration of the subset-weight distribution and the marginal
//! mixture on toy instances. Feasible only when the number of subsets is
//! small; real-scale runs never touch these paths.

use itertools::Itertools;

use crate::analysis::grid::{GridDensity, GridSpec};
use crate::cost::CostMeter;
use crate::data::{Dataset, SubsetSelection};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::summary::{gaussian_log_kernel, stat_distance, SubsetWeight, SummaryStatistic};

/// All candidate subsets with their exact normalized weights.
#[derive(Debug, Clone)]
pub struct EnumeratedTarget {
    pub subsets: Vec<SubsetSelection>,
    pub log_weights: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnumeratedTarget {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Position of a subset in the enumeration order.
    pub fn index_of(&self, subset: &SubsetSelection) -> Option<usize> {
        self.subsets.iter().position(|s| s == subset)
    }
}

const ENUMERATION_BUDGET: u128 = 100_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > ENUMERATION_BUDGET * 1000 {
            return u128::MAX;
        }
    }
    acc
}

fn weigh_subsets(
    stat: &dyn SummaryStatistic,
    data: &Dataset,
    subsets: Vec<SubsetSelection>,
    epsilon: f64,
) -> Result<EnumeratedTarget> {
    let weight = SubsetWeight::new(stat, data, epsilon)?;
    let mut meter = CostMeter::new();
    let log_weights: Vec<f64> = subsets
        .iter()
        .map(|u| {
            let d = stat_distance(stat, data, u, weight.reference(), &mut meter)?;
            gaussian_log_kernel(d, epsilon)
        })
        .collect::<Result<_>>()?;
    // normalize by log-sum-exp
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + log_weights.iter().map(|w| (w - max).exp()).sum::<f64>().ln();
    let log_weights: Vec<f64> = log_weights.iter().map(|w| w - log_z).collect();
    let weights = log_weights.iter().map(|w| w.exp()).collect();
    Ok(EnumeratedTarget { subsets, log_weights, weights })
}

/// Exact normalized weights over all C(N, n) index sets.
pub fn enumerate_nu(
    stat: &dyn SummaryStatistic,
    data: &Dataset,
    n: usize,
    epsilon: f64,
) -> Result<EnumeratedTarget> {
    let n_data = data.len();
    if n == 0 || n > n_data {
        return Err(Error::Config(format!("subset size {n} invalid for {n_data} data")));
    }
    let count = binomial(n_data, n);
    if count > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(format!(
            "C({n_data}, {n}) = {count} exceeds the {ENUMERATION_BUDGET}-subset budget"
        )));
    }
    let subsets: Vec<SubsetSelection> = (0..n_data)
        .combinations(n)
        .map(SubsetSelection::Indices) // combinations emit sorted, distinct indices
        .collect();
    weigh_subsets(stat, data, subsets, epsilon)
}

/// Exact normalized weights over all contiguous windows of length `n`.
pub fn enumerate_windows(
    stat: &dyn SummaryStatistic,
    data: &Dataset,
    n: usize,
    epsilon: f64,
) -> Result<EnumeratedTarget> {
    let n_data = data.len();
    if n == 0 || n > n_data {
        return Err(Error::Config(format!("window length {n} invalid for {n_data} data")));
    }
    let subsets: Vec<SubsetSelection> =
        (0..=n_data - n).map(|start| SubsetSelection::Window { start, len: n }).collect();
    weigh_subsets(stat, data, subsets, epsilon)
}

/// Mixture of normalized per-subset grid sub-posteriors with given weights.
pub fn mixture_on_grid(
    model: &dyn Model,
    data: &Dataset,
    target: &EnumeratedTarget,
    spec: &GridSpec,
) -> Result<GridDensity> {
    if model.param_dim() != 1 {
        return Err(Error::Config(
            "grid mixtures are defined for one-dimensional parameters".into(),
        ));
    }
    let mut mixture = vec![0.0f64; spec.count];
    for (subset, &w) in target.subsets.iter().zip(&target.weights) {
        let f = |theta: f64| {
            let theta = crate::data::ParamVector::new(vec![theta]).expect("finite grid point");
            model.log_prior(&theta) + model.log_lik_subset(data, subset, &theta)
        };
        let mut sub = GridDensity::from_log_fn(spec, f)?;
        sub.normalize();
        for (m, i) in mixture.iter_mut().zip(0..spec.count) {
            *m += w * sub.value(i);
        }
    }
    let log_values = mixture.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let mut out = GridDensity::from_log_values(spec, log_values)?;
    out.normalize();
    Ok(out)
}

/// Exact theta-marginal of the data-augmented target: the nu-weighted
/// mixture of sub-posteriors over all C(N, n) index sets.
pub fn enumerate_marginal(
    model: &dyn Model,
    data: &Dataset,
    n: usize,
    epsilon: f64,
    stat: &dyn SummaryStatistic,
    spec: &GridSpec,
) -> Result<GridDensity> {
    let target = enumerate_nu(stat, data, n, epsilon)?;
    mixture_on_grid(model, data, &target, spec)
}
