//! The model contract shared by all samplers and oracles.

use crate::cost::CostMeter;
use crate::data::{Dataset, ParamVector, SubsetSelection};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How a parameter coordinate moves under the random-walk proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordKind {
    /// Additive Gaussian step.
    Location,
    /// Multiplicative log-normal step (positivity-constrained scales).
    PositiveScale,
}

/// Capability bundle a likelihood model exposes to the samplers.
///
/// `log_lik_subset` over the full selection must equal the full
/// log-likelihood, and must be additive over disjoint index sets for
/// i.i.d. data.
pub trait Model: Sync {
    fn param_dim(&self) -> usize;

    fn log_prior(&self, theta: &ParamVector) -> f64;

    /// Unnormalized log-likelihood of the selected observations.
    /// Returns a non-finite value on underflow; callers decide whether
    /// that is an error (direct evaluation) or a rejection (inside a chain).
    fn log_lik_subset(&self, data: &Dataset, subset: &SubsetSelection, theta: &ParamVector)
        -> f64;

    /// Log-likelihood of a single observation; only meaningful for i.i.d.
    /// models (used by the confidence-subsampling baseline).
    fn log_lik_datum(&self, _data: &Dataset, _idx: usize, _theta: &ParamVector) -> f64 {
        unimplemented!("per-datum likelihood is only defined for i.i.d. models")
    }

    /// Upper bound on `max_k r_k - min_k r_k` for the per-datum
    /// log-likelihood ratios `r_k = log f(Y_k|b) - log f(Y_k|a)`, needed by
    /// the empirical-Bernstein stopping rule. Treated as analytic metadata:
    /// it is never charged to the cost meter, and the shipped models
    /// override it with O(1) bounds from cached data extents. The default
    /// scans the dataset exactly.
    fn log_ratio_range(&self, data: &Dataset, a: &ParamVector, b: &ParamVector) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for idx in 0..data.len() {
            let r = self.log_lik_datum(data, idx, b) - self.log_lik_datum(data, idx, a);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if lo > hi {
            0.0
        } else {
            hi - lo
        }
    }

    /// Subset-bound evaluator, used by the samplers so that per-subset work
    /// (e.g. sufficient-statistic counting) happens once per refresh instead
    /// of once per candidate.
    fn subset_evaluator<'a>(
        &'a self,
        data: &'a Dataset,
        subset: &SubsetSelection,
    ) -> Box<dyn Fn(&ParamVector) -> f64 + Sync + 'a> {
        let subset = subset.clone();
        Box::new(move |theta| self.log_lik_subset(data, &subset, theta))
    }

    /// Draw an initial parameter vector from the prior.
    fn sample_prior(&self, rng: &mut RngStream) -> ParamVector;

    fn coord_kinds(&self) -> Vec<CoordKind> {
        vec![CoordKind::Location; self.param_dim()]
    }

    /// Coordinate blocks updated jointly by the proposal; one block per
    /// transition is chosen uniformly. Default: a single block.
    fn proposal_blocks(&self) -> Vec<Vec<usize>> {
        vec![(0..self.param_dim()).collect()]
    }
}

/// Unnormalized log sub-posterior `log p(theta) + log f(Y_U | theta)`.
///
/// Charges `n` likelihood evaluations to the meter. A non-finite density is
/// reported as a `DensityUnderflow` error carrying theta and the subset.
pub fn log_sub_posterior(
    model: &dyn Model,
    data: &Dataset,
    subset: &SubsetSelection,
    theta: &ParamVector,
    meter: &mut CostMeter,
) -> Result<f64> {
    subset.validate(data.len())?;
    let lp = model.log_prior(theta);
    let ll = model.log_lik_subset(data, subset, theta);
    meter.add_lik(subset.n() as u64);
    let total = lp + ll;
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::DensityUnderflow { theta: theta.to_vec(), subset: subset.describe() })
    }
}
