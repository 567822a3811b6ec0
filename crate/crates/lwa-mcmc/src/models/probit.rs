//! Probit model with known scale: binary observations from a thresholded
//! latent Gaussian. The likelihood depends on a subset only through its
//! size and one-count, so subset evaluators run in O(1) per candidate.

use crate::data::{Dataset, Flavor, ParamVector, SubsetSelection};
use crate::model::Model;
use crate::rng::RngStream;

use statrs::distribution::{ContinuousCDF, Normal};

const LOG_FLOOR: f64 = 1e-300;

/// Success probability P(X > 0) for X ~ N(theta, gamma^2), i.e. the
/// standard normal CDF at theta/gamma.
pub fn probit_alpha(theta: f64, gamma: f64) -> f64 {
    debug_assert!(gamma > 0.0);
    Normal::standard().cdf(theta / gamma)
}

/// Log-likelihood of `ones` successes out of `n` binary observations,
/// O(1) given the counts. A success probability saturating to 0 or 1 is
/// clamped at 1e-300, keeping long runs finite.
pub fn probit_loglik(n: u64, ones: u64, theta: f64, gamma: f64) -> f64 {
    debug_assert!(ones <= n);
    let alpha = probit_alpha(theta, gamma);
    let log_a = alpha.max(LOG_FLOOR).ln();
    let log_b = (1.0 - alpha).max(LOG_FLOOR).ln();
    ones as f64 * log_a + (n - ones) as f64 * log_b
}

/// Scalar-parameter probit model: known gamma, Gaussian prior on theta.
#[derive(Debug, Clone)]
pub struct ProbitModel {
    pub gamma: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

impl ProbitModel {
    pub fn new(gamma: f64, prior_mean: f64, prior_sd: f64) -> Self {
        assert!(gamma > 0.0, "gamma must be positive");
        assert!(prior_sd > 0.0, "prior standard deviation must be positive");
        Self { gamma, prior_mean, prior_sd }
    }

    fn count_ones(data: &Dataset, subset: &SubsetSelection) -> u64 {
        subset.iter().filter(|&i| data.value(i) > 0.5).count() as u64
    }
}

impl Model for ProbitModel {
    fn param_dim(&self) -> usize {
        1
    }

    fn log_prior(&self, theta: &ParamVector) -> f64 {
        let z = (theta[0] - self.prior_mean) / self.prior_sd;
        -0.5 * z * z - self.prior_sd.ln()
    }

    fn log_lik_subset(
        &self,
        data: &Dataset,
        subset: &SubsetSelection,
        theta: &ParamVector,
    ) -> f64 {
        let ones = Self::count_ones(data, subset);
        probit_loglik(subset.n() as u64, ones, theta[0], self.gamma)
    }

    fn log_lik_datum(&self, data: &Dataset, idx: usize, theta: &ParamVector) -> f64 {
        let y = if data.value(idx) > 0.5 { 1 } else { 0 };
        probit_loglik(1, y, theta[0], self.gamma)
    }

    fn subset_evaluator<'a>(
        &'a self,
        data: &'a Dataset,
        subset: &SubsetSelection,
    ) -> Box<dyn Fn(&ParamVector) -> f64 + Sync + 'a> {
        // sufficient statistics counted once per subset
        let n = subset.n() as u64;
        let ones = Self::count_ones(data, subset);
        let gamma = self.gamma;
        Box::new(move |theta| probit_loglik(n, ones, theta[0], gamma))
    }

    fn sample_prior(&self, rng: &mut RngStream) -> ParamVector {
        ParamVector::new(vec![self.prior_mean + self.prior_sd * rng.standard_normal()])
            .expect("finite prior draw")
    }

    fn log_ratio_range(&self, data: &Dataset, a: &ParamVector, b: &ParamVector) -> f64 {
        // the ratio is linear in the binary datum: extremes at y in {0, 1}
        let (lo, hi) = data.class_coord_bounds()[0][0];
        if lo > hi {
            return 0.0;
        }
        let at = |y: u64| {
            probit_loglik(1, y, b[0], self.gamma) - probit_loglik(1, y, a[0], self.gamma)
        };
        let r_lo = at(u64::from(lo > 0.5));
        let r_hi = at(u64::from(hi > 0.5));
        (r_lo - r_hi).abs()
    }
}

/// Simulate `n` binary observations from the latent-Gaussian mechanism.
pub fn simulate_probit(n: usize, theta_star: f64, gamma: f64, rng: &mut RngStream) -> Dataset {
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let x = theta_star + gamma * rng.standard_normal();
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Dataset::univariate(values, Flavor::Iid).expect("n >= 1")
}
