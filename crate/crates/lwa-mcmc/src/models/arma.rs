//! ARMA(1,1) time-series model with known innovation scale.
//!
//! Subsets are contiguous windows; the window likelihood conditions on the
//! first window value with a zero innovation at the window start, which
//! keeps the innovation recursion explicit:
//!
//! ```text
//! z_start = 0
//! mean_k  = alpha * y_{k-1} + beta * z_{k-1} + gamma
//! z_k     = y_k - mean_k
//! ```
//!
//! The first value contributes no density term.

use crate::data::{Dataset, Flavor, ParamVector, SubsetSelection};
use crate::model::Model;
use crate::rng::RngStream;

const LN_2PI: f64 = 1.8378770664093453;

/// Conditional window log-likelihood under theta = (alpha, beta, gamma).
pub fn arma_window_loglik(window: &[f64], theta: &[f64], sigma: f64) -> f64 {
    assert!(window.len() >= 2, "window must contain at least two observations");
    assert!(sigma > 0.0, "innovation scale must be positive");
    let (alpha, beta, gamma) = (theta[0], theta[1], theta[2]);
    let inv_var = 1.0 / (sigma * sigma);
    let log_norm = -0.5 * (LN_2PI + 2.0 * sigma.ln());
    let mut z_prev = 0.0;
    let mut acc = 0.0;
    for k in 1..window.len() {
        let mean = alpha * window[k - 1] + beta * z_prev + gamma;
        let z = window[k] - mean;
        acc += log_norm - 0.5 * z * z * inv_var;
        z_prev = z;
    }
    acc
}

/// ARMA(1,1) with theta = (alpha, beta, gamma) and independent Gaussian
/// priors N(0, prior_sd^2) on each coordinate.
#[derive(Debug, Clone)]
pub struct ArmaModel {
    pub sigma: f64,
    pub prior_sd: f64,
}

impl ArmaModel {
    pub fn new(sigma: f64, prior_sd: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        assert!(prior_sd > 0.0, "prior standard deviation must be positive");
        Self { sigma, prior_sd }
    }
}

impl Model for ArmaModel {
    fn param_dim(&self) -> usize {
        3
    }

    fn log_prior(&self, theta: &ParamVector) -> f64 {
        let inv = 1.0 / (self.prior_sd * self.prior_sd);
        -0.5 * inv * theta.as_slice().iter().map(|t| t * t).sum::<f64>()
            - 3.0 * self.prior_sd.ln()
    }

    fn log_lik_subset(
        &self,
        data: &Dataset,
        subset: &SubsetSelection,
        theta: &ParamVector,
    ) -> f64 {
        let SubsetSelection::Window { start, len } = subset else {
            panic!("the ARMA likelihood requires contiguous window subsets");
        };
        arma_window_loglik(&data.raw()[*start..*start + *len], theta.as_slice(), self.sigma)
    }

    fn sample_prior(&self, rng: &mut RngStream) -> ParamVector {
        ParamVector::new(
            (0..3).map(|_| self.prior_sd * rng.standard_normal()).collect(),
        )
        .expect("finite prior draw")
    }
}

/// Simulate an ARMA(1,1) path: `Y_0 ~ N(mu0.0, mu0.1^2)`, `Z_0 ~ N(0, sigma^2)`,
/// then `Y_k = alpha Y_{k-1} + beta Z_{k-1} + gamma + Z_k`.
pub fn simulate_arma(
    n: usize,
    theta_star: &[f64],
    sigma: f64,
    mu0: (f64, f64),
    rng: &mut RngStream,
) -> Dataset {
    assert!(n >= 2);
    let (alpha, beta, gamma) = (theta_star[0], theta_star[1], theta_star[2]);
    let mut values = Vec::with_capacity(n);
    let mut y = mu0.0 + mu0.1 * rng.standard_normal();
    let mut z = sigma * rng.standard_normal();
    values.push(y);
    for _ in 1..n {
        let z_next = sigma * rng.standard_normal();
        y = alpha * y + beta * z + gamma + z_next;
        z = z_next;
        values.push(y);
    }
    Dataset::univariate(values, Flavor::TimeSeries).expect("n >= 2")
}
