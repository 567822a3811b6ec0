//! KL upper bound for probit sub-posteriors.
//!
//! For the probit counts instance the bound decomposes as
//! `KL(pi || pi_U) <= Psi + B(U)` with a subset-independent offset Psi and
//! a subset term B driven by the sufficient-statistic mismatch
//! `xi = ones_U/n − ones_N/N`. Both terms are evaluated in the natural
//! parameterization `eta(theta) = logit(alpha(theta))`, in which the
//! likelihood is a linear exponential family and the decomposition is an
//! identity; `B = 0` whenever the subset matches the full-data statistics
//! exactly, and B is non-decreasing in `|xi|`.

use crate::analysis::grid::GridDensity;
use crate::error::{Error, Result};
use crate::models::{probit_alpha, probit_loglik};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Bound {
    /// Subset-independent offset.
    pub psi: f64,
    /// Subset-dependent term, zero at a perfect statistic match.
    pub b: f64,
    /// Sufficient-statistic mismatch |ones_U/n − ones_N/N|.
    pub xi_norm: f64,
}

const LOG_FLOOR: f64 = 1e-300;

fn natural_param(theta: f64, gamma: f64) -> f64 {
    let alpha = probit_alpha(theta, gamma);
    alpha.max(LOG_FLOOR).ln() - (1.0 - alpha).max(LOG_FLOOR).ln()
}

fn log_normalizer(theta: f64, gamma: f64) -> f64 {
    // l(theta) = -log(1 - alpha(theta)) for the Bernoulli family written
    // as f(y|theta) = exp(y * eta(theta)) * (1 - alpha(theta))
    let alpha = probit_alpha(theta, gamma);
    -(1.0 - alpha).max(LOG_FLOOR).ln()
}

/// Evaluate (Psi, B, |xi|) on a normalized grid posterior of the full data.
pub fn prop1_bound(
    posterior: &GridDensity,
    gamma: f64,
    n_full: u64,
    ones_full: u64,
    n_sub: u64,
    ones_sub: u64,
) -> Result<Prop1Bound> {
    if !posterior.is_normalized() {
        return Err(Error::Config("the bound requires a normalized posterior".into()));
    }
    if n_sub == 0 || n_sub > n_full || ones_sub > n_sub || ones_full > n_full {
        return Err(Error::Config("inconsistent subset counts".into()));
    }
    let n = n_sub as f64;
    let n_big = n_full as f64;

    let mean_eta = posterior.expectation(|t| natural_param(t, gamma));
    let mean_log_norm = posterior.expectation(|t| log_normalizer(t, gamma));

    // infimum of the full-data likelihood over the grid
    let mut log_alpha_inf = f64::INFINITY;
    for i in 0..posterior.count() {
        let ll = probit_loglik(n_full, ones_full, posterior.point(i), gamma);
        log_alpha_inf = log_alpha_inf.min(ll);
    }

    let psi = (1.0 - n / n_big) * (mean_eta * ones_full as f64 - log_alpha_inf)
        + (n - n_big) * mean_log_norm;

    let xi = ones_sub as f64 / n - ones_full as f64 / n_big;
    let xi_norm = xi.abs();

    // B = log E_pi[ exp(n * |eta - E eta| * |xi|) ], by log-sum-exp quadrature
    let mut max_exponent = f64::NEG_INFINITY;
    let exponents: Vec<f64> = (0..posterior.count())
        .map(|i| {
            let e = posterior.log_value(i)
                + n * (natural_param(posterior.point(i), gamma) - mean_eta).abs() * xi_norm;
            max_exponent = max_exponent.max(e);
            e
        })
        .collect();
    if !max_exponent.is_finite() {
        return Err(Error::Config("overflow in the bound exponential".into()));
    }
    let mut sum = 0.0;
    for (i, e) in exponents.iter().enumerate() {
        let w = if i == 0 || i + 1 == posterior.count() { 0.5 } else { 1.0 };
        sum += w * (e - max_exponent).exp();
    }
    let step = (posterior.point(1) - posterior.point(0)).abs();
    let b = max_exponent + (sum * step).ln();
    if !b.is_finite() {
        return Err(Error::Config("non-finite bound term".into()));
    }
    // clamp quadrature noise: the term is >= 0 by Jensen
    Ok(Prop1Bound { psi, b: b.max(0.0), xi_norm })
}
