//! Supervised two-class bivariate Gaussian mixture for the classification
//! benchmark. Each labeled observation is evaluated under its own class
//! density with covariance diag(sigma^2, sigma^2/2).
//!
//! Parameter packing: theta = (mu1x, mu1y, mu2x, mu2y, sigma1, sigma2),
//! proposed blockwise (one class per move) with multiplicative moves on
//! the sigmas.

use crate::data::{Dataset, Flavor, ParamVector, SubsetSelection};
use crate::model::{CoordKind, Model};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.8378770664093453;

/// Class-conditional log-density at a two-dimensional point.
fn class_log_density(point: &[f64], mu: &[f64], sigma: f64) -> f64 {
    let var_x = sigma * sigma;
    let var_y = 0.5 * sigma * sigma;
    let dx = point[0] - mu[0];
    let dy = point[1] - mu[1];
    -LN_2PI - 0.5 * (var_x * var_y).ln() - 0.5 * (dx * dx / var_x + dy * dy / var_y)
}

/// Per-coordinate prior scales: means N(0, 3^2), log sigma ~ N(0, 1).
/// Weak against the data scale while keeping prior-drawn initial states
/// inside a numerically sane region.
const MEAN_PRIOR_SD: f64 = 3.0;
const LOG_SIGMA_PRIOR_SD: f64 = 1.0;

#[derive(Debug, Clone, Default)]
pub struct GaussMixClassModel;

impl GaussMixClassModel {
    pub fn new() -> Self {
        Self
    }

    fn unpack(theta: &ParamVector) -> ([f64; 2], [f64; 2], f64, f64) {
        let t = theta.as_slice();
        ([t[0], t[1]], [t[2], t[3]], t[4], t[5])
    }

    /// Maximum-likelihood class of a test point; ties break toward the
    /// lower class index.
    pub fn classify(&self, theta: &ParamVector, point: &[f64]) -> u32 {
        let (mu1, mu2, s1, s2) = Self::unpack(theta);
        let d1 = class_log_density(point, &mu1, s1);
        let d2 = class_log_density(point, &mu2, s2);
        if d2 > d1 {
            1
        } else {
            0
        }
    }
}

impl Model for GaussMixClassModel {
    fn param_dim(&self) -> usize {
        6
    }

    fn log_prior(&self, theta: &ParamVector) -> f64 {
        let t = theta.as_slice();
        let mut lp = 0.0;
        for &m in &t[..4] {
            let z = m / MEAN_PRIOR_SD;
            lp += -0.5 * z * z - MEAN_PRIOR_SD.ln();
        }
        for &s in &t[4..6] {
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let z = s.ln() / LOG_SIGMA_PRIOR_SD;
            lp += -0.5 * z * z - LOG_SIGMA_PRIOR_SD.ln() - s.ln();
        }
        lp
    }

    fn log_lik_subset(
        &self,
        data: &Dataset,
        subset: &SubsetSelection,
        theta: &ParamVector,
    ) -> f64 {
        let labels = data.labels().expect("classification model requires labeled data");
        let (mu1, mu2, s1, s2) = Self::unpack(theta);
        if s1 <= 0.0 || s2 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut acc = 0.0;
        for idx in subset.iter() {
            let point = data.row(idx);
            acc += if labels[idx] == 0 {
                class_log_density(point, &mu1, s1)
            } else {
                class_log_density(point, &mu2, s2)
            };
        }
        acc
    }

    fn log_lik_datum(&self, data: &Dataset, idx: usize, theta: &ParamVector) -> f64 {
        let labels = data.labels().expect("classification model requires labeled data");
        let (mu1, mu2, s1, s2) = Self::unpack(theta);
        if s1 <= 0.0 || s2 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let point = data.row(idx);
        if labels[idx] == 0 {
            class_log_density(point, &mu1, s1)
        } else {
            class_log_density(point, &mu2, s2)
        }
    }

    fn sample_prior(&self, rng: &mut RngStream) -> ParamVector {
        let mut values = Vec::with_capacity(6);
        for _ in 0..4 {
            values.push(MEAN_PRIOR_SD * rng.standard_normal());
        }
        for _ in 0..2 {
            values.push((LOG_SIGMA_PRIOR_SD * rng.standard_normal()).exp());
        }
        ParamVector::new(values).expect("finite prior draw")
    }

    fn log_ratio_range(&self, data: &Dataset, a: &ParamVector, b: &ParamVector) -> f64 {
        // per-datum ratios are separable quadratics in the observation
        // coordinates; bound each class over its cached coordinate box
        let (a_mu1, a_mu2, a_s1, a_s2) = Self::unpack(a);
        let (b_mu1, b_mu2, b_s1, b_s2) = Self::unpack(b);
        if a_s1 <= 0.0 || a_s2 <= 0.0 || b_s1 <= 0.0 || b_s2 <= 0.0 {
            return f64::INFINITY;
        }
        let bounds = data.class_coord_bounds();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (class, (from, to)) in
            [((a_mu1, a_s1), (b_mu1, b_s1)), ((a_mu2, a_s2), (b_mu2, b_s2))]
                .into_iter()
                .enumerate()
        {
            let Some(class_bounds) = bounds.get(class) else { continue };
            if class_bounds[0].0 > class_bounds[0].1 {
                continue; // empty class
            }
            let ((mu_a, s_a), (mu_b, s_b)) = (from, to);
            let mut r_lo = (s_a * s_a * 0.5 * s_a * s_a).ln() * 0.5
                - (s_b * s_b * 0.5 * s_b * s_b).ln() * 0.5;
            let mut r_hi = r_lo;
            for d in 0..2 {
                let axis_factor = if d == 0 { 1.0 } else { 0.5 };
                let inv_a = 1.0 / (axis_factor * s_a * s_a);
                let inv_b = 1.0 / (axis_factor * s_b * s_b);
                let (x_lo, x_hi) = class_bounds[d];
                // g(x) = 0.5 inv_a (x - mu_a)^2 - 0.5 inv_b (x - mu_b)^2
                let g = |x: f64| {
                    0.5 * inv_a * (x - mu_a[d]) * (x - mu_a[d])
                        - 0.5 * inv_b * (x - mu_b[d]) * (x - mu_b[d])
                };
                let mut g_lo = g(x_lo).min(g(x_hi));
                let mut g_hi = g(x_lo).max(g(x_hi));
                let curvature = inv_a - inv_b;
                if curvature.abs() > 0.0 {
                    let vertex = (inv_a * mu_a[d] - inv_b * mu_b[d]) / curvature;
                    if vertex > x_lo && vertex < x_hi {
                        g_lo = g_lo.min(g(vertex));
                        g_hi = g_hi.max(g(vertex));
                    }
                }
                r_lo += g_lo;
                r_hi += g_hi;
            }
            lo = lo.min(r_lo);
            hi = hi.max(r_hi);
        }
        if lo > hi {
            0.0
        } else {
            hi - lo
        }
    }

    fn coord_kinds(&self) -> Vec<CoordKind> {
        vec![
            CoordKind::Location,
            CoordKind::Location,
            CoordKind::Location,
            CoordKind::Location,
            CoordKind::PositiveScale,
            CoordKind::PositiveScale,
        ]
    }

    fn proposal_blocks(&self) -> Vec<Vec<usize>> {
        vec![vec![0, 1, 4], vec![2, 3, 5]]
    }
}

/// Classification error of the maximum-likelihood classifier at `theta`
/// over a labeled dataset.
pub fn classification_error(model: &GaussMixClassModel, theta: &ParamVector, data: &Dataset) -> f64 {
    let labels = data.labels().expect("labeled data required");
    let errors = (0..data.len())
        .filter(|&i| model.classify(theta, data.row(i)) != labels[i])
        .count();
    errors as f64 / data.len() as f64
}

/// True-parameter vector in model packing order.
pub fn pack_params(mu1: [f64; 2], mu2: [f64; 2], sigma1: f64, sigma2: f64) -> ParamVector {
    ParamVector::new(vec![mu1[0], mu1[1], mu2[0], mu2[1], sigma1, sigma2]).unwrap()
}

/// Simulate `n` labeled points: labels Bernoulli(1/2), each point drawn from
/// its class density.
pub fn simulate_gaussmix(
    n: usize,
    mu1: [f64; 2],
    mu2: [f64; 2],
    sigma1: f64,
    sigma2: f64,
    rng: &mut RngStream,
) -> Dataset {
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let class = if rng.uniform() < 0.5 { 0u32 } else { 1u32 };
        let (mu, sigma) = if class == 0 { (&mu1, sigma1) } else { (&mu2, sigma2) };
        let x = mu[0] + sigma * rng.standard_normal();
        let y = mu[1] + sigma / std::f64::consts::SQRT_2 * rng.standard_normal();
        values.push(x);
        values.push(y);
        labels.push(class);
    }
    Dataset::new(values, 2, Some(labels), Flavor::Iid).expect("n >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn true_theta() -> ParamVector {
        pack_params([-1.0, 0.0], [1.0, 0.0], 0.25, 0.25)
    }

    #[test]
    fn density_at_class_mean() {
        // sigma = 1: -log(2 pi) - 0.5 log(1 * 0.5)
        let v = class_log_density(&[0.0, 0.0], &[0.0, 0.0], 1.0);
        let expected = -LN_2PI - 0.5 * 0.5f64.ln();
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn loglik_additivity_and_oracle() {
        let mut rng = RngStream::new(7);
        let data = simulate_gaussmix(60, [-1.0, 0.0], [1.0, 0.0], 0.25, 0.25, &mut rng);
        let model = GaussMixClassModel::new();
        let theta = true_theta();
        // brute-force per-datum oracle
        let full = SubsetSelection::window(0, 60).unwrap();
        let fast = model.log_lik_subset(&data, &full, &theta);
        let slow: f64 = (0..60).map(|i| model.log_lik_datum(&data, i, &theta)).sum();
        assert!((fast - slow).abs() < 1e-10);

        // additivity over disjoint halves
        let left = SubsetSelection::index_set((0..30).collect()).unwrap();
        let right = SubsetSelection::index_set((30..60).collect()).unwrap();
        let sum = model.log_lik_subset(&data, &left, &theta)
            + model.log_lik_subset(&data, &right, &theta);
        assert!((fast - sum).abs() < 1e-10);
    }

    #[test]
    fn classify_break_ties_toward_lower_index() {
        let model = GaussMixClassModel::new();
        let theta = true_theta();
        assert_eq!(model.classify(&theta, &[-1.0, 0.0]), 0);
        assert_eq!(model.classify(&theta, &[1.0, 0.0]), 1);
        // symmetry axis: equidistant, equal sigmas, tie
        assert_eq!(model.classify(&theta, &[0.0, 0.3]), 0);
    }

    #[test]
    fn simulation_moments() {
        let mut rng = RngStream::new(8);
        let n = 100_000;
        let data = simulate_gaussmix(n, [-1.0, 0.0], [1.0, 0.0], 0.25, 0.25, &mut rng);
        let labels = data.labels().unwrap();
        let zero_frac = labels.iter().filter(|&&l| l == 0).count() as f64 / n as f64;
        assert!((zero_frac - 0.5).abs() < 0.01);

        let class0: Vec<&[f64]> =
            (0..n).filter(|&i| labels[i] == 0).map(|i| data.row(i)).collect();
        let m = class0.len() as f64;
        let mean_x = class0.iter().map(|r| r[0]).sum::<f64>() / m;
        let mean_y = class0.iter().map(|r| r[1]).sum::<f64>() / m;
        assert!((mean_x + 1.0).abs() < 0.01);
        assert!(mean_y.abs() < 0.01);
        let var_x = class0.iter().map(|r| (r[0] - mean_x).powi(2)).sum::<f64>() / m;
        let var_y = class0.iter().map(|r| (r[1] - mean_y).powi(2)).sum::<f64>() / m;
        assert!((var_x - 0.0625).abs() < 0.1 * 0.0625, "var_x {var_x}");
        assert!((var_y - 0.03125).abs() < 0.1 * 0.03125, "var_y {var_y}");
    }

    #[test]
    fn bayes_rule_matches_measured_bayes_error() {
        let mut rng = RngStream::new(9);
        let data = simulate_gaussmix(100_000, [-1.0, 0.0], [1.0, 0.0], 0.25, 0.25, &mut rng);
        let model = GaussMixClassModel::new();
        let err = classification_error(&model, &true_theta(), &data);
        // classes 8 sigma apart: the Bayes error is a handful of points at most
        assert!(err < 1e-3, "Bayes error {err}");
    }

    #[test]
    fn prior_draw_has_positive_scales() {
        let model = GaussMixClassModel::new();
        let mut rng = RngStream::new(10);
        for _ in 0..100 {
            let theta = model.sample_prior(&mut rng);
            assert!(theta[4] > 0.0 && theta[5] > 0.0);
            assert!(model.log_prior(&theta).is_finite());
        }
    }
}
