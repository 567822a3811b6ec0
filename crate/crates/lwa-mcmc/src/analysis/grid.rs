//! One-dimensional grid densities and divergences, used as deterministic
//! oracles for posterior comparisons.

use crate::error::{Error, Result};
use crate::models::{probit_alpha, probit_loglik};

use statrs::distribution::{ContinuousCDF, Normal};

/// Uniform 1-D grid specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("invalid grid bounds [{lo}, {hi}]")));
        }
        if count < 256 {
            return Err(Error::Config(format!("grid needs at least 256 points, got {count}")));
        }
        Ok(Self { lo, hi, count })
    }

    /// Smallest grid covering both operands, at the larger point count.
    pub fn union(&self, other: &GridSpec) -> GridSpec {
        GridSpec {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
            count: self.count.max(other.count),
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }

    fn widened(&self, factor: f64) -> GridSpec {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo) * factor;
        GridSpec { lo: mid - half, hi: mid + half, count: self.count }
    }
}

/// Log-density values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    spec: GridSpec,
    log_values: Vec<f64>,
    normalized: bool,
}

impl GridDensity {
    pub fn from_log_fn(spec: &GridSpec, f: impl Fn(f64) -> f64) -> Result<GridDensity> {
        GridSpec::new(spec.lo, spec.hi, spec.count)?;
        let log_values = (0..spec.count).map(|i| f(spec.point(i))).collect();
        Ok(GridDensity { spec: *spec, log_values, normalized: false })
    }

    pub fn from_log_values(spec: &GridSpec, log_values: Vec<f64>) -> Result<GridDensity> {
        GridSpec::new(spec.lo, spec.hi, spec.count)?;
        if log_values.len() != spec.count {
            return Err(Error::DimensionMismatch {
                expected: spec.count,
                got: log_values.len(),
            });
        }
        Ok(GridDensity { spec: *spec, log_values, normalized: false })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn count(&self) -> usize {
        self.spec.count
    }

    pub fn point(&self, i: usize) -> f64 {
        self.spec.point(i)
    }

    pub fn log_value(&self, i: usize) -> f64 {
        self.log_values[i]
    }

    /// Linear-space density at grid index `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.log_values[i].exp()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Trapezoid log-integral of `exp(log_values)`.
    pub fn log_integral(&self) -> f64 {
        let max = self.log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut sum = 0.0;
        for (i, lv) in self.log_values.iter().enumerate() {
            let w = if i == 0 || i + 1 == self.spec.count { 0.5 } else { 1.0 };
            sum += w * (lv - max).exp();
        }
        max + (sum * self.spec.step()).ln()
    }

    /// Rescale so the trapezoid integral is 1.
    pub fn normalize(&mut self) {
        let log_z = self.log_integral();
        assert!(
            log_z.is_finite(),
            "cannot normalize a density with zero or non-finite mass"
        );
        for lv in &mut self.log_values {
            *lv -= log_z;
        }
        self.normalized = true;
    }

    /// Trapezoid integral of `g(theta) * density(theta)`.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        debug_assert!(self.normalized);
        let h = self.spec.step();
        let mut sum = 0.0;
        for i in 0..self.spec.count {
            let w = if i == 0 || i + 1 == self.spec.count { 0.5 } else { 1.0 };
            sum += w * g(self.spec.point(i)) * self.value(i);
        }
        sum * h
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|t| t)
    }

    pub fn sd(&self) -> f64 {
        let mean = self.mean();
        self.expectation(|t| (t - mean) * (t - mean)).max(0.0).sqrt()
    }

    /// Probability mass of the first and last trapezoid cell.
    pub fn boundary_mass(&self) -> f64 {
        let h = self.spec.step();
        let k = self.spec.count;
        let first = 0.5 * h * (self.value(0) + self.value(1));
        let last = 0.5 * h * (self.value(k - 2) + self.value(k - 1));
        first + last
    }

    fn same_grid(&self, other: &GridDensity) -> Result<()> {
        let a = &self.spec;
        let b = &other.spec;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
        if a.count != b.count || !close(a.lo, b.lo) || !close(a.hi, b.hi) {
            return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
        }
        Ok(())
    }
}

/// Kullback–Leibler divergence `KL(p || q)` by trapezoid quadrature.
/// Both densities must be normalized on the same grid. Returns +inf when q
/// vanishes where p has mass.
pub fn kl_on_grid(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_grid(q)?;
    if !p.normalized || !q.normalized {
        return Err(Error::Config("KL requires normalized densities".into()));
    }
    let h = p.spec.step();
    let mut sum = 0.0;
    for i in 0..p.spec.count {
        let pv = p.value(i);
        if pv == 0.0 {
            continue;
        }
        if q.value(i) == 0.0 {
            return Ok(f64::INFINITY);
        }
        let w = if i == 0 || i + 1 == p.spec.count { 0.5 } else { 1.0 };
        sum += w * pv * (p.log_value(i) - q.log_value(i));
    }
    Ok(sum * h)
}

/// Total-variation distance `0.5 * integral |p - q|` on a shared grid.
pub fn tv_grid(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_grid(q)?;
    let h = p.spec.step();
    let mut sum = 0.0;
    for i in 0..p.spec.count {
        let w = if i == 0 || i + 1 == p.spec.count { 0.5 } else { 1.0 };
        sum += w * (p.value(i) - q.value(i)).abs();
    }
    Ok(0.5 * sum * h)
}

/// Total-variation distance between two discrete distributions on the same
/// support.
pub fn tv_discrete(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Log posterior density function for the probit counts instance.
pub fn probit_log_posterior(
    n: u64,
    ones: u64,
    gamma: f64,
    prior: (f64, f64),
) -> impl Fn(f64) -> f64 {
    move |theta| {
        let z = (theta - prior.0) / prior.1;
        -0.5 * z * z - prior.1.ln() + probit_loglik(n, ones, theta, gamma)
    }
}

/// Default grid placement for a probit counts posterior: centered near the
/// likelihood mode with a width of sixteen posterior standard deviations
/// (Fisher approximation), composed with the prior precision. Sixteen keeps
/// the boundary mass well under the 1e-10 auto-expansion threshold.
pub fn probit_grid_spec(
    n: u64,
    ones: u64,
    gamma: f64,
    prior: (f64, f64),
    count: usize,
) -> GridSpec {
    let normal = Normal::standard();
    let (center, sd) = if n == 0 {
        (prior.0, prior.1)
    } else {
        let p_hat = ((ones as f64 + 0.5) / (n as f64 + 1.0)).clamp(1e-12, 1.0 - 1e-12);
        let x = normal.inverse_cdf(p_hat);
        let mode = gamma * x;
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let alpha = probit_alpha(mode, gamma);
        let info = n as f64 * phi * phi / (gamma * gamma * alpha * (1.0 - alpha))
            + 1.0 / (prior.1 * prior.1);
        (mode, info.sqrt().recip())
    };
    let half = 8.0 * sd;
    GridSpec { lo: center - half, hi: center + half, count }
}

/// Normalized probit posterior on a grid, auto-expanding the bounds until
/// the boundary mass falls below 1e-10.
pub fn grid_posterior_probit(
    n: u64,
    ones: u64,
    gamma: f64,
    prior: (f64, f64),
    spec: &GridSpec,
) -> Result<GridDensity> {
    let f = probit_log_posterior(n, ones, gamma, prior);
    let mut spec = *spec;
    for _ in 0..32 {
        let mut density = GridDensity::from_log_fn(&spec, &f)?;
        density.normalize();
        if density.boundary_mass() < 1e-10 {
            return Ok(density);
        }
        spec = spec.widened(2.0);
    }
    Err(Error::GridTooNarrow(format!(
        "posterior mass stayed at the boundary after expanding to [{}, {}]; \
         supply a wider grid",
        spec.lo, spec.hi
    )))
}
