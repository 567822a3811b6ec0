//! Summary statistics, the Gaussian weight kernel, and subset weights.
//!
//! A subset U is scored by the Euclidean distance between its per-datum
//! normalized summary statistics and the full-data reference; the
//! unnormalized subset weight is the Gaussian kernel of that distance at
//! bandwidth epsilon, handled in log space throughout.

use crate::cost::CostMeter;
use crate::data::{Dataset, SubsetSelection};
use crate::error::{Error, Result};

/// Normalized summary-statistic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryVector(pub Vec<f64>);

impl SummaryVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn euclidean_distance(&self, other: &SummaryVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Per-datum normalized summary statistic S̄ₙ.
///
/// The output over the full dataset is the reference s̄_N; outputs must be
/// comparable across subset sizes (means, quantiles, correlations,
/// proportions — never raw sums).
pub trait SummaryStatistic: Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn compute_normalized(&self, data: &Dataset, subset: &SubsetSelection) -> SummaryVector;

    /// Smallest subset size the statistic is defined for.
    fn min_subset_size(&self) -> usize {
        1
    }
}

/// Unnormalized Gaussian kernel in log space: −d²/(2ε²).
///
/// Written as −½(d/ε)² so that the scaling identity
/// `gaussian_log_kernel(d, eps) == gaussian_log_kernel(d/eps, 1)` is exact.
pub fn gaussian_log_kernel(distance: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("kernel bandwidth must be positive, got {epsilon}")));
    }
    debug_assert!(distance >= 0.0);
    let t = distance / epsilon;
    Ok(-0.5 * t * t)
}

/// Euclidean distance between the subset's normalized statistics and a
/// reference vector. Charges `n` statistic touches.
pub fn stat_distance(
    stat: &dyn SummaryStatistic,
    data: &Dataset,
    subset: &SubsetSelection,
    reference: &SummaryVector,
    meter: &mut CostMeter,
) -> Result<f64> {
    let s = stat.compute_normalized(data, subset);
    meter.add_stat(subset.n() as u64);
    s.euclidean_distance(reference)
}

/// Log of the unnormalized subset weight ν (up to an additive constant
/// independent of the subset).
pub fn log_subset_weight_unnorm(
    stat: &dyn SummaryStatistic,
    data: &Dataset,
    subset: &SubsetSelection,
    epsilon: f64,
    reference: &SummaryVector,
    meter: &mut CostMeter,
) -> Result<f64> {
    let d = stat_distance(stat, data, subset, reference, meter)?;
    gaussian_log_kernel(d, epsilon)
}

/// Subset-weight evaluator with the bandwidth validated and the full-data
/// reference computed once.
pub struct SubsetWeight<'a> {
    stat: &'a dyn SummaryStatistic,
    reference: SummaryVector,
    epsilon: f64,
}

impl<'a> SubsetWeight<'a> {
    pub fn new(stat: &'a dyn SummaryStatistic, data: &Dataset, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!(
                "kernel bandwidth must be positive, got {epsilon}"
            )));
        }
        let full = SubsetSelection::window(0, data.len())?;
        let reference = stat.compute_normalized(data, &full);
        Ok(Self { stat, reference, epsilon })
    }

    pub fn reference(&self) -> &SummaryVector {
        &self.reference
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Statistics and log-weight of a subset; charges `n` statistic touches.
    pub fn evaluate(
        &self,
        data: &Dataset,
        subset: &SubsetSelection,
        meter: &mut CostMeter,
    ) -> (SummaryVector, f64) {
        let s = self.stat.compute_normalized(data, subset);
        meter.add_stat(subset.n() as u64);
        let logw = self.log_weight_of(&s);
        (s, logw)
    }

    /// Log-weight from precomputed statistics.
    pub fn log_weight_of(&self, stats: &SummaryVector) -> f64 {
        let d = stats
            .euclidean_distance(&self.reference)
            .expect("statistic dimension is fixed per definition");
        let t = d / self.epsilon;
        -0.5 * t * t
    }
}

/// Linear-interpolation quantile at position `(len − 1)·lambda` between
/// order statistics.
pub fn quantile(values: &[f64], lambda: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile of empty list".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("quantile level {lambda} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    let pos = (sorted.len() - 1) as f64 * lambda;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    // partial selection instead of a full sort
    let (_, lo_val, rest) = sorted.select_nth_unstable_by(lo, |a, b| a.total_cmp(b));
    let lo_val = *lo_val;
    if hi == lo {
        return Ok(lo_val);
    }
    let hi_val = rest.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(lo_val + (pos - lo as f64) * (hi_val - lo_val))
}

/// Sample autocorrelation at a positive lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Autocorr {
    pub value: f64,
    /// Set when the sample variance is zero; `value` is 0 in that case.
    pub degenerate: bool,
}

/// Biased (denominator-L) sample autocorrelation with mean subtraction.
pub fn autocorr(values: &[f64], lag: usize) -> Result<Autocorr> {
    if lag == 0 {
        return Err(Error::Config("autocorrelation lag must be >= 1".into()));
    }
    if values.len() <= lag {
        return Err(Error::Config(format!(
            "series length {} must exceed lag {lag}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let denom: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom == 0.0 {
        return Ok(Autocorr { value: 0.0, degenerate: true });
    }
    let num: f64 = values[..values.len() - lag]
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(Autocorr { value: num / denom, degenerate: false })
}

/// Named statistic families selectable from harness configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    /// Mean observation vector (the sufficient statistic for the probit
    /// illustration).
    IdentityMean,
    /// Quantiles (.2, .5, .8) and lag 1–5 autocorrelations; dim 8.
    ArmaS0,
    /// Lag 1–15 autocorrelations; dim 15.
    ArmaS1,
    /// (min, max); dim 2, kept unscaled — extremes do not scale with n.
    ArmaS2,
    /// Per-class proportions; dim = number of classes.
    ClassCounts,
}

/// Build a statistic for a dataset; validates labeled-data requirements.
pub fn make_statistic(
    kind: StatisticKind,
    data: &Dataset,
) -> Result<Box<dyn SummaryStatistic>> {
    match kind {
        StatisticKind::IdentityMean => Ok(Box::new(IdentityMean { dim: data.dim() })),
        StatisticKind::ArmaS0 => {
            require_univariate(data, "arma_s0")?;
            Ok(Box::new(SeriesStat { kind, dim: 8, lags: 5, name: "arma_s0" }))
        }
        StatisticKind::ArmaS1 => {
            require_univariate(data, "arma_s1")?;
            Ok(Box::new(SeriesStat { kind, dim: 15, lags: 15, name: "arma_s1" }))
        }
        StatisticKind::ArmaS2 => {
            require_univariate(data, "arma_s2")?;
            Ok(Box::new(SeriesStat { kind, dim: 2, lags: 0, name: "arma_s2" }))
        }
        StatisticKind::ClassCounts => {
            let classes = data.n_classes().ok_or_else(|| {
                Error::Config("class_counts statistic requires labeled data".into())
            })?;
            Ok(Box::new(ClassCounts { classes: classes as usize }))
        }
    }
}

/// Wrap a statistic with fixed per-component scale factors.
pub fn scaled_statistic(
    inner: Box<dyn SummaryStatistic>,
    scale: Vec<f64>,
) -> Result<Box<dyn SummaryStatistic>> {
    if scale.len() != inner.dim() {
        return Err(Error::DimensionMismatch { expected: inner.dim(), got: scale.len() });
    }
    if scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::Config("statistic scale factors must be positive".into()));
    }
    Ok(Box::new(ScaledStatistic { inner, scale }))
}

fn require_univariate(data: &Dataset, name: &str) -> Result<()> {
    if data.dim() != 1 {
        return Err(Error::Config(format!("{name} statistic requires univariate data")));
    }
    Ok(())
}

struct IdentityMean {
    dim: usize,
}

impl SummaryStatistic for IdentityMean {
    fn name(&self) -> &str {
        "identity_mean"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn compute_normalized(&self, data: &Dataset, subset: &SubsetSelection) -> SummaryVector {
        let mut acc = vec![0.0; self.dim];
        for idx in subset.iter() {
            for (a, v) in acc.iter_mut().zip(data.row(idx)) {
                *a += v;
            }
        }
        let n = subset.n() as f64;
        for a in &mut acc {
            *a /= n;
        }
        SummaryVector(acc)
    }
}

struct SeriesStat {
    kind: StatisticKind,
    dim: usize,
    lags: usize,
    name: &'static str,
}

impl SummaryStatistic for SeriesStat {
    fn name(&self) -> &str {
        self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn min_subset_size(&self) -> usize {
        self.lags + 1
    }

    fn compute_normalized(&self, data: &Dataset, subset: &SubsetSelection) -> SummaryVector {
        assert!(
            subset.n() >= self.min_subset_size(),
            "{} needs subsets of at least {} observations",
            self.name,
            self.min_subset_size()
        );
        let values: Vec<f64> = match subset {
            SubsetSelection::Window { start, len } => data.raw()[*start..*start + *len].to_vec(),
            SubsetSelection::Indices(idx) => idx.iter().map(|&i| data.value(i)).collect(),
        };
        let mut out = Vec::with_capacity(self.dim);
        if self.kind == StatisticKind::ArmaS0 {
            for lambda in [0.2, 0.5, 0.8] {
                out.push(quantile(&values, lambda).expect("non-empty window"));
            }
        }
        if self.kind == StatisticKind::ArmaS2 {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            out.push(lo);
            out.push(hi);
        } else {
            for lag in 1..=self.lags {
                out.push(autocorr(&values, lag).expect("window longer than lag").value);
            }
        }
        SummaryVector(out)
    }
}

struct ClassCounts {
    classes: usize,
}

impl SummaryStatistic for ClassCounts {
    fn name(&self) -> &str {
        "class_counts"
    }

    fn dim(&self) -> usize {
        self.classes
    }

    fn compute_normalized(&self, data: &Dataset, subset: &SubsetSelection) -> SummaryVector {
        let labels = data.labels().expect("class_counts requires labeled data");
        let mut counts = vec![0.0; self.classes];
        for idx in subset.iter() {
            counts[labels[idx] as usize] += 1.0;
        }
        let n = subset.n() as f64;
        for c in &mut counts {
            *c /= n;
        }
        SummaryVector(counts)
    }
}

struct ScaledStatistic {
    inner: Box<dyn SummaryStatistic>,
    scale: Vec<f64>,
}

impl SummaryStatistic for ScaledStatistic {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn min_subset_size(&self) -> usize {
        self.inner.min_subset_size()
    }

    fn compute_normalized(&self, data: &Dataset, subset: &SubsetSelection) -> SummaryVector {
        let mut s = self.inner.compute_normalized(data, subset);
        for (v, w) in s.0.iter_mut().zip(&self.scale) {
            *v *= w;
        }
        s
    }
}
