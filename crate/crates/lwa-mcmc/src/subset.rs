//! Proposal kernels on subsets and the subset acceptance step.

use std::collections::HashSet;

use crate::data::{Dataset, Flavor, SubsetSelection};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use statrs::function::gamma::ln_gamma;

/// A proposed subset move together with the Hastings log-ratio
/// `log R(U', U) − log R(U, U')`.
#[derive(Debug, Clone)]
pub struct ProposedSubset {
    pub selection: SubsetSelection,
    pub log_ratio: f64,
}

pub trait SubsetProposal: Sync {
    fn propose(&self, current: &SubsetSelection, rng: &mut RngStream) -> ProposedSubset;

    /// Log proposal density `log R(from, to)`; used by detailed-balance
    /// oracles and the Hastings ratio.
    fn log_prob(&self, from: &SubsetSelection, to: &SubsetSelection) -> f64;
}

/// Replace `m` uniformly chosen members of the subset with `m` uniformly
/// chosen members of its complement. Symmetric, so the log-ratio is 0.
/// `m = n` refreshes the whole subset (the free-subset extreme).
#[derive(Debug, Clone)]
pub struct UniformSwap {
    n_data: usize,
    subset_size: usize,
    m: usize,
}

impl UniformSwap {
    pub fn new(n_data: usize, subset_size: usize, m: usize) -> Result<Self> {
        if m == 0 || m > subset_size {
            return Err(Error::Config(format!(
                "swap count {m} outside 1..={subset_size}"
            )));
        }
        if n_data - subset_size < m {
            return Err(Error::Config(format!(
                "complement of size {} cannot supply {m} replacements",
                n_data - subset_size
            )));
        }
        Ok(Self { n_data, subset_size, m })
    }

    /// Default replacement count: n/10, at least 1. A partial refresh keeps
    /// consecutive sub-posteriors close, supporting L = 1 inner steps.
    pub fn default_m(subset_size: usize) -> usize {
        (subset_size / 10).max(1)
    }
}

impl SubsetProposal for UniformSwap {
    fn propose(&self, current: &SubsetSelection, rng: &mut RngStream) -> ProposedSubset {
        let SubsetSelection::Indices(indices) = current else {
            panic!("uniform swap operates on index-set subsets");
        };
        debug_assert_eq!(indices.len(), self.subset_size);
        let leave = rand::seq::index::sample(rng, indices.len(), self.m);
        let leaving: HashSet<usize> = leave.iter().map(|pos| indices[pos]).collect();
        let members: HashSet<usize> = indices.iter().copied().collect();

        let mut next: Vec<usize> =
            indices.iter().copied().filter(|i| !leaving.contains(i)).collect();
        let mut entered = HashSet::new();
        while entered.len() < self.m {
            let candidate = rng.below(self.n_data);
            if !members.contains(&candidate) && entered.insert(candidate) {
                next.push(candidate);
            }
        }
        next.sort_unstable();
        ProposedSubset { selection: SubsetSelection::Indices(next), log_ratio: 0.0 }
    }

    fn log_prob(&self, from: &SubsetSelection, to: &SubsetSelection) -> f64 {
        let (SubsetSelection::Indices(a), SubsetSelection::Indices(b)) = (from, to) else {
            panic!("uniform swap operates on index-set subsets");
        };
        if a.len() != self.subset_size || b.len() != self.subset_size {
            return f64::NEG_INFINITY;
        }
        let b_set: HashSet<usize> = b.iter().copied().collect();
        let moved = a.iter().filter(|i| !b_set.contains(i)).count();
        if moved != self.m {
            return f64::NEG_INFINITY;
        }
        -(ln_choose(self.subset_size, self.m)
            + ln_choose(self.n_data - self.subset_size, self.m))
    }
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Window-start proposal: a mixture of a discrete Laplace centered at the
/// current start (weight `omega`) and a discrete Laplace centered at a
/// uniformly drawn start (weight `1 − omega`), the latter marginalized
/// analytically so the Hastings ratio is exact.
///
/// All Laplace factors are renormalized over the valid start range, keeping
/// the ratio exact near the series edges.
#[derive(Debug, Clone)]
pub struct WindowShift {
    n_starts: usize,
    window_len: usize,
    omega: f64,
    decay: f64,
    /// Marginal density of the uniform-center branch, precomputed in O(N).
    gbar: Vec<f64>,
}

impl WindowShift {
    pub fn new(n_data: usize, window_len: usize, omega: f64, lambda: f64) -> Result<Self> {
        if !(0.0 < omega && omega < 1.0) {
            return Err(Error::Config(format!("omega must lie in (0, 1), got {omega}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        if window_len == 0 || window_len > n_data {
            return Err(Error::Config(format!(
                "window length {window_len} invalid for {n_data} observations"
            )));
        }
        let n_starts = n_data - window_len + 1;
        let decay = (-lambda).exp();
        let gbar = compute_gbar(n_starts, decay);
        Ok(Self { n_starts, window_len, omega, decay, gbar })
    }

    pub fn n_starts(&self) -> usize {
        self.n_starts
    }

    /// Laplace normalizer over the valid range, centered at `c`.
    fn laplace_mass(&self, c: usize) -> f64 {
        let r = self.decay;
        let left = (1.0 - r.powi(c as i32 + 1)) / (1.0 - r);
        let right = (1.0 - r.powi((self.n_starts - c) as i32)) / (1.0 - r);
        left + right - 1.0
    }

    /// Unnormalized Laplace CDF at `y`, centered at `c`.
    fn laplace_cum(&self, c: usize, y: usize) -> f64 {
        let r = self.decay;
        if y < c {
            r.powi((c - y) as i32) * (1.0 - r.powi(y as i32 + 1)) / (1.0 - r)
        } else {
            let left = (1.0 - r.powi(c as i32 + 1)) / (1.0 - r);
            left + r * (1.0 - r.powi((y - c) as i32)) / (1.0 - r)
        }
    }

    fn laplace_density(&self, c: usize, y: usize) -> f64 {
        self.decay.powi(c.abs_diff(y) as i32) / self.laplace_mass(c)
    }

    /// Exact inverse-CDF draw from the boundary-corrected discrete Laplace.
    fn sample_laplace(&self, c: usize, rng: &mut RngStream) -> usize {
        let target = rng.uniform() * self.laplace_mass(c);
        let (mut lo, mut hi) = (0usize, self.n_starts - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.laplace_cum(c, mid) < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Marginal proposal density q(to | from) over starts.
    pub fn density(&self, from: usize, to: usize) -> f64 {
        self.omega * self.laplace_density(from, to) + (1.0 - self.omega) * self.gbar[to]
    }
}

// gbar(y) = (1/K) sum_c Lap_c(y), via forward/backward geometric recursions.
fn compute_gbar(n_starts: usize, decay: f64) -> Vec<f64> {
    let k = n_starts;
    let inv_mass: Vec<f64> = (0..k)
        .map(|c| {
            let left = (1.0 - decay.powi(c as i32 + 1)) / (1.0 - decay);
            let right = (1.0 - decay.powi((k - c) as i32)) / (1.0 - decay);
            1.0 / (left + right - 1.0)
        })
        .collect();
    let mut forward = vec![0.0; k];
    let mut backward = vec![0.0; k];
    let mut acc = 0.0;
    for y in 0..k {
        acc = acc * decay + inv_mass[y];
        forward[y] = acc;
    }
    acc = 0.0;
    for y in (0..k).rev() {
        acc = acc * decay + inv_mass[y];
        backward[y] = acc;
    }
    (0..k).map(|y| (forward[y] + backward[y] - inv_mass[y]) / k as f64).collect()
}

impl SubsetProposal for WindowShift {
    fn propose(&self, current: &SubsetSelection, rng: &mut RngStream) -> ProposedSubset {
        let SubsetSelection::Window { start, len } = current else {
            panic!("window shift operates on window subsets");
        };
        debug_assert_eq!(*len, self.window_len);
        let center = if rng.uniform() < self.omega { *start } else { rng.below(self.n_starts) };
        let next = self.sample_laplace(center, rng);
        let log_ratio = self.density(next, *start).ln() - self.density(*start, next).ln();
        ProposedSubset {
            selection: SubsetSelection::Window { start: next, len: *len },
            log_ratio,
        }
    }

    fn log_prob(&self, from: &SubsetSelection, to: &SubsetSelection) -> f64 {
        let (SubsetSelection::Window { start: a, .. }, SubsetSelection::Window { start: b, .. }) =
            (from, to)
        else {
            panic!("window shift operates on window subsets");
        };
        self.density(*a, *b).ln()
    }
}

/// Subset acceptance (steps 4–5 of the transition): accept with probability
/// `min(1, exp(log_ratio + logw_prop − logw_cur))`, spending one uniform draw.
pub fn accept_subset(
    logw_cur: f64,
    logw_prop: f64,
    log_ratio: f64,
    rng: &mut RngStream,
) -> bool {
    let log_acc = log_ratio + logw_prop - logw_cur;
    let u = rng.uniform();
    u.ln() < log_acc
}

/// Uniformly drawn selection of size `n`: an index set for i.i.d. data, a
/// window start for time series. Used for chain initialization and the
/// free-subset extreme.
pub fn uniform_selection(data: &Dataset, n: usize, rng: &mut RngStream) -> Result<SubsetSelection> {
    if n == 0 || n > data.len() {
        return Err(Error::Config(format!(
            "subset size {n} invalid for {} observations",
            data.len()
        )));
    }
    match data.flavor() {
        Flavor::TimeSeries => {
            let start = rng.below(data.len() - n + 1);
            SubsetSelection::window(start, n)
        }
        Flavor::Iid => {
            let mut indices: Vec<usize> =
                rand::seq::index::sample(rng, data.len(), n).into_iter().collect();
            indices.sort_unstable();
            Ok(SubsetSelection::Indices(indices))
        }
    }
}
