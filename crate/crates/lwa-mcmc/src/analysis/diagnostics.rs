//! Trace diagnostics: refresh rates, running-mean distance curves,
//! sample-vs-grid comparisons and the classification cost race.

use crate::analysis::grid::{tv_discrete, GridDensity};
use crate::error::Result;
use crate::samplers::Trace;

/// Fraction of post-burn-in transitions that refreshed the subset.
pub fn refresh_rate(trace: &Trace, burn_in: u64) -> Result<f64> {
    trace.refresh_rate(burn_in)
}

/// Distance between the running posterior-mean estimate and a reference
/// parameter, sampled at the requested cumulative cost points.
///
/// The running mean starts at the first transition (no burn-in: this is a
/// convergence diagnostic). Cost points that precede the first recorded
/// transition are skipped.
pub fn mean_distance_curve(
    trace: &Trace,
    reference: &[f64],
    cost_points: &[u64],
) -> Vec<(u64, f64)> {
    assert_eq!(trace.param_dim, reference.len(), "reference dimension mismatch");
    let mut points: Vec<u64> = cost_points.to_vec();
    points.sort_unstable();
    let mut out = Vec::with_capacity(points.len());
    let mut running = vec![0.0f64; reference.len()];
    let mut seen = 0usize;
    let mut row_iter = trace.rows.iter().peekable();
    for &target in &points {
        while let Some(row) = row_iter.peek() {
            if row.cost() > target {
                break;
            }
            seen += 1;
            for (r, v) in running.iter_mut().zip(&row.theta) {
                *r += v;
            }
            row_iter.next();
        }
        if seen == 0 {
            continue;
        }
        let d = running
            .iter()
            .zip(reference)
            .map(|(r, t)| {
                let diff = r / seen as f64 - t;
                diff * diff
            })
            .sum::<f64>()
            .sqrt();
        out.push((target, d));
    }
    out
}

/// Smallest cumulative cost at which the chain's current parameter reaches
/// a test error at or below the threshold; +inf if it never does.
///
/// `eval_error` maps a parameter vector to a test error in [0, 1]; it is
/// invoked on the first row and whenever theta changes.
pub fn cost_to_error_threshold(
    trace: &Trace,
    threshold: f64,
    mut eval_error: impl FnMut(&[f64]) -> f64,
) -> f64 {
    let mut current_error = f64::INFINITY;
    let mut last_theta: Option<&[f64]> = None;
    for row in &trace.rows {
        let changed = last_theta.is_none_or(|prev| prev != row.theta.as_slice());
        if changed {
            current_error = eval_error(&row.theta);
            last_theta = Some(&row.theta);
        }
        if current_error <= threshold {
            return row.cost() as f64;
        }
    }
    f64::INFINITY
}

/// Total-variation distance between a sample histogram and a grid density,
/// binned over the grid support. Samples outside the grid fall into the
/// nearest end bin.
pub fn tv_samples_vs_grid(samples: &[f64], density: &GridDensity, n_bins: usize) -> Result<f64> {
    assert!(n_bins >= 2);
    assert!(!samples.is_empty());
    let spec = density.spec();
    let width = (spec.hi - spec.lo) / n_bins as f64;
    let bin_of = |x: f64| -> usize {
        (((x - spec.lo) / width).floor() as isize).clamp(0, n_bins as isize - 1) as usize
    };

    let mut hist = vec![0.0f64; n_bins];
    for &s in samples {
        hist[bin_of(s)] += 1.0;
    }
    for h in &mut hist {
        *h /= samples.len() as f64;
    }

    // grid mass per bin: trapezoid cells assigned by midpoint
    let mut mass = vec![0.0f64; n_bins];
    let h = spec.step();
    for i in 0..spec.count - 1 {
        let cell = 0.5 * h * (density.value(i) + density.value(i + 1));
        let mid = 0.5 * (density.point(i) + density.point(i + 1));
        mass[bin_of(mid)] += cell;
    }
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    tv_discrete(&hist, &mass)
}
