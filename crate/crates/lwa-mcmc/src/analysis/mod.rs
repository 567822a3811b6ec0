//! Grid-based posterior oracles, exact enumeration of the subset-weight
//! distribution, the KL upper bound, and experiment diagnostics.

mod bound;
mod diagnostics;
mod enumerate;
mod grid;

pub use bound::{prop1_bound, Prop1Bound};
pub use diagnostics::{
    cost_to_error_threshold, mean_distance_curve, refresh_rate, tv_samples_vs_grid,
};
pub use enumerate::{
    enumerate_marginal, enumerate_nu, enumerate_windows, mixture_on_grid, EnumeratedTarget,
};
pub use grid::{
    grid_posterior_probit, kl_on_grid, probit_grid_spec, probit_log_posterior, tv_discrete,
    tv_grid, GridDensity, GridSpec,
};
