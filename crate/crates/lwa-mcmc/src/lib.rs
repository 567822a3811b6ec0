//! Subset-weighted Metropolis–Hastings sampling for tall datasets.
//!
//! The transition kernel samples a parameter jointly with a weighted random
//! subset of the data: subsets are scored by how closely their normalized
//! summary statistics match the full dataset's, through a Gaussian kernel
//! at bandwidth epsilon, and the parameter is updated against the
//! sub-posterior of whichever subset is current. Each transition touches a
//! fixed number of observations, so the per-step cost is controlled by the
//! subset size rather than the dataset size.
//!
//! The crate also ships the exact ingredients needed to validate the
//! approximation at desk scale:
//!
//! - full-data Metropolis–Hastings, frozen-subset and fresh-subset
//!   baselines, and a confidence-subsampling baseline, all on a common
//!   trace format with deterministic cost accounting;
//! - probit, ARMA(1,1) and labeled Gaussian-mixture likelihoods with
//!   simulators;
//! - grid posteriors, KL/TV divergences, an analytic KL upper bound for
//!   probit sub-posteriors, and brute-force enumeration of the subset
//!   distribution on toy instances.
//!
//! ```rust
//! use lwa_mcmc::models::{simulate_probit, ProbitModel};
//! use lwa_mcmc::samplers::{run_chain, Budget, RunConfig, SamplerKind, SubsetProposalConfig};
//! use lwa_mcmc::summary::{make_statistic, StatisticKind};
//! use lwa_mcmc::RngStream;
//!
//! let mut rng = RngStream::new(7);
//! let data = simulate_probit(2_000, 1.0, 1.0, &mut rng);
//! let model = ProbitModel::new(1.0, 0.0, 10.0);
//! let stat = make_statistic(StatisticKind::IdentityMean, &data).unwrap();
//!
//! let config = RunConfig {
//!     subset_proposal: SubsetProposalConfig::UniformSwap { m: None },
//!     ..RunConfig::new(100, 0.01, Budget::Iterations(5_000))
//! };
//! let mut chain_rng = rng.split(0);
//! let trace = run_chain(
//!     SamplerKind::Lwa,
//!     &config,
//!     &model,
//!     &data,
//!     Some(stat.as_ref()),
//!     &mut chain_rng,
//! )
//! .unwrap();
//! println!("posterior mean: {:?}", trace.posterior_mean(1_000).unwrap());
//! ```

pub mod analysis;
pub mod cost;
pub mod data;
pub mod error;
pub mod model;
pub mod models;
pub mod propose;
pub mod rng;
pub mod samplers;
pub mod subset;
pub mod summary;

pub use cost::CostMeter;
pub use data::{Dataset, Flavor, ParamVector, SubsetSelection};
pub use error::{Error, Result};
pub use model::{log_sub_posterior, CoordKind, Model};
pub use rng::{split_stream, RngStream};
