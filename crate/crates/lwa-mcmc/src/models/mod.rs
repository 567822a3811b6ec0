//! Likelihood models and simulators.

mod arma;
mod gaussmix;
mod probit;

pub use arma::{arma_window_loglik, simulate_arma, ArmaModel};
pub use gaussmix::{
    classification_error, pack_params, simulate_gaussmix, GaussMixClassModel,
};
pub use probit::{probit_alpha, probit_loglik, simulate_probit, ProbitModel};
