//! Random-walk parameter proposals with diminishing-step adaptation.

use crate::data::ParamVector;
use crate::error::{Error, Result};
use crate::model::{CoordKind, Model};
use crate::rng::RngStream;

/// Adaptation settings: scalar Robbins–Monro scaling of per-block step
/// sizes on the log scale, with step `c / t^a`, `a` in (0.5, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    pub target_rate: f64,
    pub learning_c: f64,
    pub learning_exponent: f64,
    /// Adapt only during the first `window` updates of each block;
    /// `None` adapts throughout (steps diminish regardless).
    pub window: Option<u64>,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self { target_rate: 0.35, learning_c: 1.0, learning_exponent: 0.7, window: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwConfig {
    pub initial_scale: f64,
    pub adapt: Option<AdaptConfig>,
}

impl Default for RwConfig {
    fn default() -> Self {
        Self { initial_scale: 0.5, adapt: Some(AdaptConfig::default()) }
    }
}

impl RwConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_scale > 0.0) {
            return Err(Error::Config(format!(
                "proposal scale must be positive, got {}",
                self.initial_scale
            )));
        }
        if let Some(a) = &self.adapt {
            if !(0.0 < a.target_rate && a.target_rate < 1.0) {
                return Err(Error::Config(format!(
                    "target acceptance rate must lie in (0, 1), got {}",
                    a.target_rate
                )));
            }
            if !(a.learning_exponent > 0.5 && a.learning_exponent <= 1.0) {
                return Err(Error::Config(format!(
                    "learning exponent must lie in (0.5, 1], got {}",
                    a.learning_exponent
                )));
            }
            if !(a.learning_c > 0.0) {
                return Err(Error::Config("learning constant must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A proposed parameter move.
#[derive(Debug, Clone)]
pub struct ProposedParam {
    pub theta: ParamVector,
    /// Hastings log-correction `log Q(theta', theta) − log Q(theta, theta')`;
    /// zero for pure location moves, `sum log(sigma'/sigma)` for
    /// multiplicative scale moves.
    pub log_correction: f64,
    pub block: usize,
}

/// Blockwise random-walk proposal. Location coordinates take symmetric
/// Gaussian steps; positivity-constrained coordinates take multiplicative
/// log-normal steps with the matching Hastings correction.
#[derive(Debug, Clone)]
pub struct RwProposal {
    scales: Vec<f64>,
    kinds: Vec<CoordKind>,
    blocks: Vec<Vec<usize>>,
    adapt: Option<AdaptConfig>,
    block_updates: Vec<u64>,
}

impl RwProposal {
    pub fn new(model: &dyn Model, config: &RwConfig) -> Result<Self> {
        config.validate()?;
        let dim = model.param_dim();
        let blocks = model.proposal_blocks();
        debug_assert!(blocks.iter().flatten().all(|&c| c < dim));
        Ok(Self {
            scales: vec![config.initial_scale; dim],
            kinds: model.coord_kinds(),
            block_updates: vec![0; blocks.len()],
            blocks,
            adapt: config.adapt,
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn propose(&self, theta: &ParamVector, rng: &mut RngStream) -> ProposedParam {
        let block =
            if self.blocks.len() > 1 { rng.below(self.blocks.len()) } else { 0 };
        let mut values = theta.to_vec();
        let mut log_correction = 0.0;
        for &coord in &self.blocks[block] {
            let step = self.scales[coord] * rng.standard_normal();
            match self.kinds[coord] {
                CoordKind::Location => values[coord] += step,
                CoordKind::PositiveScale => {
                    let next = values[coord] * step.exp();
                    log_correction += (next / values[coord]).ln();
                    values[coord] = next;
                }
            }
        }
        ProposedParam {
            theta: ParamVector::new(values).expect("finite step from finite state"),
            log_correction,
            block,
        }
    }

    /// Feed back one accept/reject outcome for the given block.
    pub fn adapt(&mut self, block: usize, accepted: bool) {
        let Some(cfg) = self.adapt else { return };
        self.block_updates[block] += 1;
        let t = self.block_updates[block];
        if cfg.window.is_some_and(|w| t > w) {
            return;
        }
        let gamma = cfg.learning_c / (t as f64).powf(cfg.learning_exponent);
        let direction = if accepted { 1.0 - cfg.target_rate } else { -cfg.target_rate };
        let factor = (gamma * direction).exp();
        for &coord in &self.blocks[block] {
            self.scales[coord] *= factor;
        }
    }
}
