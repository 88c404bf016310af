use super::{check_submission, Mechanism, Release};
use crate::error::{Error, Result};
use crate::model::{LossVector, INITIAL_ESTIMATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    None,
    /// Round releases to the nearest multiple of `eta`.
    MultiplesOfEta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderConfig {
    pub eta: f64,
    pub rounding: Rounding,
}

impl LadderConfig {
    pub fn new(eta: f64, rounding: Rounding) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(format!(
                "ladder step must be positive, got {eta}"
            )));
        }
        Ok(Self { eta, rounding })
    }
}

/// Deterministic ladder: releases a new score only when the empirical risk
/// beats the current release by more than `eta`.
#[derive(Debug, Clone)]
pub struct Ladder {
    config: LadderConfig,
    holdout_size: usize,
    budget: usize,
    best: f64,
    round: usize,
}

impl Ladder {
    pub fn new(holdout_size: usize, config: LadderConfig, budget: usize) -> Self {
        Self {
            config,
            holdout_size,
            budget,
            best: INITIAL_ESTIMATE,
            round: 0,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    fn rounded(&self, x: f64) -> f64 {
        match self.config.rounding {
            Rounding::None => x,
            Rounding::MultiplesOfEta => (x / self.config.eta).round() * self.config.eta,
        }
    }
}

impl Mechanism for Ladder {
    fn name(&self) -> &'static str {
        "ladder"
    }

    fn holdout_size(&self) -> usize {
        self.holdout_size
    }

    fn budget(&self) -> usize {
        self.budget
    }

    fn rounds_used(&self) -> usize {
        self.round
    }

    fn submit(&mut self, loss: &LossVector) -> Result<Release> {
        check_submission(self.holdout_size, self.round, self.budget, loss)?;
        let empirical = loss.mean();
        if empirical < self.best - self.config.eta {
            self.best = self.rounded(empirical);
        }
        self.round += 1;
        Ok(Release::exact(self.best))
    }
}
