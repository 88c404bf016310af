//! Leaderboard mechanisms.
//!
//! A [`Mechanism`] sees nothing but loss vectors. The ideal population-risk
//! oracles in [`oracles`] implement [`crate::audit::PopulationAware`] instead,
//! which is only reachable through the audit-side [`crate::audit::Leaderboard`].

mod ladder;
mod oracles;
mod params;
mod pf_ladder;
mod shaky;

pub use ladder::{Ladder, LadderConfig, Rounding};
pub use oracles::{
    EmpiricalOracle, NoisyEmpiricalOracle, OracleKind, Perturbation, PerturbedPopulationMin,
    PopulationMinOracle,
};
pub use params::{shaky_params, MechanismParams};
pub use pf_ladder::ParameterFreeLadder;
pub use shaky::{LadderState, ShakyLadder};

use crate::error::{Error, Result};
use crate::model::{LossVector, NoiseDraws};

/// What a mechanism hands back for one submission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Release {
    pub value: f64,
    pub noise: NoiseDraws,
}

impl Release {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            noise: NoiseDraws::none(),
        }
    }
}

pub trait Mechanism: Send {
    fn name(&self) -> &'static str;

    fn holdout_size(&self) -> usize;

    /// Total number of submissions the mechanism accepts.
    fn budget(&self) -> usize;

    fn rounds_used(&self) -> usize;

    fn submit(&mut self, loss: &LossVector) -> Result<Release>;

    /// Noise drawn before the first round, if any.
    fn initial_noise(&self) -> Option<f64> {
        None
    }

    fn params(&self) -> Option<&MechanismParams> {
        None
    }
}

/// Budget and length checks shared by every mechanism.
pub(crate) fn check_submission(
    holdout_size: usize,
    used: usize,
    budget: usize,
    loss: &LossVector,
) -> Result<()> {
    if used >= budget {
        return Err(Error::BudgetExhausted { used, budget });
    }
    if loss.len() != holdout_size {
        return Err(Error::invalid(format!(
            "loss vector has length {}, holdout has {holdout_size}",
            loss.len()
        )));
    }
    Ok(())
}
