use super::{check_submission, Mechanism, Release};
use crate::audit::{Leaderboard, PopulationAware};
use crate::error::{Error, Result};
use crate::model::{LossVector, NoiseDraws, SubmittedModel, INITIAL_ESTIMATE};
use crate::noise::{Gaussian, Rng};

/// Releases `R_S(f_t)` exactly.
#[derive(Debug, Clone)]
pub struct EmpiricalOracle {
    holdout_size: usize,
    budget: usize,
    round: usize,
}

impl EmpiricalOracle {
    pub fn new(holdout_size: usize, budget: usize) -> Self {
        Self {
            holdout_size,
            budget,
            round: 0,
        }
    }
}

impl Mechanism for EmpiricalOracle {
    fn name(&self) -> &'static str {
        "empirical"
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
        self.round += 1;
        Ok(Release::exact(loss.mean()))
    }
}

/// Releases `R_S(f_t)` plus fresh centered Gaussian noise.
#[derive(Debug, Clone)]
pub struct NoisyEmpiricalOracle {
    holdout_size: usize,
    budget: usize,
    round: usize,
    gaussian: Gaussian,
    rng: Rng,
}

impl NoisyEmpiricalOracle {
    pub fn new(holdout_size: usize, budget: usize, stddev: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            holdout_size,
            budget,
            round: 0,
            gaussian: Gaussian::new(stddev)?,
            rng: Rng::new(seed),
        })
    }
}

impl Mechanism for NoisyEmpiricalOracle {
    fn name(&self) -> &'static str {
        "noisy"
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
        self.round += 1;
        let z = self.gaussian.sample(&mut self.rng);
        Ok(Release {
            value: loss.mean() + z,
            noise: NoiseDraws::from_slice(&[z]),
        })
    }
}

/// Ideal leaderboard: the running minimum of population risks, starting from
/// the initial estimate 1.
#[derive(Debug, Clone)]
pub struct PopulationMinOracle {
    holdout_size: usize,
    budget: usize,
    round: usize,
    best: f64,
}

impl PopulationMinOracle {
    pub fn new(holdout_size: usize, budget: usize) -> Self {
        Self {
            holdout_size,
            budget,
            round: 0,
            best: INITIAL_ESTIMATE,
        }
    }
}

impl PopulationAware for PopulationMinOracle {
    fn name(&self) -> &'static str {
        "population-min"
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

    fn submit(&mut self, model: &SubmittedModel) -> Result<Release> {
        check_submission(self.holdout_size, self.round, self.budget, model.loss())?;
        self.round += 1;
        self.best = self.best.min(model.population_risk());
        Ok(Release::exact(self.best))
    }
}

/// When the perturbation offset of [`PerturbedPopulationMin`] is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Only when the running minimum of population risks strictly drops.
    Sticky,
    /// Every round.
    Fresh,
}

/// Population-min oracle whose release is offset by a uniform draw from
/// `[-bound, bound]`. Its leaderboard error is at most `bound` by construction.
#[derive(Debug, Clone)]
pub struct PerturbedPopulationMin {
    holdout_size: usize,
    budget: usize,
    round: usize,
    best: f64,
    offset: f64,
    bound: f64,
    mode: Perturbation,
    rng: Rng,
}

impl PerturbedPopulationMin {
    pub fn new(
        holdout_size: usize,
        budget: usize,
        bound: f64,
        mode: Perturbation,
        seed: u64,
    ) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid(format!(
                "perturbation bound must be nonnegative, got {bound}"
            )));
        }
        Ok(Self {
            holdout_size,
            budget,
            round: 0,
            best: INITIAL_ESTIMATE,
            offset: 0.0,
            bound,
            mode,
            rng: Rng::new(seed),
        })
    }

    fn draw_offset(&mut self) -> f64 {
        // centered_uniform lies in (-1/2, 1/2).
        2.0 * self.bound * self.rng.centered_uniform()
    }
}

impl PopulationAware for PerturbedPopulationMin {
    fn name(&self) -> &'static str {
        "perturbed-population-min"
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

    fn submit(&mut self, model: &SubmittedModel) -> Result<Release> {
        check_submission(self.holdout_size, self.round, self.budget, model.loss())?;
        let risk = model.population_risk();
        let dropped = risk < self.best || self.round == 0;
        self.best = self.best.min(risk);
        if dropped || self.mode == Perturbation::Fresh {
            self.offset = self.draw_offset();
        }
        self.round += 1;
        Ok(Release {
            value: self.best + self.offset,
            noise: NoiseDraws::from_slice(&[self.offset]),
        })
    }
}

/// The three oracle mechanisms selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    Empirical,
    NoisyEmpirical { stddev: f64, seed: u64 },
    PopulationMin,
}

impl OracleKind {
    pub fn leaderboard(self, holdout_size: usize, budget: usize) -> Result<Leaderboard> {
        Ok(match self {
            OracleKind::Empirical => {
                Leaderboard::new(Box::new(EmpiricalOracle::new(holdout_size, budget)))
            }
            OracleKind::NoisyEmpirical { stddev, seed } => Leaderboard::new(Box::new(
                NoisyEmpiricalOracle::new(holdout_size, budget, stddev, seed)?,
            )),
            OracleKind::PopulationMin => {
                Leaderboard::with_oracle(Box::new(PopulationMinOracle::new(holdout_size, budget)))
            }
        })
    }
}
