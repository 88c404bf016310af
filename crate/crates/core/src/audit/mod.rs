//! Evaluation side: the leaderboard harness that records traces, and the
//! metrics computed over them.
//!
//! Only this module handles population risks. A [`Leaderboard`] forwards the
//! loss vector alone to a blind [`Mechanism`], and hands the full
//! [`SubmittedModel`] only to a [`PopulationAware`] oracle.

mod metrics;

pub use metrics::{
    envelope_check, faithfulness_audit, leaderboard_error, theorem_ub_ratio, update_count,
    EvalReport, FaithfulnessReport, EVAL_CSV_HEADER,
};

use crate::error::Result;
use crate::mechanisms::{Mechanism, MechanismParams, Release};
use crate::model::{SubmittedModel, Trace};

/// A mechanism allowed to read population risks. Used for ideal oracles.
pub trait PopulationAware: Send {
    fn name(&self) -> &'static str;

    fn holdout_size(&self) -> usize;

    fn budget(&self) -> usize;

    fn rounds_used(&self) -> usize;

    fn submit(&mut self, model: &SubmittedModel) -> Result<Release>;
}

enum Backend {
    Blind(Box<dyn Mechanism>),
    Oracle(Box<dyn PopulationAware>),
}

/// Runs a mechanism and records one [`Trace`] row per submission.
pub struct Leaderboard {
    backend: Backend,
    trace: Trace,
}

impl Leaderboard {
    pub fn new(mechanism: Box<dyn Mechanism>) -> Self {
        let trace = Trace::new(mechanism.params().copied(), mechanism.initial_noise());
        Self {
            backend: Backend::Blind(mechanism),
            trace,
        }
    }

    pub fn with_oracle(oracle: Box<dyn PopulationAware>) -> Self {
        Self {
            backend: Backend::Oracle(oracle),
            trace: Trace::new(None, None),
        }
    }

    /// Submits one model and returns the released estimate.
    pub fn submit(&mut self, model: &SubmittedModel) -> Result<f64> {
        let release = match &mut self.backend {
            Backend::Blind(m) => m.submit(model.loss())?,
            Backend::Oracle(o) => o.submit(model)?,
        };
        self.trace.push(
            model.loss().mean(),
            release.value,
            model.population_risk(),
            release.noise,
        );
        Ok(release.value)
    }

    pub fn name(&self) -> &'static str {
        match &self.backend {
            Backend::Blind(m) => m.name(),
            Backend::Oracle(o) => o.name(),
        }
    }

    pub fn holdout_size(&self) -> usize {
        match &self.backend {
            Backend::Blind(m) => m.holdout_size(),
            Backend::Oracle(o) => o.holdout_size(),
        }
    }

    pub fn rounds_remaining(&self) -> usize {
        let (budget, used) = match &self.backend {
            Backend::Blind(m) => (m.budget(), m.rounds_used()),
            Backend::Oracle(o) => (o.budget(), o.rounds_used()),
        };
        budget.saturating_sub(used)
    }

    pub fn params(&self) -> Option<&MechanismParams> {
        self.trace.params()
    }

    /// Latest release, or the initial estimate before any round.
    pub fn last_release(&self) -> f64 {
        self.trace.last_release()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{shaky_params, ShakyLadder};
    use crate::model::{make_random_label_sample, model_from_predictions, BinaryVector};
    use crate::noise::Rng;

    #[test]
    fn blind_mechanism_ignores_population_risk() {
        let n = 10_000;
        let params = shaky_params(n, 50, 0.1).unwrap();
        let sample = make_random_label_sample(n, 4).unwrap();
        let mut a = Leaderboard::new(Box::new(ShakyLadder::new(params, 8)));
        let mut b = Leaderboard::new(Box::new(ShakyLadder::new(params, 8)));
        let mut rng = Rng::new(2);
        for i in 0..50 {
            let m = model_from_predictions(&BinaryVector::random(n, &mut rng), &sample).unwrap();
            let other = SubmittedModel::new(m.loss().clone(), (i as f64 / 50.0).min(1.0)).unwrap();
            assert_eq!(a.submit(&m).unwrap(), b.submit(&other).unwrap());
        }
        assert_eq!(a.trace().releases(), b.trace().releases());
    }

    #[test]
    fn remaining_budget() {
        let params = shaky_params(10_000, 3, 0.1).unwrap();
        let mut board = Leaderboard::new(Box::new(ShakyLadder::new(params, 1)));
        let m = SubmittedModel::new(
            crate::model::LossVector::constant(10_000, 0.5).unwrap(),
            0.5,
        )
        .unwrap();
        assert_eq!(board.rounds_remaining(), 3);
        board.submit(&m).unwrap();
        assert_eq!(board.rounds_remaining(), 2);
        assert_eq!(board.trace().len(), 1);
        assert!(board.params().is_some());
    }
}
