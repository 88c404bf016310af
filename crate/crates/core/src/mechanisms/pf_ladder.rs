use super::{check_submission, Mechanism, Release};
use crate::error::Result;
use crate::model::{LossVector, INITIAL_ESTIMATE};

/// Parameter-free ladder baseline.
///
/// Rule, frozen here: let `d_i = loss_t(i) - loss_inc(i)` against the incumbent
/// (the last model that produced an update) and `s = sd(d) / sqrt(n)` with the
/// `n - 1` sample standard deviation. The model updates when `s > 0` and
/// `R_S(f_t) < R_{t-1} - s`; the release is `R_S(f_t)` rounded to the decimal
/// place of the leading digit of `s`. The first submission always updates
/// and is released unrounded. `s = 0` never updates.
#[derive(Debug, Clone)]
pub struct ParameterFreeLadder {
    holdout_size: usize,
    budget: usize,
    best: f64,
    incumbent: Option<LossVector>,
    round: usize,
}

impl ParameterFreeLadder {
    pub fn new(holdout_size: usize, budget: usize) -> Self {
        Self {
            holdout_size,
            budget,
            best: INITIAL_ESTIMATE,
            incumbent: None,
            round: 0,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }
}

/// `sd(a - b) / sqrt(n)`.
fn difference_scale(a: &LossVector, b: &LossVector) -> f64 {
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mean = a.mean() - b.mean();
    let ss: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y - mean;
            d * d
        })
        .sum();
    (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
}

fn round_to_leading_digit(x: f64, scale: f64) -> f64 {
    let unit = 10f64.powf(scale.log10().floor());
    (x / unit).round() * unit
}

impl Mechanism for ParameterFreeLadder {
    fn name(&self) -> &'static str {
        "pf-ladder"
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
        match &self.incumbent {
            None => {
                self.best = empirical;
                self.incumbent = Some(loss.clone());
            }
            Some(inc) => {
                let s = difference_scale(loss, inc);
                if s > 0.0 && empirical < self.best - s {
                    self.best = round_to_leading_digit(empirical, s);
                    self.incumbent = Some(loss.clone());
                }
            }
        }
        self.round += 1;
        Ok(Release::exact(self.best))
    }
}
