use super::{check_submission, Mechanism, MechanismParams, Release};
use crate::error::Result;
use crate::model::{LossVector, NoiseDraws, INITIAL_ESTIMATE};
use crate::noise::{Laplace, Rng};

/// Mutable state of a Shaky Ladder run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderState {
    /// Latest release `R_{t-1}`; starts at 1.
    pub best: f64,
    /// Threshold noise `xi`, refreshed on every accepted round.
    pub threshold_noise: f64,
    /// Rounds completed so far.
    pub round: usize,
    /// Rounds whose release fell strictly below the previous one.
    pub update_count: usize,
}

/// Noisy ladder: compares `R_S(f_t) + xi_t` against `R_{t-1} - lambda + xi`
/// and, on success, releases `R_S(f_t) + xi'_t` and refreshes `xi <- xi''_t`.
/// Every noise variable is an independent `Laplace(sigma)` draw; three are
/// drawn each round whether or not the comparison succeeds, plus one before
/// the first round, for `3k + 1` in a full run.
///
/// Releases are not clamped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ShakyLadder {
    params: MechanismParams,
    state: LadderState,
    initial_noise: f64,
    rng: Rng,
    laplace: Laplace,
    zero_noise: bool,
}

impl ShakyLadder {
    pub fn new(params: MechanismParams, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let laplace = Laplace::new(params.sigma).expect("sigma is positive by construction");
        let xi = laplace.sample(&mut rng);
        Self::from_parts(params, rng, laplace, xi, false)
    }

    /// Diagnostic variant where every noise draw is exactly zero. The run then
    /// reduces to the deterministic ladder with step `lambda`.
    pub fn with_zero_noise(params: MechanismParams) -> Self {
        let laplace = Laplace::new(params.sigma).expect("sigma is positive by construction");
        Self::from_parts(params, Rng::new(0), laplace, 0.0, true)
    }

    fn from_parts(
        params: MechanismParams,
        rng: Rng,
        laplace: Laplace,
        xi: f64,
        zero_noise: bool,
    ) -> Self {
        Self {
            params,
            state: LadderState {
                best: INITIAL_ESTIMATE,
                threshold_noise: xi,
                round: 0,
                update_count: 0,
            },
            initial_noise: xi,
            rng,
            laplace,
            zero_noise,
        }
    }

    pub fn state(&self) -> &LadderState {
        &self.state
    }

    /// `epsilon sqrt(B)`, the privacy loss accumulated so far. Recorded only;
    /// nothing is gated on it.
    pub fn privacy_loss(&self) -> f64 {
        self.params.epsilon * (self.state.update_count as f64).sqrt()
    }

    fn draw(&mut self) -> f64 {
        if self.zero_noise {
            0.0
        } else {
            self.laplace.sample(&mut self.rng)
        }
    }
}

impl Mechanism for ShakyLadder {
    fn name(&self) -> &'static str {
        "shaky"
    }

    fn holdout_size(&self) -> usize {
        self.params.n
    }

    fn budget(&self) -> usize {
        self.params.k
    }

    fn rounds_used(&self) -> usize {
        self.state.round
    }

    fn submit(&mut self, loss: &LossVector) -> Result<Release> {
        check_submission(self.params.n, self.state.round, self.params.k, loss)?;
        let empirical = loss.mean();
        let compare = self.draw();
        let release = self.draw();
        let refresh = self.draw();

        let s = &mut self.state;
        if empirical + compare < s.best - self.params.lambda + s.threshold_noise {
            let value = empirical + release;
            if value < s.best {
                s.update_count += 1;
            }
            s.best = value;
            s.threshold_noise = refresh;
        }
        s.round += 1;
        Ok(Release {
            value: s.best,
            noise: NoiseDraws::from_slice(&[compare, release, refresh]),
        })
    }

    fn initial_noise(&self) -> Option<f64> {
        Some(self.initial_noise)
    }

    fn params(&self) -> Option<&MechanismParams> {
        Some(&self.params)
    }
}
