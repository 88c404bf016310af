use std::fmt;
use std::str::FromStr;

use crate::analysts::Selection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    VaryQueries,
    VaryNoise,
    Envelope,
    ReductionOracle,
    AttackVsMechanism,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VaryQueries => "vary-queries",
            ExperimentKind::VaryNoise => "vary-noise",
            ExperimentKind::Envelope => "envelope",
            ExperimentKind::ReductionOracle => "reduction-oracle",
            ExperimentKind::AttackVsMechanism => "attack-vs-mechanism",
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        match self {
            // Both vary experiments share instances so their cells pair up.
            ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => 1,
            ExperimentKind::Envelope => 2,
            ExperimentKind::ReductionOracle => 3,
            ExperimentKind::AttackVsMechanism => 4,
        }
    }

    /// Noise multipliers used when none are given.
    pub fn default_noise_grid(self) -> Vec<f64> {
        match self {
            ExperimentKind::VaryQueries => vec![0.0, 1.0, 3.0],
            ExperimentKind::VaryNoise => vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            _ => vec![0.0],
        }
    }

    pub fn default_mechanism(self) -> MechanismKind {
        match self {
            ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => MechanismKind::Noisy,
            ExperimentKind::Envelope | ExperimentKind::AttackVsMechanism => MechanismKind::Shaky,
            ExperimentKind::ReductionOracle => MechanismKind::PopulationMin,
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "vary-queries" => ExperimentKind::VaryQueries,
            "vary-noise" => ExperimentKind::VaryNoise,
            "envelope" => ExperimentKind::Envelope,
            "reduction-oracle" => ExperimentKind::ReductionOracle,
            "attack-vs-mechanism" => ExperimentKind::AttackVsMechanism,
            other => return Err(Error::invalid(format!("unknown experiment '{other}'"))),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    Shaky,
    Ladder,
    PfLadder,
    Empirical,
    Noisy,
    PopulationMin,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Shaky => "shaky",
            MechanismKind::Ladder => "ladder",
            MechanismKind::PfLadder => "pf-ladder",
            MechanismKind::Empirical => "empirical",
            MechanismKind::Noisy => "noisy",
            MechanismKind::PopulationMin => "population-min",
        }
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "shaky" => MechanismKind::Shaky,
            "ladder" => MechanismKind::Ladder,
            "pf-ladder" => MechanismKind::PfLadder,
            "empirical" => MechanismKind::Empirical,
            "noisy" => MechanismKind::Noisy,
            "population-min" => MechanismKind::PopulationMin,
            other => return Err(Error::invalid(format!("unknown mechanism '{other}'"))),
        })
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Selection::Direct),
            "theorem" => Ok(Selection::Theorem),
            other => Err(Error::invalid(format!("unknown selection '{other}'"))),
        }
    }
}

/// Query counts used when no `--k` grid is given: 100 to 1000 in steps of 100.
pub fn default_k_grid() -> Vec<usize> {
    (1..=10).map(|i| 100 * i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub k_grid: Vec<usize>,
    /// Multipliers of `1/sqrt(n)`.
    pub noise_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub mechanism: MechanismKind,
    pub beta: f64,
    /// Ladder step; `1/sqrt(n)` when unset.
    pub eta: Option<f64>,
    /// Accuracy target of the reduction. When set, attack experiments use the
    /// shifted attack.
    pub alpha: Option<f64>,
    pub selection: Selection,
    /// Run repetitions on the rayon pool.
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Defaults for `experiment`: 100 reps, seed 0, beta 0.1.
    pub fn new(experiment: ExperimentKind, n: usize, k_grid: Vec<usize>) -> Self {
        Self {
            experiment,
            n,
            k_grid,
            noise_grid: experiment.default_noise_grid(),
            reps: 100,
            seed: 0,
            mechanism: experiment.default_mechanism(),
            beta: 0.1,
            eta: None,
            alpha: None,
            selection: match experiment {
                ExperimentKind::Envelope | ExperimentKind::AttackVsMechanism => Selection::Theorem,
                _ => Selection::Direct,
            },
            parallel: true,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(1.0 / (self.n as f64).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.k_grid.is_empty() || self.noise_grid.is_empty() {
            return Err(Error::invalid("k and noise grids must be nonempty"));
        }
        if self.k_grid.contains(&0) {
            return Err(Error::invalid("k values must be at least 1"));
        }
        if self
            .noise_grid
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::invalid(
                "noise multipliers must be finite and nonnegative",
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::invalid(format!("eta must be positive, got {eta}")));
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0 && alpha < 0.5) {
                return Err(Error::invalid(format!(
                    "alpha must lie in (0, 1/2), got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated list.
pub(crate) fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|_| Error::invalid(format!("cannot parse list item '{item}'")))
        })
        .collect()
}

/// Reads `key = value` lines; `#` starts a comment.
pub(crate) fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::invalid(format!("config line {}: expected key=value", lineno + 1))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
