//! Leaderboard mechanisms under adaptive attack.
//!
//! The crate simulates holdout leaderboards that release one score per
//! submission: the noisy [`mechanisms::ShakyLadder`], the deterministic
//! [`mechanisms::Ladder`] and a parameter-free variant, plus exact and noisy
//! oracles. [`analysts`] provides random submitters and majority-vote attacks,
//! [`reduction`] turns any leaderboard into a general estimator, [`audit`]
//! records traces and measures leaderboard error, and [`experiments`] runs
//! seeded Monte Carlo sweeps with CSV output.
//!
//! ```
//! use shaky_ladder::audit::{envelope_check, Leaderboard};
//! use shaky_ladder::analysts::{majority_attack, Selection};
//! use shaky_ladder::mechanisms::{shaky_params, ShakyLadder};
//! use shaky_ladder::model::make_random_label_sample;
//!
//! let n = 10_000;
//! let params = shaky_params(n, 201, 0.1)?;
//! let board = Leaderboard::new(Box::new(ShakyLadder::new(params, 7)));
//! let sample = make_random_label_sample(n, 1)?;
//! let (report, trace) = majority_attack(board, &sample, 200, Selection::Theorem, 3)?;
//! assert!((report.final_error - 0.5).abs() < 0.05);
//! assert!(envelope_check(&trace, &params)?.envelope_satisfied);
//! # Ok::<(), shaky_ladder::Error>(())
//! ```

pub mod analysts;
pub mod audit;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod mechanisms;
pub mod model;
pub mod noise;
pub mod reduction;

pub use error::{Error, Result};
