//! Adaptive analysts: random submissions, the majority attack, and the
//! shifted majority attack that routes its queries through the reduction.

mod columns;
mod direct;
mod majority;

pub use direct::{majority_attack_direct, DirectAttackInstance, DirectOutcome};
pub use majority::{majority_attack, run_random_analyst, shifted_majority_attack, Selection};

/// Summary of one attack run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackReport {
    /// Empirical risk of the final majority model.
    pub final_error: f64,
    /// Number of queries the majority is taken over.
    pub selected_count: usize,
    pub queries_issued: usize,
    /// Queries after which the analyst learned something new: a changed
    /// release for plain attacks, a triggered offset for the shifted attack.
    pub feedback_received: usize,
    pub final_population_risk: f64,
    /// Leaderboard estimate of the final model, when it was submitted.
    pub final_estimate: Option<f64>,
}

impl AttackReport {
    /// How much the final model overfits the holdout: `R_D - R_S`.
    pub fn gap(&self) -> f64 {
        self.final_population_risk - self.final_error
    }
}
