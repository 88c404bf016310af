use super::columns::ColumnCounter;
use super::AttackReport;
use crate::audit::Leaderboard;
use crate::error::{Error, Result};
use crate::model::{model_from_predictions, BinaryVector, HoldoutSample, Trace};
use crate::noise::Rng;
use crate::reduction::{EstimatorState, Query};

/// Which queries enter the majority vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Every query: those estimated below 1/2 as is, the rest complemented.
    #[default]
    Direct,
    /// Only queries estimated below `1/2 - 1/sqrt(n)`.
    Theorem,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::Direct => "direct",
            Selection::Theorem => "theorem",
        }
    }
}

/// Submits `k` uniformly random predictors.
pub fn run_random_analyst(
    board: &mut Leaderboard,
    sample: &HoldoutSample,
    k: usize,
    rng: &mut Rng,
) -> Result<()> {
    for _ in 0..k {
        let model = model_from_predictions(&BinaryVector::random(sample.size(), rng), sample)?;
        board.submit(&model)?;
    }
    Ok(())
}

/// Pointwise majority over the selected predictors. Ties and the empty
/// selection predict label 0.
fn combine(
    predictions: &[BinaryVector],
    estimates: &[f64],
    selection: Selection,
    n: usize,
) -> (BinaryVector, usize) {
    let mut counter = ColumnCounter::new(n);
    let mut selected = 0;
    match selection {
        Selection::Direct => {
            for (p, &a) in predictions.iter().zip(estimates) {
                let below = a < 0.5;
                selected += usize::from(below);
                counter.add(p, !below);
            }
        }
        Selection::Theorem => {
            let threshold = 0.5 - 1.0 / (n as f64).sqrt();
            for (p, &a) in predictions.iter().zip(estimates) {
                if a < threshold {
                    counter.add(p, false);
                }
            }
            selected = counter.rows();
        }
    }
    (counter.strict_majority(), selected)
}

/// Submits `k` random predictors, then their majority as round `k + 1`.
/// The board needs a budget of at least `k + 1`.
pub fn majority_attack(
    mut board: Leaderboard,
    sample: &HoldoutSample,
    k: usize,
    selection: Selection,
    seed: u64,
) -> Result<(AttackReport, Trace)> {
    let n = sample.size();
    if k > n {
        return Err(Error::invalid(format!(
            "k = {k} exceeds holdout size n = {n}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut predictions = Vec::with_capacity(k);
    let mut estimates = Vec::with_capacity(k);
    let mut feedback = 0;
    for _ in 0..k {
        let p = BinaryVector::random(n, &mut rng);
        let before = board.last_release();
        let a = board.submit(&model_from_predictions(&p, sample)?)?;
        feedback += usize::from(a != before);
        predictions.push(p);
        estimates.push(a);
    }
    let (fin, selected) = combine(&predictions, &estimates, selection, n);
    let model = model_from_predictions(&fin, sample)?;
    let estimate = board.submit(&model)?;
    let report = AttackReport {
        final_error: model.loss().mean(),
        selected_count: selected,
        queries_issued: k,
        feedback_received: feedback,
        final_population_risk: model.population_risk(),
        final_estimate: Some(estimate),
    };
    Ok((report, board.into_trace()))
}

/// Majority attack whose estimates come from the reduction's offset schedule
/// instead of raw releases. Each query, and the final model, costs up to
/// `ceil(1/alpha)` submissions.
pub fn shifted_majority_attack(
    board: Leaderboard,
    sample: &HoldoutSample,
    k: usize,
    alpha: f64,
    selection: Selection,
    seed: u64,
) -> Result<(AttackReport, Trace)> {
    let n = sample.size();
    if k > n {
        return Err(Error::invalid(format!(
            "k = {k} exceeds holdout size n = {n}"
        )));
    }
    let mut estimator = EstimatorState::new(board, alpha)?;
    let mut rng = Rng::new(seed);
    let mut predictions = Vec::with_capacity(k);
    let mut estimates = Vec::with_capacity(k);
    let mut feedback = 0;
    for _ in 0..k {
        let p = BinaryVector::random(n, &mut rng);
        let model = model_from_predictions(&p, sample)?;
        let answer =
            estimator.answer(&Query::new(model.loss().clone(), model.population_risk())?)?;
        feedback += usize::from(!answer.no_trigger);
        predictions.push(p);
        estimates.push(answer.value);
    }
    let (fin, selected) = combine(&predictions, &estimates, selection, n);
    let model = model_from_predictions(&fin, sample)?;
    let answer = estimator.answer(&Query::new(model.loss().clone(), model.population_risk())?)?;
    let report = AttackReport {
        final_error: model.loss().mean(),
        selected_count: selected,
        queries_issued: k,
        feedback_received: feedback,
        final_population_risk: model.population_risk(),
        final_estimate: Some(answer.value),
    };
    Ok((report, estimator.into_board().into_trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{Ladder, LadderConfig, OracleKind, Rounding};
    use crate::model::make_random_label_sample;

    #[test]
    fn empty_selection_predicts_zero() {
        let sample = make_random_label_sample(1000, 3).unwrap();
        let board = OracleKind::Empirical.leaderboard(1000, 1).unwrap();
        let (r, trace) = majority_attack(board, &sample, 0, Selection::Theorem, 1).unwrap();
        assert_eq!(r.selected_count, 0);
        let ones = sample.labels().count_ones() as f64 / 1000.0;
        assert!((r.final_error - ones).abs() < 1e-15);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn k_above_n_rejected() {
        let sample = make_random_label_sample(10, 3).unwrap();
        let board = OracleKind::Empirical.leaderboard(10, 20).unwrap();
        assert!(majority_attack(board, &sample, 11, Selection::Direct, 1).is_err());
    }

    #[test]
    fn attack_overfits_exact_oracle() {
        let n = 10_000;
        let sample = make_random_label_sample(n, 5).unwrap();
        let board = OracleKind::Empirical.leaderboard(n, 1001).unwrap();
        let (r, _) = majority_attack(board, &sample, 1000, Selection::Direct, 2).unwrap();
        assert!(r.final_error < 0.45, "{r:?}");
        assert_eq!(r.final_estimate, Some(r.final_error));
    }

    #[test]
    fn shifted_attack_always_gets_feedback_from_population_oracle() {
        let n = 1000;
        let k = 10;
        let alpha = 0.02;
        let sample = make_random_label_sample(n, 5).unwrap();
        let board = OracleKind::PopulationMin.leaderboard(n, 2000).unwrap();
        let (r, _) =
            shifted_majority_attack(board, &sample, k, alpha, Selection::Direct, 3).unwrap();
        assert_eq!(r.feedback_received, k);
    }

    #[test]
    fn shifted_attack_overfits_fine_ladder() {
        let n = 10_000;
        let k = 300;
        let alpha = 1.0 / (3.0 * (k + 1) as f64);
        let sample = make_random_label_sample(n, 5).unwrap();
        let budget = (k + 1) * crate::reduction::offsets_per_query(alpha);
        let ladder = Ladder::new(
            n,
            LadderConfig::new(alpha / 2.0, Rounding::None).unwrap(),
            budget,
        );
        let board = Leaderboard::new(Box::new(ladder));
        let (r, _) =
            shifted_majority_attack(board, &sample, k, alpha, Selection::Direct, 3).unwrap();
        assert!(r.gap() > 0.02, "{r:?}");
    }
}
