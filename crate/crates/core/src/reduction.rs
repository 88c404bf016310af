//! General adaptive estimation on top of any leaderboard.
//!
//! To answer a query `g` with threshold `c`, submit
//! `f_i = c + (g - i alpha) / 2` for `i = 0, 1, ...` until the leaderboard
//! releases some `r < c - alpha/2`. Then `a = 2 (r - c + i alpha / 2)` and `c`
//! becomes `r`. The population risk of `f_i` is `c - i alpha/2 + E[g]/2`.

use crate::audit::Leaderboard;
use crate::csv::{format_float, format_opt, push_row};
use crate::error::{Error, Result};
use crate::model::{LossVector, SubmittedModel};

/// A bounded query: its values on the holdout and its population mean.
#[derive(Debug, Clone)]
pub struct Query {
    values: LossVector,
    population_mean: f64,
}

impl Query {
    pub fn new(values: LossVector, population_mean: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&population_mean) {
            return Err(Error::invalid(format!(
                "population mean must lie in [0, 1], got {population_mean}"
            )));
        }
        Ok(Self {
            values,
            population_mean,
        })
    }

    pub fn values(&self) -> &LossVector {
        &self.values
    }

    pub fn population_mean(&self) -> f64 {
        self.population_mean
    }
}

/// Releases within this distance of the trigger threshold count as ties, so
/// rounding in `c - i alpha/2 + E[g]/2` cannot turn an exact tie into a
/// trigger.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Answer value used when no offset triggers.
pub const FALLBACK_ANSWER: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Answer {
    pub value: f64,
    /// Offset index that triggered, if any.
    pub triggered: Option<usize>,
    /// Release that triggered, if any.
    pub release: Option<f64>,
    pub c_after: f64,
    /// Some submitted value or population risk was clamped into `[0, 1]`.
    pub clamped: bool,
    pub no_trigger: bool,
    pub submissions: usize,
}

pub struct EstimatorState {
    board: Leaderboard,
    c: f64,
    alpha: f64,
    offsets: usize,
    answered: usize,
    submissions: usize,
}

impl EstimatorState {
    pub fn new(board: Leaderboard, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1/2), got {alpha}"
            )));
        }
        Ok(Self {
            board,
            c: 0.5,
            alpha,
            offsets: offsets_per_query(alpha),
            answered: 0,
            submissions: 0,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn queries_answered(&self) -> usize {
        self.answered
    }

    pub fn submissions(&self) -> usize {
        self.submissions
    }

    pub fn board(&self) -> &Leaderboard {
        &self.board
    }

    pub fn into_board(self) -> Leaderboard {
        self.board
    }

    /// Answers one query. On a budget error mid-loop the state keeps the
    /// submissions already made and the unchanged threshold.
    pub fn answer(&mut self, query: &Query) -> Result<Answer> {
        if query.values.len() != self.board.holdout_size() {
            return Err(Error::invalid(format!(
                "query has length {}, holdout has {}",
                query.values.len(),
                self.board.holdout_size()
            )));
        }
        let c = self.c;
        let target = c - self.alpha / 2.0;
        let mut clamped = false;
        let mut submissions = 0;
        for i in 0..self.offsets {
            let shift = i as f64 * self.alpha / 2.0;
            let (loss, loss_clamped) = query.values.affine_clamped(c - shift, 0.5)?;
            let risk = c - shift + 0.5 * query.population_mean;
            let risk_clamped = risk.clamp(0.0, 1.0);
            clamped |= loss_clamped || risk_clamped != risk;
            let model = SubmittedModel::new(loss, risk_clamped)?;
            let r = self.board.submit(&model)?;
            submissions += 1;
            self.submissions += 1;
            if r < target - TIE_TOLERANCE {
                self.c = r;
                self.answered += 1;
                return Ok(Answer {
                    value: 2.0 * (r - c + shift),
                    triggered: Some(i),
                    release: Some(r),
                    c_after: r,
                    clamped,
                    no_trigger: false,
                    submissions,
                });
            }
        }
        self.answered += 1;
        Ok(Answer {
            value: FALLBACK_ANSWER,
            triggered: None,
            release: None,
            c_after: c,
            clamped,
            no_trigger: true,
            submissions,
        })
    }
}

/// `ceil(1/alpha)`, with a small tolerance so that `1/alpha` computed in
/// floating point for an intended integer is not rounded up.
pub fn offsets_per_query(alpha: f64) -> usize {
    (1.0 / alpha - 1e-9).ceil() as usize
}

/// `floor(1/(3 alpha))`, the number of queries a session may answer.
pub fn session_query_limit(alpha: f64) -> usize {
    (1.0 / (3.0 * alpha) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub answers: Vec<Answer>,
    pub total_submissions: usize,
    pub final_threshold: f64,
}

pub const SESSION_CSV_HEADER: &str =
    "query_index,i_triggered,r_value,a_value,c_after,clamped,no_trigger";

impl SessionLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SESSION_CSV_HEADER);
        out.push('\n');
        for (q, a) in self.answers.iter().enumerate() {
            push_row(
                &mut out,
                [
                    (q + 1).to_string(),
                    a.triggered.map(|i| i.to_string()).unwrap_or_default(),
                    format_opt(a.release),
                    format_float(a.value),
                    format_float(a.c_after),
                    u8::from(a.clamped).to_string(),
                    u8::from(a.no_trigger).to_string(),
                ],
            );
        }
        out
    }
}

/// Answers every query in order through one estimator over `board`.
pub fn run_estimator_session(
    board: Leaderboard,
    queries: &[Query],
    alpha: f64,
) -> Result<(SessionLog, Leaderboard)> {
    let mut state = EstimatorState::new(board, alpha)?;
    let limit = session_query_limit(alpha);
    if queries.len() > limit {
        return Err(Error::BudgetExhausted {
            used: queries.len(),
            budget: limit,
        });
    }
    let answers = queries
        .iter()
        .map(|q| state.answer(q))
        .collect::<Result<Vec<_>>>()?;
    let total = state.submissions();
    assert!(
        total as f64 <= 1.0 / (alpha * alpha),
        "{total} submissions exceed 1/alpha^2"
    );
    let log = SessionLog {
        answers,
        total_submissions: total,
        final_threshold: state.threshold(),
    };
    Ok((log, state.into_board()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::OracleKind;

    fn oracle(budget: usize) -> Leaderboard {
        OracleKind::PopulationMin.leaderboard(4, budget).unwrap()
    }

    fn query(mean: f64) -> Query {
        Query::new(LossVector::constant(4, mean).unwrap(), mean).unwrap()
    }

    #[test]
    fn triggers_at_expected_offset() {
        let mut est = EstimatorState::new(oracle(100), 0.1).unwrap();
        let a = est.answer(&query(0.6)).unwrap();
        assert_eq!(a.triggered, Some(8));
        assert!((a.release.unwrap() - 0.4).abs() < 1e-12);
        assert!((a.value - 0.6).abs() < 1e-12);
        assert!(!a.no_trigger);
    }

    #[test]
    fn strict_boundary() {
        let mut est = EstimatorState::new(oracle(100), 0.1).unwrap();
        let a = est.answer(&query(0.0)).unwrap();
        assert_eq!(a.triggered, Some(2));
        assert!(a.value.abs() < 1e-12);
    }

    #[test]
    fn fallback_when_nothing_triggers() {
        let mut est = EstimatorState::new(oracle(100), 0.1).unwrap();
        let a = est.answer(&query(1.0)).unwrap();
        assert!(a.no_trigger);
        assert_eq!(a.value, FALLBACK_ANSWER);
        assert_eq!(a.c_after, 0.5);
        assert_eq!(a.submissions, 10);
    }

    #[test]
    fn chained_session() {
        let qs: Vec<Query> = [0.6, 0.3, 0.5].iter().map(|&m| query(m)).collect();
        let (log, _) = run_estimator_session(oracle(100), &qs, 0.1).unwrap();
        for (a, m) in log.answers.iter().zip([0.6, 0.3, 0.5]) {
            assert!(!a.no_trigger);
            assert!((a.value - m).abs() < 1e-12, "{a:?}");
        }
        assert!(log.total_submissions <= 100);
    }

    #[test]
    fn session_limit() {
        let alpha = 0.1;
        assert_eq!(session_query_limit(alpha), 3);
        let qs: Vec<Query> = (0..4).map(|_| query(0.2)).collect();
        assert!(run_estimator_session(oracle(100), &qs[..3], alpha).is_ok());
        assert!(matches!(
            run_estimator_session(oracle(100), &qs, alpha),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn alpha_range() {
        assert!(EstimatorState::new(oracle(10), 0.6).is_err());
        assert!(EstimatorState::new(oracle(10), 0.0).is_err());
    }

    #[test]
    fn budget_error_mid_loop() {
        let mut est = EstimatorState::new(oracle(3), 0.1).unwrap();
        assert!(matches!(
            est.answer(&query(0.6)),
            Err(Error::BudgetExhausted { .. })
        ));
        assert_eq!(est.submissions(), 3);
        assert_eq!(est.threshold(), 0.5);
    }

    #[test]
    fn offset_counts() {
        assert_eq!(offsets_per_query(0.1), 10);
        assert_eq!(offsets_per_query(0.3), 4);
        assert_eq!(offsets_per_query(1.0 / 3.0), 3);
        assert_eq!(session_query_limit(1.0 / 30.0), 10);
    }

    #[test]
    fn session_csv() {
        let (log, _) = run_estimator_session(oracle(100), &[query(1.0)], 0.1).unwrap();
        let csv = log.to_csv();
        assert!(csv.starts_with(SESSION_CSV_HEADER));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(6), Some("1"));
    }
}
