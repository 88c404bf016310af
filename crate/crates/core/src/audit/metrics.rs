use crate::csv::{format_float, push_row};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismParams;
use crate::model::{Trace, INITIAL_ESTIMATE};

/// `max_t |min_{i<=t} R_D(f_i) - R_t|`.
pub fn leaderboard_error(trace: &Trace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::invalid("leaderboard error of an empty trace"));
    }
    let mut running_min = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for r in trace.records() {
        running_min = running_min.min(r.population_risk);
        worst = worst.max((running_min - r.released).abs());
    }
    Ok(worst)
}

/// Number of rounds whose release is strictly below the previous one,
/// recomputed from the releases (the first round compares against 1).
pub fn update_count(trace: &Trace) -> usize {
    let mut previous = INITIAL_ESTIMATE;
    let mut count = 0;
    for r in trace.records() {
        if r.released < previous {
            count += 1;
        }
        previous = r.released;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaithfulnessReport {
    pub violations: usize,
    /// Largest `|R_t - R_S(f_t)|` over updated rounds; 0 if none.
    pub worst_deviation: f64,
}

/// Counts updated rounds whose release strays more than `1/(2 sqrt(n))` from
/// the submitted model's empirical risk.
pub fn faithfulness_audit(trace: &Trace, n: usize) -> FaithfulnessReport {
    let bound = 0.5 / (n as f64).sqrt();
    let mut report = FaithfulnessReport::default();
    let mut previous = INITIAL_ESTIMATE;
    for r in trace.records() {
        if r.released < previous {
            let dev = (r.released - r.empirical_risk).abs();
            report.worst_deviation = report.worst_deviation.max(dev);
            if dev > bound {
                report.violations += 1;
            }
        }
        previous = r.released;
    }
    report
}

pub const EVAL_CSV_HEADER: &str = "lberr,updates_B,max_noise_L,envelope,envelope_satisfied,faithfulness_violations,worst_deviation";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub lberr: f64,
    pub update_count: usize,
    pub max_noise: f64,
    /// `18 epsilon sqrt(B) + lambda + 2L`.
    pub envelope: f64,
    pub envelope_satisfied: bool,
    pub faithfulness: FaithfulnessReport,
}

impl EvalReport {
    pub fn csv_row(&self) -> String {
        let mut out = String::new();
        push_row(
            &mut out,
            [
                format_float(self.lberr),
                self.update_count.to_string(),
                format_float(self.max_noise),
                format_float(self.envelope),
                u8::from(self.envelope_satisfied).to_string(),
                self.faithfulness.violations.to_string(),
                format_float(self.faithfulness.worst_deviation),
            ],
        );
        out
    }
}

/// Recomputes `B` and `L` from the trace itself and checks
/// `lberr <= 18 epsilon sqrt(B) + lambda + 2L`.
pub fn envelope_check(trace: &Trace, params: &MechanismParams) -> Result<EvalReport> {
    let initial = trace
        .initial_noise()
        .ok_or_else(|| Error::invalid("trace has no initial threshold noise"))?;
    let mut max_noise = initial.abs();
    for r in trace.records() {
        if r.noise.len() != 3 {
            return Err(Error::invalid(format!(
                "round {} records {} noise draws, expected 3",
                r.round,
                r.noise.len()
            )));
        }
        max_noise = max_noise.max(r.noise.max_abs());
    }
    let lberr = leaderboard_error(trace)?;
    let b = update_count(trace);
    let envelope = 18.0 * params.epsilon * (b as f64).sqrt() + params.lambda + 2.0 * max_noise;
    Ok(EvalReport {
        lberr,
        update_count: b,
        max_noise,
        envelope,
        envelope_satisfied: lberr <= envelope,
        faithfulness: faithfulness_audit(trace, params.n),
    })
}

/// `lberr` divided by the rate `ln(k/beta)^(2/5) ln(kn/beta)^(1/5) / n^(2/5)`.
/// Diagnostic only: the constant in front of the rate is not known.
pub fn theorem_ub_ratio(trace: &Trace, params: &MechanismParams) -> Result<f64> {
    let (n, k) = (params.n as f64, params.k as f64);
    let rate =
        (k / params.beta).ln().powf(0.4) * (k * n / params.beta).ln().powf(0.2) / n.powf(0.4);
    Ok(leaderboard_error(trace)? / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::shaky_params;
    use crate::model::NoiseDraws;

    fn trace(pop: &[f64], rel: &[f64]) -> Trace {
        let mut t = Trace::new(None, None);
        for (&p, &r) in pop.iter().zip(rel) {
            t.push(r, r, p, NoiseDraws::none());
        }
        t
    }

    #[test]
    fn lberr_examples() {
        assert_eq!(
            leaderboard_error(&trace(&[0.5, 0.4], &[0.5, 0.4])).unwrap(),
            0.0
        );
        assert!((leaderboard_error(&trace(&[0.5], &[0.3])).unwrap() - 0.2).abs() < 1e-15);
        let e = leaderboard_error(&trace(&[0.5, 0.6, 0.3], &[0.48, 0.48, 0.35])).unwrap();
        assert!((e - 0.05).abs() < 1e-12);
        assert!(leaderboard_error(&Trace::new(None, None)).is_err());
    }

    #[test]
    fn faithfulness_counts_deviant_update() {
        let mut t = Trace::new(None, None);
        t.push(0.3, 0.5, 0.5, NoiseDraws::none());
        let r = faithfulness_audit(&t, 100);
        assert_eq!(r.violations, 1);
        assert!((r.worst_deviation - 0.2).abs() < 1e-12);
    }

    #[test]
    fn envelope_zero_noise() {
        let p = shaky_params(10_000, 100, 0.1).unwrap();
        let mut t = Trace::new(Some(p), Some(0.0));
        let z = NoiseDraws::from_slice(&[0.0; 3]);
        t.push(0.4, 0.4, 0.5, z);
        t.push(0.45, 0.4, 0.5, z);
        let r = envelope_check(&t, &p).unwrap();
        assert_eq!(r.update_count, 1);
        assert_eq!(r.max_noise, 0.0);
        assert!((r.envelope - (18.0 * p.epsilon + p.lambda)).abs() < 1e-15);
        assert!(r.envelope_satisfied);
    }

    #[test]
    fn envelope_violation_detected() {
        let p = shaky_params(10_000, 100, 0.1).unwrap();
        let mut t = Trace::new(Some(p), Some(0.0));
        let z = NoiseDraws::from_slice(&[0.0; 3]);
        // Releases nothing while population risk falls to 0.
        t.push(1.0, 1.0, 0.0, z);
        let r = envelope_check(&t, &p).unwrap();
        assert_eq!(r.update_count, 0);
        assert!(!r.envelope_satisfied);
    }

    #[test]
    fn envelope_requires_noise_records() {
        let p = shaky_params(10_000, 100, 0.1).unwrap();
        assert!(envelope_check(&trace(&[0.5], &[0.5]), &p).is_err());
    }

    #[test]
    fn ratio_nonnegative() {
        let p = shaky_params(10_000, 100, 0.1).unwrap();
        assert!(theorem_ub_ratio(&trace(&[0.5], &[0.3]), &p).unwrap() > 0.0);
    }
}
