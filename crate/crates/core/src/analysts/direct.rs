//! Majority attack on a hidden `±1` vector, answered directly by correlation.
//!
//! Vectors are bit-packed: bit 0 encodes `+1` and bit 1 encodes `-1`, so the
//! inner product of two length-`n` vectors is `n - 2 * popcount(a ^ b)`.

use super::columns::ColumnCounter;
use super::AttackReport;
use crate::error::{Error, Result};
use crate::model::BinaryVector;
use crate::noise::{standard_normal, Rng};

/// One draw of the hidden vector, the `k` queries and the `k` standard normals
/// used to perturb answers. Reusing an instance at several noise levels pairs
/// the comparison.
#[derive(Debug, Clone)]
pub struct DirectAttackInstance {
    hidden: BinaryVector,
    queries: Vec<BinaryVector>,
    dots: Vec<i64>,
    normals: Vec<f64>,
}

/// Outcome of one direct attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOutcome {
    pub final_error: f64,
    /// Queries whose answer was positive.
    pub positives: usize,
}

impl DirectAttackInstance {
    /// Draws the hidden vector, then the queries row by row, then the normals.
    pub fn generate(n: usize, k: usize, rng: &mut Rng) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("direct attack needs n >= 1"));
        }
        let hidden = BinaryVector::random(n, rng);
        let queries: Vec<BinaryVector> = (0..k).map(|_| BinaryVector::random(n, rng)).collect();
        let normals = (0..k).map(|_| standard_normal(rng)).collect();
        Ok(Self::assemble(hidden, queries, normals))
    }

    pub fn from_parts(
        hidden: BinaryVector,
        queries: Vec<BinaryVector>,
        normals: Vec<f64>,
    ) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::invalid("direct attack needs n >= 1"));
        }
        if queries.iter().any(|q| q.len() != hidden.len()) {
            return Err(Error::invalid("query length differs from hidden length"));
        }
        if normals.len() != queries.len() {
            return Err(Error::invalid("need exactly one normal per query"));
        }
        Ok(Self::assemble(hidden, queries, normals))
    }

    fn assemble(hidden: BinaryVector, queries: Vec<BinaryVector>, normals: Vec<f64>) -> Self {
        let n = hidden.len() as i64;
        let dots = queries
            .iter()
            .map(|q| n - 2 * q.mismatches(&hidden) as i64)
            .collect();
        Self {
            hidden,
            queries,
            dots,
            normals,
        }
    }

    pub fn n(&self) -> usize {
        self.hidden.len()
    }

    pub fn k(&self) -> usize {
        self.queries.len()
    }

    pub fn hidden(&self) -> &BinaryVector {
        &self.hidden
    }

    pub fn queries(&self) -> &[BinaryVector] {
        &self.queries
    }

    pub fn normals(&self) -> &[f64] {
        &self.normals
    }

    /// Answers `q . h / n`, plus `stddev * z_i` when `stddev > 0`.
    pub fn answers(&self, stddev: f64) -> Vec<f64> {
        let n = self.n() as f64;
        self.dots
            .iter()
            .zip(&self.normals)
            .map(|(&d, &z)| {
                let a = d as f64 / n;
                if stddev > 0.0 {
                    a + stddev * z
                } else {
                    a
                }
            })
            .collect()
    }

    /// Keeps queries with a positive answer, negates the rest, and takes the
    /// coordinatewise sign of the sum. A zero sum maps to `+1`.
    pub fn run(&self, stddev: f64) -> DirectOutcome {
        let mut counter = ColumnCounter::new(self.n());
        let mut positives = 0;
        for (q, a) in self.queries.iter().zip(self.answers(stddev)) {
            let positive = a > 0.0;
            positives += usize::from(positive);
            // A negated row is the complement in this encoding.
            counter.add(q, !positive);
        }
        // Column sum is k - 2 * ones; it is negative iff ones > k / 2.
        let fin = counter.strict_majority();
        DirectOutcome {
            final_error: fin.mismatches(&self.hidden) as f64 / self.n() as f64,
            positives,
        }
    }
}

/// Direct majority attack with `k` queries on a fresh instance drawn from
/// `seed`. `noise` is the answer noise standard deviation; `None` or `0`
/// disables it.
pub fn majority_attack_direct(
    n: usize,
    k: usize,
    noise: Option<f64>,
    seed: u64,
) -> Result<AttackReport> {
    let stddev = noise.unwrap_or(0.0);
    if !(stddev.is_finite() && stddev >= 0.0) {
        return Err(Error::invalid(format!(
            "noise must be nonnegative, got {stddev}"
        )));
    }
    let instance = DirectAttackInstance::generate(n, k, &mut Rng::new(seed))?;
    let out = instance.run(stddev);
    Ok(AttackReport {
        final_error: out.final_error,
        selected_count: out.positives,
        queries_issued: k,
        feedback_received: k,
        final_population_risk: 0.5,
        final_estimate: None,
    })
}
