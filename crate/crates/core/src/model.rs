//! Domain types shared by every module: holdout samples, submitted models,
//! and per-round traces.
//!
//! A model is represented by its loss vector over the fixed holdout. The loss
//! vector is the only thing a [`crate::mechanisms::Mechanism`] ever receives;
//! a model's population risk travels beside it in [`SubmittedModel`] and is
//! read only by the evaluation side ([`crate::audit`]).

use std::sync::Arc;

use crate::csv::{format_float, format_opt, push_row};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismParams;
use crate::noise::Rng;

/// Loss values may overshoot `[0, 1]` by this much before being rejected.
pub const LOSS_TOLERANCE: f64 = 1e-12;

/// Bit-packed binary vector. Bit `i` lives in word `i / 64` at position `i % 64`;
/// bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryVector {
    words: Vec<u64>,
    len: usize,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        v.mask_tail();
        v
    }

    /// Uniform random bits, 64 per generator word.
    pub fn random(len: usize, rng: &mut Rng) -> Self {
        use rand::RngCore;
        let mut v = Self {
            words: (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect(),
            len,
        };
        v.mask_tail();
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self { words, len }
    }

    /// Builds from raw words, clearing any bits past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != len.div_ceil(64) {
            return Err(Error::invalid(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            )));
        }
        if let Some(last) = words.last_mut() {
            if !len.is_multiple_of(64) {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Ok(Self { words, len })
    }

    fn mask_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn mismatches(&self, other: &BinaryVector) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn xor(&self, other: &BinaryVector) -> BinaryVector {
        assert_eq!(self.len, other.len, "length mismatch");
        BinaryVector {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    pub fn complement(&self) -> BinaryVector {
        let mut v = BinaryVector {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        v.mask_tail();
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// `offset + scale * values[i]`.
    Dense {
        values: Arc<[f64]>,
        offset: f64,
        scale: f64,
    },
    /// `low` where the bit is clear, `high` where it is set.
    Binary {
        bits: Arc<BinaryVector>,
        low: f64,
        high: f64,
    },
    Constant(f64),
}

/// Per-sample losses of a model on the holdout, each in `[0, 1]`.
///
/// Cheap to clone. Affine images of an existing vector share its storage and
/// carry their mean, so the reduction can build thousands of shifted copies of
/// one query without touching `n` values each time.
#[derive(Debug, Clone)]
pub struct LossVector {
    repr: Repr,
    len: usize,
    mean: f64,
    min: f64,
    max: f64,
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || lo < -LOSS_TOLERANCE || hi > 1.0 + LOSS_TOLERANCE {
        return Err(Error::invalid(format!(
            "loss values must lie in [0, 1], found range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("loss vector must be nonempty"));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &v in &values {
            if v.is_nan() {
                return Err(Error::invalid("loss vector contains NaN"));
            }
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        check_range(min, max)?;
        let len = values.len();
        Ok(Self {
            repr: Repr::Dense {
                values: values.into(),
                offset: 0.0,
                scale: 1.0,
            },
            len,
            mean: sum / len as f64,
            min,
            max,
        })
    }

    /// 0/1 losses: 1 where the bit is set.
    pub fn from_mistakes(bits: BinaryVector) -> Result<Self> {
        Self::two_valued(Arc::new(bits), 0.0, 1.0)
    }

    fn two_valued(bits: Arc<BinaryVector>, low: f64, high: f64) -> Result<Self> {
        let len = bits.len();
        if len == 0 {
            return Err(Error::invalid("loss vector must be nonempty"));
        }
        let ones = bits.count_ones();
        let (min, max) = match ones {
            0 => (low, low),
            o if o == len => (high, high),
            _ => (low.min(high), low.max(high)),
        };
        check_range(min, max)?;
        Ok(Self {
            repr: Repr::Binary { bits, low, high },
            len,
            mean: low + (high - low) * (ones as f64 / len as f64),
            min,
            max,
        })
    }

    /// Every entry equal to `value`.
    pub fn constant(len: usize, value: f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("loss vector must be nonempty"));
        }
        check_range(value, value)?;
        Ok(Self {
            repr: Repr::Constant(value),
            len,
            mean: value,
            min: value,
            max: value,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(1/n) Σ loss[i]`. For affine images this is the affine image of the
    /// base mean, which agrees with direct summation to rounding error.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn value(&self, i: usize) -> f64 {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        match &self.repr {
            Repr::Dense {
                values,
                offset,
                scale,
            } => offset + scale * values[i],
            Repr::Binary { bits, low, high } => {
                if bits.get(i) {
                    *high
                } else {
                    *low
                }
            }
            Repr::Constant(v) => *v,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.value(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    /// Elementwise `offset + scale * self`, which must stay within `[0, 1]`.
    pub fn affine(&self, offset: f64, scale: f64) -> Result<Self> {
        if !offset.is_finite() || !scale.is_finite() {
            return Err(Error::invalid("affine coefficients must be finite"));
        }
        let a = offset + scale * self.min;
        let b = offset + scale * self.max;
        let (min, max) = (a.min(b), a.max(b));
        check_range(min, max)?;
        let repr = match &self.repr {
            Repr::Dense {
                values,
                offset: o,
                scale: s,
            } => Repr::Dense {
                values: Arc::clone(values),
                offset: offset + scale * o,
                scale: scale * s,
            },
            Repr::Binary { bits, low, high } => Repr::Binary {
                bits: Arc::clone(bits),
                low: offset + scale * low,
                high: offset + scale * high,
            },
            Repr::Constant(v) => Repr::Constant(offset + scale * v),
        };
        Ok(Self {
            repr,
            len: self.len,
            mean: offset + scale * self.mean,
            min,
            max,
        })
    }

    /// Like [`LossVector::affine`], but clamps each entry into `[0, 1]`
    /// instead of failing. The flag reports whether any entry was clamped.
    pub fn affine_clamped(&self, offset: f64, scale: f64) -> Result<(Self, bool)> {
        if let Ok(v) = self.affine(offset, scale) {
            return Ok((v, false));
        }
        if !offset.is_finite() || !scale.is_finite() {
            return Err(Error::invalid("affine coefficients must be finite"));
        }
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        let v = match &self.repr {
            Repr::Binary { bits, low, high } => Self::two_valued(
                Arc::clone(bits),
                clamp(offset + scale * low),
                clamp(offset + scale * high),
            )?,
            Repr::Constant(v) => Self::constant(self.len, clamp(offset + scale * v))?,
            Repr::Dense { .. } => {
                Self::new(self.iter().map(|x| clamp(offset + scale * x)).collect())?
            }
        };
        Ok((v, true))
    }
}

/// A submitted model: its holdout loss vector plus its population risk.
///
/// The population risk is known analytically for every synthetic model family
/// in this crate. Mechanisms never see it.
#[derive(Debug, Clone)]
pub struct SubmittedModel {
    loss: LossVector,
    population_risk: f64,
}

impl SubmittedModel {
    pub fn new(loss: LossVector, population_risk: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&population_risk) {
            return Err(Error::invalid(format!(
                "population risk must lie in [0, 1], got {population_risk}"
            )));
        }
        Ok(Self {
            loss,
            population_risk,
        })
    }

    pub fn loss(&self) -> &LossVector {
        &self.loss
    }

    /// Oracle-only side channel.
    pub fn population_risk(&self) -> f64 {
        self.population_risk
    }
}

pub fn empirical_risk(model: &SubmittedModel) -> f64 {
    model.loss.mean()
}

/// Holdout of binary labels. Instances are irrelevant to every procedure in
/// the crate, so only the labels are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldoutSample {
    labels: BinaryVector,
    seed: u64,
}

impl HoldoutSample {
    pub fn from_labels(labels: BinaryVector, seed: u64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("holdout size must be at least 1"));
        }
        Ok(Self { labels, seed })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &BinaryVector {
        &self.labels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Labels i.i.d. uniform on `{0, 1}`: the distribution where every classifier
/// has population risk exactly 1/2.
pub fn make_random_label_sample(n: usize, seed: u64) -> Result<HoldoutSample> {
    if n == 0 {
        return Err(Error::invalid("holdout size must be at least 1"));
    }
    let mut rng = Rng::substream(seed, 0);
    HoldoutSample::from_labels(BinaryVector::random(n, &mut rng), seed)
}

/// 0/1-loss model for `predictions` on a random-label sample. Population risk
/// is 1/2 for any predictor under uniformly random labels.
pub fn model_from_predictions(
    predictions: &BinaryVector,
    sample: &HoldoutSample,
) -> Result<SubmittedModel> {
    if predictions.len() != sample.size() {
        return Err(Error::invalid(format!(
            "prediction length {} does not match holdout size {}",
            predictions.len(),
            sample.size()
        )));
    }
    let mistakes = predictions.xor(sample.labels());
    SubmittedModel::new(LossVector::from_mistakes(mistakes)?, 0.5)
}

/// Up to three noise draws recorded for one round, in draw order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseDraws {
    values: [f64; 3],
    len: u8,
}

impl NoiseDraws {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_slice(draws: &[f64]) -> Self {
        assert!(draws.len() <= 3, "at most three draws per round");
        let mut values = [0.0; 3];
        values[..draws.len()].copy_from_slice(draws);
        Self {
            values,
            len: draws.len() as u8,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub empirical_risk: f64,
    pub released: f64,
    pub population_risk: f64,
    /// `released` is strictly below the previous release (`R_0 = 1`).
    pub updated: bool,
    pub noise: NoiseDraws,
}

/// Initial estimate every leaderboard starts from.
pub const INITIAL_ESTIMATE: f64 = 1.0;

pub const TRACE_CSV_HEADER: &str =
    "round,empirical_risk,released,population_risk,updated,noise1,noise2,noise3";

/// Ordered log of one leaderboard run.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    params: Option<MechanismParams>,
    initial_noise: Option<f64>,
    records: Vec<RoundRecord>,
    max_noise: f64,
}

impl Trace {
    pub fn new(params: Option<MechanismParams>, initial_noise: Option<f64>) -> Self {
        Self {
            params,
            initial_noise,
            records: Vec::new(),
            max_noise: initial_noise.map_or(0.0, f64::abs),
        }
    }

    /// Appends the next round, deriving its index and update flag.
    pub fn push(
        &mut self,
        empirical_risk: f64,
        released: f64,
        population_risk: f64,
        noise: NoiseDraws,
    ) -> &RoundRecord {
        let previous = self.last_release();
        self.max_noise = self.max_noise.max(noise.max_abs());
        self.records.push(RoundRecord {
            round: self.records.len() + 1,
            empirical_risk,
            released,
            population_risk,
            updated: released < previous,
            noise,
        });
        self.records.last().expect("just pushed")
    }

    /// Release of the latest round, or the initial estimate before any round.
    pub fn last_release(&self) -> f64 {
        self.records.last().map_or(INITIAL_ESTIMATE, |r| r.released)
    }

    pub fn params(&self) -> Option<&MechanismParams> {
        self.params.as_ref()
    }

    pub fn initial_noise(&self) -> Option<f64> {
        self.initial_noise
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Running max of `|noise|` over every recorded draw and the initial
    /// threshold noise.
    pub fn max_noise_magnitude(&self) -> f64 {
        self.max_noise
    }

    pub fn releases(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.released).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let draws = r.noise.as_slice();
            push_row(
                &mut out,
                [
                    r.round.to_string(),
                    format_float(r.empirical_risk),
                    format_float(r.released),
                    format_float(r.population_risk),
                    u8::from(r.updated).to_string(),
                    format_opt(draws.first().copied()),
                    format_opt(draws.get(1).copied()),
                    format_opt(draws.get(2).copied()),
                ],
            );
        }
        out
    }
}
