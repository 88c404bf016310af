//! Seeded randomness: the deterministic generator, Laplace and Gaussian
//! sampling, and exact binomial tail sums.
//!
//! Every random quantity in the crate flows from [`Rng`], a ChaCha8 stream
//! keyed by a 64-bit seed and a 64-bit stream id. ChaCha's output is fixed by
//! its specification, so a `(seed, stream)` pair yields the same sequence on
//! every platform; the golden files under `fixtures/` pin it.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Deterministic generator keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// An independent sub-stream of `seed`. Distinct stream ids give
    /// non-overlapping ChaCha keystreams.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(-1/2, 1/2)`, symmetric around zero.
    pub fn centered_uniform(&mut self) -> f64 {
        let m = (self.inner.next_u64() >> 11) as f64;
        (m + 0.5) * (1.0 / (1u64 << 53) as f64) - 0.5
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Folds `parts` into `base` with the SplitMix64 finalizer. Used to give each
/// repetition of an experiment its own seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Centered Laplace distribution with scale `b`: density `exp(-|x|/b) / 2b`,
/// so `Pr{|X| > t b} = exp(-t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laplace {
    scale: f64,
}

impl Laplace {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "Laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        laplace_inverse_cdf(rng.centered_uniform(), self.scale)
    }
}

/// Inverse CDF of the Laplace distribution, parameterized by the centered
/// uniform `u` in `(-1/2, 1/2)`: `x = -scale * sign(u) * ln(1 - 2|u|)`.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let magnitude = -(-2.0 * u.abs()).ln_1p();
    if u < 0.0 {
        -(scale * magnitude)
    } else {
        scale * magnitude
    }
}

pub fn laplace(rng: &mut Rng, scale: f64) -> Result<f64> {
    Ok(Laplace::new(scale)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    stddev: f64,
}

impl Gaussian {
    pub fn new(stddev: f64) -> Result<Self> {
        if !(stddev.is_finite() && stddev > 0.0) {
            return Err(Error::invalid(format!(
                "Gaussian standard deviation must be positive and finite, got {stddev}"
            )));
        }
        Ok(Self { stddev })
    }

    pub fn stddev(&self) -> f64 {
        self.stddev
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        standard_normal(rng) * self.stddev
    }
}

pub fn gaussian(rng: &mut Rng, stddev: f64) -> Result<f64> {
    Ok(Gaussian::new(stddev)?.sample(rng))
}

pub fn standard_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Exact `Pr{Binomial(m, p) > m/2}`.
///
/// Works with pmf weights relative to the mode, built outward in log space
/// from the ratio `pmf(x+1)/pmf(x) = (m-x)/(x+1) * p/q`, and divides the
/// upper-tail mass by the total. No binomial coefficient is ever formed, and
/// at `p = 1/2` the two halves are built by identical float operations, so an
/// odd `m` gives exactly 1/2.
pub fn binomial_exceedance(m: u64, p: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("binomial trial count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "binomial success probability must lie in [0, 1], got {p}"
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }

    let log_odds = p.ln() - (-p).ln_1p();
    let mode = (((m + 1) as f64 * p).floor() as u64).min(m);
    let half = m / 2;

    // Outward from the mode, so both tails are summed smallest-last.
    let mut above = KahanSum::default();
    let mut below = KahanSum::default();
    let mut put = |x: u64, w: f64| {
        if x > half {
            above.add(w);
        } else {
            below.add(w);
        }
    };
    put(mode, 1.0);
    let mut lw = 0.0;
    for x in mode..m {
        lw += ((m - x) as f64 / (x + 1) as f64).ln() + log_odds;
        put(x + 1, lw.exp());
    }
    let mut lw = 0.0;
    for x in (1..=mode).rev() {
        lw += (x as f64 / (m - x + 1) as f64).ln() - log_odds;
        put(x - 1, lw.exp());
    }
    let (a, b) = (above.total(), below.total());
    Ok((a / (a + b)).min(1.0))
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let s = self.sum + y;
        self.carry = (s - self.sum) - y;
        self.sum = s;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// Renders values one per line with 17 significant digits, the golden-file
/// layout for generator streams.
pub fn golden_lines(values: &[f64]) -> String {
    let mut out = String::new();
    for v in values {
        out.push_str(&crate::csv::format_float(*v));
        out.push('\n');
    }
    out
}
