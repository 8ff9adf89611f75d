use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{DiscreteBroadcastChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponents::RatePoint;

/// Default cap on `|M|·|X|^n` binning-table entries.
pub const DEFAULT_TABLE_BUDGET: u128 = 1 << 24;

/// Slack subtracted before rounding `n·R` up, so that products such as
/// `10 × 0.7` do not gain a bit from floating-point error.
const ROUNDING_SLACK: f64 = 1e-9;

/// `⌈n·R⌉`, the number of bits behind a rate at blocklength `n`.
pub fn rate_bits(n: usize, rate: f64) -> u32 {
    let v = (n as f64 * rate - ROUNDING_SLACK).ceil();
    if v <= 0.0 {
        0
    } else {
        v as u32
    }
}

/// Integer code sizes `|M|, |Φ|, |K|` with their bit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSizes {
    pub m_bits: u32,
    pub phi_bits: u32,
    pub k_bits: u32,
}

impl CodeSizes {
    pub fn from_rates(n: usize, rates: &RatePoint) -> Result<Self> {
        let s = Self {
            m_bits: rate_bits(n, rates.r_m),
            phi_bits: rate_bits(n, rates.r_phi),
            k_bits: rate_bits(n, rates.r_sk),
        };
        if s.m_bits > 40 || s.phi_bits > 40 || s.k_bits > 40 {
            return Err(Error::Budget {
                what: "code size in bits".into(),
                size: s.m_bits.max(s.phi_bits).max(s.k_bits) as u128,
                budget: 40,
            });
        }
        Ok(s)
    }

    pub fn m(&self) -> usize {
        1 << self.m_bits
    }

    pub fn phi(&self) -> usize {
        1 << self.phi_bits
    }

    pub fn k(&self) -> usize {
        1 << self.k_bits
    }
}

/// `base^n`, or `None` on overflow.
pub(crate) fn checked_pow(base: usize, n: usize) -> Option<u128> {
    let mut v: u128 = 1;
    for _ in 0..n {
        v = v.checked_mul(base as u128)?;
    }
    Some(v)
}

pub(crate) fn check_budget(what: &str, size: Option<u128>, budget: u128) -> Result<usize> {
    match size {
        Some(v) if v <= budget && v <= usize::MAX as u128 => Ok(v as usize),
        _ => Err(Error::Budget {
            what: what.into(),
            size: size.unwrap_or(u128::MAX),
            budget,
        }),
    }
}

/// A realized random-binning key agreement code.
///
/// Messages, keys and bins are 0-based. A source sequence `x^n` is indexed
/// in base `|X|` with `x_1` the most significant digit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecretKeyCode {
    pub n: usize,
    pub input_size: usize,
    pub source_size: usize,
    pub sizes: CodeSizes,
    /// `s^n(m)`, row-major over `(m, i)`.
    pub codewords: Vec<u16>,
    /// `k(m, x^n)`, row-major over `(m, x^n)`.
    pub key_bins: Vec<u32>,
    /// `φ(m, x^n)`, row-major over `(m, x^n)`.
    pub public_bins: Vec<u32>,
    pub seed: u64,
    pub stream: u64,
}

impl SecretKeyCode {
    /// `|X|^n`.
    pub fn sequences(&self) -> usize {
        self.key_bins.len() / self.sizes.m()
    }

    pub fn codeword(&self, m: usize) -> &[u16] {
        &self.codewords[m * self.n..(m + 1) * self.n]
    }

    #[inline]
    pub fn key(&self, m: usize, x: usize) -> u32 {
        self.key_bins[m * self.sequences() + x]
    }

    #[inline]
    pub fn bin(&self, m: usize, x: usize) -> u32 {
        self.public_bins[m * self.sequences() + x]
    }

    /// Digits of the sequence with index `x`.
    pub fn sequence(&self, x: usize) -> Vec<usize> {
        digits(x, self.source_size, self.n)
    }
}

pub(crate) fn digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for d in out.iter_mut().rev() {
        *d = index % base;
        index /= base;
    }
    out
}

pub(crate) fn index_of(seq: &[usize], base: usize) -> usize {
    seq.iter().fold(0, |acc, &d| acc * base + d)
}

fn sample(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Generates the code on stream 0 of `seed`.
pub fn generate_code(
    channel: &DiscreteBroadcastChannel,
    n: usize,
    rates: &RatePoint,
    input: &InputDistribution,
    seed: u64,
) -> Result<SecretKeyCode> {
    generate_code_on_stream(channel, n, rates, input, seed, 0, DEFAULT_TABLE_BUDGET)
}

/// Generates a code from ChaCha20 stream `stream` of `seed`. Codewords are
/// drawn first, then key bins, then public bins.
pub fn generate_code_on_stream(
    channel: &DiscreteBroadcastChannel,
    n: usize,
    rates: &RatePoint,
    input: &InputDistribution,
    seed: u64,
    stream: u64,
    table_budget: u128,
) -> Result<SecretKeyCode> {
    if n == 0 {
        return Err(Error::Parameter("blocklength must be at least 1".into()));
    }
    let a = channel.alphabets();
    if input.len() != a.s {
        return Err(Error::Dimension(format!(
            "input distribution has {} symbols, channel has {}",
            input.len(),
            a.s
        )));
    }
    if a.s > u16::MAX as usize + 1 {
        return Err(Error::Dimension("input alphabet too large".into()));
    }
    let sizes = CodeSizes::from_rates(n, rates)?;
    let entries = checked_pow(a.x, n).and_then(|v| v.checked_mul(sizes.m() as u128));
    let entries = check_budget("|M|·|X|^n", entries, table_budget)?;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut acc = 0.0;
    let cdf: Vec<f64> = input
        .probs()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let codewords = (0..sizes.m() * n)
        .map(|_| sample(&cdf, rng.random::<f64>()) as u16)
        .collect();
    let key_range = sizes.k() as u32;
    let key_bins = (0..entries).map(|_| rng.random_range(0..key_range)).collect();
    let phi_range = sizes.phi() as u32;
    let public_bins = (0..entries).map(|_| rng.random_range(0..phi_range)).collect();
    Ok(SecretKeyCode {
        n,
        input_size: a.s,
        source_size: a.x,
        sizes,
        codewords,
        key_bins,
        public_bins,
        seed,
        stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Alphabets;

    fn channel() -> DiscreteBroadcastChannel {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap()
    }

    #[test]
    fn rounding_of_rate_bits() {
        assert_eq!(rate_bits(10, 0.7), 7);
        assert_eq!(rate_bits(3, 0.5), 2);
        assert_eq!(rate_bits(4, 0.0), 0);
        assert_eq!(rate_bits(2, 1.0), 2);
        assert_eq!(rate_bits(3, 1.0 / 3.0), 1);
    }

    #[test]
    fn single_codeword() {
        let rates = RatePoint::new(0.5, 0.5, 0.0).unwrap();
        let code = generate_code(&channel(), 1, &rates, &InputDistribution::bernoulli(1.0).unwrap(), 3).unwrap();
        assert_eq!(code.sizes.m(), 1);
        assert_eq!(code.codewords, vec![1]);
    }

    #[test]
    fn constant_key_when_key_rate_is_zero() {
        let rates = RatePoint::new(0.0, 1.0, 1.0).unwrap();
        let code = generate_code(&channel(), 3, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 4).unwrap();
        assert_eq!(code.sizes.k(), 1);
        assert!(code.key_bins.iter().all(|&k| k == 0));
        assert_eq!(code.key_bins.len(), 8 * 8);
    }

    #[test]
    fn same_seed_same_tables() {
        let rates = RatePoint::new(0.7, 0.6, 0.4).unwrap();
        let input = InputDistribution::bernoulli(0.3).unwrap();
        let a = generate_code(&channel(), 4, &rates, &input, 9).unwrap();
        let b = generate_code(&channel(), 4, &rates, &input, 9).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        let c = generate_code_on_stream(&channel(), 4, &rates, &input, 9, 1, DEFAULT_TABLE_BUDGET).unwrap();
        assert_ne!(a.key_bins, c.key_bins);
    }

    #[test]
    fn tables_stay_in_range() {
        let rates = RatePoint::new(0.5, 0.75, 0.5).unwrap();
        let input = InputDistribution::bernoulli(0.5).unwrap();
        let code = generate_code(&channel(), 4, &rates, &input, 5).unwrap();
        assert!(code.codewords.iter().all(|&s| s < 2));
        assert!(code.key_bins.iter().all(|&k| (k as usize) < code.sizes.k()));
        assert!(code.public_bins.iter().all(|&p| (p as usize) < code.sizes.phi()));
        assert_eq!(code.public_bins.len(), code.sizes.m() * 16);
    }

    #[test]
    fn budget_is_enforced() {
        let rates = RatePoint::new(0.5, 0.5, 1.0).unwrap();
        let input = InputDistribution::bernoulli(0.5).unwrap();
        let e = generate_code_on_stream(&channel(), 10, &rates, &input, 0, 0, 1 << 12);
        assert!(matches!(e, Err(Error::Budget { .. })));
        assert!(generate_code(&channel(), 0, &rates, &input, 0).is_err());
    }

    #[test]
    fn sequence_indexing() {
        assert_eq!(digits(6, 2, 3), vec![1, 1, 0]);
        assert_eq!(index_of(&[1, 1, 0], 2), 6);
        assert_eq!(digits(5, 3, 2), vec![1, 2]);
    }
}
