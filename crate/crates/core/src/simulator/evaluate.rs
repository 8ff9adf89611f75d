use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::code::{check_budget, checked_pow, digits, CodeSizes, SecretKeyCode};
use super::decode::{decode_bin, sequence_likelihood, LetterTable, SequenceTable};
use crate::channel::{marginal_channel, DiscreteBroadcastChannel, Output};
use crate::error::{Error, Result};
use crate::par;
use crate::prob::kahan_sum;

/// Default cap on `|M|·|X|^n·|Y|^n` and `|M|·|X|^n·|Z|^n` for exact
/// evaluation.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 28;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

const MC_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Outcome of evaluating one code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub sizes: CodeSizes,
    pub method: Method,
    /// `P(K_A ≠ K_B)`.
    pub error_probability: f64,
    /// Wilson 95% interval; Monte-Carlo only.
    pub error_interval: Option<(f64, f64)>,
    /// `I(K_A; Φ, Z^n)` in bits; exact evaluation only.
    pub leakage_bits: Option<f64>,
    /// Enumerated outcomes or simulated trials.
    pub samples: u128,
}

fn check_code(code: &SecretKeyCode, channel: &DiscreteBroadcastChannel) -> Result<()> {
    let a = channel.alphabets();
    if a.s != code.input_size || a.x != code.source_size {
        return Err(Error::Dimension("code and channel alphabets differ".into()));
    }
    Ok(())
}

/// Exact error probability and leakage with the default budget.
pub fn exact_evaluate(code: &SecretKeyCode, channel: &DiscreteBroadcastChannel) -> Result<SimReport> {
    exact_evaluate_with_budget(code, channel, DEFAULT_ENUMERATION_BUDGET)
}

/// Exact evaluation by enumerating every `(m, x^n, y^n)` and `(m, x^n, z^n)`.
pub fn exact_evaluate_with_budget(
    code: &SecretKeyCode,
    channel: &DiscreteBroadcastChannel,
    budget: u128,
) -> Result<SimReport> {
    check_code(code, channel)?;
    let a = channel.alphabets();
    let n = code.n;
    let pairs = code.key_bins.len() as u128;
    let ny = check_budget(
        "|M|·|X|^n·|Y|^n",
        checked_pow(a.y, n).and_then(|v| v.checked_mul(pairs)),
        budget,
    )? / pairs as usize;
    let nz = check_budget(
        "|M|·|X|^n·|Z|^n",
        checked_pow(a.z, n).and_then(|v| v.checked_mul(pairs)),
        budget,
    )? / pairs as usize;
    let seqs = SequenceTable::new(a.x, n, u128::MAX)?;
    let error = exact_error(code, channel, &seqs, ny)?;
    let leakage = exact_leakage(code, channel, &seqs, nz)?;
    Ok(SimReport {
        n,
        sizes: code.sizes,
        method: Method::Exact,
        error_probability: error,
        error_interval: None,
        leakage_bits: Some(leakage),
        samples: pairs * (ny + nz) as u128,
    })
}

fn exact_error(
    code: &SecretKeyCode,
    channel: &DiscreteBroadcastChannel,
    seqs: &SequenceTable,
    ny: usize,
) -> Result<f64> {
    let table = LetterTable::new(channel, Output::Y)?;
    let y_size = channel.alphabets().y;
    let nx = seqs.count;
    let phi_size = code.sizes.phi();
    let per_y = par::map_range(ny, |yi| {
        let y = digits(yi, y_size, code.n);
        let mut scratch = Vec::with_capacity(code.n);
        let mut metrics = Vec::with_capacity(code.key_bins.len());
        let mut best: Vec<Option<(usize, f64)>> = vec![None; phi_size];
        for m in 0..code.sizes.m() {
            let cw = code.codeword(m);
            for x in 0..nx {
                let pair = m * nx + x;
                let metric = sequence_likelihood(&table, cw, seqs.get(x), &y, &mut scratch);
                metrics.push(metric);
                let phi = code.public_bins[pair] as usize;
                match best[phi] {
                    Some((_, b)) if metric <= b => {}
                    _ => best[phi] = Some((pair, metric)),
                }
            }
        }
        // Every pair lies in its own bin, so that bin has a decision.
        kahan_sum(metrics.iter().enumerate().filter_map(|(pair, &w)| {
            let decided = best[code.public_bins[pair] as usize].map_or(0, |b| b.0);
            (code.key_bins[pair] != code.key_bins[decided]).then_some(w)
        }))
    });
    Ok(kahan_sum(per_y) / code.sizes.m() as f64)
}

fn exact_leakage(
    code: &SecretKeyCode,
    channel: &DiscreteBroadcastChannel,
    seqs: &SequenceTable,
    nz: usize,
) -> Result<f64> {
    let a = channel.alphabets();
    let nx = seqs.count;
    let (k_size, phi_size) = (code.sizes.k(), code.sizes.phi());
    let inv_m = 1.0 / code.sizes.m() as f64;

    // p(k) from p(x^n | s^n(m)), normalized so a constant key has mass
    // exactly one.
    let px_s = marginal_channel(channel, &[Output::X])?;
    let mut pk = vec![0.0; k_size];
    for m in 0..code.sizes.m() {
        let cw = code.codeword(m);
        for x in 0..nx {
            let xs = seqs.get(x);
            let mut f: Vec<f64> = (0..code.n).map(|i| px_s.row(cw[i] as usize)[xs[i] as usize]).collect();
            f.sort_unstable_by(f64::total_cmp);
            pk[code.key_bins[m * nx + x] as usize] += f.iter().product::<f64>();
        }
    }
    let total: f64 = pk.iter().sum();
    pk.iter_mut().for_each(|p| *p /= total);

    let table = LetterTable::new(channel, Output::Z)?;
    let per_z = par::map_range(nz, |zi| {
        let z = digits(zi, a.z, code.n);
        let mut scratch = Vec::with_capacity(code.n);
        let mut t = vec![0.0; k_size * phi_size];
        for m in 0..code.sizes.m() {
            let cw = code.codeword(m);
            for x in 0..nx {
                let pair = m * nx + x;
                let w = sequence_likelihood(&table, cw, seqs.get(x), &z, &mut scratch);
                t[code.key_bins[pair] as usize * phi_size + code.public_bins[pair] as usize] += w * inv_m;
            }
        }
        let mut col = vec![0.0; phi_size];
        for k in 0..k_size {
            for phi in 0..phi_size {
                col[phi] += t[k * phi_size + phi];
            }
        }
        kahan_sum((0..k_size * phi_size).filter_map(|i| {
            let p = t[i];
            (p > 0.0).then(|| p * (p / (pk[i / phi_size] * col[i % phi_size])).log2())
        }))
    });
    Ok(kahan_sum(per_z))
}

/// Wilson score interval for `failures` out of `trials` at 95%.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nf = trials as f64;
    let p = failures as f64 / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // The endpoints are exactly 0 and 1 at the extremes; avoid round-off there.
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Estimates `P(K_A ≠ K_B)` by simulating the protocol. Trials are split
/// into chunks of 1024, each on its own ChaCha20 stream of `seed`. Leakage
/// is not estimated.
pub fn monte_carlo_evaluate(
    code: &SecretKeyCode,
    channel: &DiscreteBroadcastChannel,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    check_code(code, channel)?;
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    let a = channel.alphabets();
    let seqs = SequenceTable::new(a.x, code.n, u128::MAX)?;
    let table = LetterTable::new(channel, Output::Y)?;
    let xy = marginal_channel(channel, &[Output::X, Output::Y])?;
    let cdfs: Vec<Vec<f64>> = (0..a.s)
        .map(|s| {
            let mut acc = 0.0;
            xy.row(s)
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();
    let nx = seqs.count;
    let chunks = (trials as usize).div_ceil(MC_CHUNK);
    let failures = par::map_range(chunks, |c| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = (trials as usize - c * MC_CHUNK).min(MC_CHUNK);
        let mut fails = 0u64;
        let mut x = vec![0usize; code.n];
        let mut y = vec![0usize; code.n];
        for _ in 0..count {
            let m = rng.random_range(0..code.sizes.m());
            for (i, &s) in code.codeword(m).iter().enumerate() {
                let u: f64 = rng.random();
                let cdf = &cdfs[s as usize];
                let j = cdf.iter().position(|&v| u < v).unwrap_or(cdf.len() - 1);
                x[i] = j / a.y;
                y[i] = j % a.y;
            }
            let xi = super::code::index_of(&x, a.x);
            let pair = m * nx + xi;
            let decided = decode_bin(code, &table, &seqs, &y, code.public_bins[pair] as usize).unwrap_or(0);
            if code.key_bins[pair] != code.key_bins[decided] {
                fails += 1;
            }
        }
        fails
    });
    let failures: u64 = failures.iter().sum();
    Ok(SimReport {
        n: code.n,
        sizes: code.sizes,
        method: Method::MonteCarlo,
        error_probability: failures as f64 / trials as f64,
        error_interval: Some(wilson_interval(failures, trials)),
        leakage_bits: None,
        samples: trials as u128,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{joint_distribution, Alphabets, InputDistribution};
    use crate::exponents::RatePoint;
    use crate::simulator::code::generate_code;
    use crate::simulator::decode::mlmap_decode;
    use approx::assert_abs_diff_eq;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn random_binary(seed: u64) -> DiscreteBroadcastChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap()
    }

    /// Error probability from the public decoder, one `(m, x^n, y^n)` at a time.
    fn error_oracle(code: &SecretKeyCode, ch: &DiscreteBroadcastChannel) -> f64 {
        let n = code.n;
        let mut total = 0.0;
        for m in 0..code.sizes.m() {
            for x in 0..code.sequences() {
                let xs = code.sequence(x);
                for y in 0..(1usize << n) {
                    let ys = digits(y, 2, n);
                    let mut w = 1.0 / code.sizes.m() as f64;
                    for i in 0..n {
                        let s = code.codeword(m)[i] as usize;
                        w *= (0..2).map(|z| ch.prob(s, xs[i], ys[i], z)).sum::<f64>();
                    }
                    let d = mlmap_decode(code, ch, &ys, code.bin(m, x) as usize).unwrap();
                    if code.key(m, x) != code.key(d.m, d.x) {
                        total += w;
                    }
                }
            }
        }
        total
    }

    /// Leakage from a hash-map joint of `(k, φ, z^n)`.
    fn leakage_oracle(code: &SecretKeyCode, ch: &DiscreteBroadcastChannel) -> f64 {
        let n = code.n;
        let mut joint: HashMap<(u32, u32, usize), f64> = HashMap::new();
        for m in 0..code.sizes.m() {
            for x in 0..code.sequences() {
                let xs = code.sequence(x);
                for z in 0..(1usize << n) {
                    let zs = digits(z, 2, n);
                    let mut w = 1.0 / code.sizes.m() as f64;
                    for i in 0..n {
                        let s = code.codeword(m)[i] as usize;
                        w *= (0..2).map(|y| ch.prob(s, xs[i], y, zs[i])).sum::<f64>();
                    }
                    *joint.entry((code.key(m, x), code.bin(m, x), z)).or_default() += w;
                }
            }
        }
        let mut pk: HashMap<u32, f64> = HashMap::new();
        let mut pfz: HashMap<(u32, usize), f64> = HashMap::new();
        for (&(k, f, z), &p) in &joint {
            *pk.entry(k).or_default() += p;
            *pfz.entry((f, z)).or_default() += p;
        }
        joint
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&(k, f, z), &p)| p * (p / (pk[&k] * pfz[&(f, z)])).log2())
            .sum()
    }

    #[test]
    fn constant_key_is_perfect() {
        let ch = random_binary(1);
        let rates = RatePoint::new(0.0, 0.5, 1.0).unwrap();
        let code = generate_code(&ch, 3, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 2).unwrap();
        let r = exact_evaluate(&code, &ch).unwrap();
        assert_eq!(r.error_probability, 0.0);
        assert_eq!(r.leakage_bits, Some(0.0));
    }

    #[test]
    fn lossless_reconciliation_has_no_error() {
        // Y = (S, X); with |Φ| = 16 >= |M|·|X|^n = 4 most bins are injective.
        let ch = DiscreteBroadcastChannel::from_fn(Alphabets::new(2, 2, 4, 2), vec![0.0; 2], |s, x, y, z| {
            if y == 2 * s + x {
                0.25 * (1.0 + [1.0, -1.0][z] * 0.5)
            } else {
                0.0
            }
        })
        .unwrap();
        let rates = RatePoint::new(1.0, 4.0, 1.0).unwrap();
        for seed in 0..20 {
            let code = generate_code(&ch, 1, &rates, &InputDistribution::bernoulli(0.5).unwrap(), seed).unwrap();
            let mut seen = std::collections::HashSet::new();
            if code.public_bins.iter().all(|b| seen.insert(*b)) {
                assert_eq!(exact_evaluate(&code, &ch).unwrap().error_probability, 0.0);
            }
        }
    }

    #[test]
    fn matches_direct_oracles() {
        for seed in 0..6 {
            let ch = random_binary(10 + seed);
            let n = 1 + (seed as usize % 3);
            let rates = RatePoint::new(0.5, 0.5, 0.4).unwrap();
            let code = generate_code(&ch, n, &rates, &InputDistribution::bernoulli(0.4).unwrap(), seed).unwrap();
            let r = exact_evaluate(&code, &ch).unwrap();
            assert_abs_diff_eq!(r.error_probability, error_oracle(&code, &ch), epsilon = 1e-12);
            let leak = r.leakage_bits.unwrap();
            assert_abs_diff_eq!(leak, leakage_oracle(&code, &ch), epsilon = 1e-12);
            assert!(leak >= -1e-9 && leak <= code.sizes.k_bits as f64 + 1e-9);
        }
    }

    #[test]
    fn n1_leakage_from_single_letter_joint() {
        // One message, one bin, key = x: the leakage is I(X; Z) under the
        // codeword symbol.
        let ch = random_binary(40);
        let rates = RatePoint::new(1.0, 0.0, 0.0).unwrap();
        for seed in 0..8 {
            let code = generate_code(&ch, 1, &rates, &InputDistribution::bernoulli(0.5).unwrap(), seed).unwrap();
            if code.key(0, 0) == code.key(0, 1) {
                continue;
            }
            let s = code.codeword(0)[0] as usize;
            let j = joint_distribution(&ch, &InputDistribution::new(crate::prob::Pmf::point_mass(2, s).unwrap()))
                .unwrap();
            let oracle = crate::prob::mutual_information(&j.group(&[&[1], &[3]]).unwrap()).unwrap();
            assert_abs_diff_eq!(exact_evaluate(&code, &ch).unwrap().leakage_bits.unwrap(), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn budget_refusal_names_the_product() {
        let ch = random_binary(2);
        let rates = RatePoint::new(0.5, 0.5, 0.5).unwrap();
        let code = generate_code(&ch, 4, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 0).unwrap();
        match exact_evaluate_with_budget(&code, &ch, 100) {
            Err(Error::Budget { what, .. }) => assert!(what.contains("|Y|^n")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.036_993_498_206_985_69, epsilon = 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert_abs_diff_eq!(lo + hi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lo, 0.403_831_530_365_995_6, epsilon = 1e-12);
        // Reference values from statsmodels' Wilson interval.
        let (lo, hi) = wilson_interval(7, 40);
        assert_abs_diff_eq!(lo, 0.087_454_137_460_359_2, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.319_499_903_317_877_2, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_examples() {
        // Noiseless Y = (S, X) with a single message and injective bins.
        let ch = DiscreteBroadcastChannel::from_fn(Alphabets::new(1, 2, 2, 1), vec![0.0], |_, x, y, _| {
            if y == x {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let rates = RatePoint::new(1.0, 1.0, 0.0).unwrap();
        let input = InputDistribution::uniform(1).unwrap();
        let code = generate_code(&ch, 1, &rates, &input, 3).unwrap();
        let r = monte_carlo_evaluate(&code, &ch, 3000, 1).unwrap();
        if code.bin(0, 0) != code.bin(0, 1) {
            assert_eq!(r.error_probability, 0.0);
        }

        // Overloaded decoder: pure noise at Bob, many messages, one bin.
        let ch = random_binary(3);
        let flat = DiscreteBroadcastChannel::from_fn(Alphabets::BINARY, vec![0.0; 2], |_, _, _, _| 1.0 / 8.0).unwrap();
        let rates = RatePoint::new(3.0, 0.0, 3.0).unwrap();
        let code = generate_code(&flat, 2, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 4).unwrap();
        let r = monte_carlo_evaluate(&code, &flat, 2000, 2).unwrap();
        assert!(r.error_probability > 0.9);
        let _ = ch;
    }

    #[test]
    fn monte_carlo_covers_exact() {
        let ch = random_binary(50);
        let rates = RatePoint::new(0.5, 0.5, 0.5).unwrap();
        let code = generate_code(&ch, 2, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 9).unwrap();
        let exact = exact_evaluate(&code, &ch).unwrap().error_probability;
        let covered = (0..20)
            .filter(|&s| {
                let (lo, hi) = monte_carlo_evaluate(&code, &ch, 4000, s).unwrap().error_interval.unwrap();
                lo <= exact && exact <= hi
            })
            .count();
        assert!(covered >= 17, "covered {covered}/20");
    }

    #[test]
    fn deterministic_reports() {
        let ch = random_binary(60);
        let rates = RatePoint::new(0.5, 0.5, 0.5).unwrap();
        let code = generate_code(&ch, 3, &rates, &InputDistribution::bernoulli(0.3).unwrap(), 1).unwrap();
        let a = serde_json::to_string(&exact_evaluate(&code, &ch).unwrap()).unwrap();
        let b = serde_json::to_string(&exact_evaluate(&code, &ch).unwrap()).unwrap();
        assert_eq!(a, b);
        let a = monte_carlo_evaluate(&code, &ch, 5000, 7).unwrap();
        let b = monte_carlo_evaluate(&code, &ch, 5000, 7).unwrap();
        assert_eq!(a, b);
    }
}
