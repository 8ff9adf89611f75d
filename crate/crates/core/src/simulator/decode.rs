use super::code::{checked_pow, digits, SecretKeyCode};
use crate::channel::{marginal_channel, DiscreteBroadcastChannel, Output};
use crate::error::{Error, Result};

/// Decoder output: message and source-sequence index, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub m: usize,
    pub x: usize,
}

/// Per-letter `p(x, o | s)` for one observed output `o` (Bob's `Y` or Eve's
/// `Z`), laid out as `[s][o][x]`.
#[derive(Debug, Clone)]
pub(crate) struct LetterTable {
    pub x_size: usize,
    pub o_size: usize,
    data: Vec<f64>,
}

impl LetterTable {
    pub fn new(channel: &DiscreteBroadcastChannel, observed: Output) -> Result<Self> {
        let a = channel.alphabets();
        let o_size = match observed {
            Output::Y => a.y,
            Output::Z => a.z,
            Output::X => return Err(Error::Parameter("the observer must be Y or Z".into())),
        };
        let t = marginal_channel(channel, &[Output::X, observed])?;
        let mut data = vec![0.0; a.s * o_size * a.x];
        for s in 0..a.s {
            for x in 0..a.x {
                for o in 0..o_size {
                    data[(s * o_size + o) * a.x + x] = t.row(s)[x * o_size + o];
                }
            }
        }
        Ok(Self {
            x_size: a.x,
            o_size,
            data,
        })
    }

    #[inline]
    pub fn get(&self, s: usize, o: usize, x: usize) -> f64 {
        self.data[(s * self.o_size + o) * self.x_size + x]
    }
}

/// Digits of every source sequence, row-major over `(x^n, i)`.
#[derive(Debug, Clone)]
pub(crate) struct SequenceTable {
    pub n: usize,
    pub count: usize,
    digits: Vec<u16>,
}

impl SequenceTable {
    pub fn new(base: usize, n: usize, budget: u128) -> Result<Self> {
        let count = super::code::check_budget("|X|^n", checked_pow(base, n), budget)?;
        let mut d = Vec::with_capacity(count * n);
        for x in 0..count {
            d.extend(digits(x, base, n).into_iter().map(|v| v as u16));
        }
        Ok(Self { n, count, digits: d })
    }

    #[inline]
    pub fn get(&self, x: usize) -> &[u16] {
        &self.digits[x * self.n..(x + 1) * self.n]
    }
}

/// `Π_i p(x_i, o_i | s_i)`, multiplied in ascending factor order so that
/// pairs with the same multiset of factors get bit-identical values.
#[inline]
pub(crate) fn sequence_likelihood(
    table: &LetterTable,
    codeword: &[u16],
    x: &[u16],
    o: &[usize],
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for i in 0..codeword.len() {
        let f = table.get(codeword[i] as usize, o[i], x[i] as usize);
        if f == 0.0 {
            return 0.0;
        }
        scratch.push(f);
    }
    scratch.sort_unstable_by(f64::total_cmp);
    scratch.iter().product()
}

/// ML-MAP decoding: the `(m, x^n)` in bin `phi` maximizing
/// `p(y^n|s^n(m)) p(x^n|y^n, s^n(m))`. Ties go to the smallest `m`, then the
/// lexicographically smallest `x^n`. An empty bin decodes to `(0, 0^n)`.
pub fn mlmap_decode(
    code: &SecretKeyCode,
    channel: &DiscreteBroadcastChannel,
    y: &[usize],
    phi: usize,
) -> Result<Decoded> {
    let a = channel.alphabets();
    if a.s != code.input_size || a.x != code.source_size {
        return Err(Error::Dimension("code and channel alphabets differ".into()));
    }
    if y.len() != code.n || y.iter().any(|&v| v >= a.y) {
        return Err(Error::Dimension(format!("y^n must have {} symbols below {}", code.n, a.y)));
    }
    if phi >= code.sizes.phi() {
        return Err(Error::Dimension(format!("public message {phi} out of range")));
    }
    let table = LetterTable::new(channel, Output::Y)?;
    let seqs = SequenceTable::new(a.x, code.n, u128::MAX)?;
    let nx = seqs.count;
    Ok(decode_bin(code, &table, &seqs, y, phi).map_or(Decoded { m: 0, x: 0 }, |pair| Decoded {
        m: pair / nx,
        x: pair % nx,
    }))
}

/// Best pair index `m·|X|^n + x` in bin `phi`, or `None` for an empty bin.
pub(crate) fn decode_bin(
    code: &SecretKeyCode,
    table: &LetterTable,
    seqs: &SequenceTable,
    y: &[usize],
    phi: usize,
) -> Option<usize> {
    let nx = seqs.count;
    let mut scratch = Vec::with_capacity(code.n);
    let mut best: Option<(usize, f64)> = None;
    for m in 0..code.sizes.m() {
        let cw = code.codeword(m);
        for x in 0..nx {
            if code.public_bins[m * nx + x] as usize != phi {
                continue;
            }
            let metric = sequence_likelihood(table, cw, seqs.get(x), y, &mut scratch);
            match best {
                Some((_, b)) if metric <= b => {}
                _ => best = Some((m * nx + x, metric)),
            }
        }
    }
    best.map(|(pair, _)| pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Alphabets, InputDistribution};
    use crate::exponents::RatePoint;
    use crate::simulator::code::{generate_code, index_of};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive argmax written against the raw channel law.
    fn brute_force(code: &SecretKeyCode, ch: &DiscreteBroadcastChannel, y: &[usize], phi: usize) -> Decoded {
        let a = ch.alphabets();
        let nx = code.sequences();
        let mut best: Option<(usize, usize, f64)> = None;
        for m in 0..code.sizes.m() {
            for x in 0..nx {
                if code.bin(m, x) as usize != phi {
                    continue;
                }
                let xs = code.sequence(x);
                let mut f: Vec<f64> = (0..code.n)
                    .map(|i| {
                        let s = code.codeword(m)[i] as usize;
                        (0..a.z).map(|z| ch.prob(s, xs[i], y[i], z)).sum::<f64>()
                    })
                    .collect();
                f.sort_by(f64::total_cmp);
                let metric: f64 = f.iter().product();
                if best.is_none_or(|(_, _, b)| metric > b) {
                    best = Some((m, x, metric));
                }
            }
        }
        best.map_or(Decoded { m: 0, x: 0 }, |(m, x, _)| Decoded { m, x })
    }

    #[test]
    fn lossless_observation_recovers_the_pair() {
        // Y = (S, X).
        let ch = DiscreteBroadcastChannel::from_fn(Alphabets::new(2, 2, 4, 1), vec![0.0; 2], |s, x, y, _| {
            if y == 2 * s + x {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let rates = RatePoint::new(0.5, 2.0, 1.0).unwrap();
        let code = generate_code(&ch, 1, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 2).unwrap();
        for m in 0..code.sizes.m() {
            for x in 0..2 {
                let s = code.codeword(m)[0] as usize;
                let phi = code.bin(m, x) as usize;
                let d = mlmap_decode(&code, &ch, &[2 * s + x], phi).unwrap();
                assert_eq!(code.codeword(d.m)[0] as usize, s);
                assert_eq!(d.x, x);
                let rivals = (0..code.sizes.m())
                    .filter(|&mm| mm != m && code.codeword(mm)[0] as usize == s && code.bin(mm, x) as usize == phi)
                    .count();
                if rivals == 0 {
                    assert_eq!(d.m, m);
                }
            }
        }
    }

    #[test]
    fn pure_source_decoding_is_map() {
        // One message, one bin, X independent of (S, Y) with P(X=1) = 0.3.
        let ch = DiscreteBroadcastChannel::from_fn(Alphabets::BINARY, vec![0.0; 2], |_, x, y, z| {
            [0.7, 0.3][x] * [0.5, 0.5][y] * [0.5, 0.5][z]
        })
        .unwrap();
        let rates = RatePoint::new(0.0, 0.0, 0.0).unwrap();
        let code = generate_code(&ch, 3, &rates, &InputDistribution::bernoulli(0.5).unwrap(), 0).unwrap();
        let d = mlmap_decode(&code, &ch, &[1, 0, 1], 0).unwrap();
        assert_eq!(d, Decoded { m: 0, x: index_of(&[0, 0, 0], 2) });
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap();
        let rates = RatePoint::new(0.5, 1.0, 1.0).unwrap();
        let code = generate_code(&ch, 2, &rates, &InputDistribution::bernoulli(0.4).unwrap(), 77).unwrap();
        for y in 0..4 {
            let ys = digits(y, 2, 2);
            for phi in 0..code.sizes.phi() {
                assert_eq!(mlmap_decode(&code, &ch, &ys, phi).unwrap(), brute_force(&code, &ch, &ys, phi));
            }
        }
    }

    #[test]
    fn empty_bin_defaults_to_first_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ch = DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap();
        // Four bins over two pairs: at least two are empty.
        let rates = RatePoint::new(0.0, 2.0, 0.0).unwrap();
        let code = generate_code(&ch, 1, &rates, &InputDistribution::bernoulli(0.4).unwrap(), 1).unwrap();
        let empty = (0..4).find(|&phi| (0..2).all(|x| code.bin(0, x) as usize != phi)).unwrap();
        assert_eq!(mlmap_decode(&code, &ch, &[1], empty).unwrap(), Decoded { m: 0, x: 0 });
        assert!(mlmap_decode(&code, &ch, &[1], 4).is_err());
        assert!(mlmap_decode(&code, &ch, &[2], 0).is_err());
    }
}
