//! Sender-excited discrete memoryless broadcast channels `p(x,y,z|s)`.
//!
//! One input symbol `s` (Alice's sounding signal) produces Alice's own
//! observation `x`, Bob's `y` and Eve's `z`. Each input symbol carries a cost
//! `Λ(s) >= 0` used by the average-cost constraint.

mod families;
mod io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{increment, kahan_sum, JointPmf, Pmf, MASS_TOLERANCE};

pub use families::{build_binary_onoff, BinaryOnOffParams, GaussianInterferenceParams};
pub use io::ChannelFile;

/// Default tolerance of [`is_degraded`].
pub const DEFAULT_DEGRADED_TOL: f64 = 1e-9;

/// Alphabet sizes of a broadcast channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "Z")]
    pub z: usize,
}

impl Alphabets {
    pub const BINARY: Alphabets = Alphabets { s: 2, x: 2, y: 2, z: 2 };

    pub fn new(s: usize, x: usize, y: usize, z: usize) -> Self {
        Self { s, x, y, z }
    }

    /// Number of `(x, y, z)` outcomes per input symbol.
    pub fn outputs(&self) -> usize {
        self.x * self.y * self.z
    }
}

/// The channel law `p(x,y,z|s)` together with the per-letter input cost.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBroadcastChannel {
    alphabets: Alphabets,
    /// Row-major `[s][x][y][z]`.
    transition: Vec<f64>,
    cost: Vec<f64>,
}

impl DiscreteBroadcastChannel {
    pub fn new(alphabets: Alphabets, transition: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        let Alphabets { s, x, y, z } = alphabets;
        if [s, x, y, z].contains(&0) {
            return Err(Error::Dimension(format!("empty alphabet in {alphabets:?}")));
        }
        if transition.len() != s * alphabets.outputs() {
            return Err(Error::Dimension(format!(
                "transition has {} entries, expected {}",
                transition.len(),
                s * alphabets.outputs()
            )));
        }
        if cost.len() != s {
            return Err(Error::Dimension(format!("cost has {} entries, expected {s}", cost.len())));
        }
        if let Some(c) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Parameter(format!("cost {c} must be finite and >= 0")));
        }
        let ch = Self {
            alphabets,
            transition,
            cost,
        };
        for si in 0..s {
            let row = ch.row(si);
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvalidPmf(format!("row s={si} has entry {p}")));
            }
            let mass = kahan_sum(row.iter().copied());
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidPmf(format!("row s={si} has mass {mass}")));
            }
        }
        Ok(ch)
    }

    /// Builds a channel from `f(s, x, y, z)`.
    pub fn from_fn<F>(alphabets: Alphabets, cost: Vec<f64>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize) -> f64,
    {
        let shape = [alphabets.s, alphabets.x, alphabets.y, alphabets.z];
        let mut idx = [0usize; 4];
        let mut transition = Vec::with_capacity(shape.iter().product());
        for _ in 0..shape.iter().product::<usize>() {
            transition.push(f(idx[0], idx[1], idx[2], idx[3]));
            increment(&mut idx, &shape);
        }
        Self::new(alphabets, transition, cost)
    }

    /// A channel with i.i.d. flat-Dirichlet rows and zero cost.
    pub fn random<R: Rng + ?Sized>(alphabets: Alphabets, rng: &mut R) -> Result<Self> {
        let transition = (0..alphabets.s)
            .flat_map(|_| dirichlet_row(alphabets.outputs(), rng))
            .collect();
        Self::new(alphabets, transition, vec![0.0; alphabets.s])
    }

    /// A physically degraded channel `p(x,y|s) p(z|y)` with random factors and
    /// zero cost.
    pub fn random_degraded<R: Rng + ?Sized>(alphabets: Alphabets, rng: &mut R) -> Result<Self> {
        let Alphabets { s, x, y, z } = alphabets;
        let xy: Vec<Vec<f64>> = (0..s).map(|_| dirichlet_row(x * y, rng)).collect();
        let zy: Vec<Vec<f64>> = (0..y).map(|_| dirichlet_row(z, rng)).collect();
        Self::from_fn(alphabets, vec![0.0; s], |si, xi, yi, zi| xy[si][xi * y + yi] * zy[yi][zi])
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    /// Replaces the cost vector.
    pub fn with_cost(mut self, cost: Vec<f64>) -> Result<Self> {
        self = Self::new(self.alphabets, self.transition, cost)?;
        Ok(self)
    }

    #[inline]
    pub fn prob(&self, s: usize, x: usize, y: usize, z: usize) -> f64 {
        let a = &self.alphabets;
        self.transition[((s * a.x + x) * a.y + y) * a.z + z]
    }

    /// `p(·,·,·|s)` flattened over `(x, y, z)`.
    pub fn row(&self, s: usize) -> &[f64] {
        let n = self.alphabets.outputs();
        &self.transition[s * n..(s + 1) * n]
    }

    fn check_input(&self, input: &InputDistribution) -> Result<()> {
        if input.len() != self.alphabets.s {
            return Err(Error::Dimension(format!(
                "input distribution has {} symbols, channel input alphabet has {}",
                input.len(),
                self.alphabets.s
            )));
        }
        Ok(())
    }
}

pub(crate) fn dirichlet_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// The channel input distribution `p(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputDistribution(Pmf);

impl InputDistribution {
    pub fn new(pmf: Pmf) -> Self {
        Self(pmf)
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Ok(Self(Pmf::new(probs)?))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Ok(Self(Pmf::uniform(k)?))
    }

    /// `S ~ Bern(beta)` on a binary input alphabet.
    pub fn bernoulli(beta: f64) -> Result<Self> {
        Ok(Self(Pmf::bernoulli(beta)?))
    }

    pub fn pmf(&self) -> &Pmf {
        &self.0
    }

    pub fn probs(&self) -> &[f64] {
        self.0.probs()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `p(s) p(x,y,z|s)` as a joint over `S × X × Y × Z`.
pub fn joint_distribution(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<JointPmf> {
    channel.check_input(input)?;
    let a = channel.alphabets;
    let n = a.outputs();
    let probs = channel
        .transition
        .iter()
        .enumerate()
        .map(|(i, t)| input.probs()[i / n] * t)
        .collect();
    JointPmf::new(vec![a.s, a.x, a.y, a.z], probs)
}

/// `Σ_s p(s) Λ(s)`.
pub fn expected_cost(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<f64> {
    channel.check_input(input)?;
    Ok(kahan_sum(input.probs().iter().zip(&channel.cost).map(|(p, c)| p * c)))
}

/// Physical degradedness test for the Markov chain `(X,S) - Y - Z`.
///
/// For every `(s, x, y)` with positive probability under the uniform input,
/// `p(z|s,x,y)` must agree with `p(z|y)` to within `tol`. Stochastic
/// degradedness is not tested.
pub fn is_degraded(channel: &DiscreteBroadcastChannel, tol: f64) -> bool {
    let Alphabets { s, x, y, z } = channel.alphabets;
    // p(z|y) under the uniform input; the common 1/|S| factor cancels.
    let mut pz_y = vec![0.0; y * z];
    for yi in 0..y {
        let mut total = 0.0;
        for si in 0..s {
            for xi in 0..x {
                for zi in 0..z {
                    let p = channel.prob(si, xi, yi, zi);
                    pz_y[yi * z + zi] += p;
                    total += p;
                }
            }
        }
        if total > 0.0 {
            pz_y[yi * z..(yi + 1) * z].iter_mut().for_each(|v| *v /= total);
        }
    }
    for si in 0..s {
        for xi in 0..x {
            for yi in 0..y {
                let pxy: f64 = (0..z).map(|zi| channel.prob(si, xi, yi, zi)).sum();
                if pxy <= 0.0 {
                    continue;
                }
                for zi in 0..z {
                    if (channel.prob(si, xi, yi, zi) / pxy - pz_y[yi * z + zi]).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// One of the three channel outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    X,
    Y,
    Z,
}

/// A conditional law `p(targets|s)`; each row is flattened row-major over the
/// targets in the order they were requested.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    input_size: usize,
    output_shape: Vec<usize>,
    data: Vec<f64>,
}

impl ConditionalTable {
    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn row_len(&self) -> usize {
        self.output_shape.iter().product()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let n = self.row_len();
        &self.data[s * n..(s + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Marginalizes the channel onto a subset of its outputs.
pub fn marginal_channel(channel: &DiscreteBroadcastChannel, targets: &[Output]) -> Result<ConditionalTable> {
    if targets.is_empty() {
        return Err(Error::Dimension("marginal channel needs at least one target".into()));
    }
    let mut sorted = targets.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != targets.len() {
        return Err(Error::Dimension("repeated target".into()));
    }
    let a = channel.alphabets;
    let sizes = [a.x, a.y, a.z];
    let axis = |o: Output| match o {
        Output::X => 0,
        Output::Y => 1,
        Output::Z => 2,
    };
    let output_shape: Vec<usize> = targets.iter().map(|&o| sizes[axis(o)]).collect();
    let row_len: usize = output_shape.iter().product();
    let mut data = vec![0.0; a.s * row_len];
    for s in 0..a.s {
        let mut idx = [0usize; 3];
        for &p in channel.row(s) {
            let mut flat = 0;
            for &o in targets {
                flat = flat * sizes[axis(o)] + idx[axis(o)];
            }
            data[s * row_len + flat] += p;
            increment(&mut idx, &sizes);
        }
    }
    Ok(ConditionalTable {
        input_size: a.s,
        output_shape,
        data,
    })
}
