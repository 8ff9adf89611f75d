//! Finite-alphabet probability mass functions and information measures.
//!
//! All quantities are in bits. Sums run in the natural-log domain with
//! compensated (Kahan) accumulation and are converted to bits at the end.
//! Zero-probability terms are skipped, so `0 log 0 = 0` and `0^a = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Tolerance on total mass accepted by [`Pmf::new`] and [`JointPmf::new`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Compensated summation accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Kahan sum of an iterator of values.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<KahanSum>().total()
}

fn validate_mass(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty alphabet".into()));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidPmf(format!("entry {i} = {p}")));
    }
    let total = kahan_sum(probs.iter().copied());
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidPmf(format!("total mass {total}")));
    }
    Ok(())
}

/// A validated probability mass function over `{0, ..., k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_mass(&probs)?;
        Ok(Self { probs })
    }

    /// Rescales non-negative weights to unit mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPmf("negative or non-finite weight".into()));
        }
        let total = kahan_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidPmf("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::InvalidPmf(format!("point mass at {at} outside alphabet of size {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// `(1 - beta, beta)`.
    pub fn bernoulli(beta: f64) -> Result<Self> {
        check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            probs: vec![1.0 - beta, beta],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Pmf::new(probs)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

/// A joint pmf over a product of finite alphabets, stored densely in
/// row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Dimension(format!("invalid shape {shape:?}")));
        }
        let size: usize = shape.iter().product();
        if size != probs.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {size} entries, got {}",
                probs.len()
            )));
        }
        validate_mass(&probs)?;
        Ok(Self { shape, probs })
    }

    /// Builds the joint from `f(multi_index)`; the result must have unit mass.
    pub fn from_fn<F: FnMut(&[usize]) -> f64>(shape: Vec<usize>, mut f: F) -> Result<Self> {
        let size: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut probs = Vec::with_capacity(size);
        for _ in 0..size {
            probs.push(f(&idx));
            increment(&mut idx, &shape);
        }
        Self::new(shape, probs)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Entry at a multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, &n) in idx.iter().zip(&self.shape) {
            flat = flat * n + i;
        }
        self.probs[flat]
    }

    /// Regroups axes: each group of original axes becomes one axis of the
    /// result (flattened row-major within the group). Axes that appear in no
    /// group are summed out.
    pub fn group(&self, groups: &[&[usize]]) -> Result<JointPmf> {
        let mut seen = vec![false; self.ndim()];
        for &axis in groups.iter().flat_map(|g| g.iter()) {
            if axis >= self.ndim() || seen[axis] {
                return Err(Error::Dimension(format!(
                    "axis {axis} repeated or out of range for {}-axis joint",
                    self.ndim()
                )));
            }
            seen[axis] = true;
        }
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::Dimension("empty axis group".into()));
        }
        let new_shape: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&a| self.shape[a]).product())
            .collect();
        let mut acc = vec![KahanSum::new(); new_shape.iter().product()];
        let mut idx = vec![0usize; self.ndim()];
        for &p in &self.probs {
            if p != 0.0 {
                let mut flat = 0;
                for g in groups {
                    for &a in g.iter() {
                        flat = flat * self.shape[a] + idx[a];
                    }
                }
                acc[flat].add(p);
            }
            increment(&mut idx, &self.shape);
        }
        Ok(JointPmf {
            shape: new_shape,
            probs: acc.iter().map(KahanSum::total).collect(),
        })
    }

    /// Marginal over the listed axes, in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        let groups: Vec<&[usize]> = axes.iter().map(std::slice::from_ref).collect();
        self.group(&groups)
    }

    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        let m = self.marginal(&[axis])?;
        Ok(Pmf { probs: m.probs })
    }

    /// Joint entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }
}

/// Odometer increment of a row-major multi-index.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for d in (0..shape.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}

/// Shannon entropy in bits of an (unvalidated) probability vector.
pub fn entropy_of(probs: &[f64]) -> f64 {
    let nats = kahan_sum(probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()));
    nats / std::f64::consts::LN_2
}

/// Shannon entropy `H(p)` in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(&p.probs)
}

/// Binary entropy function `Hb(a)`.
pub fn binary_entropy(a: f64) -> Result<f64> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    Ok(entropy_of(&[a, 1.0 - a]))
}

/// Binary convolution `a(1-b) + (1-a)b`: the crossover probability of two
/// cascaded binary symmetric channels.
pub fn bsc_convolve(a: f64, b: f64) -> Result<f64> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    check_range("b", b, 0.0, 1.0, "[0, 1]")?;
    Ok(a * (1.0 - b) + (1.0 - a) * b)
}

/// `I(A;B)` of a two-axis joint.
pub fn mutual_information(joint: &JointPmf) -> Result<f64> {
    if joint.ndim() != 2 {
        return Err(Error::Dimension(format!(
            "mutual information needs a 2-axis joint, got {}",
            joint.ndim()
        )));
    }
    let ha = joint.marginal(&[0])?.entropy();
    let hb = joint.marginal(&[1])?.entropy();
    Ok(ha + hb - joint.entropy())
}

/// `I(A;B|C)` of a three-axis joint, conditioning on the last axis.
pub fn conditional_mutual_information(joint: &JointPmf) -> Result<f64> {
    if joint.ndim() != 3 {
        return Err(Error::Dimension(format!(
            "conditional mutual information needs a 3-axis joint, got {}",
            joint.ndim()
        )));
    }
    let hac = joint.marginal(&[0, 2])?.entropy();
    let hbc = joint.marginal(&[1, 2])?.entropy();
    let hc = joint.marginal(&[2])?.entropy();
    Ok(hac + hbc - joint.entropy() - hc)
}

/// Rényi entropy of order `1 + alpha`, `alpha` in `(0, 1]`:
/// `-(1/alpha) log2 sum p^(1+alpha)`.
pub fn renyi_entropy(p: &Pmf, order: f64) -> Result<f64> {
    let alpha = order - 1.0;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain {
            name: "order - 1",
            value: alpha,
            domain: "(0, 1]",
        });
    }
    let s = kahan_sum(
        p.probs
            .iter()
            .filter(|&&q| q > 0.0)
            .map(|&q| q.powf(1.0 + alpha)),
    );
    Ok(-s.log2() / alpha)
}
