use rand::Rng;

use crate::channel::{dirichlet_row, DiscreteBroadcastChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::prob::{conditional_mutual_information, JointPmf, MASS_TOLERANCE};

/// Largest auxiliary alphabets needed for an input alphabet of size `s` and
/// source alphabet of size `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardinalityBounds {
    pub w: usize,
    pub u: usize,
    pub v: usize,
}

impl CardinalityBounds {
    pub fn for_alphabets(s: usize, x: usize) -> Self {
        Self {
            w: s + 7,
            u: (s + 5) * (s + 7),
            v: x * (s + 5) * (s + 7) * (s + 7) + 3,
        }
    }
}

/// Auxiliary variables `p(w) p(u|w) p(s|u) p(v|w,u,x)`. Together with the
/// channel this gives `W − U − (S,X) − (Y,Z)` and `V − (W,U,X) − (S,Y,Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySystem {
    sizes: [usize; 5],
    p_w: Vec<f64>,
    p_u_w: Vec<f64>,
    p_s_u: Vec<f64>,
    p_v_wux: Vec<f64>,
}

fn check_rows(name: &str, data: &[f64], row: usize) -> Result<()> {
    for (i, r) in data.chunks(row).enumerate() {
        if let Some(p) = r.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!("{name} row {i} has entry {p}")));
        }
        let mass: f64 = r.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidPmf(format!("{name} row {i} has mass {mass}")));
        }
    }
    Ok(())
}

fn flatten(name: &str, rows: Vec<Vec<f64>>, width: usize) -> Result<Vec<f64>> {
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::Dimension(format!("{name} row has length {}, expected {width}", r.len())));
    }
    Ok(rows.into_iter().flatten().collect())
}

impl AuxiliarySystem {
    /// `p_v_wux[w][u][x]` is the row `p(·|w,u,x)`.
    pub fn new(
        p_w: Vec<f64>,
        p_u_w: Vec<Vec<f64>>,
        p_s_u: Vec<Vec<f64>>,
        p_v_wux: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        let w = p_w.len();
        let u = p_u_w.first().map_or(0, Vec::len);
        let s = p_s_u.first().map_or(0, Vec::len);
        let x = p_v_wux.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let v = p_v_wux
            .first()
            .and_then(|r| r.first())
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        if [w, u, s, x, v].contains(&0) {
            return Err(Error::Dimension("auxiliary alphabets must be non-empty".into()));
        }
        if p_u_w.len() != w || p_s_u.len() != u || p_v_wux.len() != w {
            return Err(Error::Dimension("inconsistent auxiliary table sizes".into()));
        }
        let mut flat_v = Vec::with_capacity(w * u * x * v);
        for by_u in p_v_wux {
            if by_u.len() != u {
                return Err(Error::Dimension("p(v|w,u,x) has the wrong number of u rows".into()));
            }
            for by_x in by_u {
                if by_x.len() != x {
                    return Err(Error::Dimension("p(v|w,u,x) has the wrong number of x rows".into()));
                }
                flat_v.extend(flatten("p(v|w,u,x)", by_x, v)?);
            }
        }
        Self::from_flat([w, u, v, s, x], p_w, flatten("p(u|w)", p_u_w, u)?, flatten("p(s|u)", p_s_u, s)?, flat_v)
    }

    fn from_flat(
        sizes: [usize; 5],
        p_w: Vec<f64>,
        p_u_w: Vec<f64>,
        p_s_u: Vec<f64>,
        p_v_wux: Vec<f64>,
    ) -> Result<Self> {
        let [w, u, v, s, x] = sizes;
        check_rows("p(w)", &p_w, w)?;
        check_rows("p(u|w)", &p_u_w, u)?;
        check_rows("p(s|u)", &p_s_u, s)?;
        check_rows("p(v|w,u,x)", &p_v_wux, v)?;
        let bounds = CardinalityBounds::for_alphabets(s, x);
        if w > bounds.w || u > bounds.u || v > bounds.v {
            return Err(Error::Dimension(format!(
                "auxiliary sizes (|W|,|U|,|V|) = ({w},{u},{v}) exceed the bounds {bounds:?}"
            )));
        }
        Ok(Self {
            sizes,
            p_w,
            p_u_w,
            p_s_u,
            p_v_wux,
        })
    }

    /// `W` constant, `U = S` and `V = X`.
    pub fn identity(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<Self> {
        let a = channel.alphabets();
        let eye = |k: usize| -> Vec<f64> { (0..k * k).map(|i| if i / k == i % k { 1.0 } else { 0.0 }).collect() };
        Self::from_flat([1, a.s, a.x, a.s, a.x], vec![1.0], input.probs().to_vec(), eye(a.s), {
            let mut t = Vec::with_capacity(a.s * a.x * a.x);
            for _ in 0..a.s {
                t.extend(eye(a.x));
            }
            t
        })
    }

    /// This system with `V` replaced by a constant.
    pub fn without_satellite(&self) -> Result<Self> {
        let [w, u, _, s, x] = self.sizes;
        Self::from_flat(
            [w, u, 1, s, x],
            self.p_w.clone(),
            self.p_u_w.clone(),
            self.p_s_u.clone(),
            vec![1.0; w * u * x],
        )
    }

    /// Random conditionals with the given auxiliary sizes.
    pub fn random<R: Rng + ?Sized>(
        channel: &DiscreteBroadcastChannel,
        w: usize,
        u: usize,
        v: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let a = channel.alphabets();
        let rows = |n: usize, k: usize, rng: &mut R| -> Vec<f64> { (0..n).flat_map(|_| dirichlet_row(k, rng)).collect() };
        let p_w = rows(1, w, rng);
        let p_u_w = rows(w, u, rng);
        let p_s_u = rows(u, a.s, rng);
        let p_v_wux = rows(w * u * a.x, v, rng);
        Self::from_flat([w, u, v, a.s, a.x], p_w, p_u_w, p_s_u, p_v_wux)
    }

    /// `(|W|, |U|, |V|)`.
    pub fn aux_sizes(&self) -> (usize, usize, usize) {
        (self.sizes[0], self.sizes[1], self.sizes[2])
    }

    fn check_channel(&self, channel: &DiscreteBroadcastChannel) -> Result<()> {
        let a = channel.alphabets();
        let [_, _, _, s, x] = self.sizes;
        if a.s != s || a.x != x {
            return Err(Error::Dimension(format!(
                "auxiliary system is built for |S|={s}, |X|={x}; channel has |S|={}, |X|={}",
                a.s, a.x
            )));
        }
        Ok(())
    }

    /// The joint `p(w,u,s,x,y,z,v)` with axes in that order.
    pub fn joint(&self, channel: &DiscreteBroadcastChannel) -> Result<JointPmf> {
        self.check_channel(channel)?;
        let a = channel.alphabets();
        let [w, u, v, s, x] = self.sizes;
        JointPmf::from_fn(vec![w, u, s, x, a.y, a.z, v], |i| {
            let (wi, ui, si, xi, yi, zi, vi) = (i[0], i[1], i[2], i[3], i[4], i[5], i[6]);
            self.p_w[wi]
                * self.p_u_w[wi * u + ui]
                * self.p_s_u[ui * s + si]
                * channel.prob(si, xi, yi, zi)
                * self.p_v_wux[((wi * u + ui) * x + xi) * v + vi]
        })
    }
}

const W: usize = 0;
const U: usize = 1;
const X: usize = 3;
const Y: usize = 4;
const Z: usize = 5;
const V: usize = 6;

/// `I(U,V;Y|W) − I(U,V;Z|W)`.
pub fn general_rate_objective(channel: &DiscreteBroadcastChannel, aux: &AuxiliarySystem) -> Result<f64> {
    let j = aux.joint(channel)?;
    let bob = conditional_mutual_information(&j.group(&[&[U, V], &[Y], &[W]])?)?;
    let eve = conditional_mutual_information(&j.group(&[&[U, V], &[Z], &[W]])?)?;
    Ok(bob - eve)
}

/// `I(V;X|U,W) − I(V;Y|U,W)`. Negative values mean no public rate is needed.
pub fn public_rate_requirement(channel: &DiscreteBroadcastChannel, aux: &AuxiliarySystem) -> Result<f64> {
    let j = aux.joint(channel)?;
    let alice = conditional_mutual_information(&j.group(&[&[V], &[X], &[W, U]])?)?;
    let bob = conditional_mutual_information(&j.group(&[&[V], &[Y], &[W, U]])?)?;
    Ok(alice - bob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{key_rate, rate_split};
    use crate::channel::Alphabets;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force `I(A;B|C)` from a dense map over `(a, b, c)` triples.
    fn cmi_oracle(entries: &[((usize, usize, usize), f64)]) -> f64 {
        use std::collections::HashMap;
        let mut abc: HashMap<(usize, usize, usize), f64> = HashMap::new();
        let mut ac: HashMap<(usize, usize), f64> = HashMap::new();
        let mut bc: HashMap<(usize, usize), f64> = HashMap::new();
        let mut c: HashMap<usize, f64> = HashMap::new();
        for &((ai, bi, ci), p) in entries {
            *abc.entry((ai, bi, ci)).or_default() += p;
            *ac.entry((ai, ci)).or_default() += p;
            *bc.entry((bi, ci)).or_default() += p;
            *c.entry(ci).or_default() += p;
        }
        abc.iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&(ai, bi, ci), &p)| p * (p * c[&ci] / (ac[&(ai, ci)] * bc[&(bi, ci)])).log2())
            .sum()
    }

    /// Enumerates the full joint directly from the factors, without
    /// `AuxiliarySystem::joint`.
    fn enumerate(
        ch: &DiscreteBroadcastChannel,
        aux: &AuxiliarySystem,
        key: impl Fn([usize; 7]) -> (usize, usize, usize),
    ) -> Vec<((usize, usize, usize), f64)> {
        let a = ch.alphabets();
        let [w, u, v, s, x] = aux.sizes;
        let mut out = Vec::new();
        for wi in 0..w {
            for ui in 0..u {
                for si in 0..s {
                    for xi in 0..x {
                        for yi in 0..a.y {
                            for zi in 0..a.z {
                                for vi in 0..v {
                                    let p = aux.p_w[wi]
                                        * aux.p_u_w[wi * u + ui]
                                        * aux.p_s_u[ui * s + si]
                                        * ch.prob(si, xi, yi, zi)
                                        * aux.p_v_wux[((wi * u + ui) * x + xi) * v + vi];
                                    out.push((key([wi, ui, si, xi, yi, zi, vi]), p));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn random_case(seed: u64) -> (DiscreteBroadcastChannel, AuxiliarySystem) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap();
        let aux = AuxiliarySystem::random(&ch, 2, 3, 3, &mut rng).unwrap();
        (ch, aux)
    }

    #[test]
    fn identity_choice_gives_key_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ch = DiscreteBroadcastChannel::random(Alphabets::new(3, 2, 2, 2), &mut rng).unwrap();
        let input = InputDistribution::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
        let aux = AuxiliarySystem::identity(&ch, &input).unwrap();
        let g = general_rate_objective(&ch, &aux).unwrap();
        assert_abs_diff_eq!(g, key_rate(&ch, &input).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(g, rate_split(&ch, &input).unwrap().total(), epsilon = 1e-12);
    }

    #[test]
    fn constant_satellite_gives_wiretap_part() {
        let (ch, aux) = random_case(22);
        let aux = aux.without_satellite().unwrap();
        let g = general_rate_objective(&ch, &aux).unwrap();
        let bob = cmi_oracle(&enumerate(&ch, &aux, |i| (i[1], i[4], i[0])));
        let eve = cmi_oracle(&enumerate(&ch, &aux, |i| (i[1], i[5], i[0])));
        assert_abs_diff_eq!(g, bob - eve, epsilon = 1e-10);
        assert_eq!(public_rate_requirement(&ch, &aux).unwrap(), 0.0);
    }

    #[test]
    fn random_system_matches_enumeration() {
        for seed in 0..5 {
            let (ch, aux) = random_case(30 + seed);
            let (_, _, v) = aux.aux_sizes();
            let uv = move |i: [usize; 7]| i[1] * v + i[6];
            let bob = cmi_oracle(&enumerate(&ch, &aux, |i| (uv(i), i[4], i[0])));
            let eve = cmi_oracle(&enumerate(&ch, &aux, |i| (uv(i), i[5], i[0])));
            assert_abs_diff_eq!(general_rate_objective(&ch, &aux).unwrap(), bob - eve, epsilon = 1e-10);

            let wu = |i: [usize; 7]| i[0] * 3 + i[1];
            let alice = cmi_oracle(&enumerate(&ch, &aux, |i| (i[6], i[3], wu(i))));
            let bob = cmi_oracle(&enumerate(&ch, &aux, |i| (i[6], i[4], wu(i))));
            assert_abs_diff_eq!(public_rate_requirement(&ch, &aux).unwrap(), alice - bob, epsilon = 1e-10);
        }
    }

    #[test]
    fn bob_knowing_x_needs_no_public_rate() {
        // Y is an exact copy of X.
        let ch = DiscreteBroadcastChannel::from_fn(Alphabets::BINARY, vec![0.0; 2], |s, x, y, z| {
            let px = if x == s { 0.8 } else { 0.2 };
            if y == x {
                px * 0.5 * (z as f64 + 0.5)
            } else {
                0.0
            }
        })
        .unwrap();
        let aux = AuxiliarySystem::identity(&ch, &InputDistribution::bernoulli(0.3).unwrap()).unwrap();
        assert_abs_diff_eq!(public_rate_requirement(&ch, &aux).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = DiscreteBroadcastChannel::random(Alphabets::BINARY, &mut rng).unwrap();
        let bounds = CardinalityBounds::for_alphabets(2, 2);
        assert_eq!(bounds, CardinalityBounds { w: 9, u: 63, v: 2 * 7 * 81 + 3 });
        assert!(AuxiliarySystem::random(&ch, 10, 2, 2, &mut rng).is_err());
        assert!(AuxiliarySystem::new(vec![1.0], vec![vec![0.5, 0.4]], vec![vec![1.0, 0.0]; 2], vec![vec![vec![vec![1.0]; 2]; 2]])
            .is_err());
        let ok =
            AuxiliarySystem::new(vec![1.0], vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]; 2], vec![vec![vec![vec![1.0]; 2]; 2]])
                .unwrap();
        let wide = DiscreteBroadcastChannel::random(Alphabets::new(3, 2, 2, 2), &mut rng).unwrap();
        assert!(general_rate_objective(&wide, &ok).is_err());
        assert!(general_rate_objective(&ch, &ok).is_ok());
    }
}
