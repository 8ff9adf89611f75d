//! Reliability and secrecy exponents of the random-binning key agreement
//! scheme.
//!
//! For an input `p(s)` and rates `(R_SK, R_Φ, R_M)`:
//!
//! ```text
//! tilE_o(ρ) = ρ(R_Φ − R_M) − log2 Σ_y [Σ_{s,x} p(s) p(x,y|s)^{1/(1+ρ)}]^{1+ρ}
//! tilF_o(α) = −α(R_SK + R_Φ − R_M) − log2 Σ_{x,z,s} p(x,z,s) [p(x,z|s)/p(z)]^α
//! ```
//!
//! `E_o` is the maximum of `tilE_o` over `ρ ∈ [0,1]` and `F_o` the supremum of
//! `tilF_o` over `α ∈ (0,1]`. Both objectives are concave in their inner
//! parameter. All exponents here are achievability lower bounds.

use serde::{Deserialize, Serialize};

use crate::capacity::maximize_over_inputs;
use crate::channel::{is_degraded, joint_distribution, DiscreteBroadcastChannel, InputDistribution, DEFAULT_DEGRADED_TOL};
use crate::error::{check_range, Error, Result};
use crate::optimize::{maximize_scalar, OptimizerConfig};
use crate::prob::{conditional_mutual_information, kahan_sum, mutual_information};

/// Golden-section iterations for the inner parameter.
pub const INNER_ITERATIONS: usize = 200;
/// Left end of the `α` search interval.
pub const ALPHA_MIN: f64 = 1e-6;
/// Tolerance of the degraded-form check in [`strong_achievability_bound`].
pub const STRONG_FORM_TOLERANCE: f64 = 1e-9;

/// `(R_SK, R_Φ, R_M)` in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r_sk: f64,
    pub r_phi: f64,
    pub r_m: f64,
}

impl RatePoint {
    pub fn new(r_sk: f64, r_phi: f64, r_m: f64) -> Result<Self> {
        for (name, v) in [("r_sk", r_sk), ("r_phi", r_phi), ("r_m", r_m)] {
            check_range(name, v, 0.0, f64::MAX, "[0, inf)")?;
        }
        Ok(Self { r_sk, r_phi, r_m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    /// Optimum of the inner objective, before any clamping.
    pub value: f64,
    /// Maximizing `ρ` or `α`.
    pub argmax: f64,
    /// Whether [`ExponentResult::exponent`] reports `max(0, value)`.
    pub clamped: bool,
}

impl ExponentResult {
    /// The reported exponent.
    pub fn exponent(&self) -> f64 {
        if self.clamped {
            self.value.max(0.0)
        } else {
            self.value
        }
    }
}

/// Per-letter tables for fast repeated evaluation of both objectives.
#[derive(Debug, Clone)]
pub struct ExponentKernel {
    /// Per `y`: `(ln p(s), ln p(x,y|s))` over the positive entries.
    reliability: Vec<Vec<(f64, f64)>>,
    /// `(p(x,z,s), ln [p(x,z|s)/p(z)])` over the positive entries.
    secrecy: Vec<(f64, f64)>,
}

impl ExponentKernel {
    pub fn new(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<Self> {
        let joint = joint_distribution(channel, input)?;
        let a = channel.alphabets();
        let ps = input.probs();
        let mut reliability = vec![Vec::new(); a.y];
        for s in 0..a.s {
            if ps[s] <= 0.0 {
                continue;
            }
            for x in 0..a.x {
                for (y, entries) in reliability.iter_mut().enumerate() {
                    let pxy: f64 = (0..a.z).map(|z| channel.prob(s, x, y, z)).sum();
                    if pxy > 0.0 {
                        entries.push((ps[s].ln(), pxy.ln()));
                    }
                }
            }
        }
        let pz = joint.marginal_pmf(3)?;
        let mut secrecy = Vec::new();
        for s in 0..a.s {
            for x in 0..a.x {
                for z in 0..a.z {
                    let pxz_s: f64 = (0..a.y).map(|y| channel.prob(s, x, y, z)).sum();
                    let p = ps[s] * pxz_s;
                    if p > 0.0 {
                        secrecy.push((p, (pxz_s / pz.get(z)).ln()));
                    }
                }
            }
        }
        Ok(Self { reliability, secrecy })
    }

    /// `log2 Σ_y [Σ_{s,x} p(s) p(x,y|s)^{1/(1+ρ)}]^{1+ρ}`.
    pub fn gallager_term(&self, rho: f64) -> f64 {
        let r = 1.0 + rho;
        let total = kahan_sum(self.reliability.iter().map(|entries| {
            let inner = kahan_sum(entries.iter().map(|&(ls, lp)| (ls + lp / r).exp()));
            inner.powf(r)
        }));
        total.log2()
    }

    /// `log2 Σ p(x,z,s) [p(x,z|s)/p(z)]^α`.
    pub fn secrecy_term(&self, alpha: f64) -> f64 {
        kahan_sum(self.secrecy.iter().map(|&(p, lr)| p * (alpha * lr).exp())).log2()
    }

    pub fn reliability_objective(&self, rho: f64, rates: &RatePoint) -> Result<f64> {
        check_range("rho", rho, 0.0, 1.0, "[0, 1]")?;
        Ok(self.reliability_at(rho, rates.r_phi - rates.r_m))
    }

    fn reliability_at(&self, rho: f64, net_rate: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        rho * net_rate - self.gallager_term(rho)
    }

    pub fn secrecy_objective(&self, alpha: f64, rates: &RatePoint) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                domain: "(0, 1]",
            });
        }
        Ok(self.secrecy_at(alpha, rates.r_sk + rates.r_phi - rates.r_m))
    }

    fn secrecy_at(&self, alpha: f64, load: f64) -> f64 {
        -alpha * load - self.secrecy_term(alpha)
    }

    /// `E_o`: maximum over `ρ ∈ [0,1]`. Never negative.
    pub fn reliability_exponent(&self, rates: &RatePoint) -> ExponentResult {
        let net = rates.r_phi - rates.r_m;
        let (argmax, value) = maximize_scalar(|rho| self.reliability_at(rho, net), 0.0, 1.0, INNER_ITERATIONS);
        ExponentResult {
            value,
            argmax,
            clamped: false,
        }
    }

    /// `F_o`: supremum over `α ∈ [ALPHA_MIN, 1]`, reported clamped at zero.
    pub fn secrecy_exponent(&self, rates: &RatePoint) -> ExponentResult {
        let load = rates.r_sk + rates.r_phi - rates.r_m;
        let (argmax, value) = maximize_scalar(|a| self.secrecy_at(a, load), ALPHA_MIN, 1.0, INNER_ITERATIONS);
        ExponentResult {
            value,
            argmax,
            clamped: true,
        }
    }
}

pub fn reliability_objective(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    rho: f64,
    rates: &RatePoint,
) -> Result<f64> {
    ExponentKernel::new(channel, input)?.reliability_objective(rho, rates)
}

pub fn reliability_exponent(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    rates: &RatePoint,
) -> Result<ExponentResult> {
    Ok(ExponentKernel::new(channel, input)?.reliability_exponent(rates))
}

pub fn secrecy_objective(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    alpha: f64,
    rates: &RatePoint,
) -> Result<f64> {
    ExponentKernel::new(channel, input)?.secrecy_objective(alpha, rates)
}

pub fn secrecy_exponent(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    rates: &RatePoint,
) -> Result<ExponentResult> {
    Ok(ExponentKernel::new(channel, input)?.secrecy_exponent(rates))
}

/// Rate thresholds for exponent positivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityThresholds {
    /// `H(X|Y,S) − I(S;Y)`; `E_o > 0` iff `R_Φ − R_M` exceeds it.
    pub reliability: f64,
    /// `H(X|Z,S) − I(S;Z)`; `F_o > 0` iff `R_SK + R_Φ − R_M` is below it.
    pub secrecy: f64,
}

pub fn positivity_thresholds(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
) -> Result<PositivityThresholds> {
    let j = joint_distribution(channel, input)?;
    let h = |axes: &[usize]| -> Result<f64> { Ok(j.marginal(axes)?.entropy()) };
    let h_x_given_ys = h(&[0, 1, 2])? - h(&[0, 2])?;
    let h_x_given_zs = h(&[0, 1, 3])? - h(&[0, 3])?;
    let i_sy = mutual_information(&j.group(&[&[0], &[2]])?)?;
    let i_sz = mutual_information(&j.group(&[&[0], &[3]])?)?;
    Ok(PositivityThresholds {
        reliability: h_x_given_ys - i_sy,
        secrecy: h_x_given_zs - i_sz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongBound {
    /// `I(X,S;Y) − I(X,S;Z)`.
    pub value: f64,
    /// `I(X,S;Y|Z)`, present when the channel is degraded.
    pub degraded_form: Option<f64>,
}

/// Largest strongly achievable key rate at a fixed input. On degraded
/// channels both forms are computed and must agree.
pub fn strong_achievability_bound(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
) -> Result<StrongBound> {
    let j = joint_distribution(channel, input)?;
    let value = mutual_information(&j.group(&[&[0, 1], &[2]])?)? - mutual_information(&j.group(&[&[0, 1], &[3]])?)?;
    let degraded_form = if is_degraded(channel, DEFAULT_DEGRADED_TOL) {
        let cmi = conditional_mutual_information(&j.group(&[&[0, 1], &[2], &[3]])?)?;
        if (cmi - value).abs() > STRONG_FORM_TOLERANCE {
            return Err(Error::SelfCheck(format!(
                "I(XS;Y) - I(XS;Z) = {value} but I(XS;Y|Z) = {cmi} on a degraded channel"
            )));
        }
        Some(cmi)
    } else {
        None
    };
    Ok(StrongBound { value, degraded_form })
}

/// An exponent optimized over the input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedExponent {
    pub result: ExponentResult,
    pub input_pmf: Vec<f64>,
}

/// `E_r` and `F_r`: `E_o` and `F_o` maximized separately over `p(s)`.
pub fn optimized_exponents(
    channel: &DiscreteBroadcastChannel,
    rates: &RatePoint,
    config: &OptimizerConfig,
) -> Result<(OptimizedExponent, OptimizedExponent)> {
    let free = channel.clone().with_cost(vec![0.0; channel.alphabets().s])?;
    let r = *rates;
    let e = maximize_over_inputs(&free, f64::INFINITY, config, move |c, p| {
        Ok(ExponentKernel::new(c, p)?.reliability_exponent(&r).value)
    })?;
    let f = maximize_over_inputs(&free, f64::INFINITY, config, move |c, p| {
        Ok(ExponentKernel::new(c, p)?.secrecy_exponent(&r).value)
    })?;
    let finish = |pmf: Vec<f64>, reliability: bool| -> Result<OptimizedExponent> {
        let kernel = ExponentKernel::new(channel, &InputDistribution::from_probs(pmf.clone())?)?;
        let result = if reliability {
            kernel.reliability_exponent(rates)
        } else {
            kernel.secrecy_exponent(rates)
        };
        Ok(OptimizedExponent { result, input_pmf: pmf })
    };
    Ok((finish(e.input_pmf, true)?, finish(f.input_pmf, false)?))
}

/// Whether `(E, F)` lies in the achievable exponent region at `p(s)`.
pub fn region_membership(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    rates: &RatePoint,
    e: f64,
    f: f64,
) -> Result<bool> {
    check_range("E", e, 0.0, f64::INFINITY, "[0, inf)")?;
    check_range("F", f, 0.0, f64::INFINITY, "[0, inf)")?;
    let kernel = ExponentKernel::new(channel, input)?;
    Ok(e <= kernel.reliability_exponent(rates).exponent() && f <= kernel.secrecy_exponent(rates).exponent())
}
