//! Secret-key capacities and rate decompositions.
//!
//! For degraded channels the capacity is
//! `max_{p(s)} I(X,S;Y) − I(X,S;Z)`, which splits into the wiretap part
//! `R_ch = I(S;Y) − I(S;Z)` and the source part `R_src = I(X;Y|S) − I(X;Z|S)`.
//! For any channel, `max_{p(s)} I(X,S;Y|Z)` is an upper bound.

mod aux;
mod gaussian;
mod onoff;

use serde::{Deserialize, Serialize};

use crate::channel::{expected_cost, is_degraded, joint_distribution, DiscreteBroadcastChannel, InputDistribution,
                     DEFAULT_DEGRADED_TOL};
use crate::error::{Error, Result};
use crate::optimize::{maximize_on_simplex, OptimizerConfig};
use crate::prob::{conditional_mutual_information, mutual_information, JointPmf};

pub use aux::{
    general_rate_objective, public_rate_requirement, AuxiliarySystem, CardinalityBounds,
};
pub use gaussian::{c0, c1, gaussian_capacity, gaussian_rates};
pub use onoff::{
    binary_onoff_optimize, binary_onoff_rate, degraded_surrogate_source_rate, OnOffOptimum, OnOffRates,
};

/// Tolerance of the `C_SK = R_ch + R_src` self-check.
pub const SPLIT_TOLERANCE: f64 = 1e-9;

/// `(R_ch, R_src)` in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSplit {
    pub r_ch: f64,
    pub r_src: f64,
}

impl RateSplit {
    pub fn total(&self) -> f64 {
        self.r_ch + self.r_src
    }
}

/// How the optimizing input is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputLaw {
    Discrete(Vec<f64>),
    /// A closed-form law such as `N(0,P)`.
    Symbolic(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub r_ch: f64,
    pub r_src: f64,
    pub input_pmf: InputLaw,
    pub expected_cost: f64,
}

/// Result of maximizing a bound over the input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub input_pmf: Vec<f64>,
    pub expected_cost: f64,
}

/// Mutual-information terms of one `p(s) p(x,y,z|s)` joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoTerms {
    pub i_s_y: f64,
    pub i_s_z: f64,
    pub i_x_y_given_s: f64,
    pub i_x_z_given_s: f64,
}

impl InfoTerms {
    pub fn from_joint(joint: &JointPmf) -> Result<Self> {
        Ok(Self {
            i_s_y: mutual_information(&joint.group(&[&[0], &[2]])?)?,
            i_s_z: mutual_information(&joint.group(&[&[0], &[3]])?)?,
            i_x_y_given_s: conditional_mutual_information(&joint.group(&[&[1], &[2], &[0]])?)?,
            i_x_z_given_s: conditional_mutual_information(&joint.group(&[&[1], &[3], &[0]])?)?,
        })
    }

    pub fn split(&self) -> RateSplit {
        RateSplit {
            r_ch: self.i_s_y - self.i_s_z,
            r_src: self.i_x_y_given_s - self.i_x_z_given_s,
        }
    }
}

/// `(R_ch, R_src)` at a fixed input distribution.
pub fn rate_split(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<RateSplit> {
    Ok(InfoTerms::from_joint(&joint_distribution(channel, input)?)?.split())
}

/// `I(X,S;Y) − I(X,S;Z)`, computed without the split.
pub fn key_rate(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<f64> {
    let j = joint_distribution(channel, input)?;
    Ok(mutual_information(&j.group(&[&[0, 1], &[2]])?)? - mutual_information(&j.group(&[&[0, 1], &[3]])?)?)
}

/// `I(X,S;Y|Z)`.
pub fn upper_bound_objective(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<f64> {
    let j = joint_distribution(channel, input)?;
    conditional_mutual_information(&j.group(&[&[0, 1], &[2], &[3]])?)
}

fn objective_on_simplex<F>(channel: &DiscreteBroadcastChannel, f: F) -> impl Fn(&[f64]) -> f64 + Sync + Send + '_
where
    F: Fn(&DiscreteBroadcastChannel, &InputDistribution) -> Result<f64> + Sync + Send + 'static,
{
    move |p: &[f64]| match InputDistribution::from_probs(p.to_vec()) {
        Ok(input) => f(channel, &input).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Maximizes `f(channel, p(s))` over inputs with `E[Λ(S)] <= gamma`.
pub fn maximize_over_inputs<F>(
    channel: &DiscreteBroadcastChannel,
    gamma: f64,
    config: &OptimizerConfig,
    f: F,
) -> Result<BoundResult>
where
    F: Fn(&DiscreteBroadcastChannel, &InputDistribution) -> Result<f64> + Sync + Send + 'static,
{
    let m = maximize_on_simplex(channel.cost(), gamma, config, objective_on_simplex(channel, f))?;
    let input = InputDistribution::from_probs(m.point.clone())?;
    Ok(BoundResult {
        value: m.value,
        expected_cost: expected_cost(channel, &input)?,
        input_pmf: m.point,
    })
}

/// Secret-key capacity of a physically degraded channel under the cost
/// constraint `E[Λ(S)] <= gamma`. Non-degraded channels are refused.
pub fn degraded_capacity(
    channel: &DiscreteBroadcastChannel,
    gamma: f64,
    config: &OptimizerConfig,
) -> Result<CapacityResult> {
    if !is_degraded(channel, DEFAULT_DEGRADED_TOL) {
        return Err(Error::NotDegraded);
    }
    let best = maximize_over_inputs(channel, gamma, config, key_rate)?;
    let input = InputDistribution::from_probs(best.input_pmf.clone())?;
    let split = rate_split(channel, &input)?;
    if (split.total() - best.value).abs() > SPLIT_TOLERANCE {
        return Err(Error::SelfCheck(format!(
            "R_ch + R_src = {} differs from I(XS;Y) - I(XS;Z) = {}",
            split.total(),
            best.value
        )));
    }
    Ok(CapacityResult {
        capacity_bits: best.value,
        r_ch: split.r_ch,
        r_src: split.r_src,
        input_pmf: InputLaw::Discrete(best.input_pmf),
        expected_cost: best.expected_cost,
    })
}

/// `max I(X,S;Y|Z)` over inputs with `E[Λ(S)] <= gamma`.
pub fn upper_bound(channel: &DiscreteBroadcastChannel, gamma: f64, config: &OptimizerConfig) -> Result<BoundResult> {
    maximize_over_inputs(channel, gamma, config, upper_bound_objective)
}
