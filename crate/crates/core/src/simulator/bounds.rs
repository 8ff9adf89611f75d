//! Finite-blocklength ensemble bounds for the random-binning code.
//!
//! ```text
//! P(error) ≤ |Φ|^{−ρ} |M|^{ρ} [Σ_y Ψ(y,ρ)]^n,                     0 ≤ ρ ≤ 1
//! Ψ(y,ρ)   = [Σ_s p(s) p(y|s)^{1/(1+ρ)} Σ_x p(x|y,s)^{1/(1+ρ)}]^{1+ρ}
//!
//! I(K;Z^n,Φ) ≤ c(α) |K|^α |Φ|^α |M|^{−α} [Σ_{s,x,z} Υ(s,x,z,α)]^n,  0 < α ≤ 1
//! Υ(s,x,z,α) = p(s,x,z) [(p(z|s)/p(z)) p(x|s,z)]^α,   c(α) = log2(e)/α
//! ```
//!
//! Sizes are the integer code sizes, not the nominal rates.

use serde::{Deserialize, Serialize};

use super::code::CodeSizes;
use crate::channel::{joint_distribution, DiscreteBroadcastChannel, InputDistribution};
use crate::error::{check_range, Error, Result};
use crate::exponents::{RatePoint, ALPHA_MIN, INNER_ITERATIONS};
use crate::optimize::maximize_scalar;
use crate::prob::kahan_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub raw: f64,
    /// `min(raw, 1)`.
    pub clipped: f64,
}

/// A bound minimized over its free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedBound {
    pub parameter: f64,
    pub value: f64,
}

/// Single-letter sums behind both bounds for one `(channel, input)`.
#[derive(Debug, Clone)]
pub struct BoundKernel {
    /// Per `y`, per `s`: `(p(s), p(y|s), [p(x|y,s)])`.
    psi: Vec<Vec<(f64, f64, Vec<f64>)>>,
    /// `(p(s,x,z), (p(z|s)/p(z)) p(x|s,z))` over positive atoms.
    upsilon: Vec<(f64, f64)>,
}

impl BoundKernel {
    pub fn new(channel: &DiscreteBroadcastChannel, input: &InputDistribution) -> Result<Self> {
        let a = channel.alphabets();
        let ps = input.probs();
        let joint = joint_distribution(channel, input)?;
        let sxy = joint.marginal(&[0, 1, 2])?;
        let sxz = joint.marginal(&[0, 1, 3])?;
        let pz = joint.marginal_pmf(3)?;

        let mut psi = vec![Vec::new(); a.y];
        for (y, per_s) in psi.iter_mut().enumerate() {
            for s in 0..a.s {
                if ps[s] <= 0.0 {
                    continue;
                }
                let pxy: Vec<f64> = (0..a.x).map(|x| sxy.get(&[s, x, y])).collect();
                let psy: f64 = pxy.iter().sum();
                if psy <= 0.0 {
                    continue;
                }
                per_s.push((ps[s], psy / ps[s], pxy.iter().map(|p| p / psy).collect()));
            }
        }

        let mut upsilon = Vec::new();
        for s in 0..a.s {
            if ps[s] <= 0.0 {
                continue;
            }
            for z in 0..a.z {
                let psz: f64 = (0..a.x).map(|x| sxz.get(&[s, x, z])).sum();
                if psz <= 0.0 {
                    continue;
                }
                let ratio = (psz / ps[s]) / pz.get(z);
                for x in 0..a.x {
                    let p = sxz.get(&[s, x, z]);
                    if p > 0.0 {
                        upsilon.push((p, ratio * p / psz));
                    }
                }
            }
        }
        Ok(Self { psi, upsilon })
    }

    /// `log2 Σ_y Ψ(y, ρ)`.
    pub fn log_psi_sum(&self, rho: f64) -> f64 {
        let r = 1.0 + rho;
        kahan_sum(self.psi.iter().map(|per_s| {
            kahan_sum(per_s.iter().map(|(p_s, py_s, px)| {
                p_s * py_s.powf(1.0 / r) * kahan_sum(px.iter().map(|p| p.powf(1.0 / r)))
            }))
            .powf(r)
        }))
        .log2()
    }

    /// `log2 Σ Υ(s,x,z,α)`.
    pub fn log_upsilon_sum(&self, alpha: f64) -> f64 {
        kahan_sum(self.upsilon.iter().map(|&(p, v)| p * v.powf(alpha))).log2()
    }

    /// `log2` of the error bound.
    pub fn log_error_bound(&self, n: usize, rho: f64, sizes: &CodeSizes) -> f64 {
        rho * (sizes.m_bits as f64 - sizes.phi_bits as f64) + n as f64 * self.log_psi_sum(rho)
    }

    /// `log2` of the leakage bound.
    pub fn log_leakage_bound(&self, n: usize, alpha: f64, sizes: &CodeSizes) -> f64 {
        let load = sizes.k_bits as f64 + sizes.phi_bits as f64 - sizes.m_bits as f64;
        (std::f64::consts::LOG2_E / alpha).log2() + alpha * load + n as f64 * self.log_upsilon_sum(alpha)
    }

    pub fn min_error_bound(&self, n: usize, sizes: &CodeSizes) -> OptimizedBound {
        let (rho, neg) = maximize_scalar(|r| -self.log_error_bound(n, r, sizes), 0.0, 1.0, INNER_ITERATIONS);
        OptimizedBound {
            parameter: rho,
            value: (-neg).exp2(),
        }
    }

    pub fn min_leakage_bound(&self, n: usize, sizes: &CodeSizes) -> OptimizedBound {
        let (alpha, neg) =
            maximize_scalar(|a| -self.log_leakage_bound(n, a, sizes), ALPHA_MIN, 1.0, INNER_ITERATIONS);
        OptimizedBound {
            parameter: alpha,
            value: (-neg).exp2(),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("blocklength must be at least 1".into()));
    }
    Ok(())
}

/// Error bound at a fixed `ρ ∈ [0, 1]`.
pub fn ensemble_error_bound(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    n: usize,
    rho: f64,
    rates: &RatePoint,
) -> Result<ErrorBound> {
    check_range("rho", rho, 0.0, 1.0, "[0, 1]")?;
    check_n(n)?;
    let sizes = CodeSizes::from_rates(n, rates)?;
    let raw = BoundKernel::new(channel, input)?.log_error_bound(n, rho, &sizes).exp2();
    Ok(ErrorBound {
        raw,
        clipped: raw.min(1.0),
    })
}

/// Leakage bound in bits at a fixed `α ∈ (0, 1]`.
pub fn ensemble_leakage_bound(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    n: usize,
    alpha: f64,
    rates: &RatePoint,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            domain: "(0, 1]",
        });
    }
    check_n(n)?;
    let sizes = CodeSizes::from_rates(n, rates)?;
    Ok(BoundKernel::new(channel, input)?.log_leakage_bound(n, alpha, &sizes).exp2())
}
