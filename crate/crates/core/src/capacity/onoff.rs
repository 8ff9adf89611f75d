//! Closed forms for the binary on-off channel with input `S ~ Bern(β)`.

use serde::{Deserialize, Serialize};

use crate::channel::BinaryOnOffParams;
use crate::error::{check_range, Result};
use crate::optimize::{maximize_scalar, TIE_TOLERANCE};
use crate::par;

/// Grid points of [`binary_onoff_optimize`] before refinement.
pub const BETA_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffRates {
    pub r_sk: f64,
    pub r_ch: f64,
    pub r_src: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffOptimum {
    pub beta_star: f64,
    pub capacity_bits: f64,
    pub r_ch: f64,
    pub r_src: f64,
}

fn hb(a: f64) -> f64 {
    if a <= 0.0 || a >= 1.0 {
        return 0.0;
    }
    -(a * a.log2() + (1.0 - a) * (1.0 - a).log2())
}

fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// `I(S;Y) − I(S;Z)`.
fn wiretap_rate(p: &BinaryOnOffParams, beta: f64) -> f64 {
    let (q, qt, d, d3) = (p.q, p.q_tilde, p.delta, p.delta3);
    let i_sy = hb(conv(beta * q, d)) - beta * hb(conv(q, d)) - (1.0 - beta) * hb(d);
    let i_sz = hb(conv(beta * qt * q, d3)) - beta * hb(conv(qt * q, d3)) - (1.0 - beta) * hb(d3);
    i_sy - i_sz
}

/// `I(X;Y|S=1) − I(X;Z|S=1)`, conditioning on the shared fade `H` through
/// Alice's observation `X`.
fn source_rate_given_on(p: &BinaryOnOffParams) -> f64 {
    let (q, qt, d, d3) = (p.q, p.q_tilde, p.delta, p.delta3);
    let px1 = conv(q, d);
    let px = [1.0 - px1, px1];
    let h_given_x = [
        if px[0] > 0.0 { q * d / px[0] } else { 0.0 },
        if px[1] > 0.0 { q * (1.0 - d) / px[1] } else { 0.0 },
    ];
    let mut h_y_given_x = 0.0;
    let mut h_z_given_x = 0.0;
    for x in 0..2 {
        h_y_given_x += px[x] * hb(conv(h_given_x[x], d));
        h_z_given_x += px[x] * hb(conv(qt * h_given_x[x], d3));
    }
    let i_xy = hb(conv(q, d)) - h_y_given_x;
    let i_xz = hb(conv(qt * q, d3)) - h_z_given_x;
    i_xy - i_xz
}

/// `(R_SK, R_ch, R_src)` at `S ~ Bern(beta)`. `R_src` is linear in `beta`
/// since no source randomness is excited when `S = 0`.
pub fn binary_onoff_rate(params: &BinaryOnOffParams, beta: f64) -> Result<OnOffRates> {
    params.validate()?;
    check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
    let r_ch = wiretap_rate(params, beta);
    let r_src = beta * source_rate_given_on(params);
    Ok(OnOffRates {
        r_sk: r_ch + r_src,
        r_ch,
        r_src,
    })
}

/// Source rate obtained by replacing Eve's output with the surrogate
/// `Z' = H̃'·Y ⊕ N3'`, `N3' ~ Bern(δ'3)`. Kept for comparison only: the
/// surrogate is not distributed like `Z` given `S = 1`, so this does not
/// equal `I(X;Y|S) − I(X;Z|S)` for the on-off channel.
pub fn degraded_surrogate_source_rate(params: &BinaryOnOffParams, beta: f64) -> Result<f64> {
    params.validate()?;
    check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
    let (q, qt, d, d3) = (params.q, params.q_tilde, params.delta, params.delta3);
    let d3p = params.degraded_noise();
    let qd = conv(q, d);
    Ok(beta
        * (hb(qd) - hb(conv(d, d)) - hb(conv(qt * q, d3)) + (1.0 - qd) * hb(d3p) + qd * hb(conv(qt, d3p))))
}

/// Maximizes `R_SK(β)` on a 1001-point grid followed by golden-section
/// refinement within one grid step. Ties go to the smaller `β`.
pub fn binary_onoff_optimize(params: &BinaryOnOffParams) -> Result<OnOffOptimum> {
    params.validate()?;
    let step = 1.0 / (BETA_GRID_POINTS - 1) as f64;
    let rate = |b: f64| wiretap_rate(params, b) + b * source_rate_given_on(params);
    let values = par::map_range(BETA_GRID_POINTS, |i| rate(i as f64 * step));
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] + TIE_TOLERANCE {
            best = i;
        }
    }
    let center = best as f64 * step;
    let (lo, hi) = ((center - step).max(0.0), (center + step).min(1.0));
    let (b, v) = maximize_scalar(rate, lo, hi, 200);
    let beta_star = if v > values[best] + TIE_TOLERANCE { b } else { center };
    let r = binary_onoff_rate(params, beta_star)?;
    Ok(OnOffOptimum {
        beta_star,
        capacity_bits: r.r_sk,
        r_ch: r.r_ch,
        r_src: r.r_src,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::rate_split;
    use crate::channel::{build_binary_onoff, InputDistribution};
    use approx::assert_abs_diff_eq;

    fn figure_params() -> BinaryOnOffParams {
        BinaryOnOffParams::new(0.5, 0.8, 0.1, 0.2).unwrap()
    }

    #[test]
    fn zero_beta_gives_zero_rates() {
        let r = binary_onoff_rate(&figure_params(), 0.0).unwrap();
        assert_eq!(r.r_src, 0.0);
        assert_abs_diff_eq!(r.r_ch, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn perfect_eavesdropper_gives_zero_curve() {
        let p = BinaryOnOffParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        for i in 0..=10 {
            let r = binary_onoff_rate(&p, i as f64 / 10.0).unwrap();
            assert_abs_diff_eq!(r.r_sk, 0.0, epsilon = 1e-15);
        }
        let o = binary_onoff_optimize(&p).unwrap();
        assert_eq!(o.beta_star, 0.0);
        assert_abs_diff_eq!(o.capacity_bits, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn matches_generic_evaluation() {
        let ch = build_binary_onoff(&figure_params()).unwrap();
        for i in 0..=20 {
            let beta = i as f64 / 20.0;
            let closed = binary_onoff_rate(&figure_params(), beta).unwrap();
            let generic = rate_split(&ch, &InputDistribution::bernoulli(beta).unwrap()).unwrap();
            assert_abs_diff_eq!(closed.r_ch, generic.r_ch, epsilon = 1e-12);
            assert_abs_diff_eq!(closed.r_src, generic.r_src, epsilon = 1e-12);
        }
    }

    #[test]
    fn frozen_values_at_figure_parameters() {
        // Reference values from an independent enumeration of the 32 latent
        // atoms in double precision.
        let r = binary_onoff_rate(&figure_params(), 1.0).unwrap();
        assert_abs_diff_eq!(r.r_src, 0.20894, epsilon = 1e-5);
        let r = binary_onoff_rate(&figure_params(), 0.59).unwrap();
        assert_abs_diff_eq!(r.r_ch, 0.092157, epsilon = 1e-6);
        assert_abs_diff_eq!(r.r_src, 0.123277, epsilon = 1e-6);
        let surrogate = degraded_surrogate_source_rate(&figure_params(), 1.0).unwrap();
        assert_abs_diff_eq!(surrogate, 0.0577, epsilon = 1e-4);
    }

    #[test]
    fn optimum_dominates_grid() {
        let p = figure_params();
        let o = binary_onoff_optimize(&p).unwrap();
        assert_abs_diff_eq!(o.beta_star, 0.7665, epsilon = 1e-3);
        for i in 0..=1000 {
            let r = binary_onoff_rate(&p, i as f64 / 1000.0).unwrap();
            assert!(o.capacity_bits >= r.r_sk - 1e-12);
        }
        assert_abs_diff_eq!(o.capacity_bits, o.r_ch + o.r_src, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(binary_onoff_rate(&figure_params(), 1.1).is_err());
        assert!(degraded_surrogate_source_rate(&figure_params(), -0.1).is_err());
    }
}
