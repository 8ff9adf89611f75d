use serde::{Deserialize, Serialize};

use super::{Alphabets, DiscreteBroadcastChannel};
use crate::error::{check_range, Error, Result};

/// Parameters of the binary on-off model
/// `X = H·S ⊕ N1`, `Y = H·S ⊕ N2`, `Z = (H̃·H)·S ⊕ N3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryOnOffParams {
    /// `P(H = 1)`.
    pub q: f64,
    /// `P(H̃ = 1)`.
    pub q_tilde: f64,
    /// Crossover of `N1` and `N2`.
    pub delta: f64,
    /// Crossover of `N3`.
    pub delta3: f64,
}

impl BinaryOnOffParams {
    pub fn new(q: f64, q_tilde: f64, delta: f64, delta3: f64) -> Result<Self> {
        let p = Self {
            q,
            q_tilde,
            delta,
            delta3,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("q", self.q, 0.0, 1.0, "[0, 1]")?;
        check_range("q_tilde", self.q_tilde, 0.0, 1.0, "[0, 1]")?;
        check_range("delta", self.delta, 0.0, 0.5, "[0, 1/2)")?;
        check_range("delta3", self.delta3, 0.0, 0.5, "[0, 1/2)")?;
        if self.delta >= 0.5 || self.delta3 >= 0.5 {
            return Err(Error::Parameter("crossover probabilities must be below 1/2".into()));
        }
        if self.q_tilde * self.delta > self.delta3 {
            return Err(Error::Parameter(format!(
                "q_tilde * delta = {} exceeds delta3 = {}",
                self.q_tilde * self.delta,
                self.delta3
            )));
        }
        let d = self.degraded_noise();
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Parameter(format!("derived noise {d} outside [0, 1]")));
        }
        Ok(())
    }

    /// `δ'3 = (δ3 − q̃δ) / (1 − 2q̃δ)`.
    pub fn degraded_noise(&self) -> f64 {
        let qd = self.q_tilde * self.delta;
        (self.delta3 - qd) / (1.0 - 2.0 * qd)
    }
}

/// Builds the binary on-off channel by exact enumeration of the five latent
/// bits `(H, H̃, N1, N2, N3)`. Costs are zero.
pub fn build_binary_onoff(params: &BinaryOnOffParams) -> Result<DiscreteBroadcastChannel> {
    params.validate()?;
    let bern = |p: f64, b: usize| if b == 1 { p } else { 1.0 - p };
    let mut t = vec![0.0; 8 * 2];
    for s in 0..2 {
        for atom in 0..32usize {
            let bit = |i: usize| (atom >> i) & 1;
            let (h, ht, n1, n2, n3) = (bit(0), bit(1), bit(2), bit(3), bit(4));
            let w = bern(params.q, h)
                * bern(params.q_tilde, ht)
                * bern(params.delta, n1)
                * bern(params.delta, n2)
                * bern(params.delta3, n3);
            let x = (h & s) ^ n1;
            let y = (h & s) ^ n2;
            let z = (ht & h & s) ^ n3;
            t[s * 8 + x * 4 + y * 2 + z] += w;
        }
    }
    DiscreteBroadcastChannel::new(Alphabets::BINARY, t, vec![0.0; 2])
}

/// Parameters of the scalar Gaussian interference model. Index 0 is Alice,
/// 1 is Bob and 2 is Eve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianInterferenceParams {
    pub power: f64,
    /// Interference standard deviations `ν1, ν2, ν3`.
    pub nu: [f64; 3],
    /// Noise standard deviations `σ1, σ2, σ3`.
    pub sigma: [f64; 3],
    pub rho12: f64,
    pub rho13: f64,
}

impl GaussianInterferenceParams {
    pub fn new(power: f64, nu: [f64; 3], sigma: [f64; 3], rho12: f64, rho13: f64) -> Result<Self> {
        let p = Self {
            power,
            nu,
            sigma,
            rho12,
            rho13,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("power", self.power, 0.0, f64::MAX, "[0, inf)")?;
        for (&v, name) in self.nu.iter().zip(["nu1", "nu2", "nu3"]) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        for (&v, name) in self.sigma.iter().zip(["sigma1", "sigma2", "sigma3"]) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        for (v, name) in [(self.rho12, "rho12"), (self.rho13, "rho13")] {
            if !(v > -1.0 && v < 1.0) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(-1, 1)",
                });
            }
        }
        if self.total_variance(2) < self.total_variance(1) {
            return Err(Error::Parameter(format!(
                "Eve's interference-plus-noise variance {} is below Bob's {}",
                self.total_variance(2),
                self.total_variance(1)
            )));
        }
        Ok(())
    }

    /// `νi² + σi²`.
    pub fn total_variance(&self, i: usize) -> f64 {
        self.nu[i] * self.nu[i] + self.sigma[i] * self.sigma[i]
    }

    pub fn with_power(mut self, power: f64) -> Result<Self> {
        self.power = power;
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::is_degraded;
    use approx::assert_abs_diff_eq;

    #[test]
    fn onoff_validation() {
        assert!(BinaryOnOffParams::new(0.5, 0.8, 0.1, 0.2).is_ok());
        assert!(BinaryOnOffParams::new(1.0, 1.0, 0.0, 0.0).is_ok());
        assert!(BinaryOnOffParams::new(0.5, 0.8, 0.3, 0.2).is_err());
        assert!(BinaryOnOffParams::new(1.5, 0.8, 0.1, 0.2).is_err());
        assert!(BinaryOnOffParams::new(0.5, 0.8, 0.5, 0.5).is_err());
        let p = BinaryOnOffParams::new(0.5, 0.8, 0.1, 0.2).unwrap();
        assert_abs_diff_eq!(p.degraded_noise(), 0.12 / 0.84, epsilon = 1e-15);
    }

    #[test]
    fn onoff_q_zero_ignores_input() {
        let ch = build_binary_onoff(&BinaryOnOffParams::new(0.0, 0.3, 0.1, 0.2).unwrap()).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(ch.row(0)[i], ch.row(1)[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn onoff_noiseless_copies_input() {
        let ch = build_binary_onoff(&BinaryOnOffParams::new(1.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(ch.prob(0, 0, 0, 0), 1.0);
        assert_eq!(ch.prob(1, 1, 1, 1), 1.0);
    }

    #[test]
    fn onoff_rows_sum_to_one_on_grid() {
        for &q in &[0.0, 0.3, 0.5, 1.0] {
            for &qt in &[0.0, 0.5, 0.8, 1.0] {
                for &d in &[0.0, 0.05, 0.1] {
                    for &d3 in &[0.1, 0.2, 0.4] {
                        let Ok(p) = BinaryOnOffParams::new(q, qt, d, d3) else {
                            continue;
                        };
                        let ch = build_binary_onoff(&p).unwrap();
                        for s in 0..2 {
                            assert_abs_diff_eq!(ch.row(s).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn onoff_x_and_y_share_the_fade() {
        let ch = build_binary_onoff(&BinaryOnOffParams::new(0.5, 0.8, 0.1, 0.2).unwrap()).unwrap();
        let pxy = |x: usize, y: usize| ch.prob(1, x, y, 0) + ch.prob(1, x, y, 1);
        let px1 = pxy(1, 0) + pxy(1, 1);
        let py1 = pxy(0, 1) + pxy(1, 1);
        assert!((pxy(1, 1) - px1 * py1).abs() > 1e-3);
    }

    #[test]
    fn onoff_is_not_physically_degraded_when_eve_fades() {
        // Z depends on H̃ and on H beyond Y, so (X,S)-Y-Z only holds in corner cases.
        let ch = build_binary_onoff(&BinaryOnOffParams::new(0.5, 0.8, 0.1, 0.2).unwrap()).unwrap();
        assert!(!is_degraded(&ch, 1e-9));
        let trivial = build_binary_onoff(&BinaryOnOffParams::new(0.0, 0.8, 0.1, 0.2).unwrap()).unwrap();
        assert!(is_degraded(&trivial, 1e-9));
    }

    #[test]
    fn gaussian_validation() {
        let ok = GaussianInterferenceParams::new(1.0, [1.0, 1.0, 2.0], [1.0; 3], 0.8, 0.3);
        assert!(ok.is_ok());
        assert!(GaussianInterferenceParams::new(1.0, [1.0, 2.0, 1.0], [1.0; 3], 0.8, 0.3).is_err());
        assert!(GaussianInterferenceParams::new(-1.0, [1.0, 1.0, 2.0], [1.0; 3], 0.8, 0.3).is_err());
        assert!(GaussianInterferenceParams::new(1.0, [0.0, 1.0, 2.0], [1.0; 3], 0.8, 0.3).is_err());
        assert!(GaussianInterferenceParams::new(1.0, [1.0, 1.0, 2.0], [1.0; 3], 1.0, 0.3).is_err());
        assert!(ok.unwrap().with_power(f64::NAN).is_err());
    }
}
