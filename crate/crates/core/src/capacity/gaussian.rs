use super::{CapacityResult, InputLaw, RateSplit};
use crate::channel::GaussianInterferenceParams;
use crate::error::Result;

/// `½ log2(1 + snr)`.
pub fn c0(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}

/// Key rate from two correlated interference terms observed through noise.
pub fn c1(rho: f64, nu: (f64, f64), sigma: (f64, f64)) -> f64 {
    let (vi, vj) = (nu.0 * nu.0, nu.1 * nu.1);
    let (si, sj) = (sigma.0 * sigma.0, sigma.1 * sigma.1);
    let common = rho * rho * vi * vj;
    c0(common / ((vi + si) * (vj + sj) - common))
}

/// `(R_ch, R_src)` of the Gaussian interference model at power `P`.
pub fn gaussian_rates(params: &GaussianInterferenceParams) -> Result<RateSplit> {
    params.validate()?;
    let p = params.power;
    let r_ch = c0(p / params.total_variance(1)) - c0(p / params.total_variance(2));
    let pair = |j: usize| (params.nu[0], params.nu[j]);
    let noise = |j: usize| (params.sigma[0], params.sigma[j]);
    let r_src = c1(params.rho12, pair(1), noise(1)) - c1(params.rho13, pair(2), noise(2));
    Ok(RateSplit { r_ch, r_src })
}

/// Capacity under `E[S²] <= P`, attained by `S ~ N(0,P)`.
pub fn gaussian_capacity(params: &GaussianInterferenceParams) -> Result<CapacityResult> {
    let split = gaussian_rates(params)?;
    Ok(CapacityResult {
        capacity_bits: split.total(),
        r_ch: split.r_ch,
        r_src: split.r_src,
        input_pmf: InputLaw::Symbolic(format!("N(0,{})", params.power)),
        expected_cost: params.power,
    })
}
