use serde::{Deserialize, Serialize};

use super::bounds::BoundKernel;
use super::code::{generate_code_on_stream, CodeSizes, DEFAULT_TABLE_BUDGET};
use super::evaluate::{exact_evaluate_with_budget, DEFAULT_ENUMERATION_BUDGET};
use crate::channel::{DiscreteBroadcastChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponents::RatePoint;
use crate::par;
use crate::prob::kahan_sum;

/// Exact results for one codebook of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub n: usize,
    pub codebook_index: usize,
    pub exact_error: f64,
    pub exact_leakage_bits: f64,
}

/// Ensemble average of one quantity against its minimized bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub average: f64,
    /// Sample standard deviation across codebooks.
    pub std_dev: f64,
    /// `3·std_dev/√N`.
    pub slack: f64,
    pub bound: f64,
    /// Minimizing `ρ` or `α`.
    pub parameter: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(values: &[f64], bound: f64, parameter: f64) -> Self {
        let (average, std_dev) = mean_and_std(values);
        let slack = 3.0 * std_dev / (values.len() as f64).sqrt();
        Self {
            average,
            std_dev,
            slack,
            bound,
            parameter,
            pass: average <= bound + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub n: usize,
    pub sizes: CodeSizes,
    pub num_codebooks: usize,
    pub seed: u64,
    pub error: BoundCheck,
    pub leakage: BoundCheck,
    pub rows: Vec<EnsembleRow>,
}

impl EnsembleReport {
    pub fn pass(&self) -> bool {
        self.error.pass && self.leakage.pass
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, var.sqrt())
}

/// Draws `num_codebooks` codes (codebook `i` on ChaCha20 stream `i` of
/// `seed`), evaluates each exactly and compares the averages with the
/// minimized ensemble bounds.
pub fn ensemble_average(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    n: usize,
    rates: &RatePoint,
    num_codebooks: usize,
    seed: u64,
) -> Result<EnsembleReport> {
    if num_codebooks == 0 {
        return Err(Error::Parameter("at least one codebook is required".into()));
    }
    let sizes = CodeSizes::from_rates(n, rates)?;
    // Fail on budget before spawning the ensemble.
    let first = generate_code_on_stream(channel, n, rates, input, seed, 0, DEFAULT_TABLE_BUDGET)?;
    exact_evaluate_with_budget(&first, channel, DEFAULT_ENUMERATION_BUDGET)?;

    let rows = par::map_range(num_codebooks, |i| -> Result<EnsembleRow> {
        let code = generate_code_on_stream(channel, n, rates, input, seed, i as u64, DEFAULT_TABLE_BUDGET)?;
        let r = exact_evaluate_with_budget(&code, channel, DEFAULT_ENUMERATION_BUDGET)?;
        Ok(EnsembleRow {
            n,
            codebook_index: i,
            exact_error: r.error_probability,
            exact_leakage_bits: r.leakage_bits.unwrap_or(0.0),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let kernel = BoundKernel::new(channel, input)?;
    let eb = kernel.min_error_bound(n, &sizes);
    let lb = kernel.min_leakage_bound(n, &sizes);
    let errors: Vec<f64> = rows.iter().map(|r| r.exact_error).collect();
    let leaks: Vec<f64> = rows.iter().map(|r| r.exact_leakage_bits).collect();
    Ok(EnsembleReport {
        n,
        sizes,
        num_codebooks,
        seed,
        error: BoundCheck::new(&errors, eb.value, eb.parameter),
        leakage: BoundCheck::new(&leaks, lb.value, lb.parameter),
        rows,
    })
}

/// Least-squares slope of `−log2(value)` against `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// `None` when fewer than two values are positive.
    pub slope: Option<f64>,
    /// Blocklengths that entered the fit.
    pub used: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Fits `−log2(values[i]) ≈ a + slope·ns[i]`, skipping non-positive values.
pub fn fit_slope(ns: &[usize], values: &[f64]) -> Result<SlopeFit> {
    if ns.len() != values.len() {
        return Err(Error::Dimension("ns and values differ in length".into()));
    }
    let mut warnings = Vec::new();
    let mut pts = Vec::new();
    for (&n, &v) in ns.iter().zip(values) {
        if v > 0.0 {
            pts.push((n as f64, -v.log2()));
        } else {
            warnings.push(format!("n = {n} excluded: average is {v}"));
        }
    }
    let used: Vec<usize> = ns.iter().zip(values).filter(|(_, &v)| v > 0.0).map(|(&n, _)| n).collect();
    if pts.len() < 2 {
        warnings.push(format!("only {} usable blocklengths; slope not fitted", pts.len()));
        return Ok(SlopeFit {
            slope: None,
            used,
            warnings,
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all usable blocklengths are equal".into()));
    }
    Ok(SlopeFit {
        slope: Some(sxy / sxx),
        used,
        warnings,
    })
}

/// Non-asymptotic exponent estimates from ensemble averages over a range of
/// blocklengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub error: SlopeFit,
    pub leakage: SlopeFit,
    pub reports: Vec<EnsembleReport>,
}

pub fn empirical_exponent_fit(
    channel: &DiscreteBroadcastChannel,
    input: &InputDistribution,
    rates: &RatePoint,
    n_range: &[usize],
    num_codebooks: usize,
    seed: u64,
) -> Result<ExponentFit> {
    if n_range.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 blocklengths, got {}",
            n_range.len()
        )));
    }
    let reports = n_range
        .iter()
        .map(|&n| ensemble_average(channel, input, n, rates, num_codebooks, seed))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = reports.iter().map(|r| r.error.average).collect();
    let leaks: Vec<f64> = reports.iter().map(|r| r.leakage.average).collect();
    Ok(ExponentFit {
        error: fit_slope(n_range, &errors)?,
        leakage: fit_slope(n_range, &leaks)?,
        reports,
    })
}
