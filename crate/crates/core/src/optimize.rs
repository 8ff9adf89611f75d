//! Scalar and simplex maximization shared by the capacity and exponent code.
//!
//! Simplex search evaluates a uniform composition grid (in parallel, reduced
//! in index order) and then polishes the best point by pairwise mass
//! transfers. Ties always go to the earlier candidate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Values within this distance of the best are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Grid step for binary input alphabets.
    pub step_binary: f64,
    /// Grid step for ternary input alphabets.
    pub step_ternary: f64,
    /// Largest grid evaluated for bigger alphabets.
    pub max_grid_points: usize,
    /// Line-search iterations per pairwise transfer.
    pub line_iterations: usize,
    /// Stop refining once the transfer bracket is below this width.
    pub min_step: f64,
    /// Upper limit on refinement sweeps.
    pub max_sweeps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_binary: 1e-3,
            step_ternary: 1e-2,
            max_grid_points: 20_000,
            line_iterations: 60,
            min_step: 1e-10,
            max_sweeps: 200,
        }
    }
}

impl OptimizerConfig {
    /// Number of grid subdivisions used for an alphabet of size `k`.
    pub fn resolution(&self, k: usize) -> usize {
        match k {
            0 | 1 => 1,
            2 => (1.0 / self.step_binary).round().max(1.0) as usize,
            3 => (1.0 / self.step_ternary).round().max(1.0) as usize,
            _ => {
                let mut n = 1;
                while composition_count(n + 1, k) <= self.max_grid_points as u128 {
                    n += 1;
                }
                n
            }
        }
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the final interior estimate; equal probes keep the left part.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    let eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..iterations {
        if b - a <= f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden-section search followed by a comparison with both endpoints.
/// Among candidates within [`TIE_TOLERANCE`] of the best, the smallest
/// argument wins.
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    let (xm, fm) = golden_section_max(&f, lo, hi, iterations);
    let candidates = [(lo, f(lo)), (xm, fm), (hi, f(hi))];
    pick_first_best(&candidates)
}

fn pick_first_best(candidates: &[(f64, f64)]) -> (f64, f64) {
    let best = candidates
        .iter()
        .map(|c| c.1)
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .copied()
        .find(|c| c.1 >= best - TIE_TOLERANCE)
        .unwrap_or(candidates[0])
}

/// `C(n + k - 1, k - 1)`: number of grid points with resolution `n` on the
/// `k`-simplex.
pub fn composition_count(n: usize, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let (n, r) = (n as u128, (k - 1) as u128);
    let mut c: u128 = 1;
    for i in 1..=r {
        c = c * (n + i) / i;
    }
    c
}

/// All points of the `k`-simplex with coordinates in `{0, 1/n, ..., 1}`,
/// in lexicographic order of the integer compositions (first coordinate
/// smallest first).
pub fn simplex_grid(k: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut counts = vec![0usize; k];
    fill(&mut counts, 0, n, n, &mut out);
    out
}

fn fill(counts: &mut [usize], pos: usize, left: usize, n: usize, out: &mut Vec<Vec<f64>>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(counts.iter().map(|&c| c as f64 / n as f64).collect());
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        fill(counts, pos + 1, left - c, n, out);
    }
}

/// Result of a simplex maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
}

fn dot(p: &[f64], c: &[f64]) -> f64 {
    p.iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Maximizes `f` over the probability simplex of dimension `cost.len()`
/// subject to `Σ p_i cost_i <= gamma`. `gamma = f64::INFINITY` removes the
/// constraint.
pub fn maximize_on_simplex<F>(cost: &[f64], gamma: f64, config: &OptimizerConfig, f: F) -> Result<Maximum>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let k = cost.len();
    if k == 0 {
        return Err(Error::Dimension("empty input alphabet".into()));
    }
    if gamma.is_nan() {
        return Err(Error::Parameter("gamma is NaN".into()));
    }
    let (cheapest, min_cost) = cost
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, c)| if c < acc.1 { (i, c) } else { acc });
    if gamma < min_cost {
        return Err(Error::Infeasible { gamma, min_cost });
    }
    let feasible = |p: &[f64]| dot(p, cost) <= gamma + 1e-12;
    let eval = |p: &[f64]| {
        let v = f(p);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut grid: Vec<Vec<f64>> = simplex_grid(k, config.resolution(k))
        .into_iter()
        .filter(|p| feasible(p))
        .collect();
    if grid.is_empty() {
        let mut p = vec![0.0; k];
        p[cheapest] = 1.0;
        grid.push(p);
    }
    let values = par::map_slice(&grid, |p| eval(p));
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let mut point = grid.swap_remove(best);
    let mut value = values[best];

    let mut h = if k == 2 {
        config.step_binary
    } else if k == 3 {
        config.step_ternary
    } else {
        1.0 / config.resolution(k) as f64
    };
    let mut sweeps = 0;
    while k > 1 && h >= config.min_step && sweeps < config.max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for i in 0..k {
            for j in (i + 1)..k {
                // Move t from j to i.
                let mut lo = (-h).max(-point[i]);
                let mut hi = h.min(point[j]);
                let dc = cost[i] - cost[j];
                if gamma.is_finite() && dc != 0.0 {
                    let slack = (gamma - dot(&point, cost)).max(0.0);
                    if dc > 0.0 {
                        hi = hi.min(slack / dc);
                    } else {
                        lo = lo.max(slack / dc);
                    }
                }
                if hi - lo <= 0.0 {
                    continue;
                }
                let moved = |t: f64| {
                    let mut q = point.clone();
                    q[i] = (q[i] + t).clamp(0.0, 1.0);
                    q[j] = (q[j] - t).clamp(0.0, 1.0);
                    q
                };
                let (t, v) = golden_section_max(|t| eval(&moved(t)), lo, hi, config.line_iterations);
                let mut cand = [(lo, eval(&moved(lo))), (t, v), (hi, eval(&moved(hi)))];
                cand.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (t, v) = pick_first_best(&cand);
                if v > value {
                    let q = moved(t);
                    if feasible(&q) {
                        point = q;
                        value = v;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(Maximum { point, value })
}
