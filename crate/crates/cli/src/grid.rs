use anyhow::{bail, Context, Result};

/// Parses `start:stop:step` (inclusive, values computed as `start + i·step`)
/// or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [one] => one
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
            .collect::<Result<Vec<_>>>()?,
        [a, b, c] => {
            let (start, stop, step): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, c.trim().parse()?);
            if step.is_nan() || step <= 0.0 || stop < start {
                bail!("grid {s:?} needs start <= stop and a positive step");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        _ => bail!("grid {s:?} is neither start:stop:step nor a list"),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        bail!("grid {s:?} has no usable values");
    }
    Ok(values)
}

/// Parses `a:b` (inclusive) or a comma-separated list of integers.
pub fn parse_usize_range(s: &str) -> Result<Vec<usize>> {
    match s.split_once(':') {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
            if b < a {
                bail!("range {s:?} is empty");
            }
            Ok((a..=b).collect())
        }
        None => s
            .split(',')
            .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad integer {v:?}")))
            .collect(),
    }
}
