//! JSON channel files:
//! `{"alphabets": {"S":..,"X":..,"Y":..,"Z":..}, "transition": [s][x][y][z], "cost": [..]}`.

use serde::{Deserialize, Serialize};

use super::{Alphabets, DiscreteBroadcastChannel};
use crate::error::{Error, Result};

/// Rows further than this from unit mass are rejected unless renormalization
/// is requested.
pub const FILE_MASS_TOLERANCE: f64 = 1e-9;

/// On-disk form of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub alphabets: Alphabets,
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    /// Defaults to all zeros when omitted.
    #[serde(default)]
    pub cost: Vec<f64>,
}

impl ChannelFile {
    pub fn from_channel(channel: &DiscreteBroadcastChannel) -> Self {
        let a = channel.alphabets();
        let transition = (0..a.s)
            .map(|s| {
                (0..a.x)
                    .map(|x| (0..a.y).map(|y| (0..a.z).map(|z| channel.prob(s, x, y, z)).collect()).collect())
                    .collect()
            })
            .collect();
        Self {
            alphabets: a,
            transition,
            cost: channel.cost().to_vec(),
        }
    }

    /// Validates shapes and row masses. Rows within [`FILE_MASS_TOLERANCE`]
    /// are rescaled to exact unit mass; others are rescaled only when
    /// `renormalize` is set.
    pub fn into_channel(self, renormalize: bool) -> Result<DiscreteBroadcastChannel> {
        let a = self.alphabets;
        let dims = |what: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                return Err(Error::Dimension(format!("{what} has length {got}, expected {want}")));
            }
            Ok(())
        };
        dims("transition", self.transition.len(), a.s)?;
        let mut flat = Vec::with_capacity(a.s * a.outputs());
        for (s, xs) in self.transition.iter().enumerate() {
            dims(&format!("transition[{s}]"), xs.len(), a.x)?;
            let start = flat.len();
            for (x, ys) in xs.iter().enumerate() {
                dims(&format!("transition[{s}][{x}]"), ys.len(), a.y)?;
                for (y, zs) in ys.iter().enumerate() {
                    dims(&format!("transition[{s}][{x}][{y}]"), zs.len(), a.z)?;
                    flat.extend_from_slice(zs);
                }
            }
            let row = &mut flat[start..];
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvalidPmf(format!("row s={s} has entry {p}")));
            }
            let mass: f64 = row.iter().sum();
            if mass <= 0.0 {
                return Err(Error::InvalidPmf(format!("row s={s} has zero mass")));
            }
            if (mass - 1.0).abs() > FILE_MASS_TOLERANCE && !renormalize {
                return Err(Error::InvalidPmf(format!(
                    "row s={s} has mass {mass}; pass --renormalize to rescale"
                )));
            }
            row.iter_mut().for_each(|p| *p /= mass);
        }
        let cost = if self.cost.is_empty() { vec![0.0; a.s] } else { self.cost };
        DiscreteBroadcastChannel::new(a, flat, cost)
    }
}

impl DiscreteBroadcastChannel {
    pub fn from_json_str(text: &str, renormalize: bool) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        file.into_channel(renormalize)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelFile::from_channel(self))?)
    }
}
