//! Winners and losers: agents bucketed by daily surplus change.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Passenger,
    Shipper,
}

impl GroupKind {
    /// Daily surplus change regarded as small, $.
    pub fn threshold(self) -> f64 {
        match self {
            GroupKind::Passenger => 1.30,
            GroupKind::Shipper => 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupProfile {
    /// 1: large loss, 2: small loss, 3: small gain, 4: large gain.
    pub group: u8,
    /// Half-open `[lo, hi)` surplus range.
    pub range: (f64, f64),
    pub count: usize,
    /// Share in basis points; the four groups sum to exactly 10 000.
    pub share_bp: u32,
    pub mean_surplus: f64,
    /// Group means of the descriptive attributes, in input order.
    pub stats: Vec<(String, f64)>,
}

impl GroupProfile {
    pub fn share(&self) -> f64 {
        self.share_bp as f64 / 10_000.0
    }
}

pub fn group_of(delta: f64, t: f64) -> u8 {
    if delta < -t {
        1
    } else if delta < 0.0 {
        2
    } else if delta < t {
        3
    } else {
        4
    }
}

/// Buckets agents at `-t, 0, +t` (zero goes to group 3) and profiles each
/// group with the means of `attributes` (one value per agent).
pub fn distributional_groups(deltas: &[f64], kind: GroupKind, attributes: &[(&str, Vec<f64>)]) -> Result<Vec<GroupProfile>> {
    if deltas.is_empty() {
        return Err(Error::invalid("no agents to group"));
    }
    if attributes.iter().any(|(_, v)| v.len() != deltas.len()) {
        return Err(Error::invalid("attribute length differs from the population"));
    }
    let t = kind.threshold();
    let ranges = [(f64::NEG_INFINITY, -t), (-t, 0.0), (0.0, t), (t, f64::INFINITY)];
    let groups: Vec<u8> = deltas.iter().map(|&d| group_of(d, t)).collect();
    let counts: Vec<usize> = (1..=4).map(|g| groups.iter().filter(|&&x| x == g).count()).collect();
    let n = deltas.len();
    let bp = crate::synthpop::largest_remainder(&counts.iter().map(|&c| c as f64 / n as f64 * 10_000.0).collect::<Vec<_>>(), 10_000);
    Ok((0..4)
        .map(|gi| {
            let g = gi as u8 + 1;
            let members: Vec<usize> = (0..n).filter(|&i| groups[i] == g).collect();
            let mean = |v: &dyn Fn(usize) -> f64| {
                if members.is_empty() {
                    0.0
                } else {
                    members.iter().map(|&i| v(i)).sum::<f64>() / members.len() as f64
                }
            };
            GroupProfile {
                group: g,
                range: ranges[gi],
                count: counts[gi],
                share_bp: bp[gi] as u32,
                mean_surplus: mean(&|i| deltas[i]),
                stats: attributes.iter().map(|(name, v)| (name.to_string(), mean(&|i| v[i]))).collect(),
            }
        })
        .collect())
}
