//! Path-size logit route choice for travellers.
use serde::{Deserialize, Serialize};

use crate::choice::{mnl_probabilities, path_sizes, sample_index};
use crate::error::{Error, Result};
use crate::netgraph::{LinkId, Network, Path};

/// Attributes of one candidate path for a particular departure.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteOption {
    /// `(link, length_km)` along the path, for the path-size term.
    pub links: Vec<(LinkId, f64)>,
    pub time_h: f64,
    pub toll: f64,
    pub km: f64,
    pub signals: u32,
    pub right_turns: u32,
}

impl RouteOption {
    pub fn from_path(net: &Network, path: &Path, time_h: f64, toll: f64) -> RouteOption {
        RouteOption {
            links: path.links.iter().map(|&l| (l, net.links[l].length_km)).collect(),
            time_h,
            toll,
            km: path.length_km,
            signals: path.signals,
            right_turns: path.right_turns,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouteParams {
    /// utils per hour.
    pub time_per_h: f64,
    pub per_km: f64,
    pub per_signal: f64,
    pub per_right_turn: f64,
    pub path_size: f64,
}

impl Default for RouteParams {
    fn default() -> Self {
        RouteParams {
            time_per_h: -6.0,
            per_km: -0.05,
            per_signal: -0.04,
            per_right_turn: -0.02,
            path_size: 1.0,
        }
    }
}

/// Route utilities; money enters as `-toll / vot * |time coefficient|`.
pub fn route_utilities(options: &[RouteOption], vot: f64, p: &RouteParams) -> Result<Vec<f64>> {
    if options.is_empty() {
        return Err(Error::invalid("empty path set"));
    }
    if !(vot > 0.0) {
        return Err(Error::invalid("value of time must be positive"));
    }
    let ps = path_sizes(&options.iter().map(|o| o.links.clone()).collect::<Vec<_>>());
    Ok(options
        .iter()
        .zip(ps)
        .map(|(o, ps)| {
            p.time_per_h * o.time_h - o.toll / vot * p.time_per_h.abs()
                + p.per_km * o.km
                + p.per_signal * o.signals as f64
                + p.per_right_turn * o.right_turns as f64
                + p.path_size * ps.ln()
        })
        .collect())
}

/// Chooses a path with uniform draw `u`; returns the index and probabilities.
pub fn route_choice(options: &[RouteOption], vot: f64, p: &RouteParams, u: f64) -> Result<(usize, Vec<f64>)> {
    let v = route_utilities(options, vot, p)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite path attribute"));
    }
    let probs = mnl_probabilities(&v, 1.0)?;
    Ok((sample_index(&probs, u), probs))
}
