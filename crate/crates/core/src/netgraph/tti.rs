//! Travel time index.
use serde::{Deserialize, Serialize};

use super::{LinkId, Network};
use crate::clock::Minutes;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkTraversal {
    pub link: LinkId,
    pub entry: Minutes,
    pub exit: Minutes,
}

/// Realized over free-flow trip time.
pub fn trip_tti(traversals: &[LinkTraversal], net: &Network) -> Result<f64> {
    if traversals.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let realized: f64 = traversals.iter().map(|t| t.exit - t.entry).sum();
    let free: f64 = traversals.iter().map(|t| net.links[t.link].free_flow_min).sum();
    Ok(realized / free)
}

/// Trip-length-weighted mean of `(length_km, tti)` pairs.
pub fn weighted_tti(items: &[(f64, f64)]) -> Result<f64> {
    let w: f64 = items.iter().map(|&(l, _)| l).sum();
    if items.is_empty() || w <= 0.0 {
        return Err(Error::invalid("no trip length to weight by"));
    }
    Ok(items.iter().map(|&(l, t)| l * t).sum::<f64>() / w)
}
