//! Day-to-day learning: demand from the current skims, one simulated day,
//! then a successive-averages update of the skims.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::Network;
use crate::pricing::TollScheme;

use super::skims::{update_skims_msa, SkimSet};
use super::supply::{simulate_day, DayResult, PathCache, SupplySpec, VehiclePlan};
use super::toll::SchemeGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningOptions {
    pub iterations: usize,
    /// Keep iterating past `iterations` until the relative skim change
    /// drops below this, up to `max_iterations`.
    pub extend_until: Option<f64>,
    pub max_iterations: usize,
}

impl Default for LearningOptions {
    fn default() -> Self {
        LearningOptions {
            iterations: 5,
            extend_until: None,
            max_iterations: 30,
        }
    }
}

pub struct LearningOutcome {
    pub skims: SkimSet,
    pub last: DayResult,
    pub plans: Vec<VehiclePlan>,
    /// Relative change of the zone time tables at each iteration.
    pub changes: Vec<f64>,
}

/// Runs the learning loop. `demand` receives the current skims, the
/// previous day (if any) and the 1-based iteration number.
#[allow(clippy::too_many_arguments)]
pub fn run_day_to_day<F>(
    net: &Network,
    scheme: &TollScheme,
    spec: &SupplySpec,
    init: SkimSet,
    opts: &LearningOptions,
    cache: &mut PathCache,
    seed: u64,
    mut demand: F,
) -> Result<LearningOutcome>
where
    F: FnMut(&SkimSet, Option<&DayResult>, usize) -> Result<Vec<VehiclePlan>>,
{
    if opts.iterations == 0 {
        return Err(Error::invalid("at least one learning iteration is required"));
    }
    let geo = SchemeGeometry::for_scheme(net, scheme);
    let mut skims = init;
    let mut last: Option<DayResult> = None;
    let mut changes = Vec::new();
    let mut k = 1;
    loop {
        let plans = demand(&skims, last.as_ref(), k)?;
        let day = simulate_day(net, &plans, scheme, &skims, spec, cache, seed)?;
        let realized = SkimSet::from_link_times(net, &geo, skims.windows, day.realized.clone());
        let next = update_skims_msa(&skims, &realized, k)?;
        let change = next.relative_change(&skims);
        log::info!(
            "day-to-day iteration {k}: {} trips, {} truncated, relative skim change {:.4}",
            day.entered,
            day.truncated,
            change
        );
        changes.push(change);
        skims = next;
        last = Some(day);
        let done = k >= opts.iterations
            && match opts.extend_until {
                Some(tol) => change < tol || k >= opts.max_iterations,
                None => true,
            };
        if done {
            return Ok(LearningOutcome {
                skims,
                last: last.expect("at least one day simulated"),
                plans,
                changes,
            });
        }
        k += 1;
    }
}
