//! Population and establishment synthesis.
//!
//! Establishments go through five steps: sampling from aggregate counts,
//! an industry-to-property mapping ([`solve_mapping`]), floor-area
//! estimation ([`estimate_floor_areas`]), building assignment
//! ([`assign_to_buildings`]) and fleet generation ([`generate_fleet`],
//! [`allocate_vehicles`]). Individuals are sampled directly from zone
//! populations.
mod assign;
mod city;
mod fleet;
mod floor;
mod individuals;
mod mapping;
mod synthesize;

pub use self::assign::{assign_to_buildings, assignment_objective, Assignment};
pub use self::city::{generate_city_tables, CitySpec, CityTables, INDUSTRIES, PROPERTIES};
pub use self::synthesize::{synthesize_city, City};
pub use self::fleet::{
    allocate_vehicles, build_fleet, generate_fleet, largest_remainder, FleetTargets, FreightVehicle, DriverType,
};
pub use self::floor::{estimate_floor_areas, readjust_floor_areas, FloorModel, FloorSolverOptions};
pub use self::individuals::{generate_individuals, IncomeGroup, Individual, PopulationSpec, Role};
pub use self::mapping::{solve_mapping, MappingMatrix, MappingProblem};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::ZoneId;
use crate::rng::{stream, tags};

/// Establishment function types.
pub const FUNCTIONS: [&str; 5] = ["office", "factory", "retail_restaurant", "logistics", "other"];

/// One row of the aggregate establishment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub zone: ZoneId,
    pub industry: usize,
    pub size_min: u32,
    pub size_max: u32,
    pub count: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateEstCounts {
    pub rows: Vec<CountRow>,
}

impl AggregateEstCounts {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count as u64).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub id: usize,
    pub zone: ZoneId,
    pub property: usize,
    pub floor_m2: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub shipper: bool,
    pub carrier: bool,
    pub receiver: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Establishment {
    pub id: usize,
    pub zone: ZoneId,
    pub industry: usize,
    pub function: Option<usize>,
    pub employment: u32,
    pub floor_m2: f64,
    pub building: Option<usize>,
    pub fleet: Vec<usize>,
    pub roles: Roles,
}

/// Step 1: one establishment per counted unit, employment uniform within
/// the row's size class.
pub fn sample_establishments(counts: &AggregateEstCounts, seed: u64) -> Result<Vec<Establishment>> {
    if counts.total() == 0 {
        return Err(Error::invalid("empty establishment counts"));
    }
    let mut out = Vec::with_capacity(counts.total() as usize);
    for (row_id, row) in counts.rows.iter().enumerate() {
        if row.size_min == 0 || row.size_min > row.size_max {
            return Err(Error::invalid(format!("bad size class [{}, {}]", row.size_min, row.size_max)));
        }
        let mut rng = stream(seed, tags::ESTABLISHMENTS, row_id as u64);
        for _ in 0..row.count {
            out.push(Establishment {
                id: out.len(),
                zone: row.zone,
                industry: row.industry,
                function: None,
                employment: rng.random_range(row.size_min..=row.size_max),
                floor_m2: 0.0,
                building: None,
                fleet: Vec::new(),
                roles: Roles::default(),
            });
        }
    }
    Ok(out)
}

/// Draws a function type per establishment from `probs[industry][property]`
/// (a distribution over [`FUNCTIONS`]).
pub fn assign_functions(
    establishments: &mut [Establishment],
    buildings: &[Building],
    probs: &dyn Fn(usize, usize) -> Vec<f64>,
    seed: u64,
) -> Result<()> {
    for est in establishments.iter_mut() {
        let b = est
            .building
            .ok_or_else(|| Error::invalid(format!("establishment {} has no building", est.id)))?;
        let p = probs(est.industry, buildings[b].property);
        let total: f64 = p.iter().sum();
        if p.len() != FUNCTIONS.len() || total <= 0.0 || p.iter().any(|&x| x < 0.0) {
            return Err(Error::invalid("malformed function probability table"));
        }
        let mut rng = stream(seed, tags::FUNCTIONS, est.id as u64);
        let norm: Vec<f64> = p.iter().map(|x| x / total).collect();
        est.function = Some(crate::choice::sample_index(&norm, rng.random()));
    }
    Ok(())
}
