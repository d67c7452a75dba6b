//! Synthetic stand-ins for the aggregate tables a real study would read:
//! establishment counts by zone/industry/size class, a building inventory,
//! fleet margins and zone populations. Density decays away from the grid
//! centre so the core is the busiest area.
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::fleet::largest_remainder;
use super::{AggregateEstCounts, Building, CountRow};
use crate::choice::sample_index;
use crate::error::{Error, Result};
use crate::netgraph::Network;
use crate::rng::{stream, tags};

pub const INDUSTRIES: [&str; 11] = [
    "chemical_mfg",
    "metal_mfg",
    "machinery_mfg",
    "light_mfg",
    "road_freight",
    "other_freight",
    "warehousing",
    "material_wholesale",
    "product_wholesale",
    "retail",
    "restaurant_service",
];

pub const PROPERTIES: [&str; 8] = [
    "office",
    "retail_store",
    "restaurant",
    "warehouse",
    "factory",
    "industrial_flex",
    "mixed_use",
    "commercial_service",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CitySpec {
    pub n_individuals: u32,
    pub n_establishments: u32,
    /// Decay length (km) of residential density from the centre.
    pub population_decay_km: f64,
    /// Decay length (km) of establishment and job density.
    pub employment_decay_km: f64,
    pub industry_weights: Vec<f64>,
    /// `(min, max, weight)` employment size classes.
    pub size_classes: Vec<(u32, u32, f64)>,
    /// Preferred property type of each industry; every zone hosting the
    /// industry gets at least one building of that type.
    pub preferred_property: Vec<usize>,
    pub forbidden: Vec<(usize, usize)>,
    pub building_median_m2: f64,
    /// Goods vehicles by class (LGV, HGV, VHGV).
    pub fleet_by_class: [f64; 3],
    /// Relative fleet ownership by industry.
    pub fleet_industry_weights: Vec<f64>,
    pub capacity_kg: [f64; 3],
}

impl Default for CitySpec {
    fn default() -> Self {
        CitySpec {
            n_individuals: 10_000,
            n_establishments: 500,
            population_decay_km: 6.0,
            employment_decay_km: 3.5,
            industry_weights: vec![0.03, 0.04, 0.04, 0.07, 0.06, 0.03, 0.05, 0.07, 0.09, 0.25, 0.27],
            size_classes: vec![(1, 4, 0.5), (5, 9, 0.25), (10, 19, 0.13), (20, 49, 0.08), (50, 99, 0.04)],
            preferred_property: vec![4, 4, 4, 4, 5, 5, 3, 3, 3, 1, 2],
            forbidden: vec![(10, 4)],
            building_median_m2: 900.0,
            fleet_by_class: [180.0, 70.0, 30.0],
            fleet_industry_weights: vec![0.05, 0.06, 0.05, 0.08, 0.25, 0.08, 0.12, 0.1, 0.11, 0.06, 0.04],
            capacity_kg: [1500.0, 8000.0, 20000.0],
        }
    }
}

impl CitySpec {
    pub fn n_industries(&self) -> usize {
        self.industry_weights.len()
    }

    /// Function-type distribution for an (industry, property) pair: uniform
    /// over the functions the industry can take.
    pub fn function_probs(industry: usize, _property: usize) -> Vec<f64> {
        // office, factory, retail_restaurant, logistics, other
        let permitted: [bool; 5] = match industry {
            0..=3 => [true, true, false, true, true],
            4..=8 => [true, false, false, true, true],
            _ => [true, false, true, false, true],
        };
        let n = permitted.iter().filter(|&&p| p).count() as f64;
        permitted.iter().map(|&p| if p { 1.0 / n } else { 0.0 }).collect()
    }

    /// Prior split of an industry's vehicles over function types.
    pub fn fleet_function_prior(industry: usize) -> [f64; 5] {
        match industry {
            0..=3 => [0.1, 0.5, 0.0, 0.3, 0.1],
            4..=8 => [0.15, 0.0, 0.0, 0.75, 0.1],
            _ => [0.2, 0.0, 0.6, 0.0, 0.2],
        }
    }

    pub fn is_goods_industry(industry: usize) -> bool {
        industry <= 8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CityTables {
    pub counts: AggregateEstCounts,
    pub buildings: Vec<Building>,
    pub zone_populations: Vec<u32>,
    pub work_weights: Vec<f64>,
    pub school_weights: Vec<f64>,
    pub fleet_by_class: [f64; 3],
    pub fleet_by_industry: Vec<f64>,
}

pub fn generate_city_tables(net: &Network, spec: &CitySpec, seed: u64) -> Result<CityTables> {
    let ni = spec.n_industries();
    if ni == 0 || spec.preferred_property.len() != ni || spec.fleet_industry_weights.len() != ni {
        return Err(Error::Config("industry tables must have one entry per industry".into()));
    }
    if spec.size_classes.is_empty() {
        return Err(Error::Config("no employment size classes".into()));
    }
    if spec.preferred_property.iter().any(|&j| j >= PROPERTIES.len())
        || spec.preferred_property.iter().enumerate().any(|(i, &j)| spec.forbidden.contains(&(i, j)))
    {
        return Err(Error::Config("bad preferred property table".into()));
    }
    let nz = net.n_zones();
    let mut rng = stream(seed, tags::CITY_TABLES, 0);
    let decay = |len: f64| -> Vec<f64> {
        (0..nz)
            .map(|z| (-net.distance_from_center_km(z) / len).exp())
            .collect()
    };
    let pop_w = decay(spec.population_decay_km);
    let emp_w = decay(spec.employment_decay_km);
    let scaled = |w: &[f64], n: u32| {
        let s: f64 = w.iter().sum();
        let v: Vec<f64> = w.iter().map(|x| x / s * n as f64).collect();
        largest_remainder(&v, n as u64)
    };
    let zone_populations: Vec<u32> = scaled(&pop_w, spec.n_individuals).into_iter().map(|v| v as u32).collect();
    let est_per_zone = scaled(&emp_w, spec.n_establishments);
    let iw_sum: f64 = spec.industry_weights.iter().sum();
    let iw: Vec<f64> = spec.industry_weights.iter().map(|w| w / iw_sum).collect();
    let cw_sum: f64 = spec.size_classes.iter().map(|c| c.2).sum();
    let cw: Vec<f64> = spec.size_classes.iter().map(|c| c.2 / cw_sum).collect();
    let mut cells = std::collections::BTreeMap::new();
    let mut present = vec![vec![false; ni]; nz];
    for (z, &n) in est_per_zone.iter().enumerate() {
        for _ in 0..n {
            let i = sample_index(&iw, rng.random());
            let c = sample_index(&cw, rng.random());
            *cells.entry((z, i, c)).or_insert(0u32) += 1;
            present[z][i] = true;
        }
    }
    let rows = cells
        .into_iter()
        .map(|((zone, industry, c), count)| CountRow {
            zone,
            industry,
            size_min: spec.size_classes[c].0,
            size_max: spec.size_classes[c].1,
            count,
        })
        .collect();
    let floor = LogNormal::new(spec.building_median_m2.ln(), 0.6).map_err(|e| Error::Config(e.to_string()))?;
    let mut buildings = Vec::new();
    for z in 0..nz {
        let mut types: Vec<usize> = (0..ni).filter(|&i| present[z][i]).map(|i| spec.preferred_property[i]).collect();
        let extra = rng.random_range(0..=2);
        for _ in 0..extra {
            types.push(rng.random_range(0..PROPERTIES.len()));
        }
        types.sort_unstable();
        for j in types {
            let id = buildings.len();
            buildings.push(Building {
                id,
                zone: z,
                property: j,
                floor_m2: floor.sample(&mut rng).max(50.0),
            });
        }
    }
    let total: f64 = spec.fleet_by_class.iter().sum();
    let fw_sum: f64 = spec.fleet_industry_weights.iter().sum();
    let fleet_by_industry = spec.fleet_industry_weights.iter().map(|w| w / fw_sum * total).collect();
    let work_weights: Vec<f64> = emp_w.iter().map(|w| w + 0.02).collect();
    Ok(CityTables {
        counts: AggregateEstCounts { rows },
        buildings,
        zone_populations,
        work_weights,
        school_weights: pop_w,
        fleet_by_class: spec.fleet_by_class,
        fleet_by_industry,
    })
}
