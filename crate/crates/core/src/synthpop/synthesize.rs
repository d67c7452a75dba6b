//! The full establishment and population synthesis chain on a network.
use serde::{Deserialize, Serialize};

use super::city::{CitySpec, CityTables, PROPERTIES};
use super::fleet::{allocate_vehicles, build_fleet, generate_fleet, FreightVehicle};
use super::floor::{estimate_floor_areas, readjust_floor_areas, FloorModel, FloorSolverOptions};
use super::individuals::{generate_individuals, Individual, PopulationSpec};
use super::mapping::{solve_mapping, MappingMatrix, MappingProblem};
use super::{assign_functions, assign_to_buildings, sample_establishments, Building, Establishment, FUNCTIONS};
use crate::error::{Error, Result};
use crate::netgraph::Network;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct City {
    pub establishments: Vec<Establishment>,
    pub buildings: Vec<Building>,
    pub vehicles: Vec<FreightVehicle>,
    pub individuals: Vec<Individual>,
    pub mapping: MappingMatrix,
    pub floor: FloorModel,
}

/// Runs steps 1–5 of establishment synthesis plus individual generation,
/// and records establishment density on the network zones.
pub fn synthesize_city(
    net: &mut Network,
    tables: &CityTables,
    spec: &CitySpec,
    pop: &PopulationSpec,
    floor_opts: &FloorSolverOptions,
    seed: u64,
) -> Result<City> {
    let nz = net.n_zones();
    let ni = spec.n_industries();
    let nj = PROPERTIES.len();
    if tables.zone_populations.len() != nz || tables.buildings.iter().any(|b| b.zone >= nz) {
        return Err(Error::invalid("city tables do not match the network").in_stage("tables"));
    }
    if tables.buildings.is_empty() {
        return Err(Error::invalid("missing buildings table").in_stage("tables"));
    }
    let mut ests = sample_establishments(&tables.counts, seed).map_err(|e| e.in_stage("establishments"))?;
    if ests.iter().any(|e| e.industry >= ni || e.zone >= nz) {
        return Err(Error::invalid("count row outside industry or zone range").in_stage("establishments"));
    }

    let mut a = vec![vec![false; nz]; ni];
    for e in &ests {
        a[e.industry][e.zone] = true;
    }
    let mut b = vec![vec![false; nz]; nj];
    for bl in &tables.buildings {
        b[bl.property][bl.zone] = true;
    }
    let problem = MappingProblem {
        a,
        b,
        forbidden: spec.forbidden.clone(),
        zone_coverage: true,
    };
    let mapping = solve_mapping(&problem).map_err(|e| e.in_stage("mapping"))?;

    let floor = estimate_floor_areas(&ests, &tables.buildings, &mapping, nz, floor_opts)
        .map_err(|e| e.in_stage("floor_areas"))?;
    let areas = readjust_floor_areas(&floor, &ests, &tables.buildings, &mapping, floor_opts)
        .map_err(|e| e.in_stage("floor_readjust"))?;
    let assignment = assign_to_buildings(&ests, &areas, &tables.buildings, &mapping, floor_opts.starts, seed)
        .map_err(|e| e.in_stage("building_assignment"))?;
    for (e, (&bld, &area)) in ests.iter_mut().zip(assignment.building_of.iter().zip(&areas)) {
        e.building = Some(bld);
        e.floor_m2 = area;
    }
    assign_functions(&mut ests, &tables.buildings, &CitySpec::function_probs, seed)
        .map_err(|e| e.in_stage("functions"))?;

    // Fleet: IPF over industries that exist, then split by function among
    // the functions actually present in each industry.
    let mut present = vec![[false; 5]; ni];
    for e in &ests {
        present[e.industry][e.function.expect("assigned above")] = true;
    }
    let industry_margins: Vec<f64> = (0..ni)
        .map(|i| if present[i].iter().any(|&p| p) { tables.fleet_by_industry[i] } else { 0.0 })
        .collect();
    let targets = generate_fleet(&tables.fleet_by_class, &industry_margins, None, true).map_err(|e| e.in_stage("fleet"))?;
    let mut z = vec![vec![vec![0.0; ni]; FUNCTIONS.len()]; 3];
    for i in 0..ni {
        let prior = CitySpec::fleet_function_prior(i);
        let mut w: Vec<f64> = (0..FUNCTIONS.len()).map(|f| if present[i][f] { prior[f] } else { 0.0 }).collect();
        if w.iter().sum::<f64>() <= 0.0 {
            // Absent industries get no vehicles; any valid split will do.
            w = (0..FUNCTIONS.len()).map(|f| if present[i][f] || !present[i].contains(&true) { 1.0 } else { 0.0 }).collect();
        }
        let s: f64 = w.iter().sum();
        for v in 0..3 {
            for f in 0..FUNCTIONS.len() {
                z[v][f][i] = w[f] / s;
            }
        }
    }
    let counts = allocate_vehicles(&ests, &z, &targets.cells).map_err(|e| e.in_stage("fleet_allocation"))?;
    let vehicles = build_fleet(&mut ests, &counts, spec.capacity_kg);
    for e in ests.iter_mut() {
        e.roles.carrier = !e.fleet.is_empty();
        e.roles.shipper = CitySpec::is_goods_industry(e.industry);
        e.roles.receiver = true;
    }

    let mut per_zone = vec![0usize; nz];
    for e in &ests {
        per_zone[e.zone] += 1;
    }
    net.set_establishment_density(&per_zone);

    let individuals = generate_individuals(
        &tables.zone_populations,
        pop,
        &tables.work_weights,
        &tables.school_weights,
        seed,
    )
    .map_err(|e| e.in_stage("individuals"))?;

    Ok(City {
        establishments: ests,
        buildings: tables.buildings.clone(),
        vehicles,
        individuals,
        mapping,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{build_network, AreaSpec, GridSpec};
    use crate::synthpop::generate_city_tables;

    #[test]
    fn small_city_is_consistent() {
        let mut net = build_network(&GridSpec {
            cols: 6,
            rows: 6,
            toll_area: AreaSpec::centered(6, 6, 2),
            ..Default::default()
        })
        .unwrap();
        let spec = CitySpec {
            n_individuals: 300,
            n_establishments: 60,
            fleet_by_class: [20.0, 8.0, 4.0],
            ..Default::default()
        };
        let tables = generate_city_tables(&net, &spec, 5).unwrap();
        let opts = FloorSolverOptions {
            max_iterations: 2000,
            starts: 2,
            ..Default::default()
        };
        let city = synthesize_city(&mut net, &tables, &spec, &PopulationSpec::default(), &opts, 5).unwrap();
        assert_eq!(city.establishments.len(), 60);
        assert_eq!(city.individuals.len(), 300);
        assert_eq!(city.vehicles.len(), 32);
        for e in &city.establishments {
            let b = &city.buildings[e.building.unwrap()];
            assert_eq!(b.zone, e.zone);
            assert!(city.mapping.allows(e.industry, b.property));
            assert!(e.employment >= 1);
        }
        assert!(net.zones.iter().any(|z| z.establishment_density > 0.0));
    }
}
