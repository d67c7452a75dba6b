//! Establishment-to-building assignment: each establishment goes to one
//! permitted building in its zone so that assigned floor area tracks
//! building floor area in the least-squares sense. Greedy construction
//! followed by single moves and pairwise swaps, from several seeded
//! orderings.
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Building, Establishment, MappingMatrix};
use crate::error::{Error, Result};
use crate::rng::{stream, tags};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Building id per establishment, in input order.
    pub building_of: Vec<usize>,
    pub objective: f64,
}

/// `sum_n (sum_m y_mn f_m - fB_n)^2` over all buildings.
pub fn assignment_objective(areas: &[f64], buildings: &[Building], building_of: &[usize]) -> f64 {
    let mut load = vec![0.0; buildings.len()];
    for (m, &n) in building_of.iter().enumerate() {
        load[n] += areas[m];
    }
    buildings.iter().map(|b| (load[b.id] - b.floor_m2).powi(2)).sum()
}

const MAX_PASSES: usize = 10_000;

fn improve(areas: &[f64], cap: &[f64], options: &[Vec<usize>], of: &mut [usize], load: &mut [f64]) {
    let delta_move = |load: &[f64], from: usize, to: usize, a: f64| {
        (load[from] - a - cap[from]).powi(2) - (load[from] - cap[from]).powi(2) + (load[to] + a - cap[to]).powi(2)
            - (load[to] - cap[to]).powi(2)
    };
    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for m in 0..of.len() {
            for &to in &options[m] {
                let from = of[m];
                if to != from && delta_move(load, from, to, areas[m]) < -1e-9 {
                    load[from] -= areas[m];
                    load[to] += areas[m];
                    of[m] = to;
                    improved = true;
                }
            }
        }
        for m1 in 0..of.len() {
            for m2 in m1 + 1..of.len() {
                let (n1, n2) = (of[m1], of[m2]);
                if n1 == n2 || !options[m1].contains(&n2) || !options[m2].contains(&n1) {
                    continue;
                }
                // Net area moving from n1 to n2.
                let t = areas[m1] - areas[m2];
                if delta_move(load, n1, n2, t) < -1e-9 {
                    load[n1] -= t;
                    load[n2] += t;
                    of.swap(m1, m2);
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Assigns every establishment to a building; `areas[m]` is the adjusted
/// floor area of `establishments[m]`.
pub fn assign_to_buildings(
    establishments: &[Establishment],
    areas: &[f64],
    buildings: &[Building],
    x: &MappingMatrix,
    starts: usize,
    seed: u64,
) -> Result<Assignment> {
    if areas.len() != establishments.len() {
        return Err(Error::invalid("one floor area per establishment is required"));
    }
    if buildings.iter().enumerate().any(|(i, b)| b.id != i) {
        return Err(Error::invalid("building ids must be dense and ordered"));
    }
    let n_zones = buildings
        .iter()
        .map(|b| b.zone + 1)
        .chain(establishments.iter().map(|e| e.zone + 1))
        .max()
        .unwrap_or(0);
    let mut by_zone: Vec<Vec<usize>> = vec![Vec::new(); n_zones];
    for b in buildings {
        by_zone[b.zone].push(b.id);
    }
    let options: Vec<Vec<usize>> = establishments
        .iter()
        .map(|e| {
            by_zone[e.zone]
                .iter()
                .copied()
                .filter(|&n| x.allows(e.industry, buildings[n].property))
                .collect()
        })
        .collect();
    if let Some(m) = options.iter().position(|o| o.is_empty()) {
        return Err(Error::infeasible(format!(
            "establishment {} has no permitted building in zone {}",
            establishments[m].id, establishments[m].zone
        )));
    }
    let cap: Vec<f64> = buildings.iter().map(|b| b.floor_m2).collect();
    let mut best: Option<Assignment> = None;
    for start in 0..starts.max(1) {
        let mut order: Vec<usize> = (0..establishments.len()).collect();
        if start == 0 {
            order.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]).then(a.cmp(&b)));
        } else {
            order.shuffle(&mut stream(seed, tags::ESTABLISHMENTS, 1_000_000 + start as u64));
        }
        let mut load = vec![0.0; buildings.len()];
        let mut of = vec![0; establishments.len()];
        for &m in &order {
            let n = *options[m]
                .iter()
                .max_by(|&&a, &&b| (cap[a] - load[a]).total_cmp(&(cap[b] - load[b])).then(b.cmp(&a)))
                .unwrap();
            of[m] = n;
            load[n] += areas[m];
        }
        improve(areas, &cap, &options, &mut of, &mut load);
        let obj = assignment_objective(areas, buildings, &of);
        if best.as_ref().is_none_or(|b| obj < b.objective - 1e-9) {
            best = Some(Assignment {
                building_of: of,
                objective: obj,
            });
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthpop::Roles;
    use rand::{Rng, SeedableRng};

    fn est(id: usize, zone: usize, industry: usize) -> Establishment {
        Establishment {
            id,
            zone,
            industry,
            function: None,
            employment: 1,
            floor_m2: 0.0,
            building: None,
            fleet: vec![],
            roles: Roles::default(),
        }
    }

    fn bld(id: usize, zone: usize, property: usize, floor: f64) -> Building {
        Building {
            id,
            zone,
            property,
            floor_m2: floor,
        }
    }

    fn exhaustive(ests: &[Establishment], areas: &[f64], blds: &[Building], x: &MappingMatrix) -> f64 {
        fn rec(m: usize, ests: &[Establishment], areas: &[f64], blds: &[Building], x: &MappingMatrix, of: &mut Vec<usize>, best: &mut f64) {
            if m == ests.len() {
                *best = best.min(assignment_objective(areas, blds, of));
                return;
            }
            for b in blds {
                if b.zone == ests[m].zone && x.allows(ests[m].industry, b.property) {
                    of.push(b.id);
                    rec(m + 1, ests, areas, blds, x, of, best);
                    of.pop();
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, ests, areas, blds, x, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn forced_assignment() {
        let x = MappingMatrix { x: vec![vec![true]] };
        let a = assign_to_buildings(&[est(0, 0, 0)], &[50.0], &[bld(0, 0, 0, 80.0)], &x, 8, 0).unwrap();
        assert_eq!(a.building_of, vec![0]);
    }

    #[test]
    fn size_matched_pairs() {
        let x = MappingMatrix { x: vec![vec![true]] };
        let blds = [bld(0, 0, 0, 600.0), bld(1, 0, 0, 400.0)];
        let a = assign_to_buildings(&[est(0, 0, 0), est(1, 0, 0)], &[400.0, 600.0], &blds, &x, 8, 0).unwrap();
        assert_eq!(a.building_of, vec![1, 0]);
        assert!(a.objective.abs() < 1e-9);
    }

    #[test]
    fn no_permitted_building() {
        let x = MappingMatrix { x: vec![vec![false, true], vec![true, true]] };
        let r = assign_to_buildings(&[est(0, 0, 0)], &[10.0], &[bld(0, 0, 0, 80.0)], &x, 8, 0);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn within_five_percent_of_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for case in 0..40 {
            let x = MappingMatrix {
                x: vec![vec![true, rng.random_bool(0.5)], vec![rng.random_bool(0.5), true]],
            };
            let nb = rng.random_range(2..=4);
            let blds: Vec<Building> = (0..nb)
                .map(|id| bld(id, 0, id % 2, rng.random_range(100.0..1500.0)))
                .collect();
            let n = rng.random_range(1..=8);
            let ests: Vec<Establishment> = (0..n).map(|id| est(id, 0, rng.random_range(0..2))).collect();
            let areas: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..600.0)).collect();
            let a = assign_to_buildings(&ests, &areas, &blds, &x, 8, case).unwrap();
            for (m, &b) in a.building_of.iter().enumerate() {
                assert!(x.allows(ests[m].industry, blds[b].property));
            }
            let best = exhaustive(&ests, &areas, &blds, &x);
            assert!(a.objective <= best * 1.05 + 1e-6, "case {case}: {} vs {best}", a.objective);
        }
    }
}
