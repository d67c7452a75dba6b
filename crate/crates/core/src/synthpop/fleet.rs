//! Freight fleet targets by iterative proportional fitting and their
//! allocation to establishments in proportion to employment.
use serde::{Deserialize, Serialize};

use super::{Establishment, FUNCTIONS};
use crate::error::{Error, Result};
use crate::vehicle::VehicleClass;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetTargets {
    /// Fitted cells before integerization, `[vehicle type][industry]`.
    pub fitted: Vec<Vec<f64>>,
    pub cells: Vec<Vec<u64>>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverType {
    ForHire,
    OwnerOperator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreightVehicle {
    pub id: usize,
    pub owner: usize,
    pub class: VehicleClass,
    pub capacity_kg: f64,
    pub driver: DriverType,
}

/// Rounds `values` to integers summing to `total`: floors first, then the
/// largest fractional parts (lowest index on ties) get the remainder.
pub fn largest_remainder(values: &[f64], total: u64) -> Vec<u64> {
    let mut out: Vec<u64> = values.iter().map(|v| v.max(0.0).floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = values[a] - values[a].floor();
        let fb = values[b] - values[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = total.saturating_sub(assigned);
    for &i in order.iter().cycle().take(if values.is_empty() { 0 } else { usize::MAX }) {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

const IPF_MAX_ITER: usize = 1000;
const IPF_TOL: f64 = 1e-10;

/// Fits a type-by-industry table to both margins starting from `seed`
/// (uniform when `None`). With `rescale`, industry margins are scaled to the
/// type grand total first.
pub fn generate_fleet(
    type_margins: &[f64],
    industry_margins: &[f64],
    seed: Option<&[Vec<f64>]>,
    rescale: bool,
) -> Result<FleetTargets> {
    let (nv, ni) = (type_margins.len(), industry_margins.len());
    if nv == 0 || ni == 0 {
        return Err(Error::invalid("empty margins"));
    }
    if type_margins.iter().chain(industry_margins).any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::invalid("margins must be finite and nonnegative"));
    }
    let tv: f64 = type_margins.iter().sum();
    let ti: f64 = industry_margins.iter().sum();
    if tv <= 0.0 || ti <= 0.0 {
        return Err(Error::invalid("margins must have a positive total"));
    }
    let cols: Vec<f64> = if (tv - ti).abs() > 1e-9 * tv.max(ti) {
        if !rescale {
            return Err(Error::invalid(format!("margin totals differ ({tv} vs {ti})")));
        }
        industry_margins.iter().map(|m| m * tv / ti).collect()
    } else {
        industry_margins.to_vec()
    };
    let mut t: Vec<Vec<f64>> = match seed {
        Some(s) => {
            if s.len() != nv || s.iter().any(|r| r.len() != ni) {
                return Err(Error::invalid("seed matrix shape mismatch"));
            }
            s.to_vec()
        }
        None => vec![vec![1.0; ni]; nv],
    };
    for v in 0..nv {
        if type_margins[v] > 0.0 && (0..ni).all(|i| t[v][i] == 0.0 || cols[i] == 0.0) {
            return Err(Error::invalid(format!("vehicle type {v} has a positive margin but no support")));
        }
    }
    for i in 0..ni {
        if cols[i] > 0.0 && (0..nv).all(|v| t[v][i] == 0.0 || type_margins[v] == 0.0) {
            return Err(Error::invalid(format!("industry {i} has a positive margin but no support")));
        }
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        for v in 0..nv {
            let s: f64 = t[v].iter().sum();
            let f = if s > 0.0 { type_margins[v] / s } else { 0.0 };
            t[v].iter_mut().for_each(|x| *x *= f);
        }
        for i in 0..ni {
            let s: f64 = (0..nv).map(|v| t[v][i]).sum();
            let f = if s > 0.0 { cols[i] / s } else { 0.0 };
            (0..nv).for_each(|v| t[v][i] *= f);
        }
        let err = (0..nv)
            .map(|v| {
                let s: f64 = t[v].iter().sum();
                (s - type_margins[v]).abs() / type_margins[v].max(1e-12)
            })
            .fold(0.0, f64::max);
        if err < IPF_TOL {
            break;
        }
        if iterations >= IPF_MAX_ITER {
            return Err(Error::NotConverged {
                what: "IPF".into(),
                iterations,
            });
        }
    }
    let flat: Vec<f64> = t.iter().flatten().copied().collect();
    let ints = largest_remainder(&flat, tv.round() as u64);
    let cells = ints.chunks(ni).map(|c| c.to_vec()).collect();
    Ok(FleetTargets {
        fitted: t,
        cells,
        iterations,
    })
}

/// Vehicles per establishment and goods class. `z[v][f][i]` splits the
/// industry target `targets[v][i]` over function types; within each
/// (industry, function) group vehicles follow employment.
pub fn allocate_vehicles(
    establishments: &[Establishment],
    z: &[Vec<Vec<f64>>],
    targets: &[Vec<u64>],
) -> Result<Vec<[u32; 3]>> {
    let nv = targets.len();
    if nv != 3 || z.len() != 3 {
        return Err(Error::invalid("expected three goods vehicle classes"));
    }
    let ni = targets[0].len();
    let nf = FUNCTIONS.len();
    for v in 0..nv {
        if z[v].len() != nf || z[v].iter().any(|r| r.len() != ni) {
            return Err(Error::invalid("split matrix shape mismatch"));
        }
        for i in 0..ni {
            let s: f64 = (0..nf).map(|f| z[v][f][i]).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("split ratios for industry {i}, class {v} sum to {s}")));
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); ni * nf];
    for (m, e) in establishments.iter().enumerate() {
        let f = e
            .function
            .ok_or_else(|| Error::invalid(format!("establishment {} has no function type", e.id)))?;
        if e.industry >= ni || f >= nf {
            return Err(Error::invalid(format!("establishment {} out of range", e.id)));
        }
        groups[e.industry * nf + f].push(m);
    }
    let mut out = vec![[0u32; 3]; establishments.len()];
    for v in 0..nv {
        for i in 0..ni {
            let split: Vec<f64> = (0..nf).map(|f| z[v][f][i] * targets[v][i] as f64).collect();
            let per_function = largest_remainder(&split, targets[v][i]);
            for f in 0..nf {
                let n = per_function[f];
                if n == 0 {
                    continue;
                }
                let members = &groups[i * nf + f];
                let emp: f64 = members.iter().map(|&m| establishments[m].employment as f64).sum();
                if emp <= 0.0 {
                    return Err(Error::invalid(format!(
                        "industry {i}, function {} has {n} vehicles but no employment",
                        FUNCTIONS[f]
                    )));
                }
                let shares: Vec<f64> = members
                    .iter()
                    .map(|&m| establishments[m].employment as f64 / emp * n as f64)
                    .collect();
                for (&m, k) in members.iter().zip(largest_remainder(&shares, n)) {
                    out[m][v] += k as u32;
                }
            }
        }
    }
    Ok(out)
}

/// Materializes vehicles, one driver each, and records them on the owners.
pub fn build_fleet(establishments: &mut [Establishment], counts: &[[u32; 3]], capacity_kg: [f64; 3]) -> Vec<FreightVehicle> {
    let mut fleet = Vec::new();
    for (e, c) in establishments.iter_mut().zip(counts) {
        for (v, class) in VehicleClass::GOODS.iter().enumerate() {
            for _ in 0..c[v] {
                let id = fleet.len();
                fleet.push(FreightVehicle {
                    id,
                    owner: e.id,
                    class: *class,
                    capacity_kg: capacity_kg[v],
                    driver: if e.employment > 1 {
                        DriverType::ForHire
                    } else {
                        DriverType::OwnerOperator
                    },
                });
                e.fleet.push(id);
            }
        }
    }
    fleet
}
