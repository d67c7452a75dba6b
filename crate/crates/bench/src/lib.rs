//! Shared fixtures for the criterion benchmarks.
use tollsim_core::clock::{hhmm, Minutes};
use tollsim_core::error::Result;
use tollsim_core::freight::{LegCost, PlanShipment, PlanVehicle, Requirement, TravelOracle};
use tollsim_core::mesosim::{Driver, Leg, VehiclePlan};
use tollsim_core::netgraph::{build_network, AreaSpec, GridSpec, Network, ZoneId};
use tollsim_core::vehicle::VehicleClass;

/// Manhattan-distance planner oracle on a 10x10 zone grid at 30 km/h.
pub struct GridOracle;

impl TravelOracle for GridOracle {
    fn leg(&self, _class: VehicleClass, o: ZoneId, d: ZoneId, _t: Minutes) -> Result<LegCost> {
        let km = self.distance_km(o, d);
        Ok(LegCost {
            time_min: km * 2.0 + 2.0,
            km,
            toll: 0.0,
            area_flat: 0.0,
        })
    }

    fn distance_km(&self, o: ZoneId, d: ZoneId) -> f64 {
        ((o / 10) as f64 - (d / 10) as f64).abs() + ((o % 10) as f64 - (d % 10) as f64).abs()
    }
}

/// A carrier with `n` LTL shipments and `v` vans, laid out deterministically.
pub fn carrier(n: usize, v: usize) -> (Vec<PlanShipment>, Vec<PlanVehicle>) {
    let shipments = (0..n)
        .map(|i| PlanShipment {
            id: i,
            size_kg: 50.0 + (i * 37 % 400) as f64,
            pickup: (i * 13) % 100,
            delivery: (i * 29 + 7) % 100,
            pickup_window: (hhmm(8, 0), hhmm(12, 0)),
            delivery_window: (hhmm(8, 0), hhmm(18, 0)),
            requirement: Requirement::Ltl,
            dwell_pickup_min: 10.0,
            dwell_delivery_min: 10.0,
        })
        .collect();
    let fleet = (0..v)
        .map(|id| PlanVehicle {
            id,
            class: VehicleClass::Lgv,
            capacity_kg: 1500.0,
            depot: 0,
            max_hours: 10.0,
            available_from: hhmm(7, 0),
        })
        .collect();
    (shipments, fleet)
}

pub fn grid(n: usize) -> Network {
    build_network(&GridSpec {
        cols: n,
        rows: n,
        toll_area: AreaSpec::centered(n, n, n / 3),
        arterial_every: 0,
        ..Default::default()
    })
    .expect("grid builds")
}

/// Two-leg commuter cars spread over the morning and evening.
pub fn commuters(net: &Network, n: usize) -> Vec<VehiclePlan> {
    let nz = net.n_zones();
    (0..n)
        .map(|i| {
            let home = (i * 7919) % nz;
            let work = (i * 104_729 + nz / 2) % nz;
            let work = if work == home { (work + 1) % nz } else { work };
            VehiclePlan {
                id: i,
                class: VehicleClass::Car,
                vot: 20.0,
                driver: Driver::Person(i),
                legs: vec![
                    Leg {
                        origin: home,
                        dest: work,
                        earliest: hhmm(7, 0) + (i % 120) as f64,
                        dwell_after: 0.0,
                    },
                    Leg {
                        origin: work,
                        dest: home,
                        earliest: hhmm(16, 30) + (i % 150) as f64,
                        dwell_after: 0.0,
                    },
                ],
            }
        })
        .collect()
}
