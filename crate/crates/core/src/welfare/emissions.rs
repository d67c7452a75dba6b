//! Fuel use and CO2 from link-level speeds.
use serde::{Deserialize, Serialize};

use crate::mesosim::Trajectory;
use crate::netgraph::Network;
use crate::vehicle::VehicleClass;

/// Social cost of carbon, $ per tonne of CO2.
pub const CO2_PRICE_PER_TONNE: f64 = 58.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmissionFactors {
    /// Litres per km at cruising speed, by class.
    pub litres_per_km: [f64; 4],
    /// Kilograms of CO2 per litre, by class.
    pub co2_kg_per_litre: [f64; 4],
    /// `(upper speed bound km/h, fuel multiplier)`, ascending; the last bin
    /// covers everything faster.
    pub speed_bins: Vec<(f64, f64)>,
    pub co2_price: f64,
}

impl Default for EmissionFactors {
    fn default() -> Self {
        EmissionFactors {
            litres_per_km: [0.08, 0.11, 0.25, 0.35],
            co2_kg_per_litre: [2.31, 2.68, 2.68, 2.68],
            speed_bins: vec![(15.0, 1.6), (30.0, 1.25), (60.0, 1.0), (f64::INFINITY, 1.05)],
            co2_price: CO2_PRICE_PER_TONNE,
        }
    }
}

impl EmissionFactors {
    pub fn multiplier(&self, speed_kmh: f64) -> f64 {
        self.speed_bins
            .iter()
            .find(|(hi, _)| speed_kmh < *hi)
            .or(self.speed_bins.last())
            .map_or(1.0, |b| b.1)
    }

    pub fn litres(&self, class: VehicleClass, km: f64, speed_kmh: f64) -> f64 {
        km * self.litres_per_km[class.index()] * self.multiplier(speed_kmh)
    }

    pub fn cost_of_tonnes(&self, tonnes: f64) -> f64 {
        tonnes * self.co2_price
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmissionSummary {
    pub vkt: [f64; 4],
    pub fuel_litres: [f64; 4],
    pub co2_tonnes: f64,
    pub cost: f64,
}

impl EmissionSummary {
    pub fn total_fuel(&self) -> f64 {
        self.fuel_litres.iter().sum()
    }
}

pub fn emissions(trajs: &[Trajectory], net: &Network, f: &EmissionFactors) -> EmissionSummary {
    let mut s = EmissionSummary::default();
    let mut co2_kg = 0.0;
    for t in trajs {
        let c = t.class.index();
        for lt in &t.links {
            let km = net.links[lt.link].length_km;
            let dt = lt.exit - lt.entry;
            let speed = if dt > 0.0 { km / dt * 60.0 } else { f64::INFINITY };
            let l = f.litres(t.class, km, speed);
            s.vkt[c] += km;
            s.fuel_litres[c] += l;
            co2_kg += l * f.co2_kg_per_litre[c];
        }
    }
    s.co2_tonnes = co2_kg / 1000.0;
    s.cost = f.cost_of_tonnes(s.co2_tonnes);
    s
}
