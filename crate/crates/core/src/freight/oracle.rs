//! Planner's view of the network built from experienced skims.
use crate::clock::Minutes;
use crate::error::Result;
use crate::mesosim::SkimSet;
use crate::netgraph::ZoneId;
use crate::pricing::{SchemeKind, SkimTolls};
use crate::vehicle::VehicleClass;

use super::vop::{LegCost, TravelOracle, VopParams};

pub struct SkimOracle<'a> {
    pub skims: &'a SkimSet,
    pub tolls: &'a SkimTolls,
}

impl TravelOracle for SkimOracle<'_> {
    fn leg(&self, class: VehicleClass, o: ZoneId, d: ZoneId, depart: Minutes) -> Result<LegCost> {
        let p = self.skims.windows.period_of(depart);
        let charge = self.tolls.trip_toll(self.skims, class, o, d, p, (depart, depart))?;
        let (toll, area_flat) = if self.tolls.kind == SchemeKind::Area { (0.0, charge) } else { (charge, 0.0) };
        Ok(LegCost {
            time_min: self.skims.time(p, o, d)?,
            km: self.skims.dist(p, o, d)?,
            toll,
            area_flat,
        })
    }

    fn distance_km(&self, o: ZoneId, d: ZoneId) -> f64 {
        self.skims.dist(crate::clock::Period::Off, o, d).unwrap_or(f64::INFINITY)
    }

    fn daily_toll_cap(&self, class: VehicleClass) -> f64 {
        self.tolls.daily_cap(class)
    }
}

/// Average operating cost of sending one shipment from `o` to `d`: the
/// money-metric cost of a direct daytime trip (toll plus time and distance
/// at the VOP coefficients), blended over skim periods by daytime hours.
pub fn average_operating_cost(
    skims: &SkimSet,
    tolls: &SkimTolls,
    vop: &VopParams,
    class: VehicleClass,
    o: ZoneId,
    d: ZoneId,
    day: (Minutes, Minutes),
) -> Result<f64> {
    let w = skims.windows;
    let overlap = |(a, b): (Minutes, Minutes)| (b.min(day.1) - a.max(day.0)).max(0.0);
    let h_am = overlap(w.am);
    let h_pm = overlap(w.pm);
    let h_off = (day.1 - day.0 - h_am - h_pm).max(0.0);
    let total = h_am + h_pm + h_off;
    let mut cost = 0.0;
    for (p, h) in [(crate::clock::Period::Am, h_am), (crate::clock::Period::Pm, h_pm), (crate::clock::Period::Off, h_off)] {
        if h > 0.0 {
            let c = -vop.time_per_h * skims.time(p, o, d)? / 60.0 - vop.per_km(class) * skims.dist(p, o, d)?;
            cost += h / total * c;
        }
    }
    let toll = tolls.trip_toll(skims, class, o, d, crate::clock::Period::Off, day)?;
    Ok(cost + toll)
}
