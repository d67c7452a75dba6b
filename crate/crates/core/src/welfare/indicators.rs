//! Traffic, activity and logistics indicators of one simulated day.
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::{Period, PeriodWindows};
use crate::freight::{DeliveryMode, FreightDay};
use crate::mesosim::DayResult;
use crate::netgraph::{trip_tti, Network, ZoneId};
use crate::pax::PaxTrip;
use crate::synthpop::FreightVehicle;
use crate::vehicle::VehicleClass;

/// Carriers handling more shipments than this in a day count as large.
pub const LARGE_CARRIER_SHIPMENTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdType {
    Internal,
    Entering,
    Exiting,
    External,
}

impl OdType {
    pub const ALL: [OdType; 4] = [OdType::Internal, OdType::Entering, OdType::Exiting, OdType::External];

    pub fn of(net: &Network, o: ZoneId, d: ZoneId) -> OdType {
        match (net.zones[o].in_toll_area, net.zones[d].in_toll_area) {
            (true, true) => OdType::Internal,
            (false, true) => OdType::Entering,
            (true, false) => OdType::Exiting,
            (false, false) => OdType::External,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OdType::Internal => "internal",
            OdType::Entering => "entering",
            OdType::Exiting => "exiting",
            OdType::External => "external",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    /// Trip VKT by `[class][od type][departure period]`.
    pub vkt: [[[f64; 3]; 4]; 4],
    /// Kilometres driven on links inside the toll area, `[class][period]`
    /// of link entry.
    pub in_area_vkt: [[f64; 3]; 4],
    /// Length-weighted travel time index by period, all trips and trips
    /// with an end in the toll area.
    pub tti: [[f64; 3]; 2],
    pub mode_trips: BTreeMap<String, usize>,
    /// Trips by mode and departure period.
    pub departures: BTreeMap<String, [usize; 3]>,
    /// Activities by purpose, outside and inside the toll area.
    pub activities: BTreeMap<String, [usize; 2]>,
    /// E-commerce orders by delivery mode, outside and inside the area.
    pub ecommerce_orders: BTreeMap<String, [usize; 2]>,
    /// Mean realized shipment size and count, `"b2b"`/`"b2c"` by OD type.
    pub shipment_size: BTreeMap<String, [(f64, usize); 4]>,
    /// Mean B2B shipment size over the year: contracted flow over
    /// annual shipments.
    pub annual_mean_b2b_kg: f64,
    /// Mean tour load factor and tours by class, all carriers and large ones.
    pub load_factor: BTreeMap<String, [(f64, usize); 2]>,
    pub toll_revenue: f64,
    pub vehicles_entered: usize,
    pub trips_truncated: usize,
}

impl Indicators {
    pub fn in_area_peak_car_vkt(&self) -> f64 {
        let c = self.in_area_vkt[VehicleClass::Car.index()];
        c[Period::Am.index()] + c[Period::Pm.index()]
    }

    pub fn mode_shares(&self) -> BTreeMap<String, f64> {
        let n: usize = self.mode_trips.values().sum();
        self.mode_trips
            .iter()
            .map(|(k, &v)| (k.clone(), if n == 0 { 0.0 } else { v as f64 / n as f64 }))
            .collect()
    }

    /// Flat `(table, key, value)` rows for CSV output.
    pub fn rows(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::new();
        let mut push = |t: &str, k: String, v: f64| out.push((t.to_string(), k, v));
        for c in VehicleClass::ALL {
            for od in OdType::ALL {
                for p in Period::ALL {
                    push("vkt", format!("{}/{}/{}", c.name(), od.name(), p.name()), self.vkt[c.index()][od.index()][p.index()]);
                }
            }
            for p in Period::ALL {
                push("vkt_in_area", format!("{}/{}", c.name(), p.name()), self.in_area_vkt[c.index()][p.index()]);
            }
        }
        for (si, scope) in ["all", "toll_area"].iter().enumerate() {
            for p in Period::ALL {
                push("tti", format!("{scope}/{}", p.name()), self.tti[si][p.index()]);
            }
        }
        for (m, s) in self.mode_shares() {
            push("mode_shares", m, s);
        }
        for (m, d) in &self.departures {
            let n: usize = d.iter().sum();
            for p in Period::ALL {
                push("departure_shares", format!("{m}/{}", p.name()), if n == 0 { 0.0 } else { d[p.index()] as f64 / n as f64 });
            }
        }
        for (a, c) in &self.activities {
            push("activities", format!("{a}/outside"), c[0] as f64);
            push("activities", format!("{a}/toll_area"), c[1] as f64);
        }
        for (m, c) in &self.ecommerce_orders {
            push("ecommerce_orders", format!("{m}/outside"), c[0] as f64);
            push("ecommerce_orders", format!("{m}/toll_area"), c[1] as f64);
        }
        for (t, v) in &self.shipment_size {
            for od in OdType::ALL {
                push("shipment_size", format!("{t}/{}", od.name()), v[od.index()].0);
                push("shipment_count", format!("{t}/{}", od.name()), v[od.index()].1 as f64);
            }
        }
        push("shipment_size", "b2b/annual_mean".into(), self.annual_mean_b2b_kg);
        for (c, v) in &self.load_factor {
            push("load_factor", format!("{c}/all"), v[0].0);
            push("load_factor", format!("{c}/large_carriers"), v[1].0);
        }
        push("summary", "toll_revenue".into(), self.toll_revenue);
        push("summary", "vehicles_entered".into(), self.vehicles_entered as f64);
        push("summary", "trips_truncated".into(), self.trips_truncated as f64);
        out
    }
}

pub struct IndicatorInputs<'a> {
    pub net: &'a Network,
    pub windows: PeriodWindows,
    pub day: &'a DayResult,
    pub pax_trips: &'a [PaxTrip],
    /// Home zone of each household, by household id.
    pub household_zone: &'a dyn Fn(usize) -> ZoneId,
    pub freight: &'a FreightDay,
    pub contracts_annual_kg: &'a [f64],
    pub vehicles: &'a [FreightVehicle],
}

fn mean_acc(acc: &mut (f64, usize), x: f64) {
    acc.0 += x;
    acc.1 += 1;
}

fn finish(acc: (f64, usize)) -> (f64, usize) {
    (if acc.1 == 0 { 0.0 } else { acc.0 / acc.1 as f64 }, acc.1)
}

pub fn report_indicators(inp: &IndicatorInputs) -> Indicators {
    let net = inp.net;
    let w = inp.windows;
    let mut ind = Indicators {
        toll_revenue: inp.day.ledger.total(),
        vehicles_entered: inp.day.entered,
        trips_truncated: inp.day.truncated,
        ..Default::default()
    };
    let mut tti_acc = [[(0.0, 0.0); 3]; 2];
    for t in &inp.day.trajectories {
        let c = t.class.index();
        let od = OdType::of(net, t.origin, t.dest);
        let p = w.period_of(t.depart).index();
        ind.vkt[c][od.index()][p] += t.length_km;
        for lt in &t.links {
            if net.zones[net.link_zone_to(lt.link)].in_toll_area {
                ind.in_area_vkt[c][w.period_of(lt.entry).index()] += net.links[lt.link].length_km;
            }
        }
        if t.arrive.is_some() && !t.links.is_empty() {
            if let Ok(x) = trip_tti(&t.links, net) {
                for scope in 0..2 {
                    if scope == 1 && od == OdType::External {
                        continue;
                    }
                    tti_acc[scope][p].0 += t.length_km * x;
                    tti_acc[scope][p].1 += t.length_km;
                }
            }
        }
    }
    for s in 0..2 {
        for p in 0..3 {
            let (a, l) = tti_acc[s][p];
            ind.tti[s][p] = if l > 0.0 { a / l } else { 0.0 };
        }
    }
    for t in inp.pax_trips {
        let m = t.mode.name().to_string();
        *ind.mode_trips.entry(m.clone()).or_default() += 1;
        ind.departures.entry(m).or_default()[w.period_of(t.depart).index()] += 1;
    }
    // An activity is the destination of an outbound trip; return trips end
    // at home.
    for (k, t) in inp.pax_trips.iter().enumerate() {
        if k % 2 == 0 {
            let a = usize::from(net.zones[t.dest].in_toll_area);
            ind.activities.entry(t.purpose.name().to_string()).or_default()[a] += 1;
        }
    }
    for o in &inp.freight.orders {
        let a = usize::from(net.zones[(inp.household_zone)(o.household)].in_toll_area);
        let m = match o.mode {
            DeliveryMode::Home => "home_delivery",
            DeliveryMode::Pickup => "pickup",
        };
        ind.ecommerce_orders.entry(m.to_string()).or_default()[a] += 1;
    }
    let mut sizes: BTreeMap<String, [(f64, usize); 4]> = BTreeMap::new();
    for s in &inp.freight.shipments {
        let t = if s.is_ecommerce() { "b2c" } else { "b2b" };
        mean_acc(&mut sizes.entry(t.into()).or_default()[OdType::of(net, s.pickup, s.delivery).index()], s.size_kg);
    }
    ind.shipment_size = sizes.into_iter().map(|(k, v)| (k, v.map(finish))).collect();
    let (flow, n): (f64, f64) = inp
        .freight
        .contracts
        .iter()
        .map(|c| (inp.contracts_annual_kg[c.contract], c.annual_shipments))
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    ind.annual_mean_b2b_kg = if n > 0.0 { flow / n } else { 0.0 };
    let mut lf: BTreeMap<String, [(f64, usize); 2]> = BTreeMap::new();
    for cd in &inp.freight.carriers {
        let Some(plan) = &cd.plan else { continue };
        let large = cd.shipments.len() > LARGE_CARRIER_SHIPMENTS;
        for tour in &plan.tours {
            let v = &inp.vehicles[cd.vehicles[tour.vehicle]];
            let e = lf.entry(v.class.name().to_string()).or_default();
            let x = tour.peak_load_kg / v.capacity_kg;
            mean_acc(&mut e[0], x);
            if large {
                mean_acc(&mut e[1], x);
            }
        }
    }
    ind.load_factor = lf.into_iter().map(|(k, v)| (k, v.map(finish))).collect();
    ind
}
