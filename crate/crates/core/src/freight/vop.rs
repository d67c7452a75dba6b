//! Vehicle operations planning: an insertion heuristic run under 16
//! combinations of shipment ordering, vehicle ordering and similarity
//! measure, an overlap factor across the resulting plans, and a
//! money-metric logit over them.
use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::choice::{mnl_probabilities, sample_index};
use crate::clock::Minutes;
use crate::error::{Error, Result};
use crate::netgraph::ZoneId;
use crate::vehicle::VehicleClass;

/// Money-metric planning coefficients ($/h, $/km by body type) with the
/// overlap coefficient and logit scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VopParams {
    pub time_per_h: f64,
    pub lgv_per_km: f64,
    pub hgv_per_km: f64,
    pub vhgv_per_km: f64,
    pub overlap: f64,
    pub scale: f64,
}

impl Default for VopParams {
    fn default() -> Self {
        VopParams {
            time_per_h: -27.32,
            lgv_per_km: -0.57,
            hgv_per_km: -0.67,
            vhgv_per_km: -0.72,
            overlap: 1.61,
            scale: 1.18,
        }
    }
}

impl VopParams {
    /// Distance coefficient for a goods class; cars are costed like LGVs.
    pub fn per_km(&self, class: VehicleClass) -> f64 {
        match class {
            VehicleClass::Car | VehicleClass::Lgv => self.lgv_per_km,
            VehicleClass::Hgv => self.hgv_per_km,
            VehicleClass::Vhgv => self.vhgv_per_km,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let neg = [self.time_per_h, self.lgv_per_km, self.hgv_per_km, self.vhgv_per_km];
        if neg.iter().any(|b| !(*b < 0.0)) || !(self.overlap > 0.0) || !(self.scale > 0.0) {
            return Err(Error::invalid("planning coefficients have the wrong sign"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    Parcel,
    Ltl,
    Ftl,
}

impl Requirement {
    /// FTL first, then LTL, then parcel.
    fn rank(self) -> u8 {
        match self {
            Requirement::Ftl => 0,
            Requirement::Ltl => 1,
            Requirement::Parcel => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Requirement::Parcel => "parcel",
            Requirement::Ltl => "ltl",
            Requirement::Ftl => "ftl",
        }
    }
}

/// What a carrier plans with: one shipment to pick up and deliver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanShipment {
    pub id: usize,
    pub size_kg: f64,
    pub pickup: ZoneId,
    pub delivery: ZoneId,
    pub pickup_window: (Minutes, Minutes),
    pub delivery_window: (Minutes, Minutes),
    pub requirement: Requirement,
    pub dwell_pickup_min: f64,
    pub dwell_delivery_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanVehicle {
    pub id: usize,
    pub class: VehicleClass,
    pub capacity_kg: f64,
    pub depot: ZoneId,
    pub max_hours: f64,
    pub available_from: Minutes,
}

/// Travel cost of one zone-to-zone trip departing at a given time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LegCost {
    pub time_min: f64,
    pub km: f64,
    /// Distance or cordon charges for the trip.
    pub toll: f64,
    /// Flat area charge the trip would trigger; paid once per vehicle.
    pub area_flat: f64,
}

/// Experienced network conditions as seen by a planner.
pub trait TravelOracle {
    fn leg(&self, class: VehicleClass, o: ZoneId, d: ZoneId, depart: Minutes) -> Result<LegCost>;
    /// Zone-to-zone distance used by the spatial similarity measure.
    fn distance_km(&self, o: ZoneId, d: ZoneId) -> f64;
    /// Daily cap on distance charges.
    fn daily_toll_cap(&self, _class: VehicleClass) -> f64 {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    Pickup,
    Delivery,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub zone: ZoneId,
    pub kind: StopKind,
    /// Indices into the carrier's shipment list.
    pub shipments: Vec<usize>,
    pub arrive: Minutes,
    /// Service start, after any wait for the window to open.
    pub start: Minutes,
    pub depart: Minutes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Index into the carrier's fleet.
    pub vehicle: usize,
    pub depart: Minutes,
    pub stops: Vec<Stop>,
    pub return_at: Minutes,
    pub peak_load_kg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanTrip {
    pub vehicle: usize,
    pub class: VehicleClass,
    pub from: ZoneId,
    pub to: ZoneId,
    pub depart: Minutes,
    /// Travel plus waiting and dwell at the destination stop, hours.
    pub time_h: f64,
    pub km: f64,
    pub toll: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VopPlan {
    /// Vehicle (fleet index) carrying each shipment.
    pub assignment: Vec<Option<usize>>,
    pub tours: Vec<Tour>,
    pub trips: Vec<PlanTrip>,
    pub unassigned: Vec<usize>,
    pub overlap: f64,
}

impl VopPlan {
    fn signature(&self) -> (Vec<Option<usize>>, Vec<(usize, Vec<(ZoneId, StopKind)>)>) {
        (
            self.assignment.clone(),
            self.tours
                .iter()
                .map(|t| (t.vehicle, t.stops.iter().map(|s| (s.zone, s.kind)).collect()))
                .collect(),
        )
    }

    pub fn total_toll(&self) -> f64 {
        self.trips.iter().map(|t| t.toll).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShipmentOrder {
    SizeRequirementWindow,
    WindowSizeRequirement,
    SizeWindowRequirement,
    RequirementThenSize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VehicleOrder {
    RemainingHours,
    RemainingCapacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Similarity {
    StopDistance,
    ArrivalTime,
}

pub const SHIPMENT_ORDERS: [ShipmentOrder; 4] = [
    ShipmentOrder::SizeRequirementWindow,
    ShipmentOrder::WindowSizeRequirement,
    ShipmentOrder::SizeWindowRequirement,
    ShipmentOrder::RequirementThenSize,
];
pub const VEHICLE_ORDERS: [VehicleOrder; 2] = [VehicleOrder::RemainingHours, VehicleOrder::RemainingCapacity];
pub const SIMILARITIES: [Similarity; 2] = [Similarity::StopDistance, Similarity::ArrivalTime];

fn window_cmp(a: &PlanShipment, b: &PlanShipment) -> Ordering {
    let wa = a.pickup_window.1 - a.pickup_window.0;
    let wb = b.pickup_window.1 - b.pickup_window.0;
    a.pickup_window.0.total_cmp(&b.pickup_window.0).then(wa.total_cmp(&wb))
}

fn order_shipments(s: &[PlanShipment], order: ShipmentOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    let size = |a: &PlanShipment, b: &PlanShipment| b.size_kg.total_cmp(&a.size_kg);
    let req = |a: &PlanShipment, b: &PlanShipment| a.requirement.rank().cmp(&b.requirement.rank());
    idx.sort_by(|&i, &j| {
        let (a, b) = (&s[i], &s[j]);
        let o = match order {
            ShipmentOrder::SizeRequirementWindow => size(a, b).then(req(a, b)).then(window_cmp(a, b)),
            ShipmentOrder::WindowSizeRequirement => window_cmp(a, b).then(size(a, b)).then(req(a, b)),
            ShipmentOrder::SizeWindowRequirement => size(a, b).then(window_cmp(a, b)).then(req(a, b)),
            ShipmentOrder::RequirementThenSize => req(a, b).then(size(a, b)),
        };
        o.then(i.cmp(&j))
    });
    idx
}

fn similarity(sim: Similarity, a: &PlanShipment, b: &PlanShipment, oracle: &dyn TravelOracle) -> f64 {
    match sim {
        Similarity::StopDistance => {
            (oracle.distance_km(a.pickup, b.pickup) * oracle.distance_km(a.delivery, b.delivery)).sqrt()
        }
        Similarity::ArrivalTime => {
            (a.pickup_window.1 - b.pickup_window.1).abs() + (a.delivery_window.1 - b.delivery_window.1).abs()
        }
    }
}

#[derive(Clone, Debug)]
struct DraftStop {
    zone: ZoneId,
    kind: StopKind,
    shipments: Vec<usize>,
    dwell: f64,
    window: (Minutes, Minutes),
}

#[derive(Clone, Debug)]
struct Draft {
    vehicle: usize,
    pickups: Vec<DraftStop>,
    deliveries: Vec<DraftStop>,
    load: f64,
}

impl Draft {
    fn add(&mut self, s: usize, sh: &PlanShipment) {
        fn put(list: &mut Vec<DraftStop>, zone: ZoneId, kind: StopKind, s: usize, dwell: f64, w: (Minutes, Minutes)) {
            if let Some(st) = list.iter_mut().find(|st| st.zone == zone) {
                st.shipments.push(s);
                st.window = (st.window.0.max(w.0), st.window.1.min(w.1));
            } else {
                list.push(DraftStop {
                    zone,
                    kind,
                    shipments: vec![s],
                    dwell,
                    window: w,
                });
            }
        }
        put(&mut self.pickups, sh.pickup, StopKind::Pickup, s, sh.dwell_pickup_min, sh.pickup_window);
        put(&mut self.deliveries, sh.delivery, StopKind::Delivery, s, sh.dwell_delivery_min, sh.delivery_window);
        self.load += sh.size_kg;
    }

    /// Times the tour departing as late as useful after `available`;
    /// `None` if a window or the hour budget is violated.
    fn schedule(
        &self,
        veh: &PlanVehicle,
        available: Minutes,
        budget_min: f64,
        oracle: &dyn TravelOracle,
    ) -> Result<Option<Tour>> {
        let stops: Vec<&DraftStop> = self.pickups.iter().chain(&self.deliveries).collect();
        if stops.iter().any(|s| s.window.0 > s.window.1) {
            return Ok(None);
        }
        let first = stops[0];
        let probe = oracle.leg(veh.class, veh.depot, first.zone, first.window.0)?;
        let depart = available.max(first.window.0 - probe.time_min);
        let mut t = depart;
        let mut at = veh.depot;
        let mut out = Vec::with_capacity(stops.len());
        for s in stops {
            let arrive = t + oracle.leg(veh.class, at, s.zone, t)?.time_min;
            if arrive > s.window.1 + 1e-9 {
                return Ok(None);
            }
            let start = arrive.max(s.window.0);
            t = start + s.dwell;
            at = s.zone;
            out.push(Stop {
                zone: s.zone,
                kind: s.kind,
                shipments: s.shipments.clone(),
                arrive,
                start,
                depart: t,
            });
        }
        let return_at = t + oracle.leg(veh.class, at, veh.depot, t)?.time_min;
        if return_at - depart > budget_min + 1e-9 {
            return Ok(None);
        }
        Ok(Some(Tour {
            vehicle: self.vehicle,
            depart,
            stops: out,
            return_at,
            peak_load_kg: self.load,
        }))
    }
}

/// Trips of every tour with tolls settled per vehicle: distance and cordon
/// charges accumulate up to the daily cap and an area charge is paid once.
fn plan_trips(tours: &[Tour], fleet: &[PlanVehicle], oracle: &dyn TravelOracle) -> Result<Vec<PlanTrip>> {
    let mut order: Vec<usize> = (0..tours.len()).collect();
    order.sort_by(|&a, &b| {
        tours[a]
            .vehicle
            .cmp(&tours[b].vehicle)
            .then(tours[a].depart.total_cmp(&tours[b].depart))
    });
    let mut trips = Vec::new();
    let mut paid = vec![0.0; fleet.len()];
    let mut area_paid = vec![false; fleet.len()];
    for ti in order {
        let tour = &tours[ti];
        let v = &fleet[tour.vehicle];
        let cap = oracle.daily_toll_cap(v.class);
        let mut at = v.depot;
        let mut t = tour.depart;
        let mut legs: Vec<(ZoneId, Minutes)> = tour.stops.iter().map(|s| (s.zone, s.depart)).collect();
        legs.push((v.depot, tour.return_at));
        for (to, end) in legs {
            let c = oracle.leg(v.class, at, to, t)?;
            let mut toll = c.toll.min((cap - paid[tour.vehicle]).max(0.0));
            paid[tour.vehicle] += toll;
            if c.area_flat > 0.0 && !area_paid[tour.vehicle] {
                area_paid[tour.vehicle] = true;
                toll += c.area_flat;
            }
            trips.push(PlanTrip {
                vehicle: tour.vehicle,
                class: v.class,
                from: at,
                to,
                depart: t,
                time_h: (end - t) / 60.0,
                km: c.km,
                toll,
            });
            at = to;
            t = end;
        }
    }
    Ok(trips)
}

struct VehState {
    available: Minutes,
    used_min: f64,
}

/// One pass of the insertion heuristic.
pub fn run_heuristic(
    shipments: &[PlanShipment],
    fleet: &[PlanVehicle],
    oracle: &dyn TravelOracle,
    so: ShipmentOrder,
    vo: VehicleOrder,
    sim: Similarity,
) -> Result<VopPlan> {
    let mut remaining = order_shipments(shipments, so);
    let mut state: Vec<VehState> = fleet
        .iter()
        .map(|v| VehState {
            available: v.available_from,
            used_min: 0.0,
        })
        .collect();
    let mut assignment = vec![None; shipments.len()];
    let mut tours = Vec::new();
    let mut unassigned = Vec::new();
    while !remaining.is_empty() {
        // Step 1: seed shipment.
        let s0 = remaining.remove(0);
        let sh0 = &shipments[s0];
        // Step 3: vehicle by the chosen ordering among those that can carry it.
        let mut vehicles: Vec<usize> = (0..fleet.len()).collect();
        let remaining_h = |v: usize| fleet[v].max_hours - state[v].used_min / 60.0;
        vehicles.sort_by(|&a, &b| {
            let o = match vo {
                VehicleOrder::RemainingHours => remaining_h(b)
                    .total_cmp(&remaining_h(a))
                    .then(fleet[b].capacity_kg.total_cmp(&fleet[a].capacity_kg)),
                VehicleOrder::RemainingCapacity => fleet[b]
                    .capacity_kg
                    .total_cmp(&fleet[a].capacity_kg)
                    .then(remaining_h(b).total_cmp(&remaining_h(a))),
            };
            o.then(a.cmp(&b))
        });
        let mut chosen = None;
        for v in vehicles {
            if fleet[v].capacity_kg + 1e-9 < sh0.size_kg {
                continue;
            }
            let mut d = Draft {
                vehicle: v,
                pickups: Vec::new(),
                deliveries: Vec::new(),
                load: 0.0,
            };
            d.add(s0, sh0);
            let budget = remaining_h(v) * 60.0;
            if let Some(t) = d.schedule(&fleet[v], state[v].available, budget, oracle)? {
                chosen = Some((d, t));
                break;
            }
        }
        let Some((mut draft, mut tour)) = chosen else {
            unassigned.push(s0);
            continue;
        };
        let v = draft.vehicle;
        let mut members = vec![s0];
        // Step 4: a full-truckload seed closes the tour.
        if sh0.requirement != Requirement::Ftl {
            let mut cands: Vec<(f64, usize, usize)> = remaining
                .iter()
                .enumerate()
                .filter(|&(_, &s)| shipments[s].requirement != Requirement::Ftl)
                .map(|(pos, &s)| (similarity(sim, sh0, &shipments[s], oracle), pos, s))
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let budget = remaining_h(v) * 60.0;
            for (_, _, s1) in cands {
                // Step 5: the most similar shipment that still fits.
                if draft.load + shipments[s1].size_kg > fleet[v].capacity_kg + 1e-9 {
                    continue;
                }
                let mut trial = draft.clone();
                trial.add(s1, &shipments[s1]);
                // Step 8: a time-infeasible insertion ends the tour.
                match trial.schedule(&fleet[v], state[v].available, budget, oracle)? {
                    Some(t) => {
                        draft = trial;
                        tour = t;
                        members.push(s1);
                        remaining.retain(|&x| x != s1);
                    }
                    None => break,
                }
            }
        }
        for s in members {
            assignment[s] = Some(v);
        }
        state[v].used_min += tour.return_at - tour.depart;
        state[v].available = tour.return_at;
        tours.push(tour);
    }
    unassigned.sort_unstable();
    let trips = plan_trips(&tours, fleet, oracle)?;
    Ok(VopPlan {
        assignment,
        tours,
        trips,
        unassigned,
        overlap: 1.0,
    })
}

/// Runs all 16 heuristic combinations, drops duplicate plans and sets each
/// plan's overlap factor.
pub fn generate_vop_choice_set(
    shipments: &[PlanShipment],
    fleet: &[PlanVehicle],
    oracle: &dyn TravelOracle,
) -> Result<Vec<VopPlan>> {
    if shipments.is_empty() || fleet.is_empty() {
        return Err(Error::invalid("planning needs shipments and vehicles"));
    }
    let mut plans: Vec<VopPlan> = Vec::new();
    let mut seen = BTreeSet::new();
    for so in SHIPMENT_ORDERS {
        for vo in VEHICLE_ORDERS {
            for sim in SIMILARITIES {
                let p = run_heuristic(shipments, fleet, oracle, so, vo, sim)?;
                if p.tours.is_empty() {
                    continue;
                }
                if seen.insert(p.signature()) {
                    plans.push(p);
                }
            }
        }
    }
    if plans.is_empty() {
        return Err(Error::infeasible("no feasible vehicle operations plan"));
    }
    let of = overlap_factors(&plans)?;
    for (p, f) in plans.iter_mut().zip(of) {
        p.overlap = f;
    }
    Ok(plans)
}

/// `OF_i = (1/S_i) * sum over assigned (s, v) of 1 / #plans assigning s to v`,
/// with `S_i` the shipments the plan assigns.
pub fn overlap_factors(plans: &[VopPlan]) -> Result<Vec<f64>> {
    let Some(first) = plans.first() else {
        return Err(Error::invalid("no plans"));
    };
    let s = first.assignment.len();
    if plans.iter().any(|p| p.assignment.len() != s) {
        return Err(Error::invalid("plans cover different shipment sets"));
    }
    let count = |sh: usize, v: usize| plans.iter().filter(|p| p.assignment[sh] == Some(v)).count() as f64;
    Ok(plans
        .iter()
        .map(|p| {
            let pairs: Vec<(usize, usize)> = p
                .assignment
                .iter()
                .enumerate()
                .filter_map(|(sh, v)| v.map(|v| (sh, v)))
                .collect();
            if pairs.is_empty() {
                return 1.0;
            }
            pairs.iter().map(|&(sh, v)| 1.0 / count(sh, v)).sum::<f64>() / pairs.len() as f64
        })
        .collect())
}

/// Systematic utility in dollars: minus tolls plus time and distance costs
/// over every trip, including returns to the depot.
pub fn vop_utility(plan: &VopPlan, p: &VopParams) -> f64 {
    plan.trips
        .iter()
        .map(|t| -t.toll + p.time_per_h * t.time_h + p.per_km(t.class) * t.km)
        .sum()
}

/// Logit over `V + beta_5 ln OF` at scale `mu`; returns the chosen index
/// and the probabilities.
pub fn vop_choose(plans: &[VopPlan], p: &VopParams, u: f64) -> Result<(usize, Vec<f64>)> {
    if plans.is_empty() {
        return Err(Error::invalid("empty plan set"));
    }
    let v: Vec<f64> = plans
        .iter()
        .map(|pl| vop_utility(pl, p) + p.overlap * pl.overlap.ln())
        .collect();
    let probs = mnl_probabilities(&v, p.scale)?;
    Ok((sample_index(&probs, u), probs))
}

/// Independent check of a plan against the shipments and fleet. Returns a
/// description of the first violation.
pub fn check_plan(
    plan: &VopPlan,
    shipments: &[PlanShipment],
    fleet: &[PlanVehicle],
    oracle: &dyn TravelOracle,
) -> std::result::Result<(), String> {
    const EPS: f64 = 1e-6;
    if plan.assignment.len() != shipments.len() {
        return Err("assignment length".into());
    }
    let mut carried = vec![0usize; shipments.len()];
    let mut hours = vec![0.0; fleet.len()];
    let mut by_vehicle: Vec<Vec<(f64, f64)>> = vec![Vec::new(); fleet.len()];
    for (ti, tour) in plan.tours.iter().enumerate() {
        let v = fleet.get(tour.vehicle).ok_or("unknown vehicle")?;
        let mut load = 0.0;
        let mut picked = BTreeSet::new();
        let mut delivered = BTreeSet::new();
        let mut t = tour.depart;
        let mut at = v.depot;
        for st in &tour.stops {
            let travel = oracle.leg(v.class, at, st.zone, t).map_err(|e| e.to_string())?.time_min;
            if st.arrive + EPS < t + travel || st.start + EPS < st.arrive || st.depart + EPS < st.start {
                return Err(format!("tour {ti}: times out of order"));
            }
            for &s in &st.shipments {
                let sh = &shipments[s];
                if plan.assignment[s] != Some(tour.vehicle) {
                    return Err(format!("shipment {s} visited by an unassigned vehicle"));
                }
                match st.kind {
                    StopKind::Pickup => {
                        if sh.pickup != st.zone || !picked.insert(s) {
                            return Err(format!("shipment {s}: bad pickup"));
                        }
                        if st.start + EPS < sh.pickup_window.0 || st.start > sh.pickup_window.1 + EPS {
                            return Err(format!("shipment {s}: pickup outside window"));
                        }
                        load += sh.size_kg;
                    }
                    StopKind::Delivery => {
                        if sh.delivery != st.zone || !picked.contains(&s) || !delivered.insert(s) {
                            return Err(format!("shipment {s}: delivery before pickup"));
                        }
                        if st.arrive > sh.delivery_window.1 + EPS {
                            return Err(format!("shipment {s}: late delivery"));
                        }
                        load -= sh.size_kg;
                    }
                }
                if load > v.capacity_kg + EPS {
                    return Err(format!("tour {ti}: capacity exceeded"));
                }
            }
            t = st.depart;
            at = st.zone;
        }
        if picked != delivered {
            return Err(format!("tour {ti}: undelivered shipment"));
        }
        for &s in &picked {
            carried[s] += 1;
            if shipments[s].requirement == Requirement::Ftl && picked.len() > 1 {
                return Err(format!("full-truckload shipment {s} shares tour {ti}"));
            }
        }
        let back = oracle.leg(v.class, at, v.depot, t).map_err(|e| e.to_string())?.time_min;
        if tour.return_at + EPS < t + back || tour.depart + EPS < v.available_from {
            return Err(format!("tour {ti}: bad return"));
        }
        hours[tour.vehicle] += (tour.return_at - tour.depart) / 60.0;
        by_vehicle[tour.vehicle].push((tour.depart, tour.return_at));
    }
    for (v, h) in hours.iter().enumerate() {
        if *h > fleet[v].max_hours + EPS {
            return Err(format!("vehicle {v} over working hours"));
        }
        let mut spans = by_vehicle[v].clone();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        if spans.windows(2).any(|w| w[1].0 + EPS < w[0].1) {
            return Err(format!("vehicle {v} has overlapping tours"));
        }
    }
    for (s, c) in carried.iter().enumerate() {
        let listed = plan.unassigned.contains(&s);
        match (c, listed, plan.assignment[s]) {
            (1, false, Some(_)) | (0, true, None) => {}
            _ => return Err(format!("shipment {s} carried {c} times")),
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Grid zones `z = row * 10 + col`, 1 km apart, 30 km/h, no tolls.
    pub struct GridOracle;

    impl TravelOracle for GridOracle {
        fn leg(&self, _c: VehicleClass, o: ZoneId, d: ZoneId, _t: Minutes) -> Result<LegCost> {
            let km = self.distance_km(o, d);
            Ok(LegCost {
                time_min: km * 2.0 + 3.0,
                km,
                toll: 0.0,
                area_flat: 0.0,
            })
        }
        fn distance_km(&self, o: ZoneId, d: ZoneId) -> f64 {
            let (r0, c0) = ((o / 10) as f64, (o % 10) as f64);
            let (r1, c1) = ((d / 10) as f64, (d % 10) as f64);
            (r0 - r1).abs() + (c0 - c1).abs()
        }
    }

    pub fn ship(id: usize, size: f64, p: ZoneId, d: ZoneId) -> PlanShipment {
        PlanShipment {
            id,
            size_kg: size,
            pickup: p,
            delivery: d,
            pickup_window: (480.0, 720.0),
            delivery_window: (480.0, 1080.0),
            requirement: Requirement::Ltl,
            dwell_pickup_min: 10.0,
            dwell_delivery_min: 10.0,
        }
    }

    pub fn van(id: usize, cap: f64) -> PlanVehicle {
        PlanVehicle {
            id,
            class: VehicleClass::Lgv,
            capacity_kg: cap,
            depot: 0,
            max_hours: 10.0,
            available_from: 360.0,
        }
    }

    #[test]
    fn single_shipment_collapses_to_one_plan() {
        let plans = generate_vop_choice_set(&[ship(0, 100.0, 11, 22)], &[van(0, 1500.0)], &GridOracle).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].overlap, 1.0);
        assert_eq!(plans[0].assignment, vec![Some(0)]);
        check_plan(&plans[0], &[ship(0, 100.0, 11, 22)], &[van(0, 1500.0)], &GridOracle).unwrap();
    }

    #[test]
    fn full_truckload_travels_alone() {
        let mut s = vec![ship(0, 1400.0, 11, 22), ship(1, 50.0, 11, 22), ship(2, 50.0, 12, 23)];
        s[0].requirement = Requirement::Ftl;
        let fleet = vec![van(0, 1500.0), van(1, 1500.0)];
        for p in generate_vop_choice_set(&s, &fleet, &GridOracle).unwrap() {
            check_plan(&p, &s, &fleet, &GridOracle).unwrap();
            let tour = p.tours.iter().find(|t| t.stops.iter().any(|st| st.shipments.contains(&0))).unwrap();
            assert!(tour.stops.iter().all(|st| st.shipments == vec![0]));
        }
    }

    #[test]
    fn oversized_shipment_is_unassigned() {
        let s = vec![ship(0, 5000.0, 11, 22), ship(1, 50.0, 11, 22)];
        let fleet = vec![van(0, 1500.0)];
        let plans = generate_vop_choice_set(&s, &fleet, &GridOracle).unwrap();
        assert!(plans.iter().all(|p| p.unassigned == vec![0]));
    }

    fn plan_with(assign: Vec<Option<usize>>) -> VopPlan {
        VopPlan {
            assignment: assign,
            tours: Vec::new(),
            trips: Vec::new(),
            unassigned: Vec::new(),
            overlap: 1.0,
        }
    }

    #[test]
    fn overlap_cases() {
        let a = plan_with(vec![Some(0), Some(1)]);
        assert_eq!(overlap_factors(&[a.clone()]).unwrap(), vec![1.0]);
        assert_eq!(overlap_factors(&[a.clone(), a.clone()]).unwrap(), vec![0.5, 0.5]);
        let b = plan_with(vec![Some(1), Some(0)]);
        assert_eq!(overlap_factors(&[a.clone(), b]).unwrap(), vec![1.0, 1.0]);
        assert!(overlap_factors(&[a, plan_with(vec![Some(0)])]).is_err());
    }

    fn trip(class: VehicleClass, toll: f64, h: f64, km: f64) -> PlanTrip {
        PlanTrip {
            vehicle: 0,
            class,
            from: 0,
            to: 1,
            depart: 0.0,
            time_h: h,
            km,
            toll,
        }
    }

    #[test]
    fn utility_worked_example() {
        let p = VopParams::default();
        let mut plan = plan_with(vec![]);
        assert_eq!(vop_utility(&plan, &p), 0.0);
        plan.trips.push(trip(VehicleClass::Lgv, 2.0, 0.5, 10.0));
        assert!((vop_utility(&plan, &p) - (-21.36)).abs() < 1e-12);
        let base = vop_utility(&plan, &p);
        plan.trips[0].toll = 4.0;
        assert!((vop_utility(&plan, &p) - (base - 2.0)).abs() < 1e-12);
        plan.trips.push(trip(VehicleClass::Hgv, 0.0, 0.0, 0.0));
        assert!((vop_utility(&plan, &p) - (base - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn choice_probabilities() {
        let p = VopParams::default();
        let mut a = plan_with(vec![]);
        a.trips.push(trip(VehicleClass::Lgv, 10.0, 0.0, 0.0));
        let mut b = plan_with(vec![]);
        b.trips.push(trip(VehicleClass::Lgv, 20.0, 0.0, 0.0));
        let (_, pr) = vop_choose(&[a.clone(), b], &p, 0.5).unwrap();
        let expect = 1.0 / (1.0 + (1.18f64 * -10.0).exp());
        assert!((pr[0] - expect).abs() < 1e-12);
        assert!((pr[0] - 0.999993).abs() < 1e-6);
        let (_, pr) = vop_choose(&[a.clone(), a.clone()], &p, 0.5).unwrap();
        assert_eq!(pr, vec![0.5, 0.5]);
        assert_eq!(vop_choose(&[a], &p, 0.99).unwrap().1, vec![1.0]);
        assert!(vop_choose(&[], &p, 0.5).is_err());
    }

    #[test]
    fn table_defaults_valid() {
        VopParams::default().validate().unwrap();
        let mut p = VopParams::default();
        p.overlap = -1.0;
        assert!(p.validate().is_err());
    }
}
