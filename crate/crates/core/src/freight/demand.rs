//! Daily freight demand: synthetic commodity contracts, B2B shipments sized
//! by the EOQ rule, B2C shipments from household e-commerce, carrier
//! planning and conversion of chosen plans into vehicle itineraries.
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choice::sample_index;
use crate::clock::{hhmm, Minutes};
use crate::error::{Error, Result};
use crate::mesosim::{Driver, Leg, SkimSet, TollLedger, VehiclePlan};
use crate::netgraph::{Network, ZoneId};
use crate::pricing::SkimTolls;
use crate::rng::{normal_quantile, tags, uniform};
use crate::synthpop::{City, DriverType, Establishment};
use crate::vehicle::VehicleClass;

use super::ecommerce::{simulate_ecommerce, DeliveryMode, EcomContext, EcomOrder, EcomSpec, Household};
use super::eoq::{optimal_shipment_size, shipment_frequency, ShipmentSizeParams};
use super::oracle::{average_operating_cost, SkimOracle};
use super::vop::{
    generate_vop_choice_set, vop_choose, PlanShipment, PlanVehicle, Requirement, VopParams, VopPlan,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommodityType {
    pub name: String,
    pub value_per_kg: f64,
    pub value_sigma: f64,
    /// Median annual flow per contract, kg.
    pub annual_kg: f64,
    pub annual_sigma: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContractSpec {
    pub commodities: Vec<CommodityType>,
    /// Contracts per shipper: `1 + round(per_employee * employment)`.
    pub per_employee: f64,
    pub max_per_shipper: u32,
    pub period_days: f64,
}

impl Default for ContractSpec {
    fn default() -> Self {
        let c = |name: &str, v: f64, q: f64, w: f64| CommodityType {
            name: name.into(),
            value_per_kg: v,
            value_sigma: 0.4,
            annual_kg: q,
            annual_sigma: 0.8,
            weight: w,
        };
        ContractSpec {
            commodities: vec![
                c("bulk", 2.0, 200_000.0, 0.25),
                c("general", 10.0, 40_000.0, 0.5),
                c("high_value", 60.0, 5_000.0, 0.25),
            ],
            per_employee: 0.2,
            max_per_shipper: 8,
            period_days: 260.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub id: usize,
    pub shipper: usize,
    pub receiver: usize,
    pub commodity: usize,
    /// Flow over the planning period, kg.
    pub annual_kg: f64,
    pub value_per_kg: f64,
    pub period_days: f64,
}

/// Random shipper–receiver pairs with receivers weighted by employment.
pub fn generate_contracts(ests: &[Establishment], spec: &ContractSpec, seed: u64) -> Result<Vec<Contract>> {
    if spec.commodities.is_empty() || spec.commodities.iter().any(|c| c.weight < 0.0 || c.annual_kg <= 0.0 || c.value_per_kg < 0.0) {
        return Err(Error::invalid("malformed commodity table"));
    }
    let wsum: f64 = spec.commodities.iter().map(|c| c.weight).sum();
    if !(wsum > 0.0) || spec.period_days <= 0.0 {
        return Err(Error::invalid("commodity weights and period must be positive"));
    }
    let cw: Vec<f64> = spec.commodities.iter().map(|c| c.weight / wsum).collect();
    let receivers: Vec<&Establishment> = ests.iter().filter(|e| e.roles.receiver).collect();
    let emp: f64 = receivers.iter().map(|e| e.employment as f64).sum();
    if receivers.len() < 2 || emp <= 0.0 {
        return Err(Error::invalid("contracts need at least two receivers"));
    }
    let rw: Vec<f64> = receivers.iter().map(|e| e.employment as f64 / emp).collect();
    let mut out = Vec::new();
    for sh in ests.iter().filter(|e| e.roles.shipper) {
        let n = (1 + (spec.per_employee * sh.employment as f64).round() as u32).min(spec.max_per_shipper.max(1));
        for k in 0..n as u64 {
            let u = |stage: u64| uniform(&[seed, tags::CONTRACTS, sh.id as u64, k, stage]);
            let mut r = receivers[sample_index(&rw, u(0))].id;
            if r == sh.id {
                r = receivers[(sample_index(&rw, u(0)) + 1) % receivers.len()].id;
            }
            let ci = sample_index(&cw, u(1));
            let c = &spec.commodities[ci];
            let z = |p: f64| normal_quantile(p.clamp(1e-9, 1.0 - 1e-9));
            out.push(Contract {
                id: out.len(),
                shipper: sh.id,
                receiver: r,
                commodity: ci,
                annual_kg: c.annual_kg * (c.annual_sigma * z(u(2))).exp(),
                value_per_kg: c.value_per_kg * (c.value_sigma * z(u(3))).exp(),
                period_days: spec.period_days,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FreightSpec {
    pub contracts: ContractSpec,
    pub size: ShipmentSizeParams,
    pub ecommerce: EcomSpec,
    pub vop: VopParams,
    pub weekdays_per_year: f64,
    pub shift_start: Minutes,
    pub max_hours: f64,
    /// Shipments above this share of the largest vehicle are full loads.
    pub ftl_share: f64,
    pub parcel_max_kg: f64,
    pub dwell_pickup_min: f64,
    pub dwell_delivery_min: f64,
    pub dwell_sigma: f64,
    /// Daytime window over which operating costs are averaged.
    pub operating_day: (Minutes, Minutes),
    pub facility_decay_km: f64,
}

impl Default for FreightSpec {
    fn default() -> Self {
        FreightSpec {
            contracts: ContractSpec::default(),
            size: ShipmentSizeParams::default(),
            ecommerce: EcomSpec::default(),
            vop: VopParams::default(),
            weekdays_per_year: 260.0,
            shift_start: hhmm(6, 0),
            max_hours: 10.0,
            ftl_share: 0.8,
            parcel_max_kg: 30.0,
            dwell_pickup_min: 15.0,
            dwell_delivery_min: 10.0,
            dwell_sigma: 0.5,
            operating_day: (hhmm(8, 0), hhmm(19, 0)),
            facility_decay_km: 8.0,
        }
    }
}

impl FreightSpec {
    pub fn validate(&self) -> Result<()> {
        self.vop.validate()?;
        self.ecommerce.validate()?;
        if self.weekdays_per_year <= 0.0 || self.max_hours <= 0.0 || !(self.ftl_share > 0.0 && self.ftl_share <= 1.0) {
            return Err(Error::invalid("bad freight calendar or shift parameters"));
        }
        if self.size.beta_q0 <= 0.0 || self.size.beta_ed < 0.0 || self.size.discount_rate <= 0.0 {
            return Err(Error::invalid("bad shipment-size parameters"));
        }
        Ok(())
    }
}

/// Parts of the freight system that do not change between days or
/// scenarios: contracts, carriers, households and their suppliers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreightWorld {
    pub contracts: Vec<Contract>,
    /// Carrier establishment serving each contract.
    pub contract_carrier: Vec<usize>,
    pub households: Vec<Household>,
    /// Distribution facility and its carrier per household and commodity.
    pub facility: Vec<Vec<(usize, usize)>>,
    /// Pickup store zone and the member who collects orders.
    pub pickup: Vec<(ZoneId, usize)>,
    pub shop_km: Vec<f64>,
    pub pickup_km: Vec<f64>,
    pub carriers: Vec<usize>,
    pub max_capacity_kg: f64,
}

fn weighted_pick(cands: &[(usize, f64)], u: f64) -> Option<usize> {
    let total: f64 = cands.iter().map(|c| c.1).sum();
    if cands.is_empty() || !(total > 0.0) {
        return None;
    }
    let p: Vec<f64> = cands.iter().map(|c| c.1 / total).collect();
    Some(cands[sample_index(&p, u)].0)
}

impl FreightWorld {
    pub fn new(net: &Network, city: &City, spec: &FreightSpec, seed: u64) -> Result<FreightWorld> {
        spec.validate()?;
        let ests = &city.establishments;
        let contracts = generate_contracts(ests, &spec.contracts, seed)?;
        let decay = spec.facility_decay_km;
        let carriers: Vec<usize> = ests.iter().filter(|e| !e.fleet.is_empty()).map(|e| e.id).collect();
        if carriers.is_empty() {
            return Err(Error::invalid("no establishment owns a vehicle"));
        }
        let for_hire: Vec<usize> = carriers
            .iter()
            .copied()
            .filter(|&c| ests[c].fleet.iter().any(|&v| city.vehicles[v].driver == DriverType::ForHire))
            .collect();
        let pool = if for_hire.is_empty() { &carriers } else { &for_hire };
        let hire = |zone: ZoneId, u: f64| -> usize {
            let cands: Vec<(usize, f64)> = pool
                .iter()
                .map(|&c| (c, ests[c].fleet.len() as f64 * (-net.centroid_distance_km(zone, ests[c].zone) / decay).exp()))
                .collect();
            weighted_pick(&cands, u).unwrap_or(pool[0])
        };
        let contract_carrier = contracts
            .iter()
            .map(|c| {
                let sh = &ests[c.shipper];
                if sh.fleet.is_empty() {
                    hire(sh.zone, uniform(&[seed, tags::CONTRACTS, c.id as u64, 99]))
                } else {
                    sh.id
                }
            })
            .collect();

        let mut households: Vec<Household> = Vec::new();
        for ind in &city.individuals {
            if households.last().is_none_or(|h| h.id != ind.household) {
                households.push(Household {
                    id: ind.household,
                    zone: ind.home_zone,
                    members: Vec::new(),
                    income: 0.0,
                });
            }
            let h = households.last_mut().expect("pushed above");
            h.members.push(ind.id);
            h.income += ind.income;
        }
        // Distribution facilities: logistics establishments, or any shipper.
        let mut facilities: Vec<&Establishment> = ests.iter().filter(|e| e.function == Some(3)).collect();
        if facilities.is_empty() {
            facilities = ests.iter().filter(|e| e.roles.shipper).collect();
        }
        let mut stores: Vec<&Establishment> = ests.iter().filter(|e| e.function == Some(2)).collect();
        if stores.is_empty() {
            stores = ests.iter().collect();
        }
        let n_comm = spec.ecommerce.commodities.len();
        let mut facility = Vec::with_capacity(households.len());
        let mut pickup = Vec::with_capacity(households.len());
        let mut shop_km = Vec::with_capacity(households.len());
        let mut pickup_km = Vec::with_capacity(households.len());
        for h in &households {
            let u = |a: u64, b: u64| uniform(&[seed, tags::ECOMMERCE, h.id as u64, a, b, 77]);
            let fac: Vec<(usize, f64)> = facilities
                .iter()
                .map(|e| (e.id, e.employment as f64 * (-net.centroid_distance_km(h.zone, e.zone) / decay).exp()))
                .collect();
            facility.push(
                (0..n_comm as u64)
                    .map(|c| {
                        let f = weighted_pick(&fac, u(c, 0)).unwrap_or(facilities[0].id);
                        let carrier = if ests[f].fleet.is_empty() { hire(ests[f].zone, u(c, 1)) } else { f };
                        (f, carrier)
                    })
                    .collect(),
            );
            let st: Vec<(usize, f64)> = stores
                .iter()
                .map(|e| (e.id, (e.employment as f64).max(1.0) * (-net.centroid_distance_km(h.zone, e.zone) / 2.0).exp()))
                .collect();
            let s = weighted_pick(&st, u(1000, 0)).unwrap_or(stores[0].id);
            let zone = ests[s].zone;
            let members = &h.members;
            let collector = members
                .iter()
                .copied()
                .find(|&m| city.individuals[m].has_car)
                .unwrap_or(members[0]);
            pickup.push((zone, collector));
            pickup_km.push(net.centroid_distance_km(h.zone, zone));
            let total: f64 = st.iter().map(|c| c.1).sum();
            shop_km.push(st.iter().map(|&(e, w)| w / total * net.centroid_distance_km(h.zone, ests[e].zone)).sum());
        }
        let max_capacity_kg = city.vehicles.iter().map(|v| v.capacity_kg).fold(0.0, f64::max);
        Ok(FreightWorld {
            contracts,
            contract_carrier,
            households,
            facility,
            pickup,
            shop_km,
            pickup_km,
            carriers,
            max_capacity_kg,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ShipmentSource {
    Contract { contract: usize, index: u32 },
    Ecommerce { household: usize, commodity: usize, index: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shipment {
    pub id: usize,
    pub source: ShipmentSource,
    pub carrier: usize,
    pub size_kg: f64,
    pub packages: u32,
    pub pickup: ZoneId,
    pub delivery: ZoneId,
    pub pickup_window: (Minutes, Minutes),
    pub delivery_window: (Minutes, Minutes),
    pub requirement: Requirement,
    pub dwell_pickup_min: f64,
    pub dwell_delivery_min: f64,
}

impl Shipment {
    pub fn is_ecommerce(&self) -> bool {
        matches!(self.source, ShipmentSource::Ecommerce { .. })
    }
}

/// Shipment-size decision of one contract on the simulated day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractDay {
    pub contract: usize,
    /// Operating cost per shipment, $.
    pub aoc: f64,
    /// Direct travel time of one shipment, hours.
    pub travel_h: f64,
    pub class: VehicleClass,
    pub size_kg: f64,
    pub annual_shipments: f64,
    pub shipments_today: u32,
    pub receiver_density: f64,
}

/// The carrier's chosen plan and the global vehicle ids of its fleet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierDay {
    pub carrier: usize,
    pub shipments: Vec<usize>,
    pub vehicles: Vec<usize>,
    pub alternatives: usize,
    pub plan: Option<VopPlan>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickupActivity {
    pub household: usize,
    pub member: usize,
    pub zone: ZoneId,
    pub window: (Minutes, Minutes),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreightDay {
    pub contracts: Vec<ContractDay>,
    pub orders: Vec<EcomOrder>,
    pub shipments: Vec<Shipment>,
    pub carriers: Vec<CarrierDay>,
    pub pickups: Vec<PickupActivity>,
    pub vehicle_plans: Vec<VehiclePlan>,
    pub fee_increment: f64,
}

impl FreightDay {
    /// Shipments that no vehicle carries (costed by skim, not simulated).
    pub fn unassigned(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.carriers {
            match &c.plan {
                Some(p) => out.extend(p.unassigned.iter().map(|&i| c.shipments[i])),
                None => out.extend(&c.shipments),
            }
        }
        out.sort_unstable();
        out
    }
}

fn class_for(size: f64, capacity: &[(VehicleClass, f64)]) -> VehicleClass {
    capacity
        .iter()
        .find(|(_, c)| *c + 1e-9 >= size)
        .or(capacity.last())
        .map_or(VehicleClass::Lgv, |c| c.0)
}

/// Operating cost, size, class and frequency of one contract given skims.
pub fn size_contract(
    c: &Contract,
    net: &Network,
    ests: &[Establishment],
    skims: &SkimSet,
    tolls: &SkimTolls,
    spec: &FreightSpec,
    capacity: &[(VehicleClass, f64)],
    max_capacity: f64,
    seed: u64,
) -> Result<ContractDay> {
    let (o, d) = (ests[c.shipper].zone, ests[c.receiver].zone);
    let ed = net.zones[d].establishment_density;
    let mut class = VehicleClass::Lgv;
    let mut aoc = 0.0;
    let mut q = 0.0;
    // Cost depends on the vehicle class, which depends on the size.
    for _ in 0..capacity.len().max(1) {
        aoc = average_operating_cost(skims, tolls, &spec.vop, class, o, d, spec.operating_day)?.max(1e-6);
        q = optimal_shipment_size(c.annual_kg, c.value_per_kg, aoc, ed, &spec.size)?.min(max_capacity);
        let next = class_for(q, capacity);
        if next == class {
            break;
        }
        class = next;
    }
    let u = uniform(&[seed, tags::SHIPMENTS, c.id as u64, 0]);
    let (annual, today) = shipment_frequency(c.annual_kg, q, spec.weekdays_per_year, u)?;
    let p = skims.windows.period_of((spec.operating_day.0 + spec.operating_day.1) / 2.0);
    Ok(ContractDay {
        contract: c.id,
        aoc,
        travel_h: skims.time(p, o, d)? / 60.0,
        class,
        size_kg: q,
        annual_shipments: annual,
        shipments_today: today,
        receiver_density: ed,
    })
}

/// Everything that varies by day or scenario.
pub struct FreightDayInputs<'a> {
    pub net: &'a Network,
    pub city: &'a City,
    pub world: &'a FreightWorld,
    pub skims: &'a SkimSet,
    pub tolls: &'a SkimTolls,
    pub spec: &'a FreightSpec,
    /// Added to home-delivery fees of households in the toll area.
    pub fee_increment: f64,
    pub seed: u64,
    /// Vehicle plan ids start here (after passenger ids).
    pub id_offset: usize,
}

fn requirement(size: f64, spec: &FreightSpec, max_cap: f64) -> Requirement {
    if size > spec.ftl_share * max_cap {
        Requirement::Ftl
    } else if size <= spec.parcel_max_kg {
        Requirement::Parcel
    } else {
        Requirement::Ltl
    }
}

fn dwell(median: f64, sigma: f64, keys: &[u64]) -> f64 {
    median * (sigma * normal_quantile(uniform(keys).clamp(1e-9, 1.0 - 1e-9))).exp()
}

/// Shipment generation, carrier planning and itinerary building for one day.
pub fn simulate_freight_day(inp: &FreightDayInputs) -> Result<FreightDay> {
    let FreightDayInputs { net, city, world, skims, tolls, spec, seed, .. } = *inp;
    let ests = &city.establishments;
    let mut capacity: Vec<(VehicleClass, f64)> = Vec::new();
    for v in &city.vehicles {
        if let Some(e) = capacity.iter_mut().find(|c| c.0 == v.class) {
            e.1 = e.1.max(v.capacity_kg);
        } else {
            capacity.push((v.class, v.capacity_kg));
        }
    }
    capacity.sort_by(|a, b| a.1.total_cmp(&b.1));
    let max_cap = world.max_capacity_kg.max(1.0);
    let carrier_cap = |c: usize| ests[c].fleet.iter().map(|&v| city.vehicles[v].capacity_kg).fold(0.0, f64::max);

    let contracts: Vec<ContractDay> = world
        .contracts
        .par_iter()
        .map(|c| size_contract(c, net, ests, skims, tolls, spec, &capacity, max_cap, seed))
        .collect::<Result<_>>()?;

    let mut shipments = Vec::new();
    for (cd, c) in contracts.iter().zip(&world.contracts) {
        let carrier = world.contract_carrier[c.id];
        let parts = (cd.size_kg / carrier_cap(carrier).max(1e-9)).ceil().max(1.0) as u32;
        for k in 0..cd.shipments_today * parts {
            let key = |s: u64| [seed, tags::DWELL, 0, c.id as u64, k as u64, s];
            let start = hhmm(6, 0) + uniform(&key(2)) * 360.0;
            let size = cd.size_kg / parts as f64;
            shipments.push(Shipment {
                id: shipments.len(),
                source: ShipmentSource::Contract { contract: c.id, index: k },
                carrier,
                size_kg: size,
                packages: 1,
                pickup: ests[c.shipper].zone,
                delivery: ests[c.receiver].zone,
                pickup_window: (start, start + 180.0),
                delivery_window: (start, start + 540.0),
                requirement: requirement(size, spec, max_cap),
                dwell_pickup_min: dwell(spec.dwell_pickup_min, spec.dwell_sigma, &key(0)),
                dwell_delivery_min: dwell(spec.dwell_delivery_min, spec.dwell_sigma, &key(1)),
            });
        }
    }

    let mut orders = Vec::new();
    let mut pickups = Vec::new();
    for (hi, h) in world.households.iter().enumerate() {
        let in_area = net.zones[h.zone].in_toll_area;
        let ctx = EcomContext {
            spec: &spec.ecommerce,
            shop_km: world.shop_km[hi],
            pickup_km: world.pickup_km[hi],
            fee_increment: if in_area { inp.fee_increment } else { 0.0 },
            seed,
        };
        let mut collected = false;
        for o in simulate_ecommerce(h, &ctx)? {
            match o.mode {
                DeliveryMode::Home => {
                    let (fac, carrier) = world.facility[hi][o.commodity];
                    let key = |s: u64| [seed, tags::DWELL, 1, h.id as u64, o.commodity as u64, o.index as u64, s];
                    let size = o.weight_kg.min(max_cap);
                    shipments.push(Shipment {
                        id: shipments.len(),
                        source: ShipmentSource::Ecommerce {
                            household: h.id,
                            commodity: o.commodity,
                            index: o.index,
                        },
                        carrier,
                        size_kg: size,
                        packages: o.packages,
                        pickup: ests[fac].zone,
                        delivery: h.zone,
                        pickup_window: (hhmm(7, 0), hhmm(12, 0)),
                        delivery_window: o.window,
                        requirement: requirement(size, spec, max_cap),
                        dwell_pickup_min: dwell(spec.dwell_pickup_min, spec.dwell_sigma, &key(0)),
                        dwell_delivery_min: dwell(spec.dwell_delivery_min, spec.dwell_sigma, &key(1)),
                    });
                }
                DeliveryMode::Pickup if !collected => {
                    // One collection trip covers all of a household's pickups.
                    collected = true;
                    let (zone, member) = world.pickup[hi];
                    pickups.push(PickupActivity {
                        household: h.id,
                        member,
                        zone,
                        window: o.window,
                    });
                }
                DeliveryMode::Pickup => {}
            }
            orders.push(o);
        }
    }

    let mut by_carrier: Vec<Vec<usize>> = vec![Vec::new(); ests.len()];
    for s in &shipments {
        by_carrier[s.carrier].push(s.id);
    }
    let oracle = SkimOracle { skims, tolls };
    let carriers: Vec<CarrierDay> = world
        .carriers
        .par_iter()
        .filter(|&&c| !by_carrier[c].is_empty())
        .map(|&c| {
            let ids = &by_carrier[c];
            let plan_ships: Vec<PlanShipment> = ids
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let s = &shipments[s];
                    PlanShipment {
                        id: i,
                        size_kg: s.size_kg,
                        pickup: s.pickup,
                        delivery: s.delivery,
                        pickup_window: s.pickup_window,
                        delivery_window: s.delivery_window,
                        requirement: s.requirement,
                        dwell_pickup_min: s.dwell_pickup_min,
                        dwell_delivery_min: s.dwell_delivery_min,
                    }
                })
                .collect();
            let vehicles = ests[c].fleet.clone();
            let fleet: Vec<PlanVehicle> = vehicles
                .iter()
                .enumerate()
                .map(|(i, &v)| PlanVehicle {
                    id: i,
                    class: city.vehicles[v].class,
                    capacity_kg: city.vehicles[v].capacity_kg,
                    depot: ests[c].zone,
                    max_hours: spec.max_hours,
                    available_from: spec.shift_start,
                })
                .collect();
            let (alternatives, plan) = match generate_vop_choice_set(&plan_ships, &fleet, &oracle) {
                Ok(plans) => {
                    let u = uniform(&[seed, tags::VOP, c as u64]);
                    let (i, _) = vop_choose(&plans, &spec.vop, u)?;
                    (plans.len(), plans.into_iter().nth(i))
                }
                Err(Error::Infeasible(_)) => (0, None),
                Err(e) => return Err(e),
            };
            Ok(CarrierDay {
                carrier: c,
                shipments: ids.clone(),
                vehicles,
                alternatives,
                plan,
            })
        })
        .collect::<Result<_>>()?;

    let vot = -spec.vop.time_per_h;
    let mut vehicle_plans = Vec::new();
    for cd in &carriers {
        let Some(plan) = &cd.plan else { continue };
        let depot = ests[cd.carrier].zone;
        for (local, &global) in cd.vehicles.iter().enumerate() {
            let mut tours: Vec<_> = plan.tours.iter().filter(|t| t.vehicle == local).collect();
            if tours.is_empty() {
                continue;
            }
            tours.sort_by(|a, b| a.depart.total_cmp(&b.depart));
            let mut legs = Vec::new();
            for t in tours {
                let mut at = depot;
                let mut earliest = t.depart;
                for s in &t.stops {
                    legs.push(Leg {
                        origin: at,
                        dest: s.zone,
                        earliest,
                        dwell_after: s.depart - s.start,
                    });
                    at = s.zone;
                    earliest = s.depart;
                }
                legs.push(Leg {
                    origin: at,
                    dest: depot,
                    earliest,
                    dwell_after: 0.0,
                });
            }
            vehicle_plans.push(VehiclePlan {
                id: inp.id_offset + global,
                class: city.vehicles[global].class,
                vot,
                driver: Driver::Freight {
                    carrier: cd.carrier,
                    vehicle: global,
                },
                legs,
            });
        }
    }
    Ok(FreightDay {
        contracts,
        orders,
        shipments,
        carriers,
        pickups,
        vehicle_plans,
        fee_increment: inp.fee_increment,
    })
}

/// Fee increment passing freight tolls on to toll-area home deliveries:
/// goods-vehicle tolls over deliveries into the area. Zero when nothing
/// is delivered there.
pub fn next_fee_increment(net: &Network, day: &FreightDay, ledger: &TollLedger) -> f64 {
    let tolls: f64 = ledger.charges.iter().filter(|c| c.class.is_goods()).map(|c| c.amount).sum();
    let unassigned = day.unassigned();
    let deliveries = day
        .shipments
        .iter()
        .filter(|s| net.zones[s.delivery].in_toll_area && unassigned.binary_search(&s.id).is_err())
        .count();
    super::eoq::delivery_fee_increment(tolls, deliveries).unwrap_or(0.0)
}
