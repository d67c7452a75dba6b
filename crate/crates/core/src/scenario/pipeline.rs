//! The staged workflow: synthesize the city, run a scheme to its learned
//! state, evaluate it, design schemes from a baseline, compare.
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::{Minutes, PeriodWindows};
use crate::error::{Error, Result};
use crate::freight::{next_fee_increment, simulate_freight_day, FreightDay, FreightDayInputs, FreightWorld};
use crate::mesosim::{run_day_to_day, DayResult, Driver, Leg, PathCache, SchemeGeometry, SkimSet, VehiclePlan};
use crate::netgraph::{build_network, Network, ZoneId};
use crate::pax::{
    accessibility, expected_mode_trips, simulate_pre_day, Attraction, DayPattern, Mode, PaxContext, PaxTrip, Purpose,
};
use crate::pricing::{
    departure_histogram, derive_rates, select_toll_area, select_toll_periods, zone_peak_tti, PeriodRate, SchemeKind,
    SkimTolls, TollScheme,
};
use crate::rng::{tags, uniform};
use crate::synthpop::{generate_city_tables, synthesize_city, City};
use crate::vehicle::VehicleClass;
use crate::welfare::{
    compute_aba, daily_tlc, distributional_groups, emissions, freight_cs, passenger_cs, producer_surplus,
    report_indicators, social_welfare, AbaRecord, EmissionSummary, GroupKind, GroupProfile, IndicatorInputs, Indicators,
    ProducerSurplus, ShipmentCost, TlcContract, WelfareLedger,
};

use super::config::ScenarioConfig;

const RETAIL: usize = 9;
const RESTAURANT: usize = 10;
const PICKUP_DWELL_MIN: Minutes = 10.0;

/// The synthetic city shared by every scenario run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Synthesis {
    pub net: Network,
    pub city: City,
    pub world: FreightWorld,
    pub attraction: Attraction,
}

/// Zone attraction for discretionary destinations: retail and restaurant
/// jobs for shopping, all jobs plus residents for other activities.
pub fn zone_attraction(net: &Network, city: &City) -> Result<Attraction> {
    let n = net.n_zones();
    let mut shop = vec![0.05; n];
    let mut other = vec![0.05; n];
    for e in &city.establishments {
        let jobs = e.employment as f64;
        other[e.zone] += jobs;
        if e.industry == RETAIL || e.industry == RESTAURANT {
            shop[e.zone] += jobs;
        }
    }
    for i in &city.individuals {
        other[i.home_zone] += 0.3;
    }
    Attraction::new(shop, other)
}

pub fn synthesize(cfg: &ScenarioConfig) -> Result<Synthesis> {
    let mut net = build_network(&cfg.network).map_err(|e| e.in_stage("network"))?;
    let tables = generate_city_tables(&net, &cfg.city, cfg.seed).map_err(|e| e.in_stage("city tables"))?;
    let floor = crate::synthpop::FloorSolverOptions {
        seed: cfg.seed,
        ..cfg.floor
    };
    let city = synthesize_city(&mut net, &tables, &cfg.city, &cfg.population, &floor, cfg.seed)?;
    let world = FreightWorld::new(&net, &city, &cfg.freight, cfg.seed).map_err(|e| e.in_stage("freight world"))?;
    let attraction = zone_attraction(&net, &city)?;
    log::info!(
        "synthesized {} zones, {} individuals, {} establishments, {} goods vehicles, {} contracts",
        net.n_zones(),
        city.individuals.len(),
        city.establishments.len(),
        city.vehicles.len(),
        world.contracts.len()
    );
    Ok(Synthesis {
        net,
        city,
        world,
        attraction,
    })
}

/// The network with its toll-area flags set to the scheme's area, so that
/// area-dependent demand and indicators follow the scheme.
pub fn network_for(net: &Network, scheme: &TollScheme) -> Result<Network> {
    let mut out = net.clone();
    if scheme.kind != SchemeKind::None {
        out.set_toll_area(&scheme.area)?;
    }
    Ok(out)
}

/// Demand and supply of the last learning iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutput {
    pub scheme: TollScheme,
    /// Skims after the last update.
    pub skims: SkimSet,
    /// Skims the last demand call saw.
    pub demand_skims: SkimSet,
    pub day: DayResult,
    pub patterns: Vec<DayPattern>,
    pub pax_trips: Vec<PaxTrip>,
    pub freight: FreightDay,
    pub changes: Vec<f64>,
}

fn pax_context<'a>(cfg: &'a ScenarioConfig, syn: &'a Synthesis, skims: &'a SkimSet, tolls: &'a SkimTolls) -> PaxContext<'a> {
    PaxContext {
        skims,
        tolls,
        spec: &cfg.pax,
        attraction: &syn.attraction,
        seed: cfg.seed,
        extra_trip_cost: 0.0,
        car_surcharge: None,
    }
}

/// Passenger trips and car plans from the day's patterns and e-commerce
/// collections. A carpool tour puts a car on the road with probability
/// one over the occupancy, drawn once per tour.
fn passenger_plans(cfg: &ScenarioConfig, syn: &Synthesis, patterns: &[DayPattern], freight: &FreightDay) -> (Vec<PaxTrip>, Vec<VehiclePlan>) {
    let inds = &syn.city.individuals;
    let mut pickups: BTreeMap<usize, Vec<(ZoneId, Minutes)>> = BTreeMap::new();
    for p in &freight.pickups {
        pickups.entry(p.member).or_default().push((p.zone, p.window.0));
    }
    let mut trips = Vec::new();
    let mut plans = Vec::new();
    let p_drive = 1.0 / cfg.pax.carpool_occupancy.max(1.0);
    for pat in patterns {
        let ind = &inds[pat.individual];
        let home = ind.home_zone;
        trips.extend(pat.trips(home));
        // (depart out, dest, depart back, dwell after the out leg)
        let mut car_tours: Vec<(Minutes, ZoneId, Minutes, Minutes)> = Vec::new();
        for (k, t) in pat.tours.iter().enumerate() {
            let drives = match t.mode {
                Mode::Car => true,
                Mode::Carpool => uniform(&[cfg.seed, tags::CARPOOL, ind.id as u64, k as u64]) < p_drive,
                _ => false,
            };
            if drives {
                car_tours.push((t.depart_out, t.dest, t.depart_back, 0.0));
            }
        }
        for &(zone, at) in pickups.get(&ind.id).map(|v| v.as_slice()).unwrap_or(&[]) {
            let mode = if ind.has_car { Mode::Car } else { Mode::Transit };
            for (o, d) in [(home, zone), (zone, home)] {
                trips.push(PaxTrip {
                    individual: ind.id,
                    purpose: Purpose::Shop,
                    mode,
                    origin: o,
                    dest: d,
                    depart: at,
                });
            }
            if ind.has_car {
                car_tours.push((at, zone, at, PICKUP_DWELL_MIN));
            }
        }
        if car_tours.is_empty() {
            continue;
        }
        car_tours.sort_by(|a, b| a.0.total_cmp(&b.0));
        let legs = car_tours
            .iter()
            .flat_map(|&(out, dest, back, dwell)| {
                [
                    Leg {
                        origin: home,
                        dest,
                        earliest: out,
                        dwell_after: dwell,
                    },
                    Leg {
                        origin: dest,
                        dest: home,
                        earliest: back,
                        dwell_after: 0.0,
                    },
                ]
            })
            .collect();
        plans.push(VehiclePlan {
            id: ind.id,
            class: VehicleClass::Car,
            vot: ind.vot,
            driver: Driver::Person(ind.id),
            legs,
        });
    }
    (trips, plans)
}

struct Snapshot {
    skims: SkimSet,
    patterns: Vec<DayPattern>,
    pax_trips: Vec<PaxTrip>,
    freight: FreightDay,
}

/// Runs `scheme` through day-to-day learning from free-flow skims.
pub fn run_scenario(cfg: &ScenarioConfig, syn: &Synthesis, scheme: &TollScheme) -> Result<RunOutput> {
    let net = network_for(&syn.net, scheme)?;
    scheme.validate(net.n_zones())?;
    let tolls = SkimTolls::new(scheme);
    let geo = SchemeGeometry::for_scheme(&net, scheme);
    let windows = PeriodWindows::default();
    let init = SkimSet::free_flow(&net, &geo, windows, cfg.supply.n_intervals());
    let mut cache = PathCache::new(cfg.supply.k_paths);
    let n_ind = syn.city.individuals.len();
    let mut snap: Option<Snapshot> = None;
    let outcome = run_day_to_day(
        &net,
        scheme,
        &cfg.supply,
        init,
        &cfg.learning,
        &mut cache,
        cfg.seed,
        |skims, prev, _k| {
            let ctx = pax_context(cfg, syn, skims, &tolls);
            let patterns: Vec<DayPattern> = syn
                .city
                .individuals
                .par_iter()
                .map(|i| simulate_pre_day(i, &ctx))
                .collect::<Result<_>>()
                .map_err(|e| e.in_stage("pre-day"))?;
            let fee = match (prev, &snap) {
                (Some(d), Some(s)) => next_fee_increment(&net, &s.freight, &d.ledger),
                _ => 0.0,
            };
            let freight = simulate_freight_day(&FreightDayInputs {
                net: &net,
                city: &syn.city,
                world: &syn.world,
                skims,
                tolls: &tolls,
                spec: &cfg.freight,
                fee_increment: fee,
                seed: cfg.seed,
                id_offset: n_ind,
            })
            .map_err(|e| e.in_stage("freight demand"))?;
            let (pax_trips, mut plans) = passenger_plans(cfg, syn, &patterns, &freight);
            plans.extend(freight.vehicle_plans.iter().cloned());
            snap = Some(Snapshot {
                skims: skims.clone(),
                patterns,
                pax_trips,
                freight,
            });
            Ok(plans)
        },
    )?;
    let s = snap.expect("learning ran at least one demand call");
    Ok(RunOutput {
        scheme: scheme.clone(),
        skims: outcome.skims,
        demand_skims: s.skims,
        day: outcome.last,
        patterns: s.patterns,
        pax_trips: s.pax_trips,
        freight: s.freight,
        changes: outcome.changes,
    })
}

/// Per-agent and system measures of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub scheme: SchemeKind,
    /// Logsum accessibility per individual.
    pub accessibility: Vec<f64>,
    /// The same with every trip one cost shift dearer.
    pub shifted: Vec<f64>,
    /// Expected trips per day per individual.
    pub trip_rate: Vec<f64>,
    /// Daily total logistics cost per contract active in the run.
    pub contract_tlc: Vec<(usize, f64)>,
    pub producer: ProducerSurplus,
    pub emissions: EmissionSummary,
    pub transit_boardings: u64,
}

pub fn evaluate(cfg: &ScenarioConfig, syn: &Synthesis, run: &RunOutput) -> Result<Evaluation> {
    let net = network_for(&syn.net, &run.scheme)?;
    let tolls = SkimTolls::new(&run.scheme);
    let ctx = pax_context(cfg, syn, &run.demand_skims, &tolls);
    let shifted_ctx = PaxContext {
        extra_trip_cost: cfg.welfare.surplus.delta_x,
        ..ctx
    };
    let per_person: Vec<(f64, f64, f64)> = syn
        .city
        .individuals
        .par_iter()
        .map(|i| {
            let a = accessibility(i, &ctx)?;
            let s = accessibility(i, &shifted_ctx)?;
            let r: f64 = expected_mode_trips(i, &ctx)?.iter().sum();
            Ok((a, s, r))
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("accessibility"))?;

    let p = &cfg.welfare.tlc;
    let mut contract_tlc = Vec::with_capacity(run.freight.contracts.len());
    for cd in &run.freight.contracts {
        let c = &syn.world.contracts[cd.contract];
        let tc = TlcContract {
            value_per_kg: c.value_per_kg,
            demand_kg: c.annual_kg,
            shipment_kg: cd.size_kg,
            warehousing: cfg.freight.size.beta_ed * cd.receiver_density,
            demand_var: 0.0,
            other_lt: p.other_lt_b2b,
            period_days: cfg.freight.weekdays_per_year,
        };
        let ships = vec![
            ShipmentCost {
                cost: cd.aoc,
                time_days: cd.travel_h / 24.0,
            };
            cd.shipments_today as usize
        ];
        contract_tlc.push((cd.contract, daily_tlc(&tc, &ships, p)?.total));
    }
    contract_tlc.sort_by_key(|x| x.0);

    let em = emissions(&run.day.trajectories, &net, &cfg.welfare.emissions);
    let boardings = run.pax_trips.iter().filter(|t| t.mode == Mode::Transit).count() as u64;
    let fuel: f64 = em.fuel_litres.iter().sum();
    let producer = producer_surplus(&run.day.ledger, boardings, fuel, &cfg.welfare.surplus);
    Ok(Evaluation {
        scheme: run.scheme.kind,
        accessibility: per_person.iter().map(|x| x.0).collect(),
        shifted: per_person.iter().map(|x| x.1).collect(),
        trip_rate: per_person.iter().map(|x| x.2).collect(),
        contract_tlc,
        producer,
        emissions: em,
        transit_boardings: boardings,
    })
}

/// Toll periods, area and the three derived schemes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignOutput {
    pub windows: PeriodWindows,
    pub zone_tti: Vec<[f64; 2]>,
    pub area: Vec<ZoneId>,
    /// True when no zone was congested enough and the configured area was used.
    pub fallback_area: bool,
    pub schemes: Vec<DesignedScheme>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignedScheme {
    pub scheme: TollScheme,
    pub rates: Vec<PeriodRate>,
}

impl DesignOutput {
    pub fn scheme(&self, kind: SchemeKind) -> Option<&TollScheme> {
        self.schemes.iter().find(|s| s.scheme.kind == kind).map(|s| &s.scheme)
    }
}

pub fn design_schemes(cfg: &ScenarioConfig, net: &Network, baseline: &DayResult) -> Result<DesignOutput> {
    let ni = cfg.supply.n_intervals();
    let hist = departure_histogram(&baseline.trajectories, ni);
    let windows = select_toll_periods(&hist, &cfg.design.periods).map_err(|e| e.in_stage("toll periods"))?;
    let zone_tti = zone_peak_tti(net, &baseline.trajectories, &windows);
    let (area, fallback_area) = match select_toll_area(net, &zone_tti, cfg.design.tti_threshold) {
        Ok(a) => (a, false),
        Err(e) if cfg.design.fallback_to_configured_area => {
            let a: Vec<ZoneId> = net.toll_zones().into_iter().collect();
            log::warn!("{e}; using the configured toll area of {} zones", a.len());
            (a, true)
        }
        Err(e) => return Err(e.in_stage("toll area")),
    };
    let mut schemes = Vec::new();
    for kind in [SchemeKind::Distance, SchemeKind::Cordon, SchemeKind::Area] {
        let (scheme, rates) = derive_rates(net, baseline, kind, &area, &windows, &cfg.design.rates)
            .map_err(|e| e.in_stage(kind.name()))?;
        schemes.push(DesignedScheme { scheme, rates });
    }
    Ok(DesignOutput {
        windows,
        zone_tti,
        area,
        fallback_area,
        schemes,
    })
}

/// Policy against baseline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub scheme: SchemeKind,
    pub welfare: WelfareLedger,
    pub aba: Vec<AbaRecord>,
    /// Change in daily logistics cost saved, per shipper establishment.
    pub shipper_surplus: Vec<(usize, f64)>,
    pub passenger_groups: Vec<GroupProfile>,
    pub shipper_groups: Vec<GroupProfile>,
    pub baseline_indicators: Indicators,
    pub policy_indicators: Indicators,
}

/// Indicators of `run`, with area-based measures taken over `area_of`'s
/// toll area and periods over `windows`.
pub fn run_indicators(syn: &Synthesis, run: &RunOutput, area_of: &TollScheme, windows: PeriodWindows) -> Result<Indicators> {
    let net = network_for(&syn.net, area_of)?;
    let households = &syn.world.households;
    let zone_of = |h: usize| households[h].zone;
    let annual: Vec<f64> = syn.world.contracts.iter().map(|c| c.annual_kg).collect();
    Ok(report_indicators(&IndicatorInputs {
        net: &net,
        windows,
        day: &run.day,
        pax_trips: &run.pax_trips,
        household_zone: &zone_of,
        freight: &run.freight,
        contracts_annual_kg: &annual,
        vehicles: &syn.city.vehicles,
    }))
}

pub fn compare(
    cfg: &ScenarioConfig,
    syn: &Synthesis,
    windows: PeriodWindows,
    base: (&RunOutput, &Evaluation),
    policy: (&RunOutput, &Evaluation),
) -> Result<Comparison> {
    let (brun, bev) = base;
    let (prun, pev) = policy;
    let n = syn.city.individuals.len();
    if bev.accessibility.len() != n || pev.accessibility.len() != n {
        return Err(Error::invalid("evaluations do not match the population"));
    }
    let dx = cfg.welfare.surplus.delta_x;
    let mut aba = Vec::with_capacity(n);
    for i in 0..n {
        // Individuals with no expected travel carry no benefit.
        if bev.trip_rate[i] <= 0.0 {
            continue;
        }
        aba.push(compute_aba(i, pev.accessibility[i], bev.accessibility[i], pev.shifted[i], dx, bev.trip_rate[i])?);
    }
    let cs_p = passenger_cs(&aba);
    let cs_f = freight_cs(&bev.contract_tlc, &pev.contract_tlc)?;
    let welfare = social_welfare(
        &bev.producer,
        &pev.producer,
        cs_p,
        cs_f,
        bev.emissions.cost,
        pev.emissions.cost,
    );

    let mut by_shipper: BTreeMap<usize, f64> = BTreeMap::new();
    for (a, b) in bev.contract_tlc.iter().zip(&pev.contract_tlc) {
        *by_shipper.entry(syn.world.contracts[a.0].shipper).or_default() += a.1 - b.1;
    }
    let shipper_surplus: Vec<(usize, f64)> = by_shipper.into_iter().collect();

    let inds = &syn.city.individuals;
    let net = network_for(&syn.net, &prun.scheme)?;
    let pax_deltas: Vec<f64> = aba.iter().map(|r| r.aba).collect();
    let attr = |f: &dyn Fn(usize) -> f64| aba.iter().map(|r| f(r.individual)).collect::<Vec<f64>>();
    let passenger_groups = if pax_deltas.is_empty() {
        Vec::new()
    } else {
        distributional_groups(
            &pax_deltas,
            GroupKind::Passenger,
            &[
                ("income", attr(&|i| inds[i].income)),
                ("vot", attr(&|i| inds[i].vot)),
                ("has_car", attr(&|i| f64::from(u8::from(inds[i].has_car)))),
                ("lives_in_area", attr(&|i| f64::from(u8::from(net.zones[inds[i].home_zone].in_toll_area)))),
                ("trip_rate", attr(&|i| bev.trip_rate[i])),
            ],
        )?
    };
    let ests = &syn.city.establishments;
    let shipper_groups = if shipper_surplus.is_empty() {
        Vec::new()
    } else {
        let deltas: Vec<f64> = shipper_surplus.iter().map(|x| x.1).collect();
        distributional_groups(
            &deltas,
            GroupKind::Shipper,
            &[
                ("employment", shipper_surplus.iter().map(|x| ests[x.0].employment as f64).collect()),
                (
                    "in_area",
                    shipper_surplus
                        .iter()
                        .map(|x| f64::from(u8::from(net.zones[ests[x.0].zone].in_toll_area)))
                        .collect(),
                ),
            ],
        )?
    };
    Ok(Comparison {
        scheme: prun.scheme.kind,
        welfare,
        aba,
        shipper_surplus,
        passenger_groups,
        shipper_groups,
        baseline_indicators: run_indicators(syn, brun, &prun.scheme, windows)?,
        policy_indicators: run_indicators(syn, prun, &prun.scheme, windows)?,
    })
}
