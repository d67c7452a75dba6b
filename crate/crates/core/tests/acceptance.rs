//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.
//!
//! Oracles here are written against the definitions, not the library
//! internals: brute-force logit enumeration, grid-searched logistics cost,
//! exhaustive mapping search, explicit overlap-factor sums and ledger scans.
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tollsim_core::choice::{ChoiceModel, Nest};
use tollsim_core::clock::{hhmm, Minutes, PeriodWindows};
use tollsim_core::error::Result as CoreResult;
use tollsim_core::freight::{
    check_plan, generate_vop_choice_set, optimal_shipment_size, overlap_factors, LegCost, PlanShipment, PlanVehicle,
    Requirement, ShipmentSizeParams, TravelOracle, VopPlan,
};
use tollsim_core::mesosim::{
    simulate_day, Driver, Leg, PathCache, SchemeGeometry, SkimSet, SupplySpec, TollCause, VehiclePlan,
};
use tollsim_core::netgraph::{build_network, AreaSpec, GridSpec, Network, ZoneId};
use tollsim_core::pax::{route_choice, RouteOption, RouteParams};
use tollsim_core::pricing::{
    audit_reference_rates, build_step_profile, class_rates, mct_segment, rounding_step, SchemeKind, ShoulderSpec,
    TollScheme, DEFAULT_CAPS,
};
use tollsim_core::scenario::{compare, evaluate, run_scenario, stages, synthesize, ArtifactStore, ScenarioConfig};
use tollsim_core::synthpop::{generate_fleet, solve_mapping, MappingMatrix, MappingProblem};
use tollsim_core::vehicle::VehicleClass;
use tollsim_core::welfare::{
    compute_aba, distributional_groups, passenger_cs, producer_surplus, social_welfare, EmissionFactors, GroupKind,
    SurplusParams, CO2_PRICE_PER_TONNE,
};

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(t: Instant, limit: Duration, what: &str) -> std::result::Result<(), String> {
    let e = t.elapsed();
    if e > limit {
        return Err(format!("{what} took {:.1}s, limit {:.0}s", e.as_secs_f64(), limit.as_secs_f64()));
    }
    Ok(())
}

// ---------------------------------------------------------------- 1

fn naive_mnl(v: &[f64], mu: f64) -> Vec<f64> {
    let e: Vec<f64> = v.iter().map(|x| (mu * x).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

/// Closed-form nested logit: P(i) = P(i | m) P(m) with
/// P(i | m) = exp(mu V_i / l_m) / sum_m and P(m) = sum_m^l_m / sum over nests.
fn naive_nested(v: &[f64], mu: f64, nests: &[(Vec<usize>, f64)]) -> (Vec<f64>, f64) {
    let sums: Vec<f64> = nests
        .iter()
        .map(|(m, l)| m.iter().map(|&i| (mu * v[i] / l).exp()).sum::<f64>())
        .collect();
    let top: Vec<f64> = nests.iter().zip(&sums).map(|((_, l), s)| s.powf(*l)).collect();
    let total: f64 = top.iter().sum();
    let mut p = vec![0.0; v.len()];
    for (((m, l), s), t) in nests.iter().zip(&sums).zip(&top) {
        for &i in m {
            p[i] = (mu * v[i] / l).exp() / s * t / total;
        }
    }
    (p, total.ln() / mu)
}

fn argmax(p: &[f64]) -> usize {
    (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.random_range(1..=50);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mu = rng.random_range(0.5..2.0);
        let shift = rng.random_range(-50.0..50.0);
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();

        // Multinomial logit.
        let got = ChoiceModel::mnl(v.clone(), mu).probabilities().map_err(|e| e.to_string())?;
        let want = naive_mnl(&v, mu);
        worst = worst.max(max_diff(&got, &want));
        let moved = ChoiceModel::mnl(shifted.clone(), mu).probabilities().map_err(|e| e.to_string())?;
        ensure!(argmax(&moved) == argmax(&got), "case {case}: MNL argmax moved under translation");
        worst = worst.max(max_diff(&moved, &want));

        // Nested logit over a random partition.
        let k = rng.random_range(1..=n.min(6));
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for i in 0..n {
            members[rng.random_range(0..k)].push(i);
        }
        let nests: Vec<(Vec<usize>, f64)> = members
            .into_iter()
            .filter(|m| !m.is_empty())
            .map(|m| (m, rng.random_range(0.2..=1.0)))
            .collect();
        let model = ChoiceModel::nested(
            v.clone(),
            mu,
            nests.iter().map(|(m, l)| Nest { members: m.clone(), coef: *l }).collect(),
        );
        let got = model.probabilities().map_err(|e| e.to_string())?;
        let (want, want_ls) = naive_nested(&v, mu, &nests);
        worst = worst.max(max_diff(&got, &want));
        let ls = model.logsum().map_err(|e| e.to_string())?;
        worst = worst.max((ls - want_ls).abs());
        let moved = ChoiceModel::nested(shifted, mu, model.nests.clone()).probabilities().map_err(|e| e.to_string())?;
        ensure!(argmax(&moved) == argmax(&got), "case {case}: nested argmax moved under translation");

        // Path-size logit over random overlapping link sets.
        let n_links = 60;
        let lengths: Vec<f64> = (0..n_links).map(|_| rng.random_range(0.1..2.0)).collect();
        let paths: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut p: Vec<usize> = (0..rng.random_range(1..=8)).map(|_| rng.random_range(0..n_links)).collect();
                p.sort_unstable();
                p.dedup();
                p
            })
            .collect();
        let options: Vec<RouteOption> = paths
            .iter()
            .map(|p| RouteOption {
                links: p.iter().map(|&l| (l, lengths[l])).collect(),
                time_h: rng.random_range(0.05..1.0),
                toll: rng.random_range(0.0..5.0),
                km: p.iter().map(|&l| lengths[l]).sum(),
                signals: rng.random_range(0..6),
                right_turns: rng.random_range(0..6),
            })
            .collect();
        let rp = RouteParams::default();
        let vot = rng.random_range(5.0..40.0);
        let (_, got) = route_choice(&options, vot, &rp, 0.5).map_err(|e| e.to_string())?;
        let util: Vec<f64> = options
            .iter()
            .zip(&paths)
            .map(|(o, p)| {
                let total: f64 = p.iter().map(|&l| lengths[l]).sum();
                let ps: f64 = p
                    .iter()
                    .map(|&l| lengths[l] / total / paths.iter().filter(|q| q.contains(&l)).count() as f64)
                    .sum();
                rp.time_per_h * o.time_h - o.toll / vot * rp.time_per_h.abs()
                    + rp.per_km * o.km
                    + rp.per_signal * o.signals as f64
                    + rp.per_right_turn * o.right_turns as f64
                    + rp.path_size * ps.ln()
            })
            .collect();
        worst = worst.max(max_diff(&got, &naive_mnl(&util, 1.0)));
    }
    ensure!(worst <= 1e-12, "largest deviation from enumeration {worst:e}");
    within(t, Duration::from_secs(10), "choice oracle")?;
    Ok(format!("600 models on 200 choice sets, max |dp| {worst:.1e}, {:.2}s", t.elapsed().as_secs_f64()))
}

// ---------------------------------------------------------------- 2

/// T + I + K with o = (b_q0 + b_q q) AOC.
fn annual_cost(q: f64, flow: f64, value: f64, aoc: f64, ed: f64, p: &ShipmentSizeParams) -> f64 {
    flow / q * (p.beta_q0 + p.beta_q * q) * aoc + p.beta_ed * ed * q / 2.0 + p.discount_rate * value * q / 2.0
}

fn grid_argmin(flow: f64, value: f64, aoc: f64, ed: f64, p: &ShipmentSizeParams) -> f64 {
    let (lo, hi) = (flow * 1e-7, flow);
    let n = 400_000;
    let r = (hi / lo).ln();
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let q = lo * (r * k as f64 / n as f64).exp();
        let c = annual_cost(q, flow, value, aoc, ed, p);
        if c < best.0 {
            best = (c, q);
        }
    }
    best.1
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let p = ShipmentSizeParams {
            beta_q0: rng.random_range(0.2..3.0),
            beta_q: 0.0,
            beta_flow: 1.0,
            beta_ed: rng.random_range(0.0..0.01),
            discount_rate: rng.random_range(0.002..0.1),
        };
        let flow = 10f64.powf(rng.random_range(2.0..7.0));
        let value = rng.random_range(0.1..100.0);
        let aoc = rng.random_range(5.0..500.0);
        let ed = rng.random_range(0.0..50.0);
        let q = optimal_shipment_size(flow, value, aoc, ed, &p).map_err(|e| e.to_string())?;
        let g = grid_argmin(flow, value, aoc, ed, &p);
        let rel = (q - g).abs() / g;
        worst = worst.max(rel);
        ensure!(rel < 1e-3, "case {case}: closed form {q} vs grid {g}");
        // The size-proportional term shifts cost, not the minimizer.
        let with_bq = ShipmentSizeParams {
            beta_q: rng.random_range(0.0..0.01),
            ..p
        };
        let g2 = grid_argmin(flow, value, aoc, ed, &with_bq);
        ensure!((g2 - g).abs() / g < 1e-3, "case {case}: minimizer moved with beta_q ({g} -> {g2})");
        let q2 = optimal_shipment_size(flow, value, aoc, ed, &with_bq).map_err(|e| e.to_string())?;
        ensure!(q2 == q, "case {case}: closed form depends on beta_q");
    }
    within(t, Duration::from_secs(30), "EOQ grid search")?;
    Ok(format!("100 draws, max relative gap {worst:.1e}, {:.2}s", t.elapsed().as_secs_f64()))
}

// ---------------------------------------------------------------- 3

/// Zones on a 6x6 grid, Manhattan distance, class-dependent speed and a
/// toll on legs into the centre.
struct Oracle;

impl TravelOracle for Oracle {
    fn leg(&self, class: VehicleClass, o: ZoneId, d: ZoneId, _t: Minutes) -> CoreResult<LegCost> {
        let km = self.distance_km(o, d);
        let kmh = if class == VehicleClass::Car || class == VehicleClass::Lgv { 30.0 } else { 24.0 };
        let central = |z: ZoneId| (2..4).contains(&(z / 6)) && (2..4).contains(&(z % 6));
        Ok(LegCost {
            time_min: km / kmh * 60.0 + 2.0,
            km,
            toll: if central(d) && !central(o) { 1.5 * class.pcu() } else { 0.0 },
            area_flat: 0.0,
        })
    }

    fn distance_km(&self, o: ZoneId, d: ZoneId) -> f64 {
        ((o / 6) as f64 - (d / 6) as f64).abs() + ((o % 6) as f64 - (d % 6) as f64).abs()
    }
}

fn random_carrier(rng: &mut ChaCha8Rng) -> (Vec<PlanShipment>, Vec<PlanVehicle>) {
    let nv = rng.random_range(1..=4);
    let classes = [VehicleClass::Lgv, VehicleClass::Hgv, VehicleClass::Vhgv];
    let fleet: Vec<PlanVehicle> = (0..nv)
        .map(|id| {
            let class = classes[rng.random_range(0..3)];
            PlanVehicle {
                id,
                class,
                capacity_kg: [1500.0, 8000.0, 20000.0][class.index() - 1],
                depot: rng.random_range(0..36),
                max_hours: rng.random_range(4.0..11.0),
                available_from: rng.random_range(300.0..540.0),
            }
        })
        .collect();
    let ns = rng.random_range(1..=10);
    let shipments = (0..ns)
        .map(|id| {
            let open = rng.random_range(360.0..780.0);
            let dopen = open + rng.random_range(0.0..120.0);
            PlanShipment {
                id,
                size_kg: 10f64.powf(rng.random_range(0.5..4.2)),
                pickup: rng.random_range(0..36),
                delivery: rng.random_range(0..36),
                pickup_window: (open, open + rng.random_range(30.0..300.0)),
                delivery_window: (dopen, dopen + rng.random_range(60.0..480.0)),
                requirement: if rng.random_bool(0.15) { Requirement::Ftl } else { Requirement::Ltl },
                dwell_pickup_min: rng.random_range(5.0..20.0),
                dwell_delivery_min: rng.random_range(5.0..20.0),
            }
        })
        .collect();
    (shipments, fleet)
}

/// Overlap factor straight from the assignment matrices.
fn brute_overlap(plans: &[VopPlan]) -> Vec<f64> {
    let ns = plans[0].assignment.len();
    let nv = plans
        .iter()
        .flat_map(|p| p.assignment.iter().flatten())
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let a: Vec<Vec<Vec<u8>>> = plans
        .iter()
        .map(|p| (0..ns).map(|s| (0..nv).map(|v| (p.assignment[s] == Some(v)) as u8).collect()).collect())
        .collect();
    a.iter()
        .map(|ai| {
            let mut terms = Vec::new();
            for s in 0..ns {
                for v in 0..nv {
                    if ai[s][v] == 1 {
                        let users: u32 = a.iter().map(|ak| ak[s][v] as u32).sum();
                        terms.push(1.0 / users as f64);
                    }
                }
            }
            if terms.is_empty() {
                1.0
            } else {
                terms.iter().sum::<f64>() / terms.len() as f64
            }
        })
        .collect()
}

fn criterion_3() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut n_plans, mut infeasible_sets) = (0usize, 0usize);
    for inst in 0..500 {
        let (shipments, fleet) = random_carrier(&mut rng);
        let plans = match generate_vop_choice_set(&shipments, &fleet, &Oracle) {
            Ok(p) => p,
            Err(tollsim_core::Error::Infeasible(_)) => {
                infeasible_sets += 1;
                continue;
            }
            Err(e) => return Err(format!("instance {inst}: {e}")),
        };
        for (k, p) in plans.iter().enumerate() {
            check_plan(p, &shipments, &fleet, &Oracle).map_err(|e| format!("instance {inst} plan {k}: {e}"))?;
            for tour in &p.tours {
                let cap = fleet[tour.vehicle].capacity_kg;
                ensure!(tour.peak_load_kg <= cap + 1e-9, "instance {inst}: peak load over capacity");
            }
        }
        let want = brute_overlap(&plans);
        let got: Vec<f64> = plans.iter().map(|p| p.overlap).collect();
        ensure!(got == want, "instance {inst}: overlap {got:?} vs brute force {want:?}");
        n_plans += plans.len();
    }
    let (s, f) = random_carrier(&mut rng);
    if let Ok(plans) = generate_vop_choice_set(&s, &f, &Oracle) {
        let twice = [plans[0].clone(), plans[0].clone()];
        let of = overlap_factors(&twice).map_err(|e| e.to_string())?;
        ensure!(of == vec![0.5, 0.5], "identical pair gives {of:?}");
    }
    within(t, Duration::from_secs(120), "VOP suite")?;
    Ok(format!(
        "{n_plans} plans over 500 carriers feasible ({infeasible_sets} sets with no feasible plan), overlap exact, {:.1}s",
        t.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Check {
    let sh = ShoulderSpec::default();
    let am = (hhmm(8, 0), hhmm(10, 0));
    let d = build_step_profile(0.32, am, rounding_step(SchemeKind::Distance), &sh).map_err(|e| e.to_string())?;
    ensure!(d[2].rates == [0.32, 0.48, 0.64, 0.80], "distance peak rates {:?}", d[2].rates);
    ensure!(d[0].rates[0] == 0.16 && d[4].rates[0] == 0.16, "outer shoulder {:?}", d[0].rates);
    ensure!(d[1].rates[0] == 0.26 && d[3].rates[0] == 0.26, "inner shoulder {:?}", d[1].rates);
    let c = build_step_profile(3.25, am, rounding_step(SchemeKind::Cordon), &sh).map_err(|e| e.to_string())?;
    ensure!(c[0].rates[0] == 1.65 && c[4].rates[0] == 1.65, "cordon outer {:?}", c[0].rates);
    ensure!(c[1].rates[0] == 2.60 && c[3].rates[0] == 2.60, "cordon inner {:?}", c[1].rates);
    ensure!(class_rates(3.25, 1.0, 0.05)[0] == 3.25, "cordon peak");

    let found = audit_reference_rates(&sh);
    let pm_vhgv: Vec<_> = found
        .iter()
        .filter(|x| x.kind == SchemeKind::Cordon && x.class == VehicleClass::Vhgv && x.start >= hhmm(15, 0))
        .collect();
    ensure!(pm_vhgv.len() == 2, "expected both PM outer-shoulder VHGV cells flagged, got {found:?}");
    let pm = build_step_profile(3.0, (hhmm(16, 0), hhmm(19, 0)), 0.05, &sh).map_err(|e| e.to_string())?;
    let vhgv = VehicleClass::Vhgv.index();
    ensure!(pm[0].rates[vhgv] == 3.75 && pm[4].rates[vhgv] == 3.75, "rule not applied: {:?}", pm[0].rates);
    ensure!(pm_vhgv.iter().all(|x| x.rule == 3.75 && x.table == 3.25), "discrepancy values {pm_vhgv:?}");
    Ok(format!(
        "distance 0.32 -> {:?} shoulders 0.16/0.26; cordon 3.25 -> 1.65/2.60; {} table cells disagree with the rule (VHGV PM shoulders: rule 3.75 used)",
        d[2].rates,
        found.len()
    ))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Check {
    let m = mct_segment(20.0, 1000.0, 1e-5, 50.0, 2000.0);
    ensure!((m - 0.70).abs() <= 1e-9, "worked example gives {m}");
    let z = mct_segment(20.0, 0.0, 1e-5, 0.0, 2000.0);
    ensure!(z == 0.0, "zero flow and queue gives {z}");
    Ok(format!("worked example {m:.12}, empty segment {z}"))
}

// ---------------------------------------------------------------- 6

fn enforcement_net() -> Network {
    build_network(&GridSpec {
        cols: 8,
        rows: 8,
        toll_area: AreaSpec::centered(8, 8, 4),
        arterial_every: 0,
        ..Default::default()
    })
    .expect("grid builds")
}

fn random_day(net: &Network, rng: &mut ChaCha8Rng) -> Vec<VehiclePlan> {
    let nz = net.n_zones();
    (0..1000)
        .map(|id| {
            let class = VehicleClass::ALL[rng.random_range(0..4)];
            let mut at = rng.random_range(0..nz);
            let mut t = rng.random_range(hhmm(6, 0)..hhmm(18, 0));
            let legs = (0..rng.random_range(1..=6))
                .map(|_| {
                    let mut to = rng.random_range(0..nz);
                    if to == at {
                        to = (to + 1) % nz;
                    }
                    let l = Leg {
                        origin: at,
                        dest: to,
                        earliest: t,
                        dwell_after: rng.random_range(0.0..30.0),
                    };
                    at = to;
                    t += rng.random_range(10.0..150.0);
                    l
                })
                .collect();
            VehiclePlan {
                id,
                class,
                vot: rng.random_range(8.0..60.0),
                driver: if class == VehicleClass::Car {
                    Driver::Person(id)
                } else {
                    Driver::Freight { carrier: id, vehicle: 0 }
                },
                legs,
            }
        })
        .collect()
}

fn criterion_6() -> Check {
    let net = enforcement_net();
    let area: Vec<ZoneId> = net.toll_zones().into_iter().collect();
    let mask: Vec<bool> = (0..net.n_zones()).map(|z| area.contains(&z)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let plans = random_day(&net, &mut rng);
    let spec = SupplySpec::default();
    let geo = SchemeGeometry::new(&net, mask.clone());
    let skims = SkimSet::free_flow(&net, &geo, PeriodWindows::default(), spec.n_intervals());
    let sh = ShoulderSpec::default();
    // High rates over long windows so the caps actually bind.
    let window = (hhmm(7, 0), hhmm(19, 0));
    let class_of = |v: usize| plans[v].class;
    let mut notes = Vec::new();

    let distance = TollScheme::distance(area.clone(), build_step_profile(1.2, window, 0.01, &sh).unwrap(), DEFAULT_CAPS);
    let day = simulate_day(&net, &plans, &distance, &skims, &spec, &mut PathCache::new(spec.k_paths), 1)
        .map_err(|e| e.to_string())?;
    let mut capped = 0;
    for (v, paid) in day.ledger.per_vehicle() {
        let cap = DEFAULT_CAPS[class_of(v).index()];
        ensure!(paid <= cap, "vehicle {v} ({}) paid {paid} over cap {cap}", class_of(v).name());
        capped += (paid == cap) as usize;
    }
    ensure!(capped > 0, "no vehicle reached its cap; the check is vacuous");
    notes.push(format!("distance: {} charges, {capped} vehicles at cap", day.ledger.charges.len()));

    let cordon = TollScheme::cordon(area.clone(), build_step_profile(3.25, window, 0.05, &sh).unwrap());
    let day = simulate_day(&net, &plans, &cordon, &skims, &spec, &mut PathCache::new(spec.k_paths), 1)
        .map_err(|e| e.to_string())?;
    for c in &day.ledger.charges {
        let (from, to) = (net.link_zone_from(c.link), net.link_zone_to(c.link));
        ensure!(!mask[from] && mask[to], "cordon charged link {} ({from}->{to}) which is not inbound", c.link);
        ensure!(c.cause == TollCause::CordonEntry, "cordon charge with cause {:?}", c.cause);
    }
    let outbound: usize = day
        .trajectories
        .iter()
        .flat_map(|t| &t.links)
        .filter(|x| mask[net.link_zone_from(x.link)] && !mask[net.link_zone_to(x.link)])
        .count();
    ensure!(outbound > 0, "no outbound crossings simulated; the check is vacuous");
    notes.push(format!("cordon: {} inbound charges, {outbound} free outbound crossings", day.ledger.charges.len()));

    let flat = TollScheme::area(area, TollScheme::default_area_window(), [2.65, 4.0, 5.5, 6.6]);
    let day = simulate_day(&net, &plans, &flat, &skims, &spec, &mut PathCache::new(spec.k_paths), 1)
        .map_err(|e| e.to_string())?;
    let mut per = std::collections::BTreeMap::new();
    for c in &day.ledger.charges {
        *per.entry(c.vehicle).or_insert(0) += 1;
    }
    if let Some((v, n)) = per.iter().find(|(_, &n)| n > 1) {
        return Err(format!("area: vehicle {v} charged {n} times"));
    }
    ensure!(!per.is_empty(), "no area charges; the check is vacuous");
    notes.push(format!("area: {} vehicles charged once", per.len()));
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Check {
    // Self-comparison on a small city.
    let cfg = ScenarioConfig::tiny();
    let syn = synthesize(&cfg).map_err(|e| e.to_string())?;
    let base = run_scenario(&cfg, &syn, &TollScheme::none()).map_err(|e| e.to_string())?;
    let ev = evaluate(&cfg, &syn, &base).map_err(|e| e.to_string())?;
    let same = compare(&cfg, &syn, PeriodWindows::default(), (&base, &ev), (&base, &ev)).map_err(|e| e.to_string())?;
    for (k, v) in same.welfare.rows() {
        ensure!(v == 0.0, "self-comparison {k} = {v}");
    }
    ensure!(same.aba.iter().all(|r| r.aba == 0.0), "self-comparison ABA nonzero");
    ensure!(same.shipper_surplus.iter().all(|&(_, s)| s == 0.0), "self-comparison shipper surplus nonzero");

    // One car crossing a cordon once.
    let net = enforcement_net();
    let area: Vec<ZoneId> = net.toll_zones().into_iter().collect();
    let outside = (0..net.n_zones()).find(|z| !area.contains(z)).unwrap();
    let inside = area[0];
    let spec = SupplySpec::default();
    let geo = SchemeGeometry::new(&net, (0..net.n_zones()).map(|z| area.contains(&z)).collect());
    let skims = SkimSet::free_flow(&net, &geo, PeriodWindows::default(), spec.n_intervals());
    let plan = VehiclePlan {
        id: 0,
        class: VehicleClass::Car,
        vot: 20.0,
        driver: Driver::Person(0),
        legs: vec![Leg {
            origin: outside,
            dest: inside,
            earliest: hhmm(8, 30),
            dwell_after: 0.0,
        }],
    };
    let cordon = TollScheme::cordon(area, build_step_profile(3.25, (hhmm(8, 0), hhmm(10, 0)), 0.05, &ShoulderSpec::default()).unwrap());
    let run = |s: &TollScheme| simulate_day(&net, std::slice::from_ref(&plan), s, &skims, &spec, &mut PathCache::new(1), 3);
    let tolled = run(&cordon).map_err(|e| e.to_string())?;
    let free = run(&TollScheme::none()).map_err(|e| e.to_string())?;
    let toll = tolled.ledger.total();
    ensure!(tolled.ledger.charges.len() == 1 && toll == 3.25, "ledger {:?}", tolled.ledger.charges);
    let sp = SurplusParams::default();
    let ps_base = producer_surplus(&free.ledger, 0, 0.0, &sp);
    let ps_pol = producer_surplus(&tolled.ledger, 0, 0.0, &sp);
    // The traveller's only alternative becomes dearer by the toll.
    let beta_cost = 0.3;
    let u0 = 1.7;
    let logsum = |cost: f64| ChoiceModel::mnl(vec![u0 - beta_cost * cost], 1.0).logsum().unwrap();
    let rec = compute_aba(0, logsum(toll), logsum(0.0), logsum(toll + sp.delta_x), sp.delta_x, 1.0)
        .map_err(|e| e.to_string())?;
    let cs = passenger_cs(&[rec]);
    let w = social_welfare(&ps_base, &ps_pol, cs, 0.0, 0.0, 0.0);
    ensure!(w.toll_revenue == toll, "revenue {}", w.toll_revenue);
    ensure!((w.toll_earning - 0.73 * toll).abs() < 1e-12, "earning {}", w.toll_earning);
    ensure!((w.producer - 0.73 * toll).abs() < 1e-12, "producer {}", w.producer);
    ensure!((w.passenger_cs + toll).abs() < 1e-12, "passenger CS {}", w.passenger_cs);
    ensure!((w.social_welfare - (0.73 - 1.0) * toll).abs() < 1e-12, "SW {}", w.social_welfare);

    let one = EmissionFactors::default().cost_of_tonnes(1.0);
    ensure!(one == 58.0 && CO2_PRICE_PER_TONNE == 58.0, "1 t CO2 costs {one}");
    Ok(format!(
        "self-comparison all zero; one 3.25 toll -> PS +{:.4}, CS_P {:.4}; 1 t CO2 = ${one}",
        w.producer, w.passenger_cs
    ))
}

// ------------------------------------------------------------- 8 and 9

struct DeskRuns {
    /// Baseline relative skim changes per iteration, seed 1.
    changes: Vec<f64>,
    pipeline: Duration,
    /// Per seed, the comparisons for distance, cordon and area.
    seeds: Vec<(u64, Vec<tollsim_core::scenario::Comparison>)>,
}

fn desk_runs() -> std::result::Result<DeskRuns, String> {
    let mut seeds = Vec::new();
    let mut changes = Vec::new();
    let mut pipeline = Duration::ZERO;
    for seed in 1..=3u64 {
        let cfg = ScenarioConfig { seed, ..ScenarioConfig::default() };
        if seed == 1 {
            // The full staged pipeline, artifacts on disk, timed.
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let t = Instant::now();
            let store = ArtifactStore::open(dir.path()).map_err(|e| e.to_string())?;
            stages::synth(&cfg, &store).map_err(|e| e.to_string())?;
            let (base, _) = stages::baseline(&cfg, &store).map_err(|e| e.to_string())?;
            stages::design(&cfg, &store).map_err(|e| e.to_string())?;
            for kind in SchemeKind::POLICIES {
                stages::run(&cfg, &store, kind).map_err(|e| e.to_string())?;
            }
            let cmp = stages::report(&cfg, &store).map_err(|e| e.to_string())?;
            pipeline = t.elapsed();
            changes = base.changes;
            seeds.push((seed, cmp));
        } else {
            let full = stages::run_all(&cfg, &SchemeKind::POLICIES).map_err(|e| e.to_string())?;
            seeds.push((seed, full.comparisons));
        }
    }
    Ok(DeskRuns { changes, pipeline, seeds })
}

fn criterion_8(d: &DeskRuns) -> Check {
    ensure!(d.changes.len() >= 15, "only {} iterations", d.changes.len());
    let (c5, c15) = (d.changes[4], d.changes[14]);
    ensure!(c5 < 0.05, "change at iteration 5 is {c5:.4}");
    ensure!(c15 < 0.01, "change at iteration 15 is {c15:.4}");
    ensure!(d.pipeline < Duration::from_secs(15 * 60), "pipeline took {:.0}s", d.pipeline.as_secs_f64());
    Ok(format!(
        "skim change {c5:.2e} at iteration 5, {c15:.2e} at 15; staged pipeline {:.0}s",
        d.pipeline.as_secs_f64()
    ))
}

fn criterion_9(d: &DeskRuns) -> Check {
    let mut lines = Vec::new();
    for (seed, cmp) in &d.seeds {
        let get = |k: SchemeKind| cmp.iter().find(|c| c.scheme == k).ok_or(format!("seed {seed}: no {} run", k.name()));
        let dist = get(SchemeKind::Distance)?;
        let cord = get(SchemeKind::Cordon)?;
        let (b, p) = (dist.baseline_indicators.in_area_peak_car_vkt(), dist.policy_indicators.in_area_peak_car_vkt());
        ensure!(p < b, "seed {seed}: in-area peak car VKT {b:.1} -> {p:.1} under distance");
        for c in cmp {
            let (b, p) = (c.baseline_indicators.annual_mean_b2b_kg, c.policy_indicators.annual_mean_b2b_kg);
            ensure!(p >= b, "seed {seed}: mean B2B shipment {b:.1} -> {p:.1} under {}", c.scheme.name());
            let w = &c.welfare;
            let cs = (w.passenger_cs + w.freight_cs).abs();
            ensure!(w.toll_revenue > cs, "seed {seed} {}: revenue {:.1} vs |dCS| {cs:.1}", c.scheme.name(), w.toll_revenue);
        }
        let (sd, sc) = (dist.welfare.social_welfare, cord.welfare.social_welfare);
        ensure!(sd >= sc, "seed {seed}: SW distance {sd:.1} < cordon {sc:.1}");
        lines.push(format!("seed {seed}: VKT {b:.0}->{p:.0}, SW {sd:.0}>={sc:.0}"));
    }
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- 10

fn exhaustive_mapping(p: &MappingProblem) -> Option<usize> {
    let (ni, nj, nk) = (p.a.len(), p.b.len(), p.a[0].len());
    let feasible = |x: &dyn Fn(usize, usize) -> bool| {
        if p.forbidden.iter().any(|&(i, j)| x(i, j)) {
            return false;
        }
        for i in 0..ni {
            if p.a[i].iter().any(|&v| v) && !(0..nj).any(|j| x(i, j)) {
                return false;
            }
        }
        for j in 0..nj {
            if p.b[j].iter().any(|&v| v) && !(0..ni).any(|i| x(i, j)) {
                return false;
            }
        }
        if p.zone_coverage {
            for i in 0..ni {
                for k in 0..nk {
                    if p.a[i][k] && !(0..nj).any(|j| p.b[j][k] && x(i, j)) {
                        return false;
                    }
                }
            }
        }
        true
    };
    (0u32..1 << (ni * nj))
        .filter(|mask| feasible(&|i, j| mask >> (i * nj + j) & 1 == 1))
        .map(|m| m.count_ones() as usize)
        .min()
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut solved = 0;
    let mut drawn = 0;
    while solved < 50 {
        drawn += 1;
        let nk = rng.random_range(1..=4);
        let p = MappingProblem {
            a: (0..4).map(|_| (0..nk).map(|_| rng.random_bool(0.5)).collect()).collect(),
            b: (0..4).map(|_| (0..nk).map(|_| rng.random_bool(0.6)).collect()).collect(),
            forbidden: (0..rng.random_range(0..4)).map(|_| (rng.random_range(0..4), rng.random_range(0..4))).collect(),
            zone_coverage: rng.random_bool(0.5),
        };
        match (solve_mapping(&p), exhaustive_mapping(&p)) {
            (Ok(x), Some(best)) => {
                let x: MappingMatrix = x;
                ensure!(x.ones() == best, "solver uses {} ones, optimum {best}: {p:?}", x.ones());
                ensure!(exhaustive_feasible(&p, &x), "solver result infeasible: {p:?}");
                solved += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("solver {got:?} vs exhaustive {want:?} on {p:?}")),
        }
    }

    let mut worst_ipf: f64 = 0.0;
    for _ in 0..50 {
        let rows: Vec<f64> = (0..3).map(|_| rng.random_range(1.0..500.0)).collect();
        let mut cols: Vec<f64> = (0..11).map(|_| rng.random_range(1.0..500.0)).collect();
        let scale = rows.iter().sum::<f64>() / cols.iter().sum::<f64>();
        cols.iter_mut().for_each(|c| *c *= scale);
        let fit = generate_fleet(&rows, &cols, None, false).map_err(|e| e.to_string())?;
        for (v, r) in rows.iter().enumerate() {
            worst_ipf = worst_ipf.max((fit.fitted[v].iter().sum::<f64>() - r).abs() / r);
        }
        for (i, c) in cols.iter().enumerate() {
            worst_ipf = worst_ipf.max(((0..3).map(|v| fit.fitted[v][i]).sum::<f64>() - c).abs() / c);
        }
    }
    ensure!(worst_ipf < 1e-3, "IPF margin error {worst_ipf:e}");

    let cfg = ScenarioConfig::tiny();
    let syn = synthesize(&cfg).map_err(|e| e.to_string())?;
    let city = &syn.city;
    for e in &city.establishments {
        let b = e.building.ok_or(format!("establishment {} unhoused", e.id))?;
        let bl = &city.buildings[b];
        ensure!(bl.zone == e.zone, "establishment {} housed in another zone", e.id);
        ensure!(city.mapping.allows(e.industry, bl.property), "establishment {} in an unmapped property", e.id);
        ensure!(!cfg.city.forbidden.contains(&(e.industry, bl.property)), "establishment {} in a forbidden property", e.id);
    }

    for kind in [GroupKind::Passenger, GroupKind::Shipper] {
        for _ in 0..200 {
            let n = rng.random_range(1..400);
            let s = kind.threshold() * 3.0;
            let deltas: Vec<f64> = (0..n).map(|_| rng.random_range(-s..s)).collect();
            let g = distributional_groups(&deltas, kind, &[]).map_err(|e| e.to_string())?;
            let bp: u32 = g.iter().map(|x| x.share_bp).sum();
            ensure!(bp == 10_000, "group shares sum to {bp} bp");
            ensure!(g.iter().map(|x| x.count).sum::<usize>() == n, "group counts do not cover the population");
        }
    }
    Ok(format!(
        "mapping optimal on 50 4x4 instances ({drawn} drawn), IPF margin error {worst_ipf:.1e}, {} establishments housed, group shares sum to 100%",
        city.establishments.len()
    ))
}

fn exhaustive_feasible(p: &MappingProblem, x: &MappingMatrix) -> bool {
    let (ni, nj) = (p.a.len(), p.b.len());
    let rows_ok = (0..ni).all(|i| !p.a[i].iter().any(|&v| v) || (0..nj).any(|j| x.allows(i, j)));
    let cols_ok = (0..nj).all(|j| !p.b[j].iter().any(|&v| v) || (0..ni).any(|i| x.allows(i, j)));
    let forb_ok = p.forbidden.iter().all(|&(i, j)| !x.allows(i, j));
    rows_ok && cols_ok && forb_ok
}

// ------------------------------------------------------------- harness

fn run(n: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = t.elapsed().as_secs_f64();
    match r {
        Ok(detail) => {
            println!("PASS criterion {n:>2} ({name}): {detail} [{secs:.1}s]");
            true
        }
        Err(why) => {
            println!("FAIL criterion {n:>2} ({name}): {why} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |n: usize| only.is_empty() || only.contains(&n);
    let mut ok = true;
    let cheap: [(usize, &str, fn() -> Check); 7] = [
        (1, "choice-model oracle", criterion_1),
        (2, "shipment-size optimality", criterion_2),
        (3, "vehicle operations plans", criterion_3),
        (4, "toll-design arithmetic", criterion_4),
        (5, "marginal-cost toll", criterion_5),
        (6, "toll enforcement", criterion_6),
        (7, "welfare identities", criterion_7),
    ];
    for (n, name, f) in cheap {
        if want(n) {
            ok &= run(n, name, f);
        }
    }
    if want(8) || want(9) {
        let t = Instant::now();
        match desk_runs() {
            Ok(d) => {
                eprintln!("desk runs for three seeds took {:.0}s", t.elapsed().as_secs_f64());
                if want(8) {
                    ok &= run(8, "day-to-day convergence", || criterion_8(&d));
                }
                if want(9) {
                    ok &= run(9, "directional policy effects", || criterion_9(&d));
                }
            }
            Err(e) => {
                for n in [8, 9] {
                    if want(n) {
                        println!("FAIL criterion {n:>2}: desk runs failed: {e}");
                    }
                }
                ok = false;
            }
        }
    }
    if want(10) {
        ok &= run(10, "synthesis programs", criterion_10);
    }
    if !ok {
        std::process::exit(1);
    }
}
