//! Event-driven mesoscopic loading of one day of vehicle plans.
//!
//! Each segment has a moving part, traversed at the speed implied by its
//! density when the vehicle enters, and a point queue at its downstream end
//! that releases at most `capacity * 5 min` PCU per interval, first come
//! first served.
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::clock::{Minutes, INTERVAL_MIN};
use crate::error::{Error, Result};
use crate::freight::{freight_route_choice, VopParams};
use crate::netgraph::{k_shortest_paths, LinkId, LinkTraversal, Network, Path, PathMetric, ZoneId};
use crate::pax::{route_choice, RouteOption, RouteParams};
use crate::pricing::TollScheme;
use crate::rng::{tags, uniform};
use crate::vehicle::VehicleClass;

use super::skims::{LinkTimes, SkimSet};
use super::speed::{segment_speed, SpeedModel};
use super::toll::{charge_toll, SchemeGeometry, TollCause, TollCharge, VehicleTollState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupplySpec {
    pub speed: SpeedModel,
    pub horizon_h: f64,
    pub k_paths: usize,
    /// How recent (minutes) a same-day traversal must be to override the
    /// learned link time at route choice.
    pub observation_window_min: f64,
    pub pax_route: RouteParams,
    pub freight_route: VopParams,
}

impl Default for SupplySpec {
    fn default() -> Self {
        SupplySpec {
            speed: SpeedModel::default(),
            horizon_h: 26.0,
            k_paths: 3,
            observation_window_min: 15.0,
            pax_route: RouteParams::default(),
            freight_route: VopParams::default(),
        }
    }
}

impl SupplySpec {
    pub fn n_intervals(&self) -> usize {
        (self.horizon_h * 60.0 / INTERVAL_MIN).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    Person(usize),
    Freight { carrier: usize, vehicle: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub origin: ZoneId,
    pub dest: ZoneId,
    /// Planned departure; the vehicle leaves at this time or on arrival
    /// from the previous leg plus its dwell, whichever is later.
    pub earliest: Minutes,
    pub dwell_after: Minutes,
}

/// Everything one road vehicle does in a day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehiclePlan {
    pub id: usize,
    pub class: VehicleClass,
    /// $/h, used for route choice and segment-level value of time.
    pub vot: f64,
    pub driver: Driver,
    pub legs: Vec<Leg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vehicle: usize,
    pub leg: usize,
    pub class: VehicleClass,
    pub driver: Driver,
    pub origin: ZoneId,
    pub dest: ZoneId,
    pub depart: Minutes,
    /// `None` when the horizon cut the trip short.
    pub arrive: Option<Minutes>,
    pub links: Vec<LinkTraversal>,
    pub toll: f64,
    pub length_km: f64,
    pub free_flow_min: f64,
}

/// Per segment and interval statistics; arrays are `[segment * n_intervals + interval]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentStates {
    pub n_segments: usize,
    pub n_intervals: usize,
    /// PCU entering / leaving.
    pub inflow: Vec<f64>,
    pub outflow: Vec<f64>,
    /// Sum of moving-part times (minutes) and count of vehicles, by entry interval.
    pub move_sum: Vec<f64>,
    pub entries: Vec<f64>,
    /// PCU-minutes spent queueing.
    pub queue_acc: Vec<f64>,
    /// PCU still queued at the end of the interval.
    pub queue_end: Vec<f64>,
    pub vot_sum: Vec<f64>,
    pub density_sum: Vec<f64>,
}

impl SegmentStates {
    fn new(n_segments: usize, n_intervals: usize) -> SegmentStates {
        let z = vec![0.0; n_segments * n_intervals];
        SegmentStates {
            n_segments,
            n_intervals,
            inflow: z.clone(),
            outflow: z.clone(),
            move_sum: z.clone(),
            entries: z.clone(),
            queue_acc: z.clone(),
            queue_end: z.clone(),
            vot_sum: z.clone(),
            density_sum: z,
        }
    }

    fn idx(&self, s: usize, i: usize) -> usize {
        s * self.n_intervals + i
    }

    /// Outflow rate, PCU/h.
    pub fn flow_vph(&self, s: usize, i: usize) -> f64 {
        self.outflow[self.idx(s, i)] * 60.0 / INTERVAL_MIN
    }

    /// Mean moving-part time in hours of vehicles entering in the interval.
    pub fn mean_time_h(&self, s: usize, i: usize) -> Option<f64> {
        let k = self.idx(s, i);
        (self.entries[k] > 0.0).then(|| self.move_sum[k] / self.entries[k] / 60.0)
    }

    /// Time-averaged queue, PCU.
    pub fn queue(&self, s: usize, i: usize) -> f64 {
        self.queue_acc[self.idx(s, i)] / INTERVAL_MIN
    }

    pub fn queue_at_end(&self, s: usize, i: usize) -> f64 {
        self.queue_end[self.idx(s, i)]
    }

    /// Mean value of time ($/h) of vehicles entering in the interval.
    pub fn gamma(&self, s: usize, i: usize) -> Option<f64> {
        let k = self.idx(s, i);
        (self.entries[k] > 0.0).then(|| self.vot_sum[k] / self.entries[k])
    }

    pub fn mean_density(&self, s: usize, i: usize) -> Option<f64> {
        let k = self.idx(s, i);
        (self.entries[k] > 0.0).then(|| self.density_sum[k] / self.entries[k])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TollLedger {
    pub charges: Vec<TollCharge>,
}

impl TollLedger {
    pub fn total(&self) -> f64 {
        self.charges.iter().map(|c| c.amount).sum()
    }

    pub fn per_vehicle(&self) -> BTreeMap<usize, f64> {
        let mut m = BTreeMap::new();
        for c in &self.charges {
            *m.entry(c.vehicle).or_insert(0.0) += c.amount;
        }
        m
    }

    pub fn count_by_cause(&self, cause: TollCause) -> usize {
        self.charges.iter().filter(|c| c.cause == cause).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub trajectories: Vec<Trajectory>,
    pub states: SegmentStates,
    pub ledger: TollLedger,
    pub realized: LinkTimes,
    pub entered: usize,
    pub completed: usize,
    pub truncated: usize,
    /// Vehicles whose distance charges hit the daily cap.
    pub capped: usize,
}

/// Free-flow k-shortest paths per zone pair, filled on demand.
#[derive(Clone, Debug, Default)]
pub struct PathCache {
    k: usize,
    paths: HashMap<(ZoneId, ZoneId), Vec<Path>>,
}

impl PathCache {
    pub fn new(k: usize) -> PathCache {
        PathCache {
            k: k.max(1),
            paths: HashMap::new(),
        }
    }

    pub fn get(&mut self, net: &Network, o: ZoneId, d: ZoneId) -> Result<&[Path]> {
        if !self.paths.contains_key(&(o, d)) {
            let p = k_shortest_paths(net, o, d, self.k, PathMetric::Time)?;
            self.paths.insert((o, d), p);
        }
        Ok(&self.paths[&(o, d)])
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Depart,
    SegEnd,
    Advance,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    t: f64,
    seq: u64,
    kind: Kind,
    veh: usize,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    // Reversed so that BinaryHeap pops the earliest event.
    fn cmp(&self, o: &Self) -> Ordering {
        o.t.total_cmp(&self.t).then(o.seq.cmp(&self.seq))
    }
}

struct Active {
    leg: usize,
    path: Vec<LinkId>,
    li: usize,
    si: usize,
    link_entry: f64,
    seg_entry: f64,
    traj: Trajectory,
}

struct Sim<'a> {
    net: &'a Network,
    plans: &'a [VehiclePlan],
    scheme: &'a TollScheme,
    geo: SchemeGeometry,
    learned: &'a LinkTimes,
    spec: &'a SupplySpec,
    seed: u64,
    heap: BinaryHeap<Event>,
    seq: u64,
    on_seg: Vec<f64>,
    last_exit: Vec<f64>,
    cur_int: Vec<i64>,
    used: Vec<f64>,
    last_obs_t: Vec<f64>,
    last_obs_dur: Vec<f64>,
    link_sum: Vec<f64>,
    link_cnt: Vec<f64>,
    states: SegmentStates,
    tolls: Vec<VehicleTollState>,
    active: Vec<Option<Active>>,
    ledger: TollLedger,
    trajectories: Vec<Trajectory>,
    entered: usize,
    completed: usize,
}

impl<'a> Sim<'a> {
    fn push(&mut self, t: f64, kind: Kind, veh: usize) {
        self.seq += 1;
        self.heap.push(Event {
            t,
            seq: self.seq,
            kind,
            veh,
        });
    }

    fn interval(&self, t: f64) -> usize {
        ((t / INTERVAL_MIN).max(0.0) as usize).min(self.states.n_intervals - 1)
    }

    fn link_time_estimate(&self, l: LinkId, t: f64) -> f64 {
        if t - self.last_obs_t[l] <= self.spec.observation_window_min {
            self.last_obs_dur[l]
        } else {
            self.learned.at(l, t)
        }
    }

    fn choose_path(&mut self, v: usize, leg: usize, t: f64, cache: &mut PathCache) -> Result<Vec<LinkId>> {
        let plan = &self.plans[v];
        let l = &plan.legs[leg];
        let paths = cache.get(self.net, l.origin, l.dest)?;
        if paths.len() == 1 {
            return Ok(paths[0].links.clone());
        }
        let mut opts = Vec::with_capacity(paths.len());
        for p in paths {
            let mut tc = t;
            let mut st = self.tolls[v];
            let mut toll = 0.0;
            for &link in &p.links {
                if let Some((_, amt)) = charge_toll(self.scheme, &self.geo, self.net, link, plan.class, tc, &mut st) {
                    toll += amt;
                }
                tc += self.link_time_estimate(link, tc);
            }
            opts.push(RouteOption::from_path(self.net, p, (tc - t) / 60.0, toll));
        }
        let u = uniform(&[self.seed, tags::ROUTE, plan.id as u64, leg as u64]);
        let (k, _) = if plan.class.is_goods() {
            freight_route_choice(&opts, plan.class, &self.spec.freight_route, u)?
        } else {
            route_choice(&opts, plan.vot, &self.spec.pax_route, u)?
        };
        Ok(paths[k].links.clone())
    }

    fn depart(&mut self, v: usize, t: f64, cache: &mut PathCache) -> Result<()> {
        let plan = &self.plans[v];
        let leg = self.active[v].as_ref().map_or(0, |a| a.leg);
        let l = &plan.legs[leg];
        self.entered += 1;
        let traj = Trajectory {
            vehicle: plan.id,
            leg,
            class: plan.class,
            driver: plan.driver,
            origin: l.origin,
            dest: l.dest,
            depart: t,
            arrive: None,
            links: Vec::new(),
            toll: 0.0,
            length_km: 0.0,
            free_flow_min: 0.0,
        };
        if l.origin == l.dest {
            let mut traj = traj;
            let arrive = t + 3.0;
            traj.arrive = Some(arrive);
            self.finish_leg(v, leg, traj, arrive);
            return Ok(());
        }
        let path = self.choose_path(v, leg, t, cache)?;
        self.active[v] = Some(Active {
            leg,
            path,
            li: 0,
            si: 0,
            link_entry: t,
            seg_entry: t,
            traj,
        });
        self.enter_link(v, t)
    }

    fn enter_link(&mut self, v: usize, t: f64) -> Result<()> {
        let class = self.plans[v].class;
        let a = self.active[v].as_mut().expect("active vehicle");
        let link = a.path[a.li];
        a.link_entry = t;
        a.si = 0;
        if let Some((cause, amount)) = charge_toll(self.scheme, &self.geo, self.net, link, class, t, &mut self.tolls[v]) {
            a.traj.toll += amount;
            self.ledger.charges.push(TollCharge {
                vehicle: self.plans[v].id,
                class,
                time: t,
                link,
                cause,
                km: if cause == TollCause::DistanceKm { self.net.links[link].length_km } else { 0.0 },
                amount,
            });
        }
        self.enter_segment(v, t)
    }

    fn enter_segment(&mut self, v: usize, t: f64) -> Result<()> {
        let plan = &self.plans[v];
        let pcu = plan.class.pcu();
        let a = self.active[v].as_mut().expect("active vehicle");
        let s = self.net.links[a.path[a.li]].segments[a.si];
        let seg = &self.net.segments[s];
        a.seg_entry = t;
        self.on_seg[s] += pcu;
        let density = (self.on_seg[s] / seg.length_km).min(seg.jam_density_vpkm);
        let speed = segment_speed(density, seg, &self.spec.speed)?;
        let move_min = seg.length_km / speed * 60.0;
        let i = self.interval(t);
        let k = self.states.idx(s, i);
        self.states.inflow[k] += pcu;
        self.states.entries[k] += 1.0;
        self.states.move_sum[k] += move_min;
        self.states.vot_sum[k] += plan.vot;
        self.states.density_sum[k] += density;
        self.push(t + move_min, Kind::SegEnd, v);
        Ok(())
    }

    fn seg_end(&mut self, v: usize, t: f64) {
        let pcu = self.plans[v].class.pcu();
        let a = self.active[v].as_ref().expect("active vehicle");
        let s = self.net.links[a.path[a.li]].segments[a.si];
        let budget = self.net.segments[s].capacity_vph * INTERVAL_MIN / 60.0;
        let mut te = t.max(self.last_exit[s]);
        loop {
            let i = (te / INTERVAL_MIN).floor() as i64;
            if i != self.cur_int[s] {
                self.cur_int[s] = i;
                self.used[s] = 0.0;
            }
            if self.used[s] + pcu <= budget + 1e-9 || self.used[s] == 0.0 {
                self.used[s] += pcu;
                break;
            }
            te = (i + 1) as f64 * INTERVAL_MIN;
        }
        self.last_exit[s] = te;
        if te > t {
            let mut a0 = t;
            while a0 < te {
                let i = self.interval(a0);
                let boundary = (a0 / INTERVAL_MIN).floor() * INTERVAL_MIN + INTERVAL_MIN;
                let b0 = boundary.min(te);
                let k = self.states.idx(s, i);
                self.states.queue_acc[k] += (b0 - a0) * pcu;
                if boundary <= te {
                    self.states.queue_end[k] += pcu;
                }
                a0 = boundary;
            }
        }
        self.push(te, Kind::Advance, v);
    }

    fn advance(&mut self, v: usize, t: f64) -> Result<()> {
        let pcu = self.plans[v].class.pcu();
        let i = self.interval(t);
        let a = self.active[v].as_mut().expect("active vehicle");
        let link = a.path[a.li];
        let s = self.net.links[link].segments[a.si];
        self.on_seg[s] -= pcu;
        let k = self.states.idx(s, i);
        self.states.outflow[k] += pcu;
        if a.si + 1 < self.net.links[link].segments.len() {
            a.si += 1;
            return self.enter_segment(v, t);
        }
        let entry = a.link_entry;
        a.traj.links.push(LinkTraversal { link, entry, exit: t });
        a.traj.length_km += self.net.links[link].length_km;
        a.traj.free_flow_min += self.net.links[link].free_flow_min;
        let ei = ((entry / INTERVAL_MIN).max(0.0) as usize).min(self.states.n_intervals - 1);
        self.link_sum[link * self.states.n_intervals + ei] += t - entry;
        self.link_cnt[link * self.states.n_intervals + ei] += 1.0;
        self.last_obs_t[link] = t;
        self.last_obs_dur[link] = t - entry;
        if a.li + 1 < a.path.len() {
            a.li += 1;
            return self.enter_link(v, t);
        }
        let a = self.active[v].take().expect("active vehicle");
        let mut traj = a.traj;
        traj.arrive = Some(t);
        self.finish_leg(v, a.leg, traj, t);
        Ok(())
    }

    fn finish_leg(&mut self, v: usize, leg: usize, traj: Trajectory, t: f64) {
        self.completed += 1;
        self.trajectories.push(traj);
        let plan = &self.plans[v];
        if leg + 1 < plan.legs.len() {
            let next = plan.legs[leg].dwell_after + t;
            let dep = next.max(plan.legs[leg + 1].earliest);
            // A placeholder carries the leg index until departure.
            self.active[v] = Some(Active {
                leg: leg + 1,
                path: Vec::new(),
                li: 0,
                si: 0,
                link_entry: dep,
                seg_entry: dep,
                traj: Trajectory {
                    vehicle: plan.id,
                    leg: leg + 1,
                    class: plan.class,
                    driver: plan.driver,
                    origin: 0,
                    dest: 0,
                    depart: dep,
                    arrive: None,
                    links: Vec::new(),
                    toll: 0.0,
                    length_km: 0.0,
                    free_flow_min: 0.0,
                },
            });
            self.push(dep, Kind::Depart, v);
        } else {
            self.active[v] = None;
        }
    }

    fn realized_link_times(&self) -> LinkTimes {
        let ni = self.states.n_intervals;
        let mut t = vec![0.0; self.net.links.len() * ni];
        for (l, link) in self.net.links.iter().enumerate() {
            for i in 0..ni {
                let k = l * ni + i;
                t[k] = if self.link_cnt[k] > 0.0 {
                    self.link_sum[k] / self.link_cnt[k]
                } else {
                    link.free_flow_min
                        + link
                            .segments
                            .iter()
                            .map(|&s| self.states.queue(s, i) / self.net.segments[s].capacity_vph * 60.0)
                            .sum::<f64>()
                };
            }
        }
        LinkTimes {
            n_links: self.net.links.len(),
            n_intervals: ni,
            t,
        }
    }
}

/// Loads every plan on the network under `scheme`, using `skims` as the
/// learned link times for route choice.
pub fn simulate_day(
    net: &Network,
    plans: &[VehiclePlan],
    scheme: &TollScheme,
    skims: &SkimSet,
    spec: &SupplySpec,
    cache: &mut PathCache,
    seed: u64,
) -> Result<DayResult> {
    let nz = net.n_zones();
    if plans.iter().flat_map(|p| &p.legs).any(|l| l.origin >= nz || l.dest >= nz) {
        return Err(Error::invalid("plan references a missing zone"));
    }
    scheme
        .validate(nz)
        .map_err(|e| Error::invalid(format!("scheme/network mismatch: {e}")))?;
    let ni = spec.n_intervals();
    if skims.links.n_links != net.links.len() || skims.links.n_intervals != ni {
        return Err(Error::invalid("skims do not match network or horizon"));
    }
    let horizon = spec.horizon_h * 60.0;
    let nseg = net.segments.len();
    let nl = net.links.len();
    let mut sim = Sim {
        net,
        plans,
        scheme,
        geo: SchemeGeometry::for_scheme(net, scheme),
        learned: &skims.links,
        spec,
        seed,
        heap: BinaryHeap::new(),
        seq: 0,
        on_seg: vec![0.0; nseg],
        last_exit: vec![f64::NEG_INFINITY; nseg],
        cur_int: vec![-1; nseg],
        used: vec![0.0; nseg],
        last_obs_t: vec![f64::NEG_INFINITY; nl],
        last_obs_dur: vec![0.0; nl],
        link_sum: vec![0.0; nl * ni],
        link_cnt: vec![0.0; nl * ni],
        states: SegmentStates::new(nseg, ni),
        tolls: vec![VehicleTollState::default(); plans.len()],
        active: (0..plans.len()).map(|_| None).collect(),
        ledger: TollLedger::default(),
        trajectories: Vec::new(),
        entered: 0,
        completed: 0,
    };
    for (v, p) in plans.iter().enumerate() {
        if let Some(first) = p.legs.first() {
            sim.push(first.earliest, Kind::Depart, v);
        }
    }
    while let Some(ev) = sim.heap.pop() {
        if ev.t > horizon {
            break;
        }
        match ev.kind {
            Kind::Depart => sim.depart(ev.veh, ev.t, cache)?,
            Kind::SegEnd => sim.seg_end(ev.veh, ev.t),
            Kind::Advance => sim.advance(ev.veh, ev.t)?,
        }
    }
    // Vehicles still on the road at the horizon.
    let mut truncated = 0;
    for a in sim.active.iter_mut() {
        if let Some(a) = a.take() {
            if !a.path.is_empty() {
                truncated += 1;
                sim.trajectories.push(a.traj);
            }
        }
    }
    sim.trajectories.sort_by_key(|t| (t.vehicle, t.leg));
    let realized = sim.realized_link_times();
    let capped = sim.tolls.iter().filter(|s| s.capped).count();
    Ok(DayResult {
        trajectories: sim.trajectories,
        states: sim.states,
        ledger: sim.ledger,
        realized,
        entered: sim.entered,
        completed: sim.completed,
        truncated,
        capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{hhmm, PeriodWindows};
    use crate::netgraph::{build_network, AreaSpec, GridSpec, RoadClass};
    use crate::pricing::{build_step_profile, ShoulderSpec, DEFAULT_CAPS};

    fn net(cols: usize, rows: usize, area: Vec<ZoneId>, cap: f64) -> Network {
        build_network(&GridSpec {
            cols,
            rows,
            segments_per_link: 1,
            street: RoadClass {
                capacity_vph: cap,
                free_flow_kmh: 36.0,
                jam_density_vpkm: 120.0,
            },
            arterial_every: 0,
            toll_area: AreaSpec::Zones(area),
            ..Default::default()
        })
        .unwrap()
    }

    fn skims(net: &Network, spec: &SupplySpec) -> SkimSet {
        let geo = SchemeGeometry::new(net, net.zones.iter().map(|z| z.in_toll_area).collect());
        SkimSet::free_flow(net, &geo, PeriodWindows::default(), spec.n_intervals())
    }

    fn car(id: usize, o: ZoneId, d: ZoneId, t: Minutes) -> VehiclePlan {
        VehiclePlan {
            id,
            class: VehicleClass::Car,
            vot: 20.0,
            driver: Driver::Person(id),
            legs: vec![Leg {
                origin: o,
                dest: d,
                earliest: t,
                dwell_after: 0.0,
            }],
        }
    }

    fn run(net: &Network, plans: &[VehiclePlan], scheme: &TollScheme, spec: &SupplySpec) -> DayResult {
        let mut cache = PathCache::new(spec.k_paths);
        simulate_day(net, plans, scheme, &skims(net, spec), spec, &mut cache, 7).unwrap()
    }

    #[test]
    fn zero_demand_is_free_flow() {
        let net = net(3, 3, vec![4], 500.0);
        let spec = SupplySpec::default();
        let r = run(&net, &[], &TollScheme::none(), &spec);
        assert!(r.trajectories.is_empty());
        assert_eq!(r.realized, LinkTimes::free_flow(&net, spec.n_intervals()));
    }

    #[test]
    fn single_cordon_crossing_pays_peak_rate() {
        let net = net(3, 3, vec![4], 500.0);
        let spec = SupplySpec {
            k_paths: 1,
            ..Default::default()
        };
        let profile = build_step_profile(3.25, (hhmm(8, 0), hhmm(10, 0)), 0.05, &ShoulderSpec::default()).unwrap();
        let scheme = TollScheme::cordon(vec![4], profile);
        let r = run(&net, &[car(0, 1, 4, hhmm(8, 30))], &scheme, &spec);
        assert_eq!(r.ledger.charges.len(), 1);
        assert_eq!(r.ledger.charges[0].amount, 3.25);
        assert_eq!(r.ledger.charges[0].cause, TollCause::CordonEntry);
        assert_eq!(r.trajectories[0].toll, 3.25);
    }

    #[test]
    fn queue_forms_beyond_capacity() {
        // 600 veh/h releases 50 vehicles per 5-minute interval.
        let net = net(2, 2, vec![3], 600.0);
        let spec = SupplySpec {
            k_paths: 1,
            ..Default::default()
        };
        let plans: Vec<VehiclePlan> = (0..60).map(|i| car(i, 0, 1, 0.0)).collect();
        let r = run(&net, &plans, &TollScheme::none(), &spec);
        let l = (0..net.links.len()).find(|&l| net.links[l].from == 0 && net.links[l].to == 1).unwrap();
        let s = net.links[l].segments[0];
        assert_eq!(r.states.outflow[s * r.states.n_intervals], 50.0);
        assert_eq!(r.states.queue_at_end(s, 0), 60.0 - 50.0);
        assert_eq!(r.completed, 60);
        for i in 0..r.states.n_intervals {
            assert!(r.states.outflow[s * r.states.n_intervals + i] <= 50.0 + 1e-9);
        }
    }

    #[test]
    fn trajectories_are_ordered_and_conserved() {
        let net = net(4, 4, vec![5, 6, 9, 10], 300.0);
        let spec = SupplySpec::default();
        let plans: Vec<VehiclePlan> = (0..400)
            .map(|i| {
                let mut p = car(i, i % 16, (i * 7 + 3) % 16, hhmm(7, 0) + (i % 50) as f64);
                p.legs.push(Leg {
                    origin: p.legs[0].dest,
                    dest: p.legs[0].origin,
                    earliest: hhmm(17, 0),
                    dwell_after: 0.0,
                });
                p
            })
            .collect();
        let r = run(&net, &plans, &TollScheme::none(), &spec);
        assert_eq!(r.entered, r.completed + r.truncated);
        assert_eq!(r.trajectories.len(), 800);
        assert_eq!(r.truncated, 0);
        for t in &r.trajectories {
            let mut prev = t.depart;
            for x in &t.links {
                assert!(x.entry >= prev - 1e-9 && x.exit > x.entry);
                prev = x.exit;
            }
        }
        let again = run(&net, &plans, &TollScheme::none(), &spec);
        assert_eq!(r, again);
    }

    #[test]
    fn bad_plans_rejected() {
        let net = net(2, 2, vec![3], 500.0);
        let spec = SupplySpec::default();
        let mut cache = PathCache::new(3);
        let sk = skims(&net, &spec);
        assert!(simulate_day(&net, &[car(0, 0, 9, 0.0)], &TollScheme::none(), &sk, &spec, &mut cache, 1).is_err());
        let bad = TollScheme::distance(vec![7], vec![], DEFAULT_CAPS);
        assert!(simulate_day(&net, &[], &bad, &sk, &spec, &mut cache, 1).is_err());
    }
}
