//! Pre-day activity scheduling: a day-pattern choice over primary and
//! secondary tours, destination choice for discretionary tours, and a
//! nested time-of-day × mode choice for each tour. Lower levels feed the
//! levels above through logsums.
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::choice::{log_sum_exp, sample_index, ChoiceModel, Nest};
use crate::clock::{hhmm, Minutes};
use crate::error::{Error, Result};
use crate::mesosim::SkimSet;
use crate::netgraph::ZoneId;
use crate::pricing::SkimTolls;
use crate::rng::{tags, uniform};
use crate::synthpop::{Individual, Role};
use crate::vehicle::VehicleClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Work,
    Education,
    Shop,
    Other,
}

impl Purpose {
    pub fn name(self) -> &'static str {
        match self {
            Purpose::Work => "work",
            Purpose::Education => "education",
            Purpose::Shop => "shop",
            Purpose::Other => "other",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Car,
    Carpool,
    Transit,
    Walk,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Car, Mode::Carpool, Mode::Transit, Mode::Walk];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Car => "car",
            Mode::Carpool => "carpool",
            Mode::Transit => "transit",
            Mode::Walk => "walk",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Time-of-day alternatives: outbound and return departure windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    AmPm,
    AmOff,
    OffPm,
    OffOff,
    Eve,
    Am,
    Mid,
    Pm,
}

impl Slot {
    pub const PRIMARY: [Slot; 4] = [Slot::AmPm, Slot::AmOff, Slot::OffPm, Slot::OffOff];
    pub const ALONE: [Slot; 3] = [Slot::Am, Slot::Mid, Slot::Pm];

    pub fn windows(self) -> ((Minutes, Minutes), (Minutes, Minutes)) {
        let w = |h0, m0, h1, m1| (hhmm(h0, m0), hhmm(h1, m1));
        match self {
            Slot::AmPm => (w(8, 0, 10, 0), w(16, 0, 19, 0)),
            Slot::AmOff => (w(8, 0, 10, 0), w(19, 0, 21, 0)),
            Slot::OffPm => (w(6, 0, 8, 0), w(16, 0, 19, 0)),
            Slot::OffOff => (w(10, 0, 12, 0), w(13, 0, 16, 0)),
            Slot::Eve => (w(21, 0, 21, 45), w(22, 0, 22, 45)),
            Slot::Am => (w(8, 0, 9, 0), w(9, 15, 10, 0)),
            Slot::Mid => (w(10, 30, 12, 0), w(13, 0, 15, 30)),
            Slot::Pm => (w(16, 0, 17, 0), w(17, 30, 19, 0)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::AmPm => "am_pm",
            Slot::AmOff => "am_off",
            Slot::OffPm => "off_pm",
            Slot::OffOff => "off_off",
            Slot::Eve => "evening",
            Slot::Am => "am",
            Slot::Mid => "midday",
            Slot::Pm => "pm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeConstants {
    pub car: f64,
    pub carpool: f64,
    pub transit: f64,
    pub walk: f64,
}

impl Default for ModeConstants {
    fn default() -> Self {
        ModeConstants {
            car: 0.0,
            carpool: -2.2,
            transit: -0.5,
            walk: -0.4,
        }
    }
}

/// Coefficients of every level. Money enters utilities as
/// `-cost / VOT * |time_per_h|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaxUtilitySpec {
    pub time_per_h: f64,
    pub car_cost_per_km: f64,
    pub carpool_occupancy: f64,
    pub carpool_extra_min: f64,
    pub transit_kmh: f64,
    pub transit_wait_min: f64,
    pub transit_walk_min: f64,
    pub transit_fare: f64,
    pub walk_kmh: f64,
    pub walk_max_km: f64,
    pub modes: ModeConstants,
    /// Nest coefficient of the slot nests at the tour level.
    pub slot_nest: f64,
    pub mandatory_slots: [f64; 4],
    pub discretionary_slots: [f64; 4],
    pub alone_slots: [f64; 3],
    pub evening_slot: f64,
    pub work: f64,
    pub education: f64,
    pub shop: f64,
    pub other: f64,
    pub secondary_shop: f64,
    pub secondary_other: f64,
    pub destination_candidates: usize,
    pub size_coef: f64,
    /// Range of aggregate car-cost elasticities the defaults are tuned to.
    pub elasticity_target: (f64, f64),
}

impl Default for PaxUtilitySpec {
    fn default() -> Self {
        PaxUtilitySpec {
            time_per_h: -4.0,
            car_cost_per_km: 0.20,
            carpool_occupancy: 2.0,
            carpool_extra_min: 5.0,
            transit_kmh: 25.0,
            transit_wait_min: 5.0,
            transit_walk_min: 6.0,
            transit_fare: 2.5,
            walk_kmh: 5.0,
            walk_max_km: 4.0,
            modes: ModeConstants::default(),
            slot_nest: 0.5,
            mandatory_slots: [0.0, -1.2, -1.2, -1.6],
            discretionary_slots: [-1.0, -1.2, -1.2, 0.0],
            alone_slots: [-0.3, 0.3, 0.0],
            evening_slot: 0.0,
            work: 6.0,
            education: 6.0,
            shop: 1.4,
            other: 1.6,
            secondary_shop: 0.2,
            secondary_other: 0.4,
            destination_candidates: 8,
            size_coef: 1.0,
            elasticity_target: (-0.23, -0.08),
        }
    }
}

impl PaxUtilitySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_per_h < 0.0) || !(self.car_cost_per_km >= 0.0) {
            return Err(Error::invalid("time coefficient must be negative and costs nonnegative"));
        }
        if !(self.slot_nest > 0.0 && self.slot_nest <= 1.0) || self.carpool_occupancy < 1.0 {
            return Err(Error::invalid("bad nest coefficient or occupancy"));
        }
        if self.destination_candidates == 0 {
            return Err(Error::invalid("destination choice needs candidates"));
        }
        Ok(())
    }
}

/// Attraction of each zone for shop and other activities with cumulative
/// tables for candidate sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attraction {
    pub shop: Vec<f64>,
    pub other: Vec<f64>,
    shop_cdf: Vec<f64>,
    other_cdf: Vec<f64>,
    means: [f64; 2],
}

fn cdf(w: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) || w.iter().any(|x| *x < 0.0) {
        return Err(Error::invalid("attraction weights must be nonnegative with a positive total"));
    }
    let mut acc = 0.0;
    Ok(w.iter()
        .map(|x| {
            acc += x / total;
            acc
        })
        .collect())
}

impl Attraction {
    pub fn new(shop: Vec<f64>, other: Vec<f64>) -> Result<Attraction> {
        let mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
        Ok(Attraction {
            means: [mean(&shop), mean(&other)],
            shop_cdf: cdf(&shop)?,
            other_cdf: cdf(&other)?,
            shop,
            other,
        })
    }

    fn size(&self, p: Purpose, z: ZoneId) -> f64 {
        if p == Purpose::Shop {
            self.shop[z]
        } else {
            self.other[z]
        }
    }

    /// Size relative to the average zone.
    fn relative_size(&self, p: Purpose, z: ZoneId) -> f64 {
        self.size(p, z) / self.means[usize::from(p != Purpose::Shop)]
    }

    fn sample(&self, p: Purpose, u: f64) -> ZoneId {
        let c = if p == Purpose::Shop { &self.shop_cdf } else { &self.other_cdf };
        c.partition_point(|&x| x <= u).min(c.len() - 1)
    }
}

/// Everything the pre-day model reads.
#[derive(Clone, Copy)]
pub struct PaxContext<'a> {
    pub skims: &'a SkimSet,
    pub tolls: &'a SkimTolls,
    pub spec: &'a PaxUtilitySpec,
    pub attraction: &'a Attraction,
    pub seed: u64,
    /// Added to the cost of every trip (for accessibility scaling).
    pub extra_trip_cost: f64,
    /// Extra car cost per trip on specific zone pairs.
    pub car_surcharge: Option<&'a HashMap<(ZoneId, ZoneId), f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourPlan {
    pub purpose: Purpose,
    pub primary: bool,
    pub dest: ZoneId,
    pub mode: Mode,
    pub slot: Slot,
    pub depart_out: Minutes,
    pub depart_back: Minutes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayPattern {
    pub individual: usize,
    pub tours: Vec<TourPlan>,
    /// Day-pattern logsum.
    pub logsum: f64,
}

/// One trip of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaxTrip {
    pub individual: usize,
    pub purpose: Purpose,
    pub mode: Mode,
    pub origin: ZoneId,
    pub dest: ZoneId,
    pub depart: Minutes,
}

impl DayPattern {
    pub fn trips(&self, home: ZoneId) -> Vec<PaxTrip> {
        let mut out = Vec::with_capacity(self.tours.len() * 2);
        for t in &self.tours {
            out.push(PaxTrip {
                individual: self.individual,
                purpose: t.purpose,
                mode: t.mode,
                origin: home,
                dest: t.dest,
                depart: t.depart_out,
            });
            out.push(PaxTrip {
                individual: self.individual,
                purpose: t.purpose,
                mode: t.mode,
                origin: t.dest,
                dest: home,
                depart: t.depart_back,
            });
        }
        out
    }
}

fn mid(w: (Minutes, Minutes)) -> Minutes {
    (w.0 + w.1) / 2.0
}

/// Utility of each mode for a home-based tour in a slot, `None` when the
/// mode is unavailable.
fn mode_utilities(ind: &Individual, dest: ZoneId, slot: Slot, ctx: &PaxContext) -> Result<[Option<f64>; 4]> {
    let s = ctx.spec;
    let sk = ctx.skims;
    let (wo, wb) = slot.windows();
    let (po, pb) = (sk.windows.period_of(mid(wo)), sk.windows.period_of(mid(wb)));
    let o = ind.home_zone;
    let t_car = (sk.time(po, o, dest)? + sk.time(pb, dest, o)?) / 60.0;
    let d_out = sk.dist(po, o, dest)?;
    let dist = d_out + sk.dist(pb, dest, o)?;
    let money = |cost: f64| -cost / ind.vot * s.time_per_h.abs();
    let extra = 2.0 * ctx.extra_trip_cost;
    let tolls = [
        ctx.tolls.trip_toll(sk, VehicleClass::Car, o, dest, po, wo)?,
        ctx.tolls.trip_toll(sk, VehicleClass::Car, dest, o, pb, wb)?,
    ];
    let toll = ctx.tolls.combine(VehicleClass::Car, &tolls);
    let surcharge = ctx.car_surcharge.map_or(0.0, |m| {
        m.get(&(o, dest)).copied().unwrap_or(0.0) + m.get(&(dest, o)).copied().unwrap_or(0.0)
    });
    let car_cost = s.car_cost_per_km * dist + toll + surcharge;
    let car = ind
        .has_car
        .then(|| s.modes.car + s.time_per_h * t_car + money(car_cost + extra));
    let pool_t = t_car + 2.0 * s.carpool_extra_min / 60.0;
    let carpool = Some(s.modes.carpool + s.time_per_h * pool_t + money(car_cost / s.carpool_occupancy + extra));
    let tr_t = dist / s.transit_kmh + 2.0 * (s.transit_wait_min + s.transit_walk_min) / 60.0;
    let transit = Some(s.modes.transit + s.time_per_h * tr_t + money(2.0 * s.transit_fare + extra));
    let walk = (d_out <= s.walk_max_km).then(|| s.modes.walk + s.time_per_h * dist / s.walk_kmh + money(extra));
    Ok([car, carpool, transit, walk])
}

/// Time-of-day × mode alternatives of one tour, nested by slot.
struct TourModel {
    alts: Vec<(Slot, Mode)>,
    model: ChoiceModel,
    logsum: f64,
}

fn tour_model(ind: &Individual, dest: ZoneId, slots: &[(Slot, f64)], ctx: &PaxContext) -> Result<TourModel> {
    let mut alts = Vec::new();
    let mut utils = Vec::new();
    let mut nests = Vec::new();
    for &(slot, asc) in slots {
        let mu = mode_utilities(ind, dest, slot, ctx)?;
        let mut members = Vec::new();
        for m in Mode::ALL {
            if let Some(v) = mu[m.index()] {
                members.push(alts.len());
                alts.push((slot, m));
                utils.push(asc + v);
            }
        }
        nests.push(Nest {
            members,
            coef: ctx.spec.slot_nest,
        });
    }
    let model = ChoiceModel::nested(utils, 1.0, nests);
    let logsum = model.logsum()?;
    Ok(TourModel { alts, model, logsum })
}

/// Destination alternatives of one tour type with their tour models.
struct TourType {
    purpose: Purpose,
    dests: Vec<ZoneId>,
    dest_utils: Vec<f64>,
    tours: Vec<TourModel>,
    logsum: f64,
}

fn slot_set(purpose: Purpose, primary: bool, with_primary: bool, s: &PaxUtilitySpec) -> Vec<(Slot, f64)> {
    if primary {
        let asc = match purpose {
            Purpose::Work | Purpose::Education => s.mandatory_slots,
            _ => s.discretionary_slots,
        };
        Slot::PRIMARY.iter().copied().zip(asc).collect()
    } else if with_primary {
        vec![(Slot::Eve, s.evening_slot)]
    } else {
        Slot::ALONE.iter().copied().zip(s.alone_slots).collect()
    }
}

fn tour_type(
    ind: &Individual,
    purpose: Purpose,
    primary: bool,
    with_primary: bool,
    ctx: &PaxContext,
) -> Result<TourType> {
    let slots = slot_set(purpose, primary, with_primary, ctx.spec);
    let (dests, dest_utils): (Vec<ZoneId>, Vec<f64>) = match purpose {
        Purpose::Work | Purpose::Education => {
            let z = ind
                .fixed_zone
                .ok_or_else(|| Error::invalid("mandatory tour without a fixed zone"))?;
            (vec![z], vec![0.0])
        }
        _ => {
            let key = if primary { 1 } else { 2 } + 10 * purpose as u64;
            let r = ctx.spec.destination_candidates;
            let mut d: Vec<ZoneId> = (0..r as u64)
                .map(|k| {
                    ctx.attraction
                        .sample(purpose, uniform(&[ctx.seed, tags::DESTINATIONS, ind.id as u64, key, k]))
                })
                .collect();
            d.sort_unstable();
            // Candidates are drawn in proportion to size, so the sampling
            // correction leaves ln(draw share) plus any size effect beyond
            // unit elasticity, measured against the average zone.
            let mut counts: Vec<(ZoneId, usize)> = Vec::new();
            for z in d {
                match counts.last_mut() {
                    Some((last, n)) if *last == z => *n += 1,
                    _ => counts.push((z, 1)),
                }
            }
            let extra = ctx.spec.size_coef - 1.0;
            counts
                .iter()
                .map(|&(z, n)| {
                    let rel = ctx.attraction.relative_size(purpose, z).max(1e-12);
                    (z, (n as f64 / r as f64).ln() + extra * rel.ln())
                })
                .unzip()
        }
    };
    let tours = dests
        .iter()
        .map(|&z| tour_model(ind, z, &slots, ctx))
        .collect::<Result<Vec<_>>>()?;
    let total: Vec<f64> = dest_utils.iter().zip(&tours).map(|(a, t)| a + t.logsum).collect();
    Ok(TourType {
        purpose,
        logsum: log_sum_exp(&total),
        dests,
        dest_utils,
        tours,
    })
}

/// Evaluated day-pattern model for one individual.
struct PatternModel {
    /// `(primary, secondary)` per alternative.
    patterns: Vec<(Option<usize>, Option<usize>)>,
    utils: Vec<f64>,
    primaries: Vec<TourType>,
    /// Secondary tour types following a primary tour, then alone.
    secondaries_eve: Vec<TourType>,
    secondaries_alone: Vec<TourType>,
    logsum: f64,
}

fn pattern_model(ind: &Individual, ctx: &PaxContext) -> Result<PatternModel> {
    let s = ctx.spec;
    let mut primary_purposes = Vec::new();
    match (ind.role, ind.fixed_zone) {
        (Role::Worker, Some(_)) => primary_purposes.push((Purpose::Work, s.work)),
        (Role::Student, Some(_)) => primary_purposes.push((Purpose::Education, s.education)),
        _ => {}
    }
    primary_purposes.push((Purpose::Shop, s.shop));
    primary_purposes.push((Purpose::Other, s.other));
    let secondary_purposes = [(Purpose::Shop, s.secondary_shop), (Purpose::Other, s.secondary_other)];
    let primaries = primary_purposes
        .iter()
        .map(|&(p, _)| tour_type(ind, p, true, false, ctx))
        .collect::<Result<Vec<_>>>()?;
    let secondaries_eve = secondary_purposes
        .iter()
        .map(|&(p, _)| tour_type(ind, p, false, true, ctx))
        .collect::<Result<Vec<_>>>()?;
    let secondaries_alone = secondary_purposes
        .iter()
        .map(|&(p, _)| tour_type(ind, p, false, false, ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut patterns = vec![(None, None)];
    let mut utils = vec![0.0];
    for (j, &(_, asc)) in secondary_purposes.iter().enumerate() {
        patterns.push((None, Some(j)));
        utils.push(asc + secondaries_alone[j].logsum);
    }
    for (i, &(_, pasc)) in primary_purposes.iter().enumerate() {
        patterns.push((Some(i), None));
        utils.push(pasc + primaries[i].logsum);
        for (j, &(_, sasc)) in secondary_purposes.iter().enumerate() {
            patterns.push((Some(i), Some(j)));
            utils.push(pasc + primaries[i].logsum + sasc + secondaries_eve[j].logsum);
        }
    }
    let logsum = log_sum_exp(&utils);
    Ok(PatternModel {
        patterns,
        utils,
        primaries,
        secondaries_eve,
        secondaries_alone,
        logsum,
    })
}

/// Expected maximum utility of the individual's day.
pub fn accessibility(ind: &Individual, ctx: &PaxContext) -> Result<f64> {
    Ok(pattern_model(ind, ctx)?.logsum)
}

fn draw(ctx: &PaxContext, ind: &Individual, key: u64) -> f64 {
    uniform(&[ctx.seed, tags::PREDAY, ind.id as u64, key])
}

fn realize(tt: &TourType, primary: bool, slot_key: u64, ind: &Individual, ctx: &PaxContext) -> Result<TourPlan> {
    let total: Vec<f64> = tt.dest_utils.iter().zip(&tt.tours).map(|(a, t)| a + t.logsum).collect();
    let pd = crate::choice::mnl_probabilities(&total, 1.0)?;
    let di = sample_index(&pd, draw(ctx, ind, slot_key));
    let tm = &tt.tours[di];
    let p = tm.model.probabilities()?;
    let (slot, mode) = tm.alts[sample_index(&p, draw(ctx, ind, slot_key + 1))];
    let (wo, wb) = slot.windows();
    let at = |w: (Minutes, Minutes), k: u64| w.0 + (w.1 - w.0) * draw(ctx, ind, slot_key + k);
    Ok(TourPlan {
        purpose: tt.purpose,
        primary,
        dest: tt.dests[di],
        mode,
        slot,
        depart_out: at(wo, 2),
        depart_back: at(wb, 3),
    })
}

/// Simulates one individual's day; draws are fixed per individual so the
/// same seed reproduces the same choices under the same costs.
pub fn simulate_pre_day(ind: &Individual, ctx: &PaxContext) -> Result<DayPattern> {
    let m = pattern_model(ind, ctx)?;
    let probs = crate::choice::mnl_probabilities(&m.utils, 1.0)?;
    let (pi, si) = m.patterns[sample_index(&probs, draw(ctx, ind, 100))];
    let mut tours = Vec::new();
    if let Some(i) = pi {
        tours.push(realize(&m.primaries[i], true, 200, ind, ctx)?);
    }
    if let Some(j) = si {
        let tt = if pi.is_some() { &m.secondaries_eve[j] } else { &m.secondaries_alone[j] };
        tours.push(realize(tt, false, 300, ind, ctx)?);
    }
    Ok(DayPattern {
        individual: ind.id,
        tours,
        logsum: m.logsum,
    })
}

/// Probability of each mode summed over all levels, for diagnostics and
/// elasticity checks.
pub fn expected_mode_trips(ind: &Individual, ctx: &PaxContext) -> Result<[f64; 4]> {
    let m = pattern_model(ind, ctx)?;
    let probs = crate::choice::mnl_probabilities(&m.utils, 1.0)?;
    let mut out = [0.0; 4];
    let mut add = |tt: &TourType, w: f64| -> Result<()> {
        let total: Vec<f64> = tt.dest_utils.iter().zip(&tt.tours).map(|(a, t)| a + t.logsum).collect();
        let pd = crate::choice::mnl_probabilities(&total, 1.0)?;
        for (tm, pdz) in tt.tours.iter().zip(pd) {
            for ((_, mode), pa) in tm.alts.iter().zip(tm.model.probabilities()?) {
                out[mode.index()] += 2.0 * w * pdz * pa;
            }
        }
        Ok(())
    };
    for (&(pi, si), &p) in m.patterns.iter().zip(&probs) {
        if let Some(i) = pi {
            add(&m.primaries[i], p)?;
        }
        if let Some(j) = si {
            add(if pi.is_some() { &m.secondaries_eve[j] } else { &m.secondaries_alone[j] }, p)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::PeriodWindows;
    use crate::mesosim::SchemeGeometry;
    use crate::netgraph::{build_network, AreaSpec, GridSpec, Network};
    use crate::pricing::TollScheme;

    pub(crate) fn setup() -> (Network, SkimSet, Attraction) {
        let net = build_network(&GridSpec {
            cols: 6,
            rows: 6,
            toll_area: AreaSpec::centered(6, 6, 2),
            ..Default::default()
        })
        .unwrap();
        let geo = SchemeGeometry::new(&net, net.zones.iter().map(|z| z.in_toll_area).collect());
        let sk = SkimSet::free_flow(&net, &geo, PeriodWindows::default(), 312);
        let n = net.n_zones();
        let att = Attraction::new(
            (0..n).map(|z| 1.0 + (z % 5) as f64).collect(),
            (0..n).map(|z| 1.0 + (z % 3) as f64).collect(),
        )
        .unwrap();
        (net, sk, att)
    }

    fn person(id: usize, role: Role, fixed: Option<ZoneId>) -> Individual {
        Individual {
            id,
            household: id,
            home_zone: id % 36,
            role,
            fixed_zone: fixed,
            income: 60_000.0,
            income_group: 1,
            vot: 18.0,
            has_car: true,
        }
    }

    fn ctx<'a>(sk: &'a SkimSet, t: &'a SkimTolls, s: &'a PaxUtilitySpec, a: &'a Attraction) -> PaxContext<'a> {
        PaxContext {
            skims: sk,
            tolls: t,
            spec: s,
            attraction: a,
            seed: 11,
            extra_trip_cost: 0.0,
            car_surcharge: None,
        }
    }

    #[test]
    fn deterministic_and_null_policy() {
        let (_, sk, att) = setup();
        let spec = PaxUtilitySpec::default();
        let t = SkimTolls::new(&TollScheme::none());
        let c = ctx(&sk, &t, &spec, &att);
        for i in 0..50 {
            let p = person(i, Role::Worker, Some((i * 7) % 36));
            let a = simulate_pre_day(&p, &c).unwrap();
            assert_eq!(a, simulate_pre_day(&p, &c).unwrap());
            assert_eq!(accessibility(&p, &c).unwrap().to_bits(), a.logsum.to_bits());
            for tour in &a.tours {
                assert!(tour.depart_out < tour.depart_back);
            }
            if a.tours.len() == 2 {
                assert!(a.tours[0].depart_back < a.tours[1].depart_out);
            }
        }
    }

    #[test]
    fn no_fixed_zone_means_no_work_tour() {
        let (_, sk, att) = setup();
        let spec = PaxUtilitySpec::default();
        let t = SkimTolls::new(&TollScheme::none());
        let c = ctx(&sk, &t, &spec, &att);
        for i in 0..100 {
            let d = simulate_pre_day(&person(i, Role::Worker, None), &c).unwrap();
            assert!(d.tours.iter().all(|t| t.purpose != Purpose::Work));
        }
    }

    #[test]
    fn extra_cost_lowers_accessibility() {
        let (_, sk, att) = setup();
        let spec = PaxUtilitySpec::default();
        let t = SkimTolls::new(&TollScheme::none());
        let c = ctx(&sk, &t, &spec, &att);
        let p = person(3, Role::Worker, Some(20));
        let a = accessibility(&p, &c).unwrap();
        let c1 = PaxContext { extra_trip_cost: 1.0, ..c };
        assert!(accessibility(&p, &c1).unwrap() < a);
    }

    #[test]
    fn car_surcharge_reduces_car_share_on_od() {
        let (_, sk, att) = setup();
        let spec = PaxUtilitySpec::default();
        let t = SkimTolls::new(&TollScheme::none());
        let c = ctx(&sk, &t, &spec, &att);
        let mut sur = HashMap::new();
        sur.insert((0, 20), 100.0);
        let c1 = PaxContext { car_surcharge: Some(&sur), ..c };
        let (mut base, mut pol) = (0, 0);
        for i in 0..1000 {
            let mut p = person(i, Role::Worker, Some(20));
            p.home_zone = 0;
            let count = |d: DayPattern| d.tours.iter().filter(|t| t.dest == 20 && t.mode == Mode::Car).count();
            base += count(simulate_pre_day(&p, &c).unwrap());
            pol += count(simulate_pre_day(&p, &c1).unwrap());
            let m0 = expected_mode_trips(&p, &c).unwrap();
            let m1 = expected_mode_trips(&p, &c1).unwrap();
            assert!(m1[0] <= m0[0] + 1e-12);
        }
        assert!(pol < base, "{pol} vs {base}");
    }
}
