//! Third-best scheme design from a baseline day: marginal-cost tolls per
//! segment, toll periods, toll area and per-scheme rates.
use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::profile::{build_step_profile, class_rates, rounding_step, ShoulderSpec};
use super::scheme::{round_to_step, SchemeKind, TollScheme};
use crate::clock::{format_hhmm, hhmm, Minutes, PeriodWindows, INTERVAL_MIN};
use crate::error::{Error, Result};
use crate::mesosim::{DayResult, SchemeGeometry, SegmentStates, Trajectory};
use crate::netgraph::{Network, ZoneId};

/// Marginal-cost toll of one segment in one interval, $ per PCU:
/// `gamma * q * dt/dq + gamma * n_q / c`.
pub fn mct_segment(gamma: f64, q: f64, dtdq: f64, n_q: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    gamma * q * dtdq + gamma * n_q / c
}

/// Number of flow bins per segment for the travel-time derivative.
const FLOW_BINS: usize = 10;

/// Piecewise slope of mean moving time (h) against flow (PCU/h) per
/// segment, from the day's interval observations binned by flow. Returns
/// `dtdq[s * n_intervals + i]`, clamped at zero.
pub fn estimate_dtdq(net: &Network, states: &SegmentStates) -> Vec<f64> {
    let ni = states.n_intervals;
    let mut out = vec![0.0; states.n_segments * ni];
    for (s, seg) in net.segments.iter().enumerate() {
        let width = seg.capacity_vph / FLOW_BINS as f64;
        let mut sum_q = [0.0; FLOW_BINS + 1];
        let mut sum_t = [0.0; FLOW_BINS + 1];
        let mut n = [0.0; FLOW_BINS + 1];
        let bin = |q: f64| ((q / width) as usize).min(FLOW_BINS);
        for i in 0..ni {
            let Some(t) = states.mean_time_h(s, i) else { continue };
            let q = states.flow_vph(s, i);
            let b = bin(q);
            sum_q[b] += q;
            sum_t[b] += t;
            n[b] += 1.0;
        }
        let pts: Vec<(usize, f64, f64)> = (0..=FLOW_BINS)
            .filter(|&b| n[b] > 0.0)
            .map(|b| (b, sum_q[b] / n[b], sum_t[b] / n[b]))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        // Slope between each observed bin and its upper neighbour; the top
        // bin reuses the slope from below.
        let mut slope = [0.0; FLOW_BINS + 1];
        for w in pts.windows(2) {
            let (b0, q0, t0) = w[0];
            let (_, q1, t1) = w[1];
            let dq = q1 - q0;
            slope[b0] = if dq > 1e-9 { ((t1 - t0) / dq).max(0.0) } else { 0.0 };
        }
        let last = pts.len() - 1;
        slope[pts[last].0] = slope[pts[last - 1].0];
        for i in 0..ni {
            if states.mean_time_h(s, i).is_some() {
                out[s * ni + i] = slope[bin(states.flow_vph(s, i))];
            }
        }
    }
    out
}

/// MCT ($/PCU) of every link for entry in every interval:
/// `mct[link * n_intervals + interval]`, the sum of its segments' MCTs.
pub fn link_mct(net: &Network, states: &SegmentStates) -> Vec<f64> {
    let ni = states.n_intervals;
    let dtdq = estimate_dtdq(net, states);
    let mut out = vec![0.0; net.links.len() * ni];
    for (l, link) in net.links.iter().enumerate() {
        for i in 0..ni {
            out[l * ni + i] = link
                .segments
                .iter()
                .map(|&s| {
                    let Some(gamma) = states.gamma(s, i) else { return 0.0 };
                    let c = net.segments[s].capacity_vph;
                    mct_segment(gamma, states.flow_vph(s, i), dtdq[s * ni + i], states.queue(s, i), c)
                })
                .sum();
        }
    }
    out
}

/// One tolled trip's contribution to a period's rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrippedMct {
    pub pcu: f64,
    /// MCT per PCU accumulated over the charged links.
    pub mct: f64,
    /// Charged km.
    pub km: f64,
}

/// Car (1 PCU) rate for a period before rounding.
pub fn period_rate(kind: SchemeKind, trips: &[TrippedMct]) -> Result<f64> {
    let mct: f64 = trips.iter().map(|t| t.pcu * t.mct).sum();
    let denom: f64 = match kind {
        SchemeKind::Distance => trips.iter().map(|t| t.pcu * t.km).sum(),
        SchemeKind::Cordon | SchemeKind::Area => trips.iter().map(|t| t.pcu).sum(),
        SchemeKind::None => return Err(Error::invalid("no rates for the null scheme")),
    };
    if denom <= 0.0 {
        return Err(Error::invalid(format!("no tolled {} in the design period", match kind {
            SchemeKind::Distance => "distance",
            _ => "trips",
        })));
    }
    Ok(mct / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRate {
    pub start: Minutes,
    pub end: Minutes,
    pub raw_car_rate: f64,
    pub car_rate: f64,
    pub tolled_trips: usize,
    pub tolled_km: f64,
    pub total_mct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignSpec {
    pub shoulders: ShoulderSpec,
    pub caps: [f64; 4],
    pub area_window: (Minutes, Minutes),
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            shoulders: ShoulderSpec::default(),
            caps: super::DEFAULT_CAPS,
            area_window: TollScheme::default_area_window(),
        }
    }
}

fn collect_period(
    net: &Network,
    geo: &SchemeGeometry,
    trajectories: &[Trajectory],
    mct: &[f64],
    n_intervals: usize,
    kind: SchemeKind,
    window: (Minutes, Minutes),
) -> Vec<TrippedMct> {
    let inside = |t: f64| t >= window.0 && t < window.1;
    let mut out = Vec::new();
    match kind {
        SchemeKind::Distance => {
            for tr in trajectories {
                let mut m = 0.0;
                let mut km = 0.0;
                for x in &tr.links {
                    if geo.in_area[x.link] && inside(x.entry) {
                        let i = ((x.entry / INTERVAL_MIN) as usize).min(n_intervals - 1);
                        m += mct[x.link * n_intervals + i];
                        km += net.links[x.link].length_km;
                    }
                }
                if km > 0.0 {
                    out.push(TrippedMct { pcu: tr.class.pcu(), mct: m, km });
                }
            }
        }
        SchemeKind::Cordon => {
            // Every inbound crossing in the window is one tolled trip carrying
            // the MCT of the in-area links that follow it.
            for tr in trajectories {
                let mut cur: Option<TrippedMct> = None;
                for x in &tr.links {
                    if geo.entry[x.link] {
                        if let Some(c) = cur.take() {
                            out.push(c);
                        }
                        if inside(x.entry) {
                            cur = Some(TrippedMct { pcu: tr.class.pcu(), mct: 0.0, km: 0.0 });
                        }
                    }
                    if let Some(c) = cur.as_mut() {
                        if geo.in_area[x.link] {
                            let i = ((x.entry / INTERVAL_MIN) as usize).min(n_intervals - 1);
                            c.mct += mct[x.link * n_intervals + i];
                            c.km += net.links[x.link].length_km;
                        }
                    }
                }
                if let Some(c) = cur.take() {
                    out.push(c);
                }
            }
        }
        SchemeKind::Area => {
            // One entry per vehicle active in the area in the window.
            let mut per_vehicle: std::collections::BTreeMap<usize, TrippedMct> = Default::default();
            for tr in trajectories {
                for x in &tr.links {
                    if geo.in_area[x.link] && inside(x.entry) {
                        let i = ((x.entry / INTERVAL_MIN) as usize).min(n_intervals - 1);
                        let e = per_vehicle.entry(tr.vehicle).or_insert(TrippedMct {
                            pcu: tr.class.pcu(),
                            mct: 0.0,
                            km: 0.0,
                        });
                        e.mct += mct[x.link * n_intervals + i];
                        e.km += net.links[x.link].length_km;
                    }
                }
            }
            out.extend(per_vehicle.into_values());
        }
        SchemeKind::None => {}
    }
    out
}

/// Derives a scheme of `kind` over `area` from the baseline day. Distance
/// and cordon get one step profile per peak; the area scheme gets one flat
/// rate over its window.
pub fn derive_rates(
    net: &Network,
    baseline: &DayResult,
    kind: SchemeKind,
    area: &[ZoneId],
    peaks: &PeriodWindows,
    spec: &DesignSpec,
) -> Result<(TollScheme, Vec<PeriodRate>)> {
    if kind == SchemeKind::None {
        return Err(Error::invalid("cannot design the null scheme"));
    }
    if area.is_empty() {
        return Err(Error::invalid("empty toll area"));
    }
    let mut mask = vec![false; net.n_zones()];
    for &z in area {
        if z >= mask.len() {
            return Err(Error::invalid("toll area references a zone outside the network"));
        }
        mask[z] = true;
    }
    let geo = SchemeGeometry::new(net, mask);
    let ni = baseline.states.n_intervals;
    let mct = link_mct(net, &baseline.states);
    let step = rounding_step(kind);
    let windows: Vec<(Minutes, Minutes)> = if kind == SchemeKind::Area {
        vec![spec.area_window]
    } else {
        vec![peaks.am, peaks.pm]
    };
    let mut rates = Vec::new();
    for w in windows {
        let trips = collect_period(net, &geo, &baseline.trajectories, &mct, ni, kind, w);
        let raw = period_rate(kind, &trips)?;
        rates.push(PeriodRate {
            start: w.0,
            end: w.1,
            raw_car_rate: raw,
            car_rate: round_to_step(raw, step),
            tolled_trips: trips.len(),
            tolled_km: trips.iter().map(|t| t.km).sum(),
            total_mct: trips.iter().map(|t| t.pcu * t.mct).sum(),
        });
    }
    if rates.iter().all(|r| r.raw_car_rate == 0.0) {
        log::warn!("baseline shows no congestion externality; emitting a zero-rate {} scheme", kind.name());
    }
    let area = area.to_vec();
    let scheme = match kind {
        SchemeKind::Area => TollScheme::area(area, spec.area_window, class_rates(rates[0].raw_car_rate, 1.0, step)),
        _ => {
            let mut profile = Vec::new();
            for r in &rates {
                profile.extend(build_step_profile(r.car_rate, (r.start, r.end), step, &spec.shoulders)?);
            }
            if kind == SchemeKind::Distance {
                TollScheme::distance(area, profile, spec.caps)
            } else {
                TollScheme::cordon(area, profile)
            }
        }
    };
    scheme.validate(net.n_zones())?;
    Ok((scheme, rates))
}

/// Search range and length bounds for one peak window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub from: Minutes,
    pub to: Minutes,
    pub min_len: Minutes,
    pub max_len: Minutes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodSearch {
    pub am: PeakSearch,
    pub pm: PeakSearch,
    /// Window boundaries are multiples of this many minutes.
    pub align_min: Minutes,
}

impl Default for PeriodSearch {
    fn default() -> Self {
        PeriodSearch {
            am: PeakSearch {
                from: hhmm(5, 0),
                to: hhmm(12, 0),
                min_len: 120.0,
                max_len: 120.0,
            },
            pm: PeakSearch {
                from: hhmm(14, 0),
                to: hhmm(21, 0),
                min_len: 180.0,
                max_len: 180.0,
            },
            align_min: 60.0,
        }
    }
}

fn best_window(hist: &[f64], s: &PeakSearch, align: Minutes) -> Option<(Minutes, Minutes)> {
    let per = |t: f64| (t / INTERVAL_MIN).round() as usize;
    let mut best: Option<(f64, Minutes, Minutes)> = None;
    let mut start = (s.from / align).ceil() * align;
    while start + s.min_len <= s.to + 1e-9 {
        let mut len = (s.min_len / align).ceil() * align;
        while len <= s.max_len + 1e-9 && start + len <= s.to + 1e-9 {
            let (a, b) = (per(start), per(start + len).min(hist.len()));
            if a < b {
                let mean = hist[a..b].iter().sum::<f64>() / (b - a) as f64;
                if best.is_none_or(|(m, _, _)| mean > m + 1e-12) {
                    best = Some((mean, start, start + len));
                }
            }
            len += align;
        }
        start += align;
    }
    best.map(|(_, a, b)| (a, b))
}

/// AM and PM windows with the highest mean departures per 5-minute
/// interval; ties go to the earliest start, then the shortest window.
pub fn select_toll_periods(hist: &[f64], search: &PeriodSearch) -> Result<PeriodWindows> {
    if hist.is_empty() || hist.iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("empty departure histogram"));
    }
    let am = best_window(hist, &search.am, search.align_min).ok_or_else(|| Error::invalid("no feasible AM window"))?;
    let pm = best_window(hist, &search.pm, search.align_min).ok_or_else(|| Error::invalid("no feasible PM window"))?;
    log::info!(
        "toll periods {}-{} and {}-{}",
        format_hhmm(am.0),
        format_hhmm(am.1),
        format_hhmm(pm.0),
        format_hhmm(pm.1)
    );
    Ok(PeriodWindows { am, pm })
}

/// Departures per 5-minute interval.
pub fn departure_histogram(trajectories: &[Trajectory], n_intervals: usize) -> Vec<f64> {
    let mut h = vec![0.0; n_intervals];
    for t in trajectories {
        let i = ((t.depart / INTERVAL_MIN).max(0.0) as usize).min(n_intervals - 1);
        h[i] += 1.0;
    }
    h
}

/// Length-weighted TTI of link traversals ending in each zone, per peak
/// (`[am, pm]`); zones with no peak traffic get 1.
pub fn zone_peak_tti(net: &Network, trajectories: &[Trajectory], peaks: &PeriodWindows) -> Vec<[f64; 2]> {
    let n = net.n_zones();
    let mut num = vec![[0.0; 2]; n];
    let mut den = vec![[0.0; 2]; n];
    for tr in trajectories {
        for x in &tr.links {
            let p = if x.entry >= peaks.am.0 && x.entry < peaks.am.1 {
                0
            } else if x.entry >= peaks.pm.0 && x.entry < peaks.pm.1 {
                1
            } else {
                continue;
            };
            let link = &net.links[x.link];
            let z = net.link_zone_to(x.link);
            num[z][p] += link.length_km * (x.exit - x.entry) / link.free_flow_min;
            den[z][p] += link.length_km;
        }
    }
    (0..n)
        .map(|z| {
            let f = |p: usize| if den[z][p] > 0.0 { num[z][p] / den[z][p] } else { 1.0 };
            [f(0), f(1)]
        })
        .collect()
}

/// Zones whose TTI in either peak reaches `threshold`, joined into one
/// connected set by shortest adjacency bridges.
pub fn select_toll_area(net: &Network, zone_tti: &[[f64; 2]], threshold: f64) -> Result<Vec<ZoneId>> {
    if zone_tti.len() != net.n_zones() {
        return Err(Error::invalid("zone TTI table does not match the network"));
    }
    let hot: Vec<ZoneId> = (0..zone_tti.len())
        .filter(|&z| zone_tti[z][0] >= threshold || zone_tti[z][1] >= threshold)
        .collect();
    if hot.is_empty() {
        return Err(Error::invalid(format!("no zone reaches TTI {threshold}")));
    }
    let mut set: BTreeSet<ZoneId> = BTreeSet::new();
    set.insert(hot[0]);
    let mut pending: BTreeSet<ZoneId> = hot[1..].iter().copied().collect();
    // Grow the set by repeatedly attaching the nearest outstanding hot zone.
    while !pending.is_empty() {
        let n = net.n_zones();
        let mut pred = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut q: VecDeque<ZoneId> = set.iter().copied().collect();
        for &z in &set {
            seen[z] = true;
        }
        let mut found = None;
        while let Some(z) = q.pop_front() {
            if pending.contains(&z) {
                found = Some(z);
                break;
            }
            for nb in net.zone_neighbors(z) {
                if !seen[nb] {
                    seen[nb] = true;
                    pred[nb] = z;
                    q.push_back(nb);
                }
            }
        }
        let Some(mut z) = found else {
            return Err(Error::invalid("hot zones cannot be connected"));
        };
        while !set.contains(&z) {
            set.insert(z);
            pending.remove(&z);
            z = pred[z];
        }
        // Hot zones absorbed along the way are already in the set.
        pending.retain(|z| !set.contains(z));
    }
    Ok(set.into_iter().collect())
}
