//! Learned travel times: link times per 5-minute interval and the zone
//! tables derived from them for each skim period.
use serde::{Deserialize, Serialize};

use crate::clock::{hhmm, Period, PeriodWindows, INTERVAL_MIN};
use crate::error::{Error, Result};
use crate::netgraph::{shortest_path_tree, Network, ZoneId};

use super::toll::SchemeGeometry;

/// Link traversal times in minutes, `t[link * n_intervals + interval]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkTimes {
    pub n_links: usize,
    pub n_intervals: usize,
    pub t: Vec<f64>,
}

impl LinkTimes {
    pub fn free_flow(net: &Network, n_intervals: usize) -> LinkTimes {
        let mut t = Vec::with_capacity(net.links.len() * n_intervals);
        for l in &net.links {
            t.extend(std::iter::repeat_n(l.free_flow_min, n_intervals));
        }
        LinkTimes {
            n_links: net.links.len(),
            n_intervals,
            t,
        }
    }

    pub fn interval_of(&self, t: f64) -> usize {
        ((t / INTERVAL_MIN).max(0.0) as usize).min(self.n_intervals - 1)
    }

    pub fn at(&self, link: usize, t: f64) -> f64 {
        self.t[link * self.n_intervals + self.interval_of(t)]
    }

    /// Mean link time over the intervals of a skim period.
    pub fn period_mean(&self, windows: &PeriodWindows, p: Period) -> Vec<f64> {
        let ints = period_intervals(windows, p, self.n_intervals);
        (0..self.n_links)
            .map(|l| {
                let row = &self.t[l * self.n_intervals..(l + 1) * self.n_intervals];
                ints.iter().map(|&i| row[i]).sum::<f64>() / ints.len() as f64
            })
            .collect()
    }
}

/// Intervals averaged into a skim period. Off-peak covers the daytime
/// hours outside both peaks, 06:00–22:00.
pub fn period_intervals(w: &PeriodWindows, p: Period, n_intervals: usize) -> Vec<usize> {
    let to_i = |t: f64| ((t / INTERVAL_MIN) as usize).min(n_intervals);
    let range = |a: f64, b: f64| to_i(a)..to_i(b);
    let v: Vec<usize> = match p {
        Period::Am => range(w.am.0, w.am.1).collect(),
        Period::Pm => range(w.pm.0, w.pm.1).collect(),
        Period::Off => range(hhmm(6, 0), hhmm(22, 0))
            .filter(|&i| w.period_of(i as f64 * INTERVAL_MIN) == Period::Off)
            .collect(),
    };
    if v.is_empty() {
        vec![0]
    } else {
        v
    }
}

/// Zone-to-zone tables for one period along the fastest path:
/// `cell = o * n + d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneSkim {
    pub time_min: Vec<f64>,
    pub dist_km: Vec<f64>,
    /// Km driven on links that end in the charging area.
    pub area_km: Vec<f64>,
    /// Number of inbound area-boundary crossings.
    pub entries: Vec<f64>,
    /// 1 when the path touches the area at all.
    pub touch: Vec<f64>,
}

impl ZoneSkim {
    fn layers(&self) -> [&Vec<f64>; 5] {
        [&self.time_min, &self.dist_km, &self.area_km, &self.entries, &self.touch]
    }

    fn layers_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [
            &mut self.time_min,
            &mut self.dist_km,
            &mut self.area_km,
            &mut self.entries,
            &mut self.touch,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkimSet {
    pub n_zones: usize,
    pub windows: PeriodWindows,
    pub links: LinkTimes,
    pub periods: Vec<ZoneSkim>,
    pub intrazonal_min: f64,
    pub intrazonal_km: f64,
}

impl SkimSet {
    pub fn free_flow(net: &Network, geo: &SchemeGeometry, windows: PeriodWindows, n_intervals: usize) -> SkimSet {
        SkimSet::from_link_times(net, geo, windows, LinkTimes::free_flow(net, n_intervals))
    }

    /// Derives zone tables from link times by one shortest-path tree per
    /// origin and period.
    pub fn from_link_times(net: &Network, geo: &SchemeGeometry, windows: PeriodWindows, links: LinkTimes) -> SkimSet {
        let n = net.n_zones();
        let spacing = net.links.iter().map(|l| l.length_km).fold(f64::INFINITY, f64::min);
        let intrazonal_km = if spacing.is_finite() { spacing / 2.0 } else { 0.5 };
        let intrazonal_min = 3.0;
        let periods = Period::ALL
            .iter()
            .map(|&p| {
                let cost = links.period_mean(&windows, p);
                let mut s = ZoneSkim {
                    time_min: vec![0.0; n * n],
                    dist_km: vec![0.0; n * n],
                    area_km: vec![0.0; n * n],
                    entries: vec![0.0; n * n],
                    touch: vec![0.0; n * n],
                };
                let nn = net.nodes.len();
                let mut dist = vec![0.0; nn];
                let mut akm = vec![0.0; nn];
                let mut ent = vec![0.0; nn];
                let mut touch = vec![0.0; nn];
                for o in 0..n {
                    let root = net.zones[o].centroid;
                    let tree = shortest_path_tree(net, &cost, root);
                    dist[root] = 0.0;
                    akm[root] = 0.0;
                    ent[root] = 0.0;
                    touch[root] = 0.0;
                    for &v in &tree.order {
                        if let Some(l) = tree.pred[v] {
                            let u = net.links[l].from;
                            let len = net.links[l].length_km;
                            dist[v] = dist[u] + len;
                            akm[v] = akm[u] + if geo.in_area[l] { len } else { 0.0 };
                            ent[v] = ent[u] + if geo.entry[l] { 1.0 } else { 0.0 };
                            touch[v] = if touch[u] > 0.0 || geo.in_area[l] { 1.0 } else { 0.0 };
                        }
                    }
                    for d in 0..n {
                        let c = o * n + d;
                        if d == o {
                            s.time_min[c] = intrazonal_min;
                            s.dist_km[c] = intrazonal_km;
                            s.area_km[c] = if geo.mask[o] { intrazonal_km } else { 0.0 };
                            s.touch[c] = if geo.mask[o] { 1.0 } else { 0.0 };
                            continue;
                        }
                        let v = net.zones[d].centroid;
                        s.time_min[c] = tree.cost[v];
                        s.dist_km[c] = dist[v];
                        s.area_km[c] = akm[v];
                        s.entries[c] = ent[v];
                        s.touch[c] = touch[v];
                    }
                }
                s
            })
            .collect();
        SkimSet {
            n_zones: n,
            windows,
            links,
            periods,
            intrazonal_min,
            intrazonal_km,
        }
    }

    fn cell(&self, o: ZoneId, d: ZoneId) -> Result<usize> {
        if o >= self.n_zones || d >= self.n_zones {
            return Err(Error::MissingSkim(format!("{o}->{d}")));
        }
        Ok(o * self.n_zones + d)
    }

    pub fn time(&self, p: Period, o: ZoneId, d: ZoneId) -> Result<f64> {
        let c = self.cell(o, d)?;
        let v = self.periods[p.index()].time_min[c];
        if !v.is_finite() {
            return Err(Error::MissingSkim(format!("{o}->{d} in {}", p.name())));
        }
        Ok(v)
    }

    pub fn dist(&self, p: Period, o: ZoneId, d: ZoneId) -> Result<f64> {
        Ok(self.periods[p.index()].dist_km[self.cell(o, d)?])
    }

    pub fn area_km(&self, p: Period, o: ZoneId, d: ZoneId) -> Result<f64> {
        Ok(self.periods[p.index()].area_km[self.cell(o, d)?])
    }

    pub fn entries(&self, p: Period, o: ZoneId, d: ZoneId) -> Result<f64> {
        Ok(self.periods[p.index()].entries[self.cell(o, d)?])
    }

    pub fn touches(&self, p: Period, o: ZoneId, d: ZoneId) -> Result<bool> {
        Ok(self.periods[p.index()].touch[self.cell(o, d)?] > 0.5)
    }

    /// Relative L1 change of the zone time tables against `prev`.
    pub fn relative_change(&self, prev: &SkimSet) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.periods.iter().zip(&prev.periods) {
            for (x, y) in a.time_min.iter().zip(&b.time_min) {
                if x.is_finite() && y.is_finite() {
                    num += (x - y).abs();
                    den += y.abs();
                }
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    fn same_shape(&self, other: &SkimSet) -> bool {
        self.n_zones == other.n_zones
            && self.links.t.len() == other.links.t.len()
            && self.periods.len() == other.periods.len()
    }
}

/// `new = prev + (realized - prev) / k` on every layer.
pub fn update_skims_msa(prev: &SkimSet, realized: &SkimSet, k: usize) -> Result<SkimSet> {
    if k == 0 {
        return Err(Error::invalid("MSA iteration counter starts at 1"));
    }
    if !prev.same_shape(realized) {
        return Err(Error::invalid("skim shape mismatch"));
    }
    let step = 1.0 / k as f64;
    let avg = |a: &f64, b: &f64| {
        if k == 1 {
            *b
        } else if a.is_finite() && b.is_finite() {
            a + (b - a) * step
        } else {
            *b
        }
    };
    let mut out = prev.clone();
    for (o, (a, b)) in out.links.t.iter_mut().zip(prev.links.t.iter().zip(&realized.links.t)) {
        *o = avg(a, b);
    }
    for (po, (pa, pb)) in out.periods.iter_mut().zip(prev.periods.iter().zip(&realized.periods)) {
        for (lo, (la, lb)) in po.layers_mut().into_iter().zip(pa.layers().into_iter().zip(pb.layers())) {
            for (o, (a, b)) in lo.iter_mut().zip(la.iter().zip(lb.iter())) {
                *o = avg(a, b);
            }
        }
    }
    Ok(out)
}
