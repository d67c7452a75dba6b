//! Road network, zones and path utilities.
//!
//! The network is a synthetic grid city: one zone per grid cell, the zone
//! centroid is the grid node, and every pair of 4-neighbours is joined by a
//! link in each direction. Every `arterial_every`-th row and column is built
//! with the faster, higher-capacity arterial road class.
mod io;
mod paths;
mod tti;

pub use self::io::write_network_csv;
pub use self::paths::{k_shortest_paths, k_shortest_paths_with, shortest_path_tree, Path, PathMetric, ShortestPathTree};
pub use self::tti::{trip_tti, weighted_tti, LinkTraversal};

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ZoneId = usize;
pub type NodeId = usize;
pub type LinkId = usize;
pub type SegmentId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadClass {
    pub capacity_vph: f64,
    pub free_flow_kmh: f64,
    pub jam_density_vpkm: f64,
}

/// Which zones form the designated toll area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaSpec {
    /// Rectangle of grid cells with its lower-left corner at (`col0`, `row0`).
    Rect {
        col0: usize,
        row0: usize,
        cols: usize,
        rows: usize,
    },
    Zones(Vec<ZoneId>),
}

impl AreaSpec {
    /// The centred `size`×`size` block of a `cols`×`rows` grid.
    pub fn centered(cols: usize, rows: usize, size: usize) -> AreaSpec {
        AreaSpec::Rect {
            col0: cols.saturating_sub(size) / 2,
            row0: rows.saturating_sub(size) / 2,
            cols: size.min(cols),
            rows: size.min(rows),
        }
    }

    fn zones(&self, cols: usize, rows: usize) -> Result<BTreeSet<ZoneId>> {
        let set: BTreeSet<ZoneId> = match self {
            AreaSpec::Rect {
                col0,
                row0,
                cols: w,
                rows: h,
            } => {
                if col0 + w > cols || row0 + h > rows {
                    return Err(Error::invalid("toll-area rectangle exceeds the grid"));
                }
                (*row0..row0 + h)
                    .flat_map(|r| (*col0..col0 + w).map(move |c| r * cols + c))
                    .collect()
            }
            AreaSpec::Zones(z) => z.iter().copied().collect(),
        };
        if set.iter().any(|&z| z >= cols * rows) {
            return Err(Error::invalid("toll-area zone id out of range"));
        }
        Ok(set)
    }
}

/// Synthetic grid network description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
    pub spacing_km: f64,
    pub segments_per_link: usize,
    pub street: RoadClass,
    pub arterial: RoadClass,
    /// Every n-th row and column is an arterial; 0 disables arterials.
    pub arterial_every: usize,
    pub toll_area: AreaSpec,
    /// Zone pairs whose connecting links are left out of the network.
    pub closed: Vec<(ZoneId, ZoneId)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            cols: 20,
            rows: 20,
            spacing_km: 1.0,
            segments_per_link: 2,
            street: RoadClass {
                capacity_vph: 500.0,
                free_flow_kmh: 36.0,
                jam_density_vpkm: 120.0,
            },
            arterial: RoadClass {
                capacity_vph: 800.0,
                free_flow_kmh: 54.0,
                jam_density_vpkm: 150.0,
            },
            arterial_every: 5,
            toll_area: AreaSpec::centered(20, 20, 6),
            closed: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub centroid: NodeId,
    pub in_toll_area: bool,
    /// Establishments per km².
    pub establishment_density: f64,
    pub area_km2: f64,
    pub col: usize,
    pub row: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x_km: f64,
    pub y_km: f64,
    pub zone: ZoneId,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub id: SegmentId,
    pub link: LinkId,
    pub length_km: f64,
    pub capacity_vph: f64,
    pub free_flow_kmh: f64,
    pub jam_density_vpkm: f64,
}

impl Segment {
    pub fn free_flow_min(&self) -> f64 {
        self.length_km / self.free_flow_kmh * 60.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub segments: Vec<SegmentId>,
    pub length_km: f64,
    pub free_flow_min: f64,
    /// Crosses the toll-area boundary inbound.
    pub is_radial_entry: bool,
    pub signalized_end: bool,
    pub arterial: bool,
}

/// Plain description of a link used by [`Network::from_parts`].
#[derive(Clone, Debug)]
pub struct LinkSpec {
    pub from: NodeId,
    pub to: NodeId,
    pub length_km: f64,
    pub class: RoadClass,
    pub segments: usize,
    pub signalized_end: bool,
    pub arterial: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Network {
    pub zones: Vec<Zone>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub segments: Vec<Segment>,
    pub cols: usize,
    pub rows: usize,
    out_links: Vec<Vec<LinkId>>,
}

impl Network {
    /// Assembles a network from explicit parts. Zone `z` uses node `z` as
    /// its centroid.
    pub fn from_parts(
        nodes: Vec<Node>,
        toll_zones: &BTreeSet<ZoneId>,
        zone_area_km2: f64,
        link_specs: &[LinkSpec],
        cols: usize,
        rows: usize,
    ) -> Result<Network> {
        if zone_area_km2 <= 0.0 {
            return Err(Error::invalid("zone area must be positive"));
        }
        let n_zones = nodes.iter().map(|n| n.zone + 1).max().unwrap_or(0);
        let zones: Vec<Zone> = (0..n_zones)
            .map(|z| Zone {
                id: z,
                centroid: z,
                in_toll_area: toll_zones.contains(&z),
                establishment_density: 0.0,
                area_km2: zone_area_km2,
                col: if cols > 0 { z % cols } else { 0 },
                row: if cols > 0 { z / cols } else { 0 },
            })
            .collect();
        let mut links = Vec::with_capacity(link_specs.len());
        let mut segments = Vec::new();
        let mut out_links = vec![Vec::new(); nodes.len()];
        for (id, spec) in link_specs.iter().enumerate() {
            if spec.from >= nodes.len() || spec.to >= nodes.len() || spec.from == spec.to {
                return Err(Error::invalid(format!("link {id} has bad endpoints")));
            }
            if spec.class.capacity_vph <= 0.0 || spec.class.free_flow_kmh <= 0.0 || spec.length_km <= 0.0 {
                return Err(Error::invalid(format!("link {id} needs positive capacity, speed and length")));
            }
            let n_seg = spec.segments.max(1);
            let seg_len = spec.length_km / n_seg as f64;
            let seg_ids: Vec<SegmentId> = (0..n_seg)
                .map(|_| {
                    let sid = segments.len();
                    segments.push(Segment {
                        id: sid,
                        link: id,
                        length_km: seg_len,
                        capacity_vph: spec.class.capacity_vph,
                        free_flow_kmh: spec.class.free_flow_kmh,
                        jam_density_vpkm: spec.class.jam_density_vpkm,
                    });
                    sid
                })
                .collect();
            let from_in = zones[nodes[spec.from].zone].in_toll_area;
            let to_in = zones[nodes[spec.to].zone].in_toll_area;
            links.push(Link {
                id,
                from: spec.from,
                to: spec.to,
                segments: seg_ids,
                length_km: spec.length_km,
                free_flow_min: spec.length_km / spec.class.free_flow_kmh * 60.0,
                is_radial_entry: !from_in && to_in,
                signalized_end: spec.signalized_end,
                arterial: spec.arterial,
            });
            out_links[spec.from].push(id);
        }
        Ok(Network {
            zones,
            nodes,
            links,
            segments,
            cols,
            rows,
            out_links,
        })
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    /// Re-designates the toll area, refreshing zone and radial-entry flags.
    pub fn set_toll_area(&mut self, area: &[ZoneId]) -> Result<()> {
        if area.iter().any(|&z| z >= self.zones.len()) {
            return Err(Error::invalid("toll-area zone id out of range"));
        }
        for z in &mut self.zones {
            z.in_toll_area = false;
        }
        for &z in area {
            self.zones[z].in_toll_area = true;
        }
        for l in 0..self.links.len() {
            let from_in = self.zones[self.link_zone_from(l)].in_toll_area;
            let to_in = self.zones[self.link_zone_to(l)].in_toll_area;
            self.links[l].is_radial_entry = !from_in && to_in;
        }
        Ok(())
    }

    pub fn toll_zones(&self) -> BTreeSet<ZoneId> {
        self.zones.iter().filter(|z| z.in_toll_area).map(|z| z.id).collect()
    }

    pub fn link_zone_to(&self, link: LinkId) -> ZoneId {
        self.nodes[self.links[link].to].zone
    }

    pub fn link_zone_from(&self, link: LinkId) -> ZoneId {
        self.nodes[self.links[link].from].zone
    }

    /// Grid 4-neighbours of a zone, in ascending id order.
    pub fn zone_neighbors(&self, z: ZoneId) -> Vec<ZoneId> {
        let (c, r) = (self.zones[z].col, self.zones[z].row);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(z - self.cols);
        }
        if c > 0 {
            out.push(z - 1);
        }
        if c + 1 < self.cols {
            out.push(z + 1);
        }
        if r + 1 < self.rows {
            out.push(z + self.cols);
        }
        out
    }

    /// Straight-line distance between zone centroids.
    pub fn centroid_distance_km(&self, a: ZoneId, b: ZoneId) -> f64 {
        let (na, nb) = (&self.nodes[self.zones[a].centroid], &self.nodes[self.zones[b].centroid]);
        ((na.x_km - nb.x_km).powi(2) + (na.y_km - nb.y_km).powi(2)).sqrt()
    }

    /// Distance of a zone centroid from the grid centre.
    pub fn distance_from_center_km(&self, z: ZoneId) -> f64 {
        let n = &self.nodes[self.zones[z].centroid];
        let cx = self.nodes.iter().map(|n| n.x_km).sum::<f64>() / self.nodes.len() as f64;
        let cy = self.nodes.iter().map(|n| n.y_km).sum::<f64>() / self.nodes.len() as f64;
        ((n.x_km - cx).powi(2) + (n.y_km - cy).powi(2)).sqrt()
    }

    pub fn set_establishment_density(&mut self, per_zone_counts: &[usize]) {
        for (zone, &n) in self.zones.iter_mut().zip(per_zone_counts) {
            zone.establishment_density = n as f64 / zone.area_km2;
        }
    }

    /// Every zone can reach every other zone along directed links.
    pub fn is_strongly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; self.nodes.len()];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            let mut rev: Vec<Vec<NodeId>> = Vec::new();
            if !forward {
                rev = vec![Vec::new(); self.nodes.len()];
                for l in &self.links {
                    rev[l.to].push(l.from);
                }
            }
            while let Some(n) = queue.pop_front() {
                let next: Vec<NodeId> = if forward {
                    self.out_links[n].iter().map(|&l| self.links[l].to).collect()
                } else {
                    rev[n].clone()
                };
                for m in next {
                    if !seen[m] {
                        seen[m] = true;
                        queue.push_back(m);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

fn is_contiguous(zones: &BTreeSet<ZoneId>, cols: usize, rows: usize) -> bool {
    let Some(&start) = zones.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(z) = queue.pop_front() {
        let (c, r) = (z % cols, z / cols);
        let mut nb = Vec::new();
        if r > 0 {
            nb.push(z - cols);
        }
        if c > 0 {
            nb.push(z - 1);
        }
        if c + 1 < cols {
            nb.push(z + 1);
        }
        if r + 1 < rows {
            nb.push(z + cols);
        }
        for n in nb {
            if zones.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == zones.len()
}

/// Builds the synthetic grid city.
pub fn build_network(spec: &GridSpec) -> Result<Network> {
    let (cols, rows) = (spec.cols, spec.rows);
    if cols < 2 || rows < 2 {
        return Err(Error::invalid("grid must be at least 2x2"));
    }
    if spec.spacing_km <= 0.0 {
        return Err(Error::invalid("grid spacing must be positive"));
    }
    let toll = spec.toll_area.zones(cols, rows)?;
    if toll.is_empty() {
        return Err(Error::invalid("empty toll area"));
    }
    if !is_contiguous(&toll, cols, rows) {
        return Err(Error::invalid("toll area is not contiguous"));
    }
    let is_art = |i: usize| spec.arterial_every > 0 && i % spec.arterial_every == spec.arterial_every / 2;
    let nodes: Vec<Node> = (0..rows * cols)
        .map(|z| Node {
            id: z,
            x_km: (z % cols) as f64 * spec.spacing_km,
            y_km: (z / cols) as f64 * spec.spacing_km,
            zone: z,
        })
        .collect();
    let closed: BTreeSet<(ZoneId, ZoneId)> = spec
        .closed
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();
    let mut specs = Vec::new();
    for z in 0..rows * cols {
        let (c, r) = (z % cols, z / cols);
        // Right and up neighbours; each pair yields both directions.
        let mut pairs = Vec::new();
        if c + 1 < cols {
            pairs.push((z + 1, is_art(r)));
        }
        if r + 1 < rows {
            pairs.push((z + cols, is_art(c)));
        }
        for (n, arterial) in pairs {
            if closed.contains(&(z, n)) {
                continue;
            }
            let class = if arterial { spec.arterial } else { spec.street };
            for (a, b) in [(z, n), (n, z)] {
                let (bc, br) = (b % cols, b / cols);
                specs.push(LinkSpec {
                    from: a,
                    to: b,
                    length_km: spec.spacing_km,
                    class,
                    segments: spec.segments_per_link,
                    signalized_end: is_art(bc) || is_art(br),
                    arterial,
                });
            }
        }
    }
    let net = Network::from_parts(nodes, &toll, spec.spacing_km * spec.spacing_km, &specs, cols, rows)?;
    if !net.is_strongly_connected() {
        return Err(Error::invalid("disconnected network"));
    }
    Ok(net)
}
