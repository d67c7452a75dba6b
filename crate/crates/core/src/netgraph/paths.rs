//! Shortest paths and Yen's k-shortest loop-free paths.
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{LinkId, Network, NodeId, ZoneId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMetric {
    /// Free-flow travel time in minutes.
    Time,
    Distance,
}

impl PathMetric {
    pub fn link_costs(self, net: &Network) -> Vec<f64> {
        net.links
            .iter()
            .map(|l| match self {
                PathMetric::Time => l.free_flow_min,
                PathMetric::Distance => l.length_km,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub links: Vec<LinkId>,
    pub length_km: f64,
    pub signals: u32,
    pub right_turns: u32,
    /// Value of the metric the path was found under.
    pub cost: f64,
}

impl Path {
    pub fn from_links(net: &Network, links: Vec<LinkId>, cost: f64) -> Path {
        let length_km = links.iter().map(|&l| net.links[l].length_km).sum();
        let signals = links.iter().filter(|&&l| net.links[l].signalized_end).count() as u32;
        let right_turns = links
            .windows(2)
            .filter(|w| is_right_turn(net, w[0], w[1]))
            .count() as u32;
        Path {
            links,
            length_km,
            signals,
            right_turns,
            cost,
        }
    }

    pub fn nodes(&self, net: &Network) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.links.len() + 1);
        if let Some(&first) = self.links.first() {
            out.push(net.links[first].from);
        }
        out.extend(self.links.iter().map(|&l| net.links[l].to));
        out
    }
}

fn heading(net: &Network, l: LinkId) -> (f64, f64) {
    let link = &net.links[l];
    let (a, b) = (&net.nodes[link.from], &net.nodes[link.to]);
    (b.x_km - a.x_km, b.y_km - a.y_km)
}

fn is_right_turn(net: &Network, a: LinkId, b: LinkId) -> bool {
    let (ax, ay) = heading(net, a);
    let (bx, by) = heading(net, b);
    // Clockwise turn in a y-up frame.
    ax * by - ay * bx < -1e-9
}

#[derive(Clone, Copy, PartialEq)]
struct Item {
    cost: f64,
    node: NodeId,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One-to-all shortest path tree.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub root: NodeId,
    pub cost: Vec<f64>,
    pub pred: Vec<Option<LinkId>>,
    /// Nodes in settle order; predecessors always come first.
    pub order: Vec<NodeId>,
}

impl ShortestPathTree {
    pub fn links_to(&self, net: &Network, target: NodeId) -> Option<Vec<LinkId>> {
        if !self.cost[target].is_finite() {
            return None;
        }
        let mut links = Vec::new();
        let mut n = target;
        while let Some(l) = self.pred[n] {
            links.push(l);
            n = net.links[l].from;
        }
        links.reverse();
        Some(links)
    }
}

pub fn shortest_path_tree(net: &Network, costs: &[f64], root: NodeId) -> ShortestPathTree {
    let n = net.nodes.len();
    let mut cost = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    cost[root] = 0.0;
    heap.push(Item { cost: 0.0, node: root });
    while let Some(Item { cost: c, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        order.push(node);
        for &l in net.out_links(node) {
            let to = net.links[l].to;
            let nc = c + costs[l];
            if nc < cost[to] {
                cost[to] = nc;
                pred[to] = Some(l);
                heap.push(Item { cost: nc, node: to });
            }
        }
    }
    ShortestPathTree {
        root,
        cost,
        pred,
        order,
    }
}

fn restricted_dijkstra(
    net: &Network,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
    banned_links: &[bool],
    banned_nodes: &[bool],
) -> Option<(f64, Vec<LinkId>)> {
    let n = net.nodes.len();
    let mut cost = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<LinkId>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    cost[src] = 0.0;
    heap.push(Item { cost: 0.0, node: src });
    while let Some(Item { cost: c, node }) = heap.pop() {
        if c > cost[node] {
            continue;
        }
        if node == dst {
            break;
        }
        for &l in net.out_links(node) {
            let to = net.links[l].to;
            if banned_links[l] || banned_nodes[to] {
                continue;
            }
            let nc = c + costs[l];
            if nc < cost[to] {
                cost[to] = nc;
                pred[to] = Some(l);
                heap.push(Item { cost: nc, node: to });
            }
        }
    }
    if !cost[dst].is_finite() {
        return None;
    }
    let mut links = Vec::new();
    let mut v = dst;
    while v != src {
        let l = pred[v]?;
        links.push(l);
        v = net.links[l].from;
    }
    links.reverse();
    Some((cost[dst], links))
}

fn path_cost(costs: &[f64], links: &[LinkId]) -> f64 {
    links.iter().map(|&l| costs[l]).sum()
}

fn cmp_candidate(a: &(f64, Vec<LinkId>), b: &(f64, Vec<LinkId>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Up to `k` loop-free paths between two zone centroids in ascending
/// metric order; equal-cost paths are ordered by their link-id sequence.
pub fn k_shortest_paths(net: &Network, origin: ZoneId, dest: ZoneId, k: usize, metric: PathMetric) -> Result<Vec<Path>> {
    k_shortest_paths_with(net, origin, dest, k, &metric.link_costs(net))
}

/// As [`k_shortest_paths`] with explicit nonnegative link costs.
pub fn k_shortest_paths_with(net: &Network, origin: ZoneId, dest: ZoneId, k: usize, costs: &[f64]) -> Result<Vec<Path>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if origin == dest {
        return Err(Error::invalid("origin and destination zones must differ"));
    }
    if origin >= net.n_zones() || dest >= net.n_zones() {
        return Err(Error::invalid("zone id out of range"));
    }
    let (src, dst) = (net.zones[origin].centroid, net.zones[dest].centroid);
    let n_links = net.links.len();
    let n_nodes = net.nodes.len();
    let first = restricted_dijkstra(net, costs, src, dst, &vec![false; n_links], &vec![false; n_nodes])
        .ok_or_else(|| Error::invalid(format!("zone {dest} unreachable from zone {origin}")))?;
    let mut accepted: Vec<(f64, Vec<LinkId>)> = vec![first];
    let mut candidates: Vec<(f64, Vec<LinkId>)> = Vec::new();
    let mut banned_links = vec![false; n_links];
    let mut banned_nodes = vec![false; n_nodes];
    while accepted.len() < k {
        let prev = accepted.last().unwrap().1.clone();
        let mut prev_nodes = vec![src];
        prev_nodes.extend(prev.iter().map(|&l| net.links[l].to));
        for i in 0..prev.len() {
            let spur = prev_nodes[i];
            let root = &prev[..i];
            let mut touched_links = Vec::new();
            for (_, p) in &accepted {
                if p.len() > i && p[..i] == *root {
                    banned_links[p[i]] = true;
                    touched_links.push(p[i]);
                }
            }
            for &node in &prev_nodes[..i] {
                banned_nodes[node] = true;
            }
            // The spur search must not step back onto the root.
            if let Some((_, spur_links)) = restricted_dijkstra(net, costs, spur, dst, &banned_links, &banned_nodes) {
                let mut full = root.to_vec();
                full.extend(spur_links);
                let c = path_cost(costs, &full);
                if !accepted.iter().any(|(_, p)| *p == full) && !candidates.iter().any(|(_, p)| *p == full) {
                    candidates.push((c, full));
                }
            }
            for l in touched_links {
                banned_links[l] = false;
            }
            for &node in &prev_nodes[..i] {
                banned_nodes[node] = false;
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = (0..candidates.len())
            .min_by(|&a, &b| cmp_candidate(&candidates[a], &candidates[b]))
            .unwrap();
        accepted.push(candidates.swap_remove(best));
    }
    accepted.sort_by(cmp_candidate);
    Ok(accepted
        .into_iter()
        .map(|(c, links)| Path::from_links(net, links, c))
        .collect())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::netgraph::{build_network, AreaSpec, GridSpec, LinkSpec, Node, RoadClass};

    fn grid(n: usize) -> Network {
        build_network(&GridSpec {
            cols: n,
            rows: n,
            toll_area: AreaSpec::Zones(vec![0]),
            arterial_every: 0,
            ..GridSpec::default()
        })
        .unwrap()
    }

    /// Every simple path between two nodes with its cost.
    fn all_simple_paths(net: &Network, costs: &[f64], src: NodeId, dst: NodeId) -> Vec<(f64, Vec<LinkId>)> {
        fn dfs(
            net: &Network,
            costs: &[f64],
            at: NodeId,
            dst: NodeId,
            seen: &mut Vec<bool>,
            links: &mut Vec<LinkId>,
            out: &mut Vec<(f64, Vec<LinkId>)>,
        ) {
            if at == dst {
                out.push((links.iter().map(|&l| costs[l]).sum(), links.clone()));
                return;
            }
            for &l in net.out_links(at) {
                let to = net.links[l].to;
                if !seen[to] {
                    seen[to] = true;
                    links.push(l);
                    dfs(net, costs, to, dst, seen, links, out);
                    links.pop();
                    seen[to] = false;
                }
            }
        }
        let mut seen = vec![false; net.nodes.len()];
        seen[src] = true;
        let mut out = Vec::new();
        dfs(net, costs, src, dst, &mut seen, &mut Vec::new(), &mut out);
        out.sort_by(cmp_candidate);
        out
    }

    #[test]
    fn single_link_network() {
        let nodes = (0..2)
            .map(|i| Node {
                id: i,
                x_km: i as f64,
                y_km: 0.0,
                zone: i,
            })
            .collect();
        let class = RoadClass {
            capacity_vph: 100.0,
            free_flow_kmh: 30.0,
            jam_density_vpkm: 100.0,
        };
        let spec = LinkSpec {
            from: 0,
            to: 1,
            length_km: 1.0,
            class,
            segments: 1,
            signalized_end: false,
            arterial: false,
        };
        let net = Network::from_parts(nodes, &BTreeSet::from([1]), 1.0, &[spec], 2, 1).unwrap();
        let paths = k_shortest_paths(&net, 0, 1, 1, PathMetric::Time).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].links, vec![0]);
        assert!(k_shortest_paths(&net, 1, 0, 1, PathMetric::Time).is_err());
    }

    #[test]
    fn corner_to_corner_on_3x3_matches_enumeration() {
        let net = grid(3);
        let costs = PathMetric::Time.link_costs(&net);
        let paths = k_shortest_paths(&net, 0, 8, 3, PathMetric::Time).unwrap();
        assert_eq!(paths.len(), 3);
        let oracle = all_simple_paths(&net, &costs, 0, 8);
        for (p, o) in paths.iter().zip(&oracle) {
            assert!((p.cost - o.0).abs() < 1e-9);
        }
        let distinct: BTreeSet<_> = paths.iter().map(|p| p.links.clone()).collect();
        assert_eq!(distinct.len(), 3);
        for p in &paths {
            let nodes = p.nodes(&net);
            let uniq: BTreeSet<_> = nodes.iter().collect();
            assert_eq!(uniq.len(), nodes.len(), "path has a loop");
        }
    }

    #[test]
    fn same_zone_is_rejected() {
        assert!(k_shortest_paths(&grid(3), 4, 4, 1, PathMetric::Time).is_err());
    }

    #[test]
    fn ranks_match_exhaustive_enumeration_up_to_k8() {
        for n in 2..=4 {
            let net = grid(n);
            let costs = PathMetric::Distance.link_costs(&net);
            let last = n * n - 1;
            for (o, d) in [(0, last), (last, 0), (1, n * (n - 1))] {
                let oracle = all_simple_paths(&net, &costs, o, d);
                let paths = k_shortest_paths(&net, o, d, 8, PathMetric::Distance).unwrap();
                assert_eq!(paths.len(), oracle.len().min(8));
                for w in paths.windows(2) {
                    assert!(w[0].cost <= w[1].cost + 1e-12);
                }
                for (p, o) in paths.iter().zip(&oracle) {
                    assert!((p.cost - o.0).abs() < 1e-9, "{n}x{n}: {} vs {}", p.cost, o.0);
                }
            }
        }
    }

    #[test]
    fn path_attributes_add_up() {
        let net = grid(4);
        for p in k_shortest_paths(&net, 0, 15, 4, PathMetric::Time).unwrap() {
            let len: f64 = p.links.iter().map(|&l| net.links[l].length_km).sum();
            assert!((p.length_km - len).abs() < 1e-12);
            for w in p.links.windows(2) {
                assert_eq!(net.links[w[0]].to, net.links[w[1]].from);
            }
        }
    }

    #[test]
    fn right_turn_detection() {
        // East then south is a right turn in a y-up frame.
        let net = grid(2);
        let east = net.links.iter().find(|l| l.from == 2 && l.to == 3).unwrap().id;
        let south = net.links.iter().find(|l| l.from == 3 && l.to == 1).unwrap().id;
        let north = net.links.iter().find(|l| l.from == 1 && l.to == 3).unwrap().id;
        let west = net.links.iter().find(|l| l.from == 3 && l.to == 2).unwrap().id;
        let east_low = net.links.iter().find(|l| l.from == 0 && l.to == 1).unwrap().id;
        assert!(is_right_turn(&net, east, south));
        assert!(!is_right_turn(&net, east_low, north));
        assert!(!is_right_turn(&net, north, west));
    }
}
