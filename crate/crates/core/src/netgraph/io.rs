use std::path::Path as FsPath;

use serde::Serialize;

use super::Network;
use crate::error::Result;

#[derive(Serialize)]
struct LinkRow {
    id: usize,
    from: usize,
    to: usize,
    length_km: f64,
    free_flow_min: f64,
    segments: usize,
    is_radial_entry: bool,
    signalized_end: bool,
    arterial: bool,
}

/// Writes `zones.csv`, `nodes.csv`, `links.csv` and `segments.csv`.
pub fn write_network_csv(net: &Network, dir: &FsPath) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("zones.csv"))?;
    for z in &net.zones {
        w.serialize(z)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("nodes.csv"))?;
    for n in &net.nodes {
        w.serialize(n)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("links.csv"))?;
    for l in &net.links {
        w.serialize(LinkRow {
            id: l.id,
            from: l.from,
            to: l.to,
            length_km: l.length_km,
            free_flow_min: l.free_flow_min,
            segments: l.segments.len(),
            is_radial_entry: l.is_radial_entry,
            signalized_end: l.signalized_end,
            arterial: l.arterial,
        })?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("segments.csv"))?;
    for s in &net.segments {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
