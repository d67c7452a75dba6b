use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::Segment;

/// Exponents of the modified Greenshields relation and the speed floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeedModel {
    pub alpha: f64,
    pub beta: f64,
    pub min_speed_kmh: f64,
}

impl Default for SpeedModel {
    fn default() -> Self {
        SpeedModel {
            alpha: 1.0,
            beta: 1.0,
            min_speed_kmh: 5.0,
        }
    }
}

/// `v = v_f (1 - (k/k_jam)^alpha)^beta`, floored.
pub fn segment_speed(density: f64, seg: &Segment, m: &SpeedModel) -> Result<f64> {
    if !(density >= 0.0) || density > seg.jam_density_vpkm * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "density {density} outside [0, {}] on segment {}",
            seg.jam_density_vpkm, seg.id
        )));
    }
    let ratio = (density / seg.jam_density_vpkm).min(1.0);
    let v = seg.free_flow_kmh * (1.0 - ratio.powf(m.alpha)).max(0.0).powf(m.beta);
    Ok(v.max(m.min_speed_kmh.min(seg.free_flow_kmh)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg() -> Segment {
        Segment {
            id: 0,
            link: 0,
            length_km: 1.0,
            capacity_vph: 600.0,
            free_flow_kmh: 40.0,
            jam_density_vpkm: 100.0,
        }
    }

    #[test]
    fn greenshields_points() {
        let m = SpeedModel::default();
        assert_eq!(segment_speed(0.0, &seg(), &m).unwrap(), 40.0);
        assert!((segment_speed(50.0, &seg(), &m).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(segment_speed(100.0, &seg(), &m).unwrap(), 5.0);
        assert!(segment_speed(101.0, &seg(), &m).is_err());
    }
}
