//! Charging rules applied as vehicles enter links.
use serde::{Deserialize, Serialize};

use crate::clock::Minutes;
use crate::netgraph::{LinkId, Network};
use crate::pricing::{SchemeKind, TollScheme};
use crate::vehicle::VehicleClass;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TollCause {
    DistanceKm,
    CordonEntry,
    AreaFirstDetection,
}

impl TollCause {
    pub fn name(self) -> &'static str {
        match self {
            TollCause::DistanceKm => "distance_km",
            TollCause::CordonEntry => "cordon_entry",
            TollCause::AreaFirstDetection => "area_first_detection",
        }
    }
}

/// What a vehicle has paid so far today.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VehicleTollState {
    pub charged: f64,
    pub area_charged: bool,
    /// Set when a distance charge was clipped by the daily cap.
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TollCharge {
    pub vehicle: usize,
    pub class: VehicleClass,
    pub time: Minutes,
    pub link: LinkId,
    pub cause: TollCause,
    /// In-area km for distance charges, 0 otherwise.
    pub km: f64,
    pub amount: f64,
}

/// Scheme geometry precomputed for one network.
#[derive(Clone, Debug)]
pub struct SchemeGeometry {
    pub mask: Vec<bool>,
    /// Link ends in the area.
    pub in_area: Vec<bool>,
    /// Link crosses from outside to inside.
    pub entry: Vec<bool>,
}

impl SchemeGeometry {
    pub fn new(net: &Network, mask: Vec<bool>) -> SchemeGeometry {
        let in_area = (0..net.links.len()).map(|l| mask[net.link_zone_to(l)]).collect();
        let entry = (0..net.links.len())
            .map(|l| mask[net.link_zone_to(l)] && !mask[net.link_zone_from(l)])
            .collect();
        SchemeGeometry { mask, in_area, entry }
    }

    pub fn for_scheme(net: &Network, scheme: &TollScheme) -> SchemeGeometry {
        let mask = if scheme.kind == SchemeKind::None {
            net.zones.iter().map(|z| z.in_toll_area).collect()
        } else {
            scheme.area_mask(net.n_zones())
        };
        SchemeGeometry::new(net, mask)
    }
}

/// Charge for a vehicle entering `link` at `t`, updating its state.
pub fn charge_toll(
    scheme: &TollScheme,
    geo: &SchemeGeometry,
    net: &Network,
    link: LinkId,
    class: VehicleClass,
    t: Minutes,
    state: &mut VehicleTollState,
) -> Option<(TollCause, f64)> {
    match scheme.kind {
        SchemeKind::None => None,
        SchemeKind::Distance => {
            if !geo.in_area[link] {
                return None;
            }
            let rate = scheme.rate_at(class, t);
            if rate <= 0.0 {
                return None;
            }
            let room = (scheme.caps[class.index()] - state.charged).max(0.0);
            let raw = rate * net.links[link].length_km;
            let amount = raw.min(room);
            if raw > room {
                state.capped = true;
            }
            if amount <= 0.0 {
                return None;
            }
            state.charged += amount;
            Some((TollCause::DistanceKm, amount))
        }
        SchemeKind::Cordon => {
            if !geo.entry[link] {
                return None;
            }
            let rate = scheme.rate_at(class, t);
            if rate <= 0.0 {
                return None;
            }
            state.charged += rate;
            Some((TollCause::CordonEntry, rate))
        }
        SchemeKind::Area => {
            if state.area_charged || !geo.in_area[link] || !scheme.in_window(t) {
                return None;
            }
            let rate = scheme.flat[class.index()];
            state.area_charged = true;
            if rate <= 0.0 {
                return None;
            }
            state.charged += rate;
            Some((TollCause::AreaFirstDetection, rate))
        }
    }
}
