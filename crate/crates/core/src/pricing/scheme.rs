use serde::{Deserialize, Serialize};

use crate::clock::{format_hhmm, hhmm, Minutes};
use crate::error::{Error, Result};
use crate::netgraph::ZoneId;
use crate::vehicle::VehicleClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    None,
    Distance,
    Cordon,
    Area,
}

impl SchemeKind {
    pub const POLICIES: [SchemeKind; 3] = [SchemeKind::Distance, SchemeKind::Cordon, SchemeKind::Area];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::None => "none",
            SchemeKind::Distance => "distance",
            SchemeKind::Cordon => "cordon",
            SchemeKind::Area => "area",
        }
    }

    pub fn parse(s: &str) -> Result<SchemeKind> {
        match s {
            "none" => Ok(SchemeKind::None),
            "distance" => Ok(SchemeKind::Distance),
            "cordon" => Ok(SchemeKind::Cordon),
            "area" => Ok(SchemeKind::Area),
            _ => Err(Error::invalid(format!("unknown scheme kind `{s}`"))),
        }
    }
}

/// Rates per vehicle class (indexed by [`VehicleClass::index`]) over
/// `[start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStep {
    pub start: Minutes,
    pub end: Minutes,
    pub rates: [f64; 4],
}

/// A charging scheme. Distance rates are $/km, cordon rates $/entry; the
/// area scheme charges `flat` once per vehicle per day for in-area travel
/// inside `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TollScheme {
    pub kind: SchemeKind,
    pub area: Vec<ZoneId>,
    #[serde(default)]
    pub profile: Vec<RateStep>,
    #[serde(default)]
    pub caps: [f64; 4],
    #[serde(default)]
    pub window: (Minutes, Minutes),
    #[serde(default)]
    pub flat: [f64; 4],
}

pub const DEFAULT_CAPS: [f64; 4] = [10.0, 15.0, 20.0, 25.0];

impl TollScheme {
    pub fn none() -> TollScheme {
        TollScheme {
            kind: SchemeKind::None,
            area: Vec::new(),
            profile: Vec::new(),
            caps: [0.0; 4],
            window: (0.0, 0.0),
            flat: [0.0; 4],
        }
    }

    pub fn distance(area: Vec<ZoneId>, profile: Vec<RateStep>, caps: [f64; 4]) -> TollScheme {
        TollScheme {
            kind: SchemeKind::Distance,
            area,
            profile,
            caps,
            ..TollScheme::none()
        }
    }

    pub fn cordon(area: Vec<ZoneId>, profile: Vec<RateStep>) -> TollScheme {
        TollScheme {
            kind: SchemeKind::Cordon,
            area,
            profile,
            ..TollScheme::none()
        }
    }

    pub fn area(area: Vec<ZoneId>, window: (Minutes, Minutes), flat: [f64; 4]) -> TollScheme {
        TollScheme {
            kind: SchemeKind::Area,
            area,
            window,
            flat,
            ..TollScheme::none()
        }
    }

    /// Default area-scheme window, 08:00–19:00.
    pub fn default_area_window() -> (Minutes, Minutes) {
        (hhmm(8, 0), hhmm(19, 0))
    }

    pub fn validate(&self, n_zones: usize) -> Result<()> {
        if self.area.iter().any(|&z| z >= n_zones) {
            return Err(Error::invalid("scheme area references a zone outside the network"));
        }
        if self.kind == SchemeKind::None {
            return Ok(());
        }
        if self.area.is_empty() {
            return Err(Error::invalid("scheme has an empty area"));
        }
        let mut steps: Vec<&RateStep> = self.profile.iter().collect();
        steps.sort_by(|a, b| a.start.total_cmp(&b.start));
        for s in &steps {
            if !(s.end > s.start) || s.rates.iter().any(|r| !(*r >= 0.0)) {
                return Err(Error::invalid(format!("bad rate step starting {}", format_hhmm(s.start))));
            }
        }
        if steps.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(Error::invalid("rate steps overlap"));
        }
        match self.kind {
            SchemeKind::Distance if self.caps.iter().any(|c| !(*c > 0.0)) => {
                Err(Error::invalid("distance caps must be positive"))
            }
            SchemeKind::Area if !(self.window.1 > self.window.0) || self.flat.iter().any(|r| !(*r >= 0.0)) => {
                Err(Error::invalid("bad area window or rates"))
            }
            _ => Ok(()),
        }
    }

    pub fn area_mask(&self, n_zones: usize) -> Vec<bool> {
        let mut m = vec![false; n_zones];
        for &z in &self.area {
            if z < n_zones {
                m[z] = true;
            }
        }
        m
    }

    /// Time-varying rate for distance and cordon schemes; 0 outside the
    /// profile.
    pub fn rate_at(&self, class: VehicleClass, t: Minutes) -> f64 {
        self.profile
            .iter()
            .find(|s| t >= s.start && t < s.end)
            .map_or(0.0, |s| s.rates[class.index()])
    }

    pub fn in_window(&self, t: Minutes) -> bool {
        t >= self.window.0 && t < self.window.1
    }

    /// Human-readable rate table: one row per step, classes as columns.
    pub fn rate_table(&self) -> String {
        let mut out = String::new();
        match self.kind {
            SchemeKind::None => out.push_str("no tolls\n"),
            SchemeKind::Area => {
                out.push_str(&format!(
                    "area {}-{}  car {:.2}  lgv {:.2}  hgv {:.2}  vhgv {:.2}\n",
                    format_hhmm(self.window.0),
                    format_hhmm(self.window.1),
                    self.flat[0],
                    self.flat[1],
                    self.flat[2],
                    self.flat[3]
                ));
            }
            SchemeKind::Distance | SchemeKind::Cordon => {
                let unit = if self.kind == SchemeKind::Distance { "USD/km" } else { "USD/entry" };
                out.push_str(&format!("entrance time  {unit:>10}  car    lgv    hgv    vhgv\n"));
                let mut steps = self.profile.clone();
                steps.sort_by(|a, b| a.start.total_cmp(&b.start));
                for s in steps {
                    out.push_str(&format!(
                        "{}-{}             {:.2}   {:.2}   {:.2}   {:.2}\n",
                        format_hhmm(s.start),
                        format_hhmm(s.end),
                        s.rates[0],
                        s.rates[1],
                        s.rates[2],
                        s.rates[3]
                    ));
                }
            }
        }
        out
    }
}

/// Rounds half-up to a multiple of `step`, trimming binary noise so that
/// e.g. 0.675 at step 0.01 becomes 0.68.
pub fn round_to_step(x: f64, step: f64) -> f64 {
    if step <= 0.0 {
        return x;
    }
    let n = (x / step + 0.5 + 1e-9).floor();
    ((n * step) * 1e9).round() / 1e9
}
