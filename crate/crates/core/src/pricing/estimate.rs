//! Toll a traveller expects to pay for a zone-to-zone trip, from the skim
//! layers of the fastest path.
use crate::clock::{Minutes, Period};
use crate::error::Result;
use crate::mesosim::SkimSet;
use crate::netgraph::ZoneId;
use crate::vehicle::VehicleClass;

use super::scheme::{SchemeKind, TollScheme};

const DAY_MIN: usize = 26 * 60;

#[derive(Clone, Debug)]
pub struct SkimTolls {
    pub kind: SchemeKind,
    pub caps: [f64; 4],
    flat: [f64; 4],
    window: (Minutes, Minutes),
    /// Cumulative per-minute rates, `prefix[class][m]` = sum over `[0, m)`.
    prefix: Vec<Vec<f64>>,
}

impl SkimTolls {
    pub fn new(scheme: &TollScheme) -> SkimTolls {
        let prefix = VehicleClass::ALL
            .iter()
            .map(|&c| {
                let mut p = Vec::with_capacity(DAY_MIN + 1);
                let mut acc = 0.0;
                p.push(0.0);
                for m in 0..DAY_MIN {
                    acc += scheme.rate_at(c, m as f64 + 0.5);
                    p.push(acc);
                }
                p
            })
            .collect();
        SkimTolls {
            kind: scheme.kind,
            caps: scheme.caps,
            flat: scheme.flat,
            window: scheme.window,
            prefix,
        }
    }

    /// Mean rate over departures in `[a, b)`.
    pub fn mean_rate(&self, class: VehicleClass, (a, b): (Minutes, Minutes)) -> f64 {
        let i = (a.max(0.0) as usize).min(DAY_MIN);
        let j = (b.max(0.0) as usize).min(DAY_MIN);
        if j <= i {
            let m = i.min(DAY_MIN - 1);
            return self.prefix[class.index()][m + 1] - self.prefix[class.index()][m];
        }
        let p = &self.prefix[class.index()];
        (p[j] - p[i]) / (j - i) as f64
    }

    fn area_share(&self, (a, b): (Minutes, Minutes)) -> f64 {
        if b <= a {
            return if a >= self.window.0 && a < self.window.1 { 1.0 } else { 0.0 };
        }
        let lo = a.max(self.window.0);
        let hi = b.min(self.window.1);
        ((hi - lo) / (b - a)).clamp(0.0, 1.0)
    }

    /// Expected charge for one trip departing uniformly within `window`
    /// (a point window `(t, t)` is a fixed departure time). Distance
    /// charges are capped per trip; callers cap per tour or day.
    pub fn trip_toll(
        &self,
        skims: &SkimSet,
        class: VehicleClass,
        o: ZoneId,
        d: ZoneId,
        period: Period,
        window: (Minutes, Minutes),
    ) -> Result<f64> {
        Ok(match self.kind {
            SchemeKind::None => 0.0,
            SchemeKind::Distance => {
                let km = skims.area_km(period, o, d)?;
                if km == 0.0 {
                    0.0
                } else {
                    (self.mean_rate(class, window) * km).min(self.caps[class.index()])
                }
            }
            SchemeKind::Cordon => {
                let n = skims.entries(period, o, d)?;
                if n == 0.0 {
                    0.0
                } else {
                    n * self.mean_rate(class, window)
                }
            }
            SchemeKind::Area => {
                if skims.touches(period, o, d)? {
                    self.flat[class.index()] * self.area_share(window)
                } else {
                    0.0
                }
            }
        })
    }

    /// Combines the charges of trips made by one vehicle in one day or tour:
    /// distance charges are capped, an area charge is paid once.
    pub fn combine(&self, class: VehicleClass, trip_tolls: &[f64]) -> f64 {
        match self.kind {
            SchemeKind::None => 0.0,
            SchemeKind::Distance => trip_tolls.iter().sum::<f64>().min(self.caps[class.index()]),
            SchemeKind::Cordon => trip_tolls.iter().sum(),
            SchemeKind::Area => trip_tolls.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn daily_cap(&self, class: VehicleClass) -> f64 {
        if self.kind == SchemeKind::Distance {
            self.caps[class.index()]
        } else {
            f64::INFINITY
        }
    }
}
