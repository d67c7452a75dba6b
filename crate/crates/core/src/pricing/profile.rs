//! Step-toll profiles: full rate inside a peak window with two shoulders on
//! each side, class rates as PCU multiples of the car rate.
use serde::{Deserialize, Serialize};

use super::scheme::{round_to_step, RateStep, SchemeKind};
use crate::clock::{format_hhmm, hhmm, Minutes};
use crate::error::{Error, Result};
use crate::vehicle::VehicleClass;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShoulderSpec {
    pub inner_min: f64,
    pub inner_factor: f64,
    pub outer_min: f64,
    pub outer_factor: f64,
}

impl Default for ShoulderSpec {
    fn default() -> Self {
        ShoulderSpec {
            inner_min: 5.0,
            inner_factor: 0.8,
            outer_min: 25.0,
            outer_factor: 0.5,
        }
    }
}

/// Rounding step for a scheme's rates.
pub fn rounding_step(kind: SchemeKind) -> f64 {
    match kind {
        SchemeKind::Distance => 0.01,
        SchemeKind::Cordon | SchemeKind::Area => 0.05,
        SchemeKind::None => 0.0,
    }
}

/// Per-class rates for a car rate scaled by `factor`, rounded to `step`.
pub fn class_rates(car_rate: f64, factor: f64, step: f64) -> [f64; 4] {
    let mut r = [0.0; 4];
    for c in VehicleClass::ALL {
        r[c.index()] = round_to_step(factor * c.pcu() * car_rate, step);
    }
    r
}

pub fn build_step_profile(
    peak_car_rate: f64,
    period: (Minutes, Minutes),
    step: f64,
    shoulders: &ShoulderSpec,
) -> Result<Vec<RateStep>> {
    if !(peak_car_rate >= 0.0) {
        return Err(Error::invalid("peak rate must be nonnegative"));
    }
    let (s, e) = period;
    if e - s < 60.0 {
        return Err(Error::invalid(format!(
            "degenerate toll period {}-{}",
            format_hhmm(s),
            format_hhmm(e)
        )));
    }
    let inner = shoulders.inner_min;
    let outer = inner + shoulders.outer_min;
    let mk = |a: f64, b: f64, f: f64| RateStep {
        start: a,
        end: b,
        rates: class_rates(peak_car_rate, f, step),
    };
    Ok(vec![
        mk(s - outer, s - inner, shoulders.outer_factor),
        mk(s - inner, s, shoulders.inner_factor),
        mk(s, e, 1.0),
        mk(e, e + inner, shoulders.inner_factor),
        mk(e + inner, e + outer, shoulders.outer_factor),
    ])
}

/// One row of the reference design-rate table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub start: Minutes,
    pub end: Minutes,
    pub distance: [f64; 4],
    pub cordon: [f64; 4],
}

const fn row(h0: u32, m0: u32, h1: u32, m1: u32, distance: [f64; 4], cordon: [f64; 4]) -> ReferenceRow {
    ReferenceRow {
        start: (h0 * 60 + m0) as f64,
        end: (h1 * 60 + m1) as f64,
        distance,
        cordon,
    }
}

/// Published design rates for the distance and cordon schemes. The row
/// that follows the PM peak is printed as "19:00-10:05" in the source; it is
/// read as 19:00–19:05.
pub const REFERENCE_RATES: [ReferenceRow; 10] = [
    row(7, 30, 7, 55, [0.16, 0.24, 0.32, 0.4], [1.65, 2.50, 3.25, 4.05]),
    row(7, 55, 8, 0, [0.26, 0.38, 0.51, 0.64], [2.60, 3.90, 5.20, 6.50]),
    row(8, 0, 10, 0, [0.32, 0.48, 0.64, 0.8], [3.25, 4.90, 6.50, 8.10]),
    row(10, 0, 10, 5, [0.26, 0.38, 0.51, 0.64], [2.60, 3.90, 5.20, 6.50]),
    row(10, 5, 10, 30, [0.16, 0.24, 0.32, 0.4], [1.65, 2.50, 3.25, 4.05]),
    row(15, 30, 15, 55, [0.14, 0.2, 0.27, 0.34], [1.50, 2.25, 3.00, 3.25]),
    row(15, 55, 16, 0, [0.22, 0.32, 0.43, 0.54], [2.50, 3.60, 4.80, 6.00]),
    row(16, 0, 19, 0, [0.27, 0.41, 0.54, 0.68], [3.00, 4.50, 6.00, 7.50]),
    row(19, 0, 19, 5, [0.22, 0.32, 0.43, 0.54], [2.50, 3.60, 4.80, 6.00]),
    row(19, 5, 19, 30, [0.14, 0.2, 0.27, 0.34], [1.50, 2.25, 3.00, 3.25]),
];

/// Published flat area-scheme rates by class.
pub const REFERENCE_AREA_RATES: [f64; 4] = [2.65, 4.0, 5.5, 6.6];

#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub kind: SchemeKind,
    pub start: Minutes,
    pub end: Minutes,
    pub class: VehicleClass,
    pub rule: f64,
    pub table: f64,
}

impl std::fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}-{} {}: rule {:.2} vs table {:.2}",
            self.kind.name(),
            format_hhmm(self.start),
            format_hhmm(self.end),
            self.class.name(),
            self.rule,
            self.table
        )
    }
}

/// Rebuilds the reference table from its car peak rates with the shoulder
/// rule and lists every cell where the rule disagrees with the table. Each
/// disagreement is logged; the rule is what the simulator uses.
pub fn audit_reference_rates(shoulders: &ShoulderSpec) -> Vec<Discrepancy> {
    let windows = [(hhmm(8, 0), hhmm(10, 0)), (hhmm(16, 0), hhmm(19, 0))];
    let mut out = Vec::new();
    for kind in [SchemeKind::Distance, SchemeKind::Cordon] {
        for w in windows {
            let peak = REFERENCE_RATES
                .iter()
                .find(|r| r.start == w.0 && r.end == w.1)
                .expect("peak rows present");
            let car = if kind == SchemeKind::Distance { peak.distance[0] } else { peak.cordon[0] };
            let profile = build_step_profile(car, w, rounding_step(kind), shoulders).expect("valid window");
            for step in profile {
                let Some(r) = REFERENCE_RATES.iter().find(|r| r.start == step.start && r.end == step.end) else {
                    continue;
                };
                let table = if kind == SchemeKind::Distance { r.distance } else { r.cordon };
                for c in VehicleClass::ALL {
                    if (step.rates[c.index()] - table[c.index()]).abs() > 1e-9 {
                        let d = Discrepancy {
                            kind,
                            start: step.start,
                            end: step.end,
                            class: c,
                            rule: step.rates[c.index()],
                            table: table[c.index()],
                        };
                        log::warn!("reference rate disagrees with shoulder rule: {d}");
                        out.push(d);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_profile_matches_reference() {
        let p = build_step_profile(0.32, (hhmm(8, 0), hhmm(10, 0)), 0.01, &ShoulderSpec::default()).unwrap();
        assert_eq!(p[2].rates, [0.32, 0.48, 0.64, 0.8]);
        assert_eq!(p[0].rates[0], 0.16);
        assert_eq!(p[1].rates[0], 0.26);
        assert_eq!(p[0].start, hhmm(7, 30));
        assert_eq!(p[4].end, hhmm(10, 30));
    }

    #[test]
    fn cordon_shoulders() {
        let p = build_step_profile(3.25, (hhmm(8, 0), hhmm(10, 0)), 0.05, &ShoulderSpec::default()).unwrap();
        assert_eq!(p[0].rates[0], 1.65);
        assert_eq!(p[1].rates[0], 2.6);
        assert_eq!(p[3].rates[0], 2.6);
    }

    #[test]
    fn zero_and_degenerate() {
        let p = build_step_profile(0.0, (hhmm(8, 0), hhmm(10, 0)), 0.01, &ShoulderSpec::default()).unwrap();
        assert!(p.iter().all(|s| s.rates == [0.0; 4]));
        assert!(build_step_profile(1.0, (hhmm(8, 0), hhmm(8, 30)), 0.01, &ShoulderSpec::default()).is_err());
    }

    #[test]
    fn profile_rises_then_falls() {
        let p = build_step_profile(0.27, (hhmm(16, 0), hhmm(19, 0)), 0.01, &ShoulderSpec::default()).unwrap();
        for c in 0..4 {
            assert!(p[0].rates[c] <= p[1].rates[c] && p[1].rates[c] <= p[2].rates[c]);
            assert!(p[2].rates[c] >= p[3].rates[c] && p[3].rates[c] >= p[4].rates[c]);
            assert_eq!(p[0].rates[c], p[4].rates[c]);
        }
    }

    #[test]
    fn audit_finds_known_disagreements() {
        let d = audit_reference_rates(&ShoulderSpec::default());
        let found: Vec<(f64, VehicleClass, f64, f64)> = d.iter().map(|x| (x.start, x.class, x.rule, x.table)).collect();
        assert!(found.contains(&(hhmm(15, 30), VehicleClass::Vhgv, 3.75, 3.25)));
        assert!(found.contains(&(hhmm(19, 5), VehicleClass::Vhgv, 3.75, 3.25)));
        assert!(d.iter().all(|x| x.kind == SchemeKind::Cordon));
    }
}
