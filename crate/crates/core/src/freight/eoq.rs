//! Shipment size and frequency from economic-order-quantity reasoning.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShipmentSizeParams {
    /// Fixed part of the per-shipment transport cost multiplier.
    pub beta_q0: f64,
    /// Size-proportional part; moves the cost level but not the optimum.
    pub beta_q: f64,
    /// Exponent on annual flow.
    pub beta_flow: f64,
    /// Inventory cost per kg per unit establishment density.
    pub beta_ed: f64,
    pub discount_rate: f64,
}

impl Default for ShipmentSizeParams {
    fn default() -> Self {
        ShipmentSizeParams {
            beta_q0: 1.0,
            beta_q: 0.0005,
            beta_flow: 0.8,
            beta_ed: 0.002,
            discount_rate: 0.0075,
        }
    }
}

/// `q = sqrt(2 beta_q0 Q^beta_flow AOC / (beta_ed ED + d v))`, capped at `Q`.
pub fn optimal_shipment_size(annual_kg: f64, value_per_kg: f64, aoc: f64, ed: f64, p: &ShipmentSizeParams) -> Result<f64> {
    let denom = p.beta_ed * ed + p.discount_rate * value_per_kg;
    if !(denom > 0.0) {
        return Err(Error::invalid("shipment-size denominator must be positive"));
    }
    if !(aoc > 0.0) || !(annual_kg > 0.0) {
        return Err(Error::invalid("shipment size needs positive flow and operating cost"));
    }
    let q = (2.0 * p.beta_q0 * annual_kg.powf(p.beta_flow) * aoc / denom).sqrt();
    Ok(q.min(annual_kg))
}

/// Annual logistics cost terms that depend on shipment size: transport,
/// inventory and capital in transit.
pub fn size_dependent_cost(q: f64, annual_kg: f64, value_per_kg: f64, aoc: f64, ed: f64, p: &ShipmentSizeParams) -> f64 {
    let transport = annual_kg / q * (p.beta_q0 + p.beta_q * q) * aoc;
    let inventory = p.beta_ed * ed * q / 2.0;
    let capital = p.discount_rate * value_per_kg * q / 2.0;
    transport + inventory + capital
}

/// Annual shipments and the realized count for one weekday: the fractional
/// daily rate is rounded up with probability equal to its fraction.
pub fn shipment_frequency(annual_kg: f64, q: f64, weekdays: f64, u: f64) -> Result<(f64, u32)> {
    if !(q > 0.0) || !(weekdays > 0.0) {
        return Err(Error::invalid("shipment size and weekdays must be positive"));
    }
    let annual = annual_kg / q;
    let daily = annual / weekdays;
    let n = daily.floor() + if u < daily.fract() { 1.0 } else { 0.0 };
    Ok((annual, n as u32))
}

/// Increase in home-delivery fees that passes freight tolls on to
/// receivers in the charged area.
pub fn delivery_fee_increment(freight_tolls: f64, deliveries_in_area: usize) -> Result<f64> {
    if deliveries_in_area == 0 {
        return Err(Error::invalid("no deliveries in the toll area"));
    }
    Ok(freight_tolls / deliveries_in_area as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> ShipmentSizeParams {
        ShipmentSizeParams {
            beta_q0: 1.0,
            beta_q: 0.0,
            beta_flow: 1.0,
            beta_ed: 0.0,
            discount_rate: 0.02,
        }
    }

    #[test]
    fn closed_form_example() {
        let q = optimal_shipment_size(1000.0, 1.0, 10.0, 0.0, &unit()).unwrap();
        assert!((q - 1000.0).abs() < 1e-9);
        let mut p = unit();
        p.discount_rate = 0.08;
        let q1 = optimal_shipment_size(1000.0, 1.0, 10.0, 0.0, &p).unwrap();
        let q2 = optimal_shipment_size(1000.0, 1.0, 20.0, 0.0, &p).unwrap();
        assert!((q2 / q1 - 2f64.sqrt()).abs() < 1e-12);
        p.discount_rate = 0.0;
        assert!(optimal_shipment_size(1000.0, 1.0, 10.0, 0.0, &p).is_err());
    }

    #[test]
    fn frequency() {
        assert_eq!(shipment_frequency(1000.0, 1000.0, 260.0, 0.5).unwrap().0, 1.0);
        let (a, _) = shipment_frequency(5200.0, 100.0, 260.0, 0.0).unwrap();
        assert!((a / 260.0 - 0.2).abs() < 1e-12);
        let mean: f64 = (0..10_000)
            .map(|i| shipment_frequency(5200.0, 100.0, 260.0, (i as f64 + 0.5) / 10_000.0).unwrap().1 as f64)
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 0.2).abs() < 1e-3);
    }

    #[test]
    fn fee_increment() {
        assert_eq!(delivery_fee_increment(1000.0, 500).unwrap(), 2.0);
        assert_eq!(delivery_fee_increment(0.0, 10).unwrap(), 0.0);
        assert!(delivery_fee_increment(10.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn size_never_exceeds_flow(qa in 1.0f64..1e6, v in 0.1f64..100.0, aoc in 0.1f64..500.0, ed in 0.0f64..50.0) {
            let q = optimal_shipment_size(qa, v, aoc, ed, &ShipmentSizeParams::default()).unwrap();
            prop_assert!(q > 0.0 && q <= qa);
        }
    }
}
