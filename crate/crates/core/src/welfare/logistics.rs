//! Daily total logistics cost of a contract and the freight consumer surplus.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TlcParams {
    /// Discount rate per day.
    pub d: f64,
    /// Loss share per day of carrying stock.
    pub j: f64,
    /// Days between order and use of stock.
    pub g: f64,
    /// Safety factor.
    pub z: f64,
    /// Lead time besides transport, days.
    pub other_lt_b2c: f64,
    pub other_lt_b2b: f64,
    pub other_lt_var: f64,
}

impl Default for TlcParams {
    fn default() -> Self {
        TlcParams {
            d: 0.0075 / 365.0,
            j: 0.01,
            g: 26.7,
            z: 1.03,
            other_lt_b2c: 2.0,
            other_lt_b2b: 6.0,
            other_lt_var: 0.5,
        }
    }
}

/// Contract attributes entering the cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlcContract {
    pub value_per_kg: f64,
    /// Demand over the planning period, kg.
    pub demand_kg: f64,
    pub shipment_kg: f64,
    /// Warehousing cost per kg.
    pub warehousing: f64,
    pub demand_var: f64,
    pub other_lt: f64,
    pub period_days: f64,
}

/// A shipment's systematic cost and transport time in days.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShipmentCost {
    pub cost: f64,
    pub time_days: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TlcBreakdown {
    pub transport: f64,
    pub in_transit: f64,
    pub deterioration: f64,
    pub inventory: f64,
    pub capital: f64,
    pub safety_stock: f64,
    pub total: f64,
}

/// `sum(T_s + Y_s) + (D + I + K + Z) / period`, with
/// `Y = d t v Q`, `D = d j g v Q`, `I = w q / 2`, `K = d v q / 2` and
/// `Z = z sqrt(LT var_Q + Q^2 var_LT)`.
pub fn daily_tlc(c: &TlcContract, shipments: &[ShipmentCost], p: &TlcParams) -> Result<TlcBreakdown> {
    if !(c.period_days > 0.0) || c.demand_kg < 0.0 || c.value_per_kg < 0.0 || p.z <= 0.0 {
        return Err(Error::invalid("bad contract for logistics cost"));
    }
    let n = shipments.len() as f64;
    let transport: f64 = shipments.iter().map(|s| s.cost).sum();
    let in_transit: f64 = shipments.iter().map(|s| p.d * s.time_days * c.value_per_kg * c.demand_kg).sum();
    let mean_t = if n > 0.0 { shipments.iter().map(|s| s.time_days).sum::<f64>() / n } else { 0.0 };
    let var_t = if n > 1.0 {
        shipments.iter().map(|s| (s.time_days - mean_t).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let lt = mean_t + c.other_lt;
    let var_lt = var_t + p.other_lt_var;
    let d = p.d * p.j * p.g * c.value_per_kg * c.demand_kg;
    let i = c.warehousing * c.shipment_kg / 2.0;
    let k = p.d * c.value_per_kg * c.shipment_kg / 2.0;
    let z = p.z * (lt * c.demand_var + c.demand_kg.powi(2) * var_lt).sqrt();
    let per = c.period_days;
    Ok(TlcBreakdown {
        transport,
        in_transit,
        deterioration: d / per,
        inventory: i / per,
        capital: k / per,
        safety_stock: z / per,
        total: transport + in_transit + (d + i + k + z) / per,
    })
}

/// Change in freight consumer surplus: minus the change in total daily
/// logistics cost, contract by contract.
pub fn freight_cs(base: &[(usize, f64)], policy: &[(usize, f64)]) -> Result<f64> {
    if base.len() != policy.len() || base.iter().zip(policy).any(|(a, b)| a.0 != b.0) {
        return Err(Error::invalid("contract sets differ between scenarios"));
    }
    Ok(-base.iter().zip(policy).map(|(a, b)| b.1 - a.1).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn contract() -> TlcContract {
        TlcContract {
            value_per_kg: 10.0,
            demand_kg: 100.0,
            shipment_kg: 50.0,
            warehousing: 0.01,
            demand_var: 0.0,
            other_lt: 6.0,
            period_days: 1.0,
        }
    }

    #[test]
    fn hand_evaluated_terms() {
        let p = TlcParams::default();
        let b = daily_tlc(&contract(), &[], &p).unwrap();
        assert!((b.inventory - 0.25).abs() < 1e-12);
        assert!((b.capital - 0.0075 / 365.0 * 10.0 * 50.0 / 2.0).abs() < 1e-15);
        assert!((b.capital - 0.00514).abs() < 1e-5);
        let p0 = TlcParams { other_lt_var: 0.0, ..p };
        assert_eq!(daily_tlc(&contract(), &[], &p0).unwrap().safety_stock, 0.0);
    }

    #[test]
    fn long_period_with_no_shipments_vanishes() {
        let c = TlcContract {
            period_days: 1e15,
            ..contract()
        };
        assert!(daily_tlc(&c, &[], &TlcParams::default()).unwrap().total < 1e-9);
    }

    #[test]
    fn freight_cs_examples() {
        assert_eq!(freight_cs(&[(0, 3.0)], &[(0, 3.0)]).unwrap(), 0.0);
        assert_eq!(freight_cs(&[(0, 3.0)], &[(0, 8.0)]).unwrap(), -5.0);
        assert_eq!(freight_cs(&[(0, 3.0), (1, 3.0)], &[(0, 5.0), (1, 1.0)]).unwrap(), 0.0);
        assert!(freight_cs(&[(0, 3.0)], &[(1, 3.0)]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_shipment_cost(c0 in 0.0..100.0f64, extra in 0.0..50.0f64, t in 0.0..1.0f64) {
            let p = TlcParams::default();
            let a = daily_tlc(&contract(), &[ShipmentCost { cost: c0, time_days: t }], &p).unwrap();
            let b = daily_tlc(&contract(), &[ShipmentCost { cost: c0 + extra, time_days: t }], &p).unwrap();
            prop_assert!(b.total >= a.total);
        }
    }
}
