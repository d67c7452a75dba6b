//! Producer surplus, accessibility-based passenger surplus and the social
//! welfare ledger.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesosim::TollLedger;

/// Share of toll revenue left after operating the scheme.
pub const TOLL_EARNING_SHARE: f64 = 0.73;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurplusParams {
    pub earning_share: f64,
    pub transit_fare: f64,
    /// Fuel tax, $ per litre.
    pub fuel_tax: f64,
    /// Cost increase per trip used to scale accessibility into dollars.
    pub delta_x: f64,
}

impl Default for SurplusParams {
    fn default() -> Self {
        SurplusParams {
            earning_share: TOLL_EARNING_SHARE,
            transit_fare: 2.5,
            fuel_tax: 0.12,
            delta_x: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProducerSurplus {
    pub toll_revenue: f64,
    pub toll_earning: f64,
    pub fare_revenue: f64,
    pub fuel_tax: f64,
}

impl ProducerSurplus {
    pub fn total(&self) -> f64 {
        self.toll_earning + self.fare_revenue + self.fuel_tax
    }
}

pub fn producer_surplus(ledger: &TollLedger, boardings: u64, fuel_litres: f64, p: &SurplusParams) -> ProducerSurplus {
    let revenue = ledger.total();
    ProducerSurplus {
        toll_revenue: revenue,
        toll_earning: p.earning_share * revenue,
        fare_revenue: boardings as f64 * p.transit_fare,
        fuel_tax: fuel_litres * p.fuel_tax,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbaRecord {
    pub individual: usize,
    pub policy: f64,
    pub baseline: f64,
    /// Policy accessibility with every trip `delta_x` dearer.
    pub shifted: f64,
    /// Dollars per unit of utility.
    pub alpha: f64,
    pub trip_rate: f64,
    pub aba: f64,
}

/// Accessibility-based benefit: the logsum change converted to dollars by
/// the marginal disutility of a `dx` increase on each of `trip_rate` trips.
pub fn compute_aba(individual: usize, policy: f64, baseline: f64, shifted: f64, dx: f64, trip_rate: f64) -> Result<AbaRecord> {
    if !(dx > 0.0) || !(trip_rate > 0.0) {
        return Err(Error::invalid("cost shift and trip rate must be positive"));
    }
    let drop = policy - shifted;
    if !(drop > 0.0) {
        return Err(Error::invalid(format!("individual {individual} is not cost sensitive")));
    }
    let alpha = dx * trip_rate / drop;
    Ok(AbaRecord {
        individual,
        policy,
        baseline,
        shifted,
        alpha,
        trip_rate,
        aba: alpha * (policy - baseline),
    })
}

pub fn passenger_cs(records: &[AbaRecord]) -> f64 {
    records.iter().map(|r| r.aba).sum()
}

/// Welfare components of one scenario relative to a baseline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WelfareLedger {
    pub toll_revenue: f64,
    pub toll_earning: f64,
    pub fare_revenue: f64,
    pub fuel_tax: f64,
    pub producer: f64,
    pub passenger_cs: f64,
    pub freight_cs: f64,
    pub emission_cost: f64,
    pub social_welfare: f64,
}

impl WelfareLedger {
    pub fn rows(&self) -> [(&'static str, f64); 9] {
        [
            ("toll_revenue", self.toll_revenue),
            ("toll_earning", self.toll_earning),
            ("transit_fare_revenue", self.fare_revenue),
            ("fuel_tax_revenue", self.fuel_tax),
            ("producer_surplus", self.producer),
            ("passenger_consumer_surplus", self.passenger_cs),
            ("freight_consumer_surplus", self.freight_cs),
            ("emission_cost", self.emission_cost),
            ("social_welfare", self.social_welfare),
        ]
    }
}

/// `dSW = dPS + dCS_P + dCS_F - dEC`. Consumer surpluses are already
/// changes; producer terms and emission costs are differenced here.
pub fn social_welfare(
    base_ps: &ProducerSurplus,
    policy_ps: &ProducerSurplus,
    cs_p: f64,
    cs_f: f64,
    base_ec: f64,
    policy_ec: f64,
) -> WelfareLedger {
    let toll_revenue = policy_ps.toll_revenue - base_ps.toll_revenue;
    let toll_earning = policy_ps.toll_earning - base_ps.toll_earning;
    let fare_revenue = policy_ps.fare_revenue - base_ps.fare_revenue;
    let fuel_tax = policy_ps.fuel_tax - base_ps.fuel_tax;
    let producer = toll_earning + fare_revenue + fuel_tax;
    let emission_cost = policy_ec - base_ec;
    WelfareLedger {
        toll_revenue,
        toll_earning,
        fare_revenue,
        fuel_tax,
        producer,
        passenger_cs: cs_p,
        freight_cs: cs_f,
        emission_cost,
        social_welfare: producer + cs_p + cs_f - emission_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesosim::{TollCause, TollCharge};
    use crate::vehicle::VehicleClass;
    use proptest::prelude::*;

    #[test]
    fn producer_surplus_examples() {
        let ledger = TollLedger {
            charges: vec![TollCharge {
                vehicle: 0,
                class: VehicleClass::Car,
                time: 500.0,
                link: 0,
                cause: TollCause::CordonEntry,
                km: 0.0,
                amount: 100.0,
            }],
        };
        let ps = producer_surplus(&ledger, 0, 1000.0, &SurplusParams::default());
        assert_eq!(ps.toll_earning, 73.0);
        assert_eq!(ps.fare_revenue, 0.0);
        assert!((ps.fuel_tax - 120.0).abs() < 1e-12);
    }

    #[test]
    fn aba_examples() {
        let r = compute_aba(0, 1.0, 1.0, 0.5, 1.0, 2.6).unwrap();
        assert_eq!(r.aba, 0.0);
        // alpha = 1 * 2 / 1 = 2 $/util; -0.5 utils -> -$1.
        let r = compute_aba(0, -0.5, 0.0, -1.5, 1.0, 2.0).unwrap();
        assert!((r.alpha - 2.0).abs() < 1e-12 && (r.aba + 1.0).abs() < 1e-12);
        assert!(compute_aba(0, 1.0, 1.0, 1.0, 1.0, 2.0).is_err());
        let recs = [
            compute_aba(0, 1.0, 0.5, 0.0, 1.0, 1.0).unwrap(),
            compute_aba(1, 0.5, 1.0, -0.5, 1.0, 1.0).unwrap(),
        ];
        assert_eq!(passenger_cs(&recs), 0.0);
    }

    #[test]
    fn welfare_arithmetic() {
        let base = ProducerSurplus::default();
        let pol = ProducerSurplus {
            toll_revenue: 5.0 / 0.73,
            toll_earning: 5.0,
            ..Default::default()
        };
        let w = social_welfare(&base, &pol, -3.0, -1.0, 0.0, -0.5);
        assert!((w.social_welfare - 1.5).abs() < 1e-12);
        let same = social_welfare(&pol, &pol, 0.0, 0.0, 2.0, 2.0);
        assert!(same.rows().iter().all(|(_, v)| *v == 0.0));
    }

    proptest! {
        #[test]
        fn aba_translation_invariant(a in -5.0..5.0f64, a0 in -5.0..5.0f64, drop in 0.01..3.0f64, c in -100.0..100.0f64) {
            let r1 = compute_aba(0, a, a0, a - drop, 1.0, 2.6).unwrap();
            let r2 = compute_aba(0, a + c, a0 + c, a + c - drop, 1.0, 2.6).unwrap();
            prop_assert!((r1.aba - r2.aba).abs() < 1e-9 * (1.0 + r1.aba.abs()));
            prop_assert!(r1.alpha > 0.0);
        }
    }
}
