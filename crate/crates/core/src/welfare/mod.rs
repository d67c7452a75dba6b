//! Scenario evaluation: surpluses, logistics cost, emissions, winners and
//! losers, and reporting indicators.
mod emissions;
mod groups;
mod indicators;
mod logistics;
mod surplus;

pub use self::emissions::{emissions, EmissionFactors, EmissionSummary, CO2_PRICE_PER_TONNE};
pub use self::groups::{distributional_groups, group_of, GroupKind, GroupProfile};
pub use self::indicators::{report_indicators, IndicatorInputs, Indicators, OdType, LARGE_CARRIER_SHIPMENTS};
pub use self::logistics::{daily_tlc, freight_cs, ShipmentCost, TlcBreakdown, TlcContract, TlcParams};
pub use self::surplus::{
    compute_aba, passenger_cs, producer_surplus, social_welfare, AbaRecord, ProducerSurplus, SurplusParams,
    WelfareLedger, TOLL_EARNING_SHARE,
};
