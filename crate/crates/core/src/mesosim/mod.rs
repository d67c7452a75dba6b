//! Mesoscopic supply: point-queue loading of vehicle plans, toll charging
//! and day-to-day learning of travel times.
mod learning;
mod skims;
mod speed;
mod supply;
mod toll;

pub use self::learning::{run_day_to_day, LearningOptions, LearningOutcome};
pub use self::skims::{period_intervals, update_skims_msa, LinkTimes, SkimSet, ZoneSkim};
pub use self::speed::{segment_speed, SpeedModel};
pub use self::supply::{
    simulate_day, DayResult, Driver, Leg, PathCache, SegmentStates, SupplySpec, TollLedger, Trajectory, VehiclePlan,
};
pub use self::toll::{charge_toll, SchemeGeometry, TollCause, TollCharge, VehicleTollState};
