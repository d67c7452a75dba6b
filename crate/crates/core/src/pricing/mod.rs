//! Toll schemes and their design from a baseline run.
mod design;
mod estimate;
mod profile;
mod scheme;

pub use self::design::{
    departure_histogram, derive_rates, estimate_dtdq, link_mct, mct_segment, period_rate, select_toll_area,
    select_toll_periods, zone_peak_tti, DesignSpec, PeakSearch, PeriodRate, PeriodSearch, TrippedMct,
};
pub use self::estimate::SkimTolls;
pub use self::profile::{
    audit_reference_rates, build_step_profile, class_rates, rounding_step, Discrepancy, ReferenceRow, ShoulderSpec,
    REFERENCE_AREA_RATES, REFERENCE_RATES,
};
pub use self::scheme::{round_to_step, RateStep, SchemeKind, TollScheme, DEFAULT_CAPS};
