//! Passenger demand: day patterns, tours, modes and routes.
mod preday;
mod route;

pub use self::preday::{
    accessibility, expected_mode_trips, simulate_pre_day, Attraction, DayPattern, Mode, ModeConstants, PaxContext,
    PaxTrip, PaxUtilitySpec, Purpose, Slot, TourPlan,
};
pub use self::route::{route_choice, route_utilities, RouteOption, RouteParams};
