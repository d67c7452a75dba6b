//! Agent-based passenger and freight microsimulation for designing and
//! evaluating congestion-pricing schemes on a synthetic city.
//!
//! The crate is organised by pipeline stage: [`netgraph`] and [`synthpop`]
//! build the city, [`pax`] and [`freight`] generate daily demand, [`mesosim`]
//! loads it on the network with day-to-day learning, [`pricing`] designs
//! toll schemes from a baseline run and [`welfare`] evaluates them.
//! [`scenario`] ties the stages together for the command-line tool.
pub mod choice;
pub mod clock;
pub mod error;
pub mod freight;
pub mod mesosim;
pub mod netgraph;
pub mod pax;
pub mod pricing;
pub mod rng;
pub mod scenario;
pub mod synthpop;
pub mod vehicle;
pub mod welfare;

pub use error::{Error, Result};
