//! Revenue-management capacity control for collection logistics.
//!
//! A carrier accepts or rejects one-item collection requests over a booking
//! horizon and, once the horizon closes, routes a capacitated fleet to pick up
//! everything it accepted. This crate provides the pieces needed to study that
//! trade-off at desk scale:
//!
//! * [`instance`] and [`solomon`]: problem data, Solomon-style parsing and
//!   instance generation.
//! * [`demand`]: the stochastic request model and request-path sampling.
//! * [`routing`]: exact solvers for the operational CVRP and the profit
//!   maximisation VRP (PMVRP), a bin-packing feasibility test and an LP-format
//!   model writer.
//! * [`dp`]: the exact backward recursion over `(period, state)`, usable on
//!   tiny instances as ground truth.
//! * [`policy`]: booking-limit (BLP/BLPR), first-come first-served and
//!   perfect-knowledge controls.
//! * [`sim`]: the Monte-Carlo experiment harness and ECDF reporting.

pub mod demand;
pub mod dp;
pub mod error;
pub mod instance;
pub mod policy;
pub mod rng;
pub mod routing;
pub mod sim;
pub mod solomon;
pub mod state;

pub use error::{Error, Result};
pub use instance::{Instance, InstanceClass, Label};
pub use state::SystemState;

/// Absolute tolerance used for every floating-point comparison on costs,
/// loads and booking limits.
pub const EPS: f64 = 1e-9;

/// Crate version embedded in every output document.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
