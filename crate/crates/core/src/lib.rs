//! Terrain-aware safe path planning for fixed-wing vehicles.
//!
//! The vehicle has to stay inside an altitude corridor above a digital
//! elevation model. Circular loiters whose full period lies inside the
//! corridor are used as start and goal sets, which certifies that the
//! vehicle can keep flying safely after arrival. An anytime RRT* over
//! Dubins airplane paths connects the two circles.
//!
//! * [`terrain`] builds the corridor surfaces and the valid-loiter mask.
//! * [`dubins`] is the geometric kernel.
//! * [`safe_sets`] checks loiter circles and discretizes them.
//! * [`planner`] runs the search.
//! * [`guidance`] turns paths into tracking references and replays.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dubins;
pub mod error;
pub mod guidance;
pub mod planner;
pub mod safe_sets;
pub mod scenarios;
pub mod terrain;

pub use error::{PathError, TerrainError};
