//! HTTP API over planning sessions.
//!
//! A session owns one set of terrain surfaces and the vehicle's current
//! loiter circle. Plans run on blocking worker threads and publish every
//! improved solution as a server-sent event; committing a plan moves the
//! session's start circle to the plan's goal circle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod routes;
mod state;

pub use error::{ApiError, ApiResult};
pub use routes::{router, CommitRequest, PlanRequest, SessionRequest};
pub use state::{AppState, ServiceConfig};
