//! IMEX Runge-Kutta integration for hyperbolic systems with stiff and
//! diffusive relaxation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod integrator;
pub mod models;
pub mod r13_boundary;
pub mod spatial;
pub mod state;
pub mod tableau;

pub use error::{Error, Result};
pub use state::{Mode, NewtonControl, PartitionedSystem, SplitSystem, StageSolve, State};
