//! Max-min fair power allocation for uplinks that trade local semantic
//! compression (computation power) against transmit power.
//!
//! The crate is split into three layers:
//!
//! * [`model`]: domain types and the closed-form rate/cost formulas.
//! * [`solvers`]: the bisection engine, the two allocation heuristics
//!   (proportional-power and breakpoint enumeration), two baselines and a
//!   brute-force grid oracle.
//! * [`experiments`]: scenario configuration, seeded channel generation,
//!   parameter sweeps and CSV/SVG export.

// `!(x >= 0.0)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod model;
pub mod solvers;

pub use model::{
    channel_capacity, check_feasible, comp_load, comp_power, equivalent_rate, total_power, validate_curve, Allocation,
    ChannelState, CompLoadCurve, CurveError, Feasibility, Knot, ModelError, Segment, SystemParams, Violation,
};
pub use solvers::{Method, SolveReport};
