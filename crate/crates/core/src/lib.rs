//! Resonant control pulses that steer a two-level system along a prescribed
//! population path, and propagators to check them against the full
//! (non-rotating-wave) dynamics.
//!
//! Atomic units throughout.

// `!(a <= b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod domain;
pub mod dynamics;
pub mod io;
pub mod ode;
pub mod synthesis;

pub use domain::{ControlSpec, Level, Method, QuantumState, SimConfig, SystemParams, Trajectory};
pub use dynamics::{propagate, propagate_pulse, DriveField, Frame};
pub use synthesis::{ControlEvaluator, Pulse};
