//! Simulation and control of two quadrotors rigidly carrying a long payload,
//! guided by a person pushing on it.
//!
//! The pieces, from the plant outwards:
//!
//! - [`dynamics`]: 12-state rigid-body model and RK4 integration.
//! - [`allocation`]: weighted minimum-norm split of the total wrench over
//!   both quadrotors, and rotor mixing.
//! - [`position_ctrl`]: adaptive backstepping position loop.
//! - [`attitude_ctrl`]: fast nonsingular terminal sliding-mode attitude loop.
//! - [`admittance`]: turns the measured human force into a reference.
//! - [`harness`]: scenarios, the cascaded loop, logs, metrics and live telemetry.
//! - [`verify`]: acceptance checks runnable from the CLI.

pub mod admittance;
pub mod allocation;
pub mod attitude_ctrl;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod position_ctrl;
pub mod verify;

pub use error::{Error, Result};
