//! Scenario-driven simulation: configuration, the cascaded loop, logs,
//! metrics and the live telemetry service.

pub mod log;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod telemetry;

pub use log::{Event, EventKind, LogRow, RunLog, RunStatus, COLUMNS};
pub use metrics::{metrics, normalized, Summary};
pub use telemetry::{LiveOptions, LiveSession, Message, Snapshot};
pub use runner::{run, Simulation, StepOutcome};
pub use scenario::{ForceSegment, Scenario};
