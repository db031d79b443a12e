use crate::dynamics::SimState;

/// Errors raised by the plant, the controllers and the simulation harness.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration step {0} s outside (0, 0.01]")]
    InvalidStep(f64),

    #[error("state diverged at t = {:.4} s (roll {:.4} rad, pitch {:.4} rad)", .0.t, .0.roll(), .0.pitch())]
    Diverged(Box<SimState>),

    #[error("allocation infeasible: {0}")]
    AllocationInfeasible(String),

    #[error("actuator saturation: rotor {rotor} requires negative thrust {thrust:.6} N")]
    ActuatorSaturation { rotor: usize, thrust: f64 },

    #[error("thrust singularity: u_vz + g = {0:.6} is not positive")]
    ThrustSingularity(f64),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("protocol: {0}")]
    Protocol(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
