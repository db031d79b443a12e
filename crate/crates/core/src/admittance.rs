//! Human guidance through a virtual mass-damper-spring.
//!
//! The measured push `F_h` is gated by a threshold and drives
//! `M Δ̈ + C Δ̇ + K Δ = F_h` with `Δ = R_r − R_d`, so the reference moves
//! along the applied force. With `K = 0` and no push the reference stops
//! and holds where it is.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference handed to the position loop.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    /// Desired yaw, rad.
    pub yaw: f64,
}

impl ReferenceTrajectory {
    pub fn hold(position: Vector3<f64>) -> Self {
        Self { position, ..Default::default() }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).chain(self.acceleration.iter()).all(|v| v.is_finite())
            && self.yaw.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmittanceParams {
    /// Virtual mass per axis, kg.
    pub mass: Vector3<f64>,
    /// Virtual damping per axis, N·s/m.
    pub damping: Vector3<f64>,
    /// Virtual stiffness per axis, N/m.
    pub stiffness: Vector3<f64>,
    /// Gate opens above this force magnitude, N.
    pub threshold: f64,
    /// Gate closes below `release_ratio · threshold`.
    pub release_ratio: f64,
}

impl Default for AdmittanceParams {
    fn default() -> Self {
        Self::nominal()
    }
}

impl AdmittanceParams {
    pub fn nominal() -> Self {
        Self {
            mass: Vector3::repeat(0.95),
            damping: Vector3::repeat(1.54),
            stiffness: Vector3::zeros(),
            threshold: 0.5,
            release_ratio: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mass.iter().all(|m| m.is_finite() && *m > 0.0)
            && self.damping.iter().all(|c| c.is_finite() && *c > 0.0)
            && self.stiffness.iter().all(|k| k.is_finite() && *k >= 0.0)
            && self.threshold.is_finite()
            && self.threshold >= 0.0
            && (0.0..=1.0).contains(&self.release_ratio);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("admittance: M, C > 0, K ≥ 0, threshold ≥ 0, release ratio in [0, 1]".into()))
        }
    }

    /// Slowest virtual time constant `M/C`, s.
    pub fn time_constant(&self) -> f64 {
        self.mass.component_div(&self.damping).max()
    }
}

/// Threshold gate with release hysteresis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceGate {
    open: bool,
}

impl ForceGate {
    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn apply(&mut self, f: &Vector3<f64>, params: &AdmittanceParams) -> Vector3<f64> {
        let n = f.norm();
        if self.open {
            if n < params.release_ratio * params.threshold {
                self.open = false;
            }
        } else if n > params.threshold {
            self.open = true;
        }
        if self.open {
            *f
        } else {
            Vector3::zeros()
        }
    }
}

/// Stateless threshold check (no hysteresis).
pub fn gate(f: &Vector3<f64>, params: &AdmittanceParams) -> Vector3<f64> {
    ForceGate::default().apply(f, params)
}

/// One semi-implicit Euler step of the virtual system.
///
/// `hold` is `R_d`. On axes with zero stiffness a closed gate rebases `R_d`
/// onto the current reference and stops it there.
pub fn step_admittance(
    r: &ReferenceTrajectory,
    hold: &Vector3<f64>,
    force: &Vector3<f64>,
    gate_open: bool,
    params: &AdmittanceParams,
    dt: f64,
) -> (ReferenceTrajectory, Vector3<f64>) {
    debug_assert!(dt > 0.0);
    let mut next = *r;
    let mut hold = *hold;
    for i in 0..3 {
        if !gate_open && params.stiffness[i] == 0.0 {
            hold[i] = r.position[i];
            next.velocity[i] = 0.0;
            next.acceleration[i] = 0.0;
            continue;
        }
        let f = if gate_open { force[i] } else { 0.0 };
        let a = (f - params.damping[i] * r.velocity[i] - params.stiffness[i] * (r.position[i] - hold[i]))
            / params.mass[i];
        next.acceleration[i] = a;
        next.velocity[i] = r.velocity[i] + a * dt;
        next.position[i] = r.position[i] + next.velocity[i] * dt;
    }
    (next, hold)
}

/// Gate plus virtual dynamics, stepped at the outer-loop rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Admittance {
    pub params: AdmittanceParams,
    gate: ForceGate,
    reference: ReferenceTrajectory,
    hold: Vector3<f64>,
}

impl Admittance {
    pub fn new(params: AdmittanceParams, start: ReferenceTrajectory) -> Self {
        Self { params, gate: ForceGate::default(), reference: start, hold: start.position }
    }

    pub fn reference(&self) -> &ReferenceTrajectory {
        &self.reference
    }

    pub fn hold_position(&self) -> &Vector3<f64> {
        &self.hold
    }

    pub fn gate_open(&self) -> bool {
        self.gate.is_open()
    }

    /// Gates `measured`, advances the reference by `dt` and returns the gated force.
    pub fn step(&mut self, measured: &Vector3<f64>, dt: f64) -> Vector3<f64> {
        let gated = self.gate.apply(measured, &self.params);
        let (r, hold) = step_admittance(&self.reference, &self.hold, &gated, self.gate.is_open(), &self.params, dt);
        self.reference = r;
        self.hold = hold;
        gated
    }
}

/// Sum of the two force-torque sensor channels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasuredWrench {
    pub channels: [Vector3<f64>; 2],
    pub total: Vector3<f64>,
}

/// The two wrist sensors between the quadrotors and the beam.
#[derive(Debug, Clone)]
pub struct ForceSensors {
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
}

impl ForceSensors {
    /// `noise_std` is the per-channel, per-axis standard deviation in N.
    pub fn new(noise_std: f64, seed: u64) -> Result<Self> {
        if !(noise_std.is_finite() && noise_std >= 0.0) {
            return Err(Error::InvalidParameter("sensor noise must be non-negative".into()));
        }
        let noise = if noise_std > 0.0 {
            Some(Normal::new(0.0, noise_std).map_err(|e| Error::InvalidParameter(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { noise, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn measure(&mut self, applied: &Vector3<f64>) -> MeasuredWrench {
        let half = applied * 0.5;
        let mut channels = [half, half];
        if let Some(n) = &self.noise {
            for c in channels.iter_mut() {
                for v in c.iter_mut() {
                    *v += n.sample(&mut self.rng);
                }
            }
        }
        MeasuredWrench { channels, total: channels[0] + channels[1] }
    }
}
