//! Composite rigid-body plant: two quadrotors rigidly bolted to a beam payload,
//! treated as one body under total thrust, body moments, linear drag, gravity
//! and the operator's push.
//!
//! The translational rows use the small-angle thrust direction
//! `(sθcψ + sφcθsψ, sθsψ − sφcθcψ, cφcθ)` and Euler rates stand in for body
//! rates. The controllers in [`crate::position_ctrl`] and
//! [`crate::attitude_ctrl`] cancel exactly these terms, so the plant must not
//! be swapped for a full SO(3) model.

use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::allocation::{self, AllocationWeights};
use crate::error::{Error, Result};

pub type StateVector = SVector<f64, 12>;

/// Index of each scalar in the state vector.
pub mod idx {
    pub const X: usize = 0;
    pub const VX: usize = 1;
    pub const Y: usize = 2;
    pub const VY: usize = 3;
    pub const Z: usize = 4;
    pub const VZ: usize = 5;
    pub const ROLL: usize = 6;
    pub const ROLL_RATE: usize = 7;
    pub const PITCH: usize = 8;
    pub const PITCH_RATE: usize = 9;
    pub const YAW: usize = 10;
    pub const YAW_RATE: usize = 11;
}

/// Roll/pitch magnitude beyond which a run is declared diverged.
pub const DEFAULT_MAX_TILT: f64 = std::f64::consts::FRAC_PI_3;

/// Default saturation of the operator force, N.
pub const DEFAULT_FORCE_LIMIT: f64 = 50.0;

/// Physical constants of the composite vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mass of one quadrotor, kg.
    pub quad_mass: f64,
    /// Payload mass, kg.
    pub payload_mass: f64,
    /// Quadrotor arm length, m.
    pub arm_length: f64,
    /// Beam length, m.
    pub payload_length: f64,
    /// m/s². May be zero for drag-only studies.
    pub gravity: f64,
    /// Diagonal of the composite inertia, kg·m².
    pub inertia: Vector3<f64>,
    /// Translational drag coefficient, N·s/m.
    pub linear_drag: f64,
    /// Rotational drag coefficient, N·m·s.
    pub angular_drag: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::nominal()
    }
}

impl SystemParams {
    /// The nominal vehicle: 1.4 kg quadrotors, 0.45 kg beam of 2.2 m.
    pub fn nominal() -> Self {
        Self {
            quad_mass: 1.4,
            payload_mass: 0.45,
            arm_length: 0.225,
            payload_length: 2.2,
            gravity: 9.81,
            inertia: Vector3::new(3.039, 0.051, 3.072),
            linear_drag: 55e-4,
            angular_drag: 55e-4,
        }
    }

    /// `2·m_q + m_p`
    pub fn total_mass(&self) -> f64 {
        2.0 * self.quad_mass + self.payload_mass
    }

    /// Thrust that exactly balances the composite weight.
    pub fn hover_thrust(&self) -> f64 {
        self.total_mass() * self.gravity
    }

    /// Quadrotor attachment points relative to the payload centre, body frame.
    /// The beam lies along body y, so `ρ_1 = (0, l/2, 0)` and `ρ_2 = −ρ_1`.
    pub fn attach_offsets(&self) -> [Vector3<f64>; 2] {
        let half = 0.5 * self.payload_length;
        [Vector3::new(0.0, half, 0.0), Vector3::new(0.0, -half, 0.0)]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("quad_mass", self.quad_mass),
            ("payload_mass", self.payload_mass),
            ("arm_length", self.arm_length),
            ("inertia.x", self.inertia.x),
            ("inertia.y", self.inertia.y),
            ("inertia.z", self.inertia.z),
            ("linear_drag", self.linear_drag),
            ("angular_drag", self.angular_drag),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.payload_length.is_finite() && self.payload_length >= 0.0) {
            return Err(Error::InvalidParameter("payload_length must be non-negative".into()));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::InvalidParameter("gravity must be non-negative".into()));
        }
        Ok(())
    }
}

/// Simulation clock plus the 12-dimensional state
/// `[x, ẋ, y, ẏ, z, ż, φ, φ̇, θ, θ̇, ψ, ψ̇]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub eta: StateVector,
}

impl Default for SimState {
    fn default() -> Self {
        Self { t: 0.0, eta: StateVector::zeros() }
    }
}

impl SimState {
    pub fn from_parts(
        t: f64,
        position: Vector3<f64>,
        velocity: Vector3<f64>,
        attitude: Vector3<f64>,
        rates: Vector3<f64>,
    ) -> Self {
        let mut eta = StateVector::zeros();
        for i in 0..3 {
            eta[2 * i] = position[i];
            eta[2 * i + 1] = velocity[i];
            eta[6 + 2 * i] = attitude[i];
            eta[7 + 2 * i] = rates[i];
        }
        Self { t, eta }
    }

    /// Level, motionless, at `position`.
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self::from_parts(0.0, position, Vector3::zeros(), Vector3::zeros(), Vector3::zeros())
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.eta[idx::X], self.eta[idx::Y], self.eta[idx::Z])
    }

    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::new(self.eta[idx::VX], self.eta[idx::VY], self.eta[idx::VZ])
    }

    /// Euler angles `(φ, θ, ψ)`.
    pub fn attitude(&self) -> Vector3<f64> {
        Vector3::new(self.eta[idx::ROLL], self.eta[idx::PITCH], self.eta[idx::YAW])
    }

    /// Euler rates, identified with body rates `(p, q, r)`.
    pub fn rates(&self) -> Vector3<f64> {
        Vector3::new(self.eta[idx::ROLL_RATE], self.eta[idx::PITCH_RATE], self.eta[idx::YAW_RATE])
    }

    pub fn roll(&self) -> f64 {
        self.eta[idx::ROLL]
    }

    pub fn pitch(&self) -> f64 {
        self.eta[idx::PITCH]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.eta.iter().all(|v| v.is_finite())
    }

    /// True when the state is finite and roll/pitch are within `max_tilt`.
    pub fn within_envelope(&self, max_tilt: f64) -> bool {
        self.is_finite() && self.roll().abs() <= max_tilt && self.pitch().abs() <= max_tilt
    }

    /// Translational plus rotational kinetic energy of the lumped body.
    pub fn kinetic_energy(&self, p: &SystemParams) -> f64 {
        let v = self.velocity();
        let w = self.rates();
        0.5 * p.total_mass() * v.norm_squared() + 0.5 * w.component_mul(&w).dot(&p.inertia)
    }
}

/// Total thrust and body moments `[U_th, U_m]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WrenchCommand {
    /// N, never negative.
    pub thrust: f64,
    /// N·m about body x, y, z.
    pub moments: Vector3<f64>,
}

impl WrenchCommand {
    pub fn new(thrust: f64, moments: Vector3<f64>) -> Self {
        Self { thrust, moments }
    }

    pub fn hover(p: &SystemParams) -> Self {
        Self::new(p.hover_thrust(), Vector3::zeros())
    }

    pub fn as_vector(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.thrust, self.moments.x, self.moments.y, self.moments.z)
    }

    pub fn from_vector(v: &nalgebra::Vector4<f64>) -> Self {
        Self::new(v[0], Vector3::new(v[1], v[2], v[3]))
    }

    pub fn is_finite(&self) -> bool {
        self.thrust.is_finite() && self.moments.iter().all(|v| v.is_finite())
    }
}

/// Operator force on the payload, world frame, N.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExternalForce(pub Vector3<f64>);

impl ExternalForce {
    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    /// Rejects non-finite input and scales the vector down to `limit` if needed.
    pub fn saturated(force: Vector3<f64>, limit: f64) -> Result<Self> {
        if !force.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("external force"));
        }
        let n = force.norm();
        if n > limit {
            Ok(Self(force * (limit / n)))
        } else {
            Ok(Self(force))
        }
    }
}

/// The thrust direction used by the translational rows.
pub fn thrust_direction(attitude: &Vector3<f64>) -> Vector3<f64> {
    let (sphi, cphi) = attitude.x.sin_cos();
    let (sth, cth) = attitude.y.sin_cos();
    let (spsi, cpsi) = attitude.z.sin_cos();
    Vector3::new(sth * cpsi + sphi * cth * spsi, sth * spsi - sphi * cth * cpsi, cphi * cth)
}

fn derivative_unchecked(
    eta: &StateVector,
    u: &WrenchCommand,
    f: &ExternalForce,
    p: &SystemParams,
) -> StateVector {
    let ms = p.total_mass();
    let kdl = p.linear_drag;
    let kdr = p.angular_drag;
    let (ix, iy, iz) = (p.inertia.x, p.inertia.y, p.inertia.z);
    let b = thrust_direction(&Vector3::new(eta[idx::ROLL], eta[idx::PITCH], eta[idx::YAW]));
    let (vx, vy, vz) = (eta[idx::VX], eta[idx::VY], eta[idx::VZ]);
    let (p_, q_, r_) = (eta[idx::ROLL_RATE], eta[idx::PITCH_RATE], eta[idx::YAW_RATE]);
    let fh = f.0;

    let mut d = StateVector::zeros();
    d[idx::X] = vx;
    d[idx::VX] = (-kdl * vx + b.x * u.thrust) / ms + fh.x / ms;
    d[idx::Y] = vy;
    d[idx::VY] = (-kdl * vy + b.y * u.thrust) / ms + fh.y / ms;
    d[idx::Z] = vz;
    d[idx::VZ] = (-kdl * vz - ms * p.gravity + b.z * u.thrust) / ms + fh.z / ms;
    d[idx::ROLL] = p_;
    d[idx::ROLL_RATE] = (-kdr * p_ + (iy - iz) * q_ * r_ + u.moments.x) / ix;
    d[idx::PITCH] = q_;
    d[idx::PITCH_RATE] = (-kdr * q_ + (iz - ix) * p_ * r_ + u.moments.y) / iy;
    d[idx::YAW] = r_;
    d[idx::YAW_RATE] = (-kdr * r_ + (ix - iy) * p_ * q_ + u.moments.z) / iz;
    d
}

/// Time derivative of the state under wrench `u` and operator force `f`.
/// The operator force acts at the composite centre of mass and produces no torque.
pub fn state_derivative(
    s: &SimState,
    u: &WrenchCommand,
    f: &ExternalForce,
    p: &SystemParams,
) -> Result<StateVector> {
    if !s.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("wrench"));
    }
    if !f.0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("external force"));
    }
    Ok(derivative_unchecked(&s.eta, u, f, p))
}

/// Ground-truth plant with a fixed divergence envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub params: SystemParams,
    pub max_tilt: f64,
}

impl Plant {
    pub fn new(params: SystemParams) -> Self {
        Self { params, max_tilt: DEFAULT_MAX_TILT }
    }

    pub fn with_max_tilt(mut self, max_tilt: f64) -> Self {
        self.max_tilt = max_tilt;
        self
    }

    pub fn derivative(&self, s: &SimState, u: &WrenchCommand, f: &ExternalForce) -> Result<StateVector> {
        state_derivative(s, u, f, &self.params)
    }

    /// One classical RK4 step with `u` and `f` held over `dt`.
    pub fn step(&self, s: &SimState, u: &WrenchCommand, f: &ExternalForce, dt: f64) -> Result<SimState> {
        step_rk4_guarded(s, u, f, &self.params, dt, self.max_tilt)
    }
}

/// RK4 step with the default divergence envelope.
pub fn step_rk4(
    s: &SimState,
    u: &WrenchCommand,
    f: &ExternalForce,
    p: &SystemParams,
    dt: f64,
) -> Result<SimState> {
    step_rk4_guarded(s, u, f, p, dt, DEFAULT_MAX_TILT)
}

pub fn step_rk4_guarded(
    s: &SimState,
    u: &WrenchCommand,
    f: &ExternalForce,
    p: &SystemParams,
    dt: f64,
    max_tilt: f64,
) -> Result<SimState> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::InvalidStep(dt));
    }
    let k1 = state_derivative(s, u, f, p)?;
    let k2 = derivative_unchecked(&(s.eta + k1 * (0.5 * dt)), u, f, p);
    let k3 = derivative_unchecked(&(s.eta + k2 * (0.5 * dt)), u, f, p);
    let k4 = derivative_unchecked(&(s.eta + k3 * dt), u, f, p);
    let eta = s.eta + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    let next = SimState { t: s.t + dt, eta };
    if !next.within_envelope(max_tilt) {
        return Err(Error::Diverged(Box::new(next)));
    }
    Ok(next)
}

/// Forces and torques each quadrotor exerts on the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentWrenches {
    pub force: [Vector3<f64>; 2],
    pub torque: [Vector3<f64>; 2],
}

/// Splits the composite motion back into the per-body balances.
///
/// Every body shares the composite translational acceleration and the angular
/// acceleration. The per-quadrotor thrust and moments come from a uniformly
/// weighted allocation of `u`; drag and inertia are apportioned by mass.
/// Diagnostic only: the plant never calls this.
pub fn component_wrenches(s: &SimState, u: &WrenchCommand, p: &SystemParams) -> Result<ComponentWrenches> {
    let deriv = state_derivative(s, u, &ExternalForce::zero(), p)?;
    let lambda = allocation::build_lambda(p);
    let cmd = allocation::allocate(u, &lambda, &AllocationWeights::uniform())?;

    let ms = p.total_mass();
    let mq = p.quad_mass;
    let share = mq / ms;
    let accel = Vector3::new(deriv[idx::VX], deriv[idx::VY], deriv[idx::VZ]);
    let ang_accel = Vector3::new(deriv[idx::ROLL_RATE], deriv[idx::PITCH_RATE], deriv[idx::YAW_RATE]);
    let omega = s.rates();
    let b = thrust_direction(&s.attitude());
    let drag = s.velocity() * p.linear_drag;
    let inertia_q = p.inertia * share;
    let ez = Vector3::z();

    let mut force = [Vector3::zeros(); 2];
    let mut torque = [Vector3::zeros(); 2];
    for i in 0..2 {
        let (thrust_i, tau_i) = cmd.quad(i);
        force[i] = b * thrust_i - ez * (mq * p.gravity) - accel * mq - drag * share;
        let iw = inertia_q.component_mul(&omega);
        torque[i] = tau_i
            - inertia_q.component_mul(&ang_accel)
            - omega.cross(&iw)
            - omega * (p.angular_drag * share);
    }
    Ok(ComponentWrenches { force, torque })
}
