//! Inner loop: fast nonsingular terminal sliding-mode control of roll, pitch
//! and yaw.
//!
//! Per axis, with `E = Φ_d − Φ`:
//!
//! ```text
//! S   = Ė + ζE + γ|E|^ε sgn(E)
//! U_m = I [Φ̈_d − Q_Φ + (ζ + γε|E|^(ε−1)) Ė + κ1 S + κ2 sgn(S)]
//! ```
//!
//! which makes `Ṡ = −κ1 S − κ2 sgn(S)` on the plant, so `V = S²/2` reaches
//! zero no later than `(1/κ1) ln((2κ1√V0 + √2κ2) / (√2κ2))`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{idx, state_derivative, ExternalForce, SimState, SystemParams, WrenchCommand};
use crate::error::{Error, Result};

/// Switching function used in the reaching term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Switching {
    /// Exact sign, zero at zero.
    #[default]
    Sign,
    /// `clamp(S/width, −1, 1)`.
    BoundaryLayer { width: f64 },
}

impl Switching {
    pub fn apply(&self, s: f64) -> f64 {
        match *self {
            Switching::Sign => sgn(s),
            Switching::BoundaryLayer { width } => (s / width).clamp(-1.0, 1.0),
        }
    }
}

/// Sign function with `sgn(0) = 0` (unlike `f64::signum`).
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeGains {
    /// Per-axis linear surface gains `(ζ_φ, ζ_θ, ζ_ψ)`.
    pub zeta: Vector3<f64>,
    /// Terminal gain, shared by all axes.
    pub gamma: f64,
    /// Terminal exponent, at least 1.
    pub epsilon: f64,
    /// Proportional reaching gain.
    pub kappa1: f64,
    /// Switching reaching gain.
    pub kappa2: f64,
    #[serde(default)]
    pub switching: Switching,
}

impl Default for AttitudeGains {
    fn default() -> Self {
        Self::nominal()
    }
}

impl AttitudeGains {
    pub fn nominal() -> Self {
        Self {
            zeta: Vector3::new(22.0, 30.0, 22.0),
            gamma: 5.0,
            epsilon: 2.0,
            kappa1: 85.0,
            kappa2: 55.0,
            switching: Switching::Sign,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !self.zeta.iter().all(|z| pos(*z)) || !pos(self.gamma) || !pos(self.kappa1) || !pos(self.kappa2) {
            return Err(Error::InvalidParameter("attitude gains must be positive".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 1.0) {
            return Err(Error::InvalidParameter("terminal exponent must be at least 1".into()));
        }
        if let Switching::BoundaryLayer { width } = self.switching {
            if !pos(width) {
                return Err(Error::InvalidParameter("boundary layer width must be positive".into()));
            }
        }
        Ok(())
    }

    /// `ζ + γε|E|^(ε−1)` per axis.
    fn rate_gain(&self, e: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.zeta[i] + self.gamma * self.epsilon * e[i].abs().powf(self.epsilon - 1.0))
    }
}

/// Desired angles with their first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttitudeReference {
    pub angles: Vector3<f64>,
    pub rates: Vector3<f64>,
    pub accels: Vector3<f64>,
}

impl AttitudeReference {
    pub fn fixed(angles: Vector3<f64>) -> Self {
        Self { angles, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlidingState {
    /// `Φ_d − Φ`
    pub error: Vector3<f64>,
    /// `Φ̇_d − Φ̇`
    pub error_rate: Vector3<f64>,
    pub surface: Vector3<f64>,
}

impl SlidingState {
    pub fn from_tracking(r: &AttitudeReference, s: &SimState, gains: &AttitudeGains) -> Self {
        let error = r.angles - s.attitude();
        let error_rate = r.rates - s.rates();
        Self { error, error_rate, surface: sliding_surface(&error, &error_rate, gains) }
    }

    /// Per-axis `V_Φ = S²/2`.
    pub fn lyapunov(&self) -> Vector3<f64> {
        self.surface.component_mul(&self.surface) * 0.5
    }
}

pub fn sliding_surface(e: &Vector3<f64>, e_dot: &Vector3<f64>, gains: &AttitudeGains) -> Vector3<f64> {
    Vector3::from_fn(|i, _| {
        e_dot[i] + gains.zeta[i] * e[i] + gains.gamma * e[i].abs().powf(gains.epsilon) * sgn(e[i])
    })
}

/// Drag plus gyroscopic part of the angular accelerations, `Q_Φ`.
pub fn attitude_drift(s: &SimState, p: &SystemParams) -> Vector3<f64> {
    let w = s.rates();
    let i = p.inertia;
    let k = p.angular_drag;
    Vector3::new(
        (-k * w.x + (i.y - i.z) * w.y * w.z) / i.x,
        (-k * w.y + (i.z - i.x) * w.x * w.z) / i.y,
        (-k * w.z + (i.x - i.y) * w.x * w.y) / i.z,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeOutput {
    pub moments: Vector3<f64>,
    pub sliding: SlidingState,
}

/// Body moments that drive the attitude onto `r`.
pub fn attitude_control(r: &AttitudeReference, s: &SimState, gains: &AttitudeGains, p: &SystemParams) -> AttitudeOutput {
    let sliding = SlidingState::from_tracking(r, s, gains);
    let drift = attitude_drift(s, p);
    let rate_gain = gains.rate_gain(&sliding.error);
    let moments = Vector3::from_fn(|i, _| {
        let surf = sliding.surface[i];
        p.inertia[i]
            * (r.accels[i] - drift[i]
                + rate_gain[i] * sliding.error_rate[i]
                + gains.kappa1 * surf
                + gains.kappa2 * gains.switching.apply(surf))
    });
    AttitudeOutput { moments, sliding }
}

/// `Ṡ` evaluated on the plant for the applied wrench.
pub fn surface_rate(
    r: &AttitudeReference,
    s: &SimState,
    u: &WrenchCommand,
    gains: &AttitudeGains,
    p: &SystemParams,
) -> Result<Vector3<f64>> {
    let d = state_derivative(s, u, &ExternalForce::zero(), p)?;
    let accel = Vector3::new(d[idx::ROLL_RATE], d[idx::PITCH_RATE], d[idx::YAW_RATE]);
    let sliding = SlidingState::from_tracking(r, s, gains);
    Ok(r.accels - accel + gains.rate_gain(&sliding.error).component_mul(&sliding.error_rate))
}

/// Upper bound on the time for each `S` to reach zero from `V_Φ(0) = v0`.
pub fn reaching_time_bound(v0: &Vector3<f64>, gains: &AttitudeGains) -> Vector3<f64> {
    let alpha = std::f64::consts::SQRT_2 * gains.kappa2;
    v0.map(|v| {
        debug_assert!(v >= 0.0);
        ((2.0 * gains.kappa1 * v.sqrt() + alpha) / alpha).abs().ln() / gains.kappa1
    })
}

/// Second-order low-pass that turns the piecewise-constant roll/pitch
/// set-point into a smooth `(Φ_d, Φ̇_d, Φ̈_d)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SetpointFilter {
    omega: f64,
    damping: f64,
    value: Vector3<f64>,
    rate: Vector3<f64>,
    primed: bool,
}

impl SetpointFilter {
    pub fn new(cutoff_hz: f64) -> Self {
        Self {
            omega: 2.0 * std::f64::consts::PI * cutoff_hz,
            damping: 1.0,
            value: Vector3::zeros(),
            rate: Vector3::zeros(),
            primed: false,
        }
    }

    /// Starts the filter at rest on `angles`.
    pub fn reset(&mut self, angles: Vector3<f64>) {
        self.value = angles;
        self.rate = Vector3::zeros();
        self.primed = true;
    }

    /// Feeds one sample and returns the reference valid over the next `dt`.
    pub fn update(&mut self, target: &Vector3<f64>, dt: f64) -> AttitudeReference {
        if !self.primed {
            self.reset(*target);
        }
        let w2 = self.omega * self.omega;
        let accels = (target - self.value) * w2 - self.rate * (2.0 * self.damping * self.omega);
        let out = AttitudeReference { angles: self.value, rates: self.rate, accels };
        self.rate += accels * dt;
        self.value += self.rate * dt;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn surface_at_origin_is_zero() {
        let g = AttitudeGains::nominal();
        assert_eq!(sliding_surface(&Vector3::zeros(), &Vector3::zeros(), &g), Vector3::zeros());
    }

    #[test]
    fn surface_substitution() {
        let g = AttitudeGains::nominal();
        let s = sliding_surface(&Vector3::new(0.1, 0.0, 0.0), &Vector3::zeros(), &g);
        assert_relative_eq!(s.x, 2.25, epsilon = 1e-14);
        assert_eq!(s.y, 0.0);
    }

    #[test]
    fn surface_is_odd() {
        let g = AttitudeGains::nominal();
        let e = Vector3::new(0.3, -0.12, 0.05);
        let ed = Vector3::new(-1.0, 0.4, 2.0);
        assert_eq!(sliding_surface(&-e, &-ed, &g), -sliding_surface(&e, &ed, &g));
    }

    #[test]
    fn perfect_tracking_needs_no_moment() {
        let p = SystemParams::nominal();
        let out = attitude_control(&AttitudeReference::default(), &SimState::default(), &AttitudeGains::nominal(), &p);
        assert_eq!(out.moments, Vector3::zeros());
    }

    #[test]
    fn roll_error_substitution() {
        let p = SystemParams::nominal();
        let r = AttitudeReference::fixed(Vector3::new(0.1, 0.0, 0.0));
        let out = attitude_control(&r, &SimState::default(), &AttitudeGains::nominal(), &p);
        assert_relative_eq!(out.moments.x, 3.039 * (85.0 * 2.25 + 55.0), epsilon = 1e-10);
        assert_eq!(out.moments.y, 0.0);
        assert_eq!(out.moments.z, 0.0);
    }

    #[test]
    fn gyroscopic_coupling_is_cancelled() {
        let p = SystemParams::nominal();
        let g = AttitudeGains::nominal();
        let s = SimState::from_parts(0.0, Vector3::zeros(), Vector3::zeros(), Vector3::zeros(), Vector3::new(0.0, 0.4, -0.7));
        // track the current rates exactly so every error term vanishes
        let r = AttitudeReference { angles: Vector3::zeros(), rates: s.rates(), accels: Vector3::zeros() };
        let out = attitude_control(&r, &s, &g, &p);
        let u = WrenchCommand::new(p.hover_thrust(), out.moments);
        let d = state_derivative(&s, &u, &ExternalForce::zero(), &p).unwrap();
        assert!(d[idx::ROLL_RATE].abs() < 1e-15, "{}", d[idx::ROLL_RATE]);
        assert!(d[idx::PITCH_RATE].abs() < 1e-15);
        assert!(d[idx::YAW_RATE].abs() < 1e-15);
    }

    #[test]
    fn closed_loop_surface_rate_is_reaching_law() {
        let p = SystemParams::nominal();
        let g = AttitudeGains::nominal();
        let s = SimState::from_parts(
            0.0,
            Vector3::zeros(),
            Vector3::zeros(),
            Vector3::new(0.1, -0.2, 0.05),
            Vector3::new(0.3, 0.1, -0.2),
        );
        let r = AttitudeReference { angles: Vector3::new(-0.05, 0.1, 0.0), rates: Vector3::new(0.1, 0.0, 0.0), accels: Vector3::new(0.5, -0.3, 0.0) };
        let out = attitude_control(&r, &s, &g, &p);
        let u = WrenchCommand::new(p.hover_thrust(), out.moments);
        let sdot = surface_rate(&r, &s, &u, &g, &p).unwrap();
        for i in 0..3 {
            let sv = out.sliding.surface[i];
            assert_relative_eq!(sdot[i], -g.kappa1 * sv - g.kappa2 * sgn(sv), epsilon = 1e-9);
        }
    }

    #[test]
    fn reaching_bound_zero_on_surface() {
        assert_eq!(reaching_time_bound(&Vector3::zeros(), &AttitudeGains::nominal()), Vector3::zeros());
    }

    #[test]
    fn boundary_layer_saturates() {
        let sw = Switching::BoundaryLayer { width: 0.01 };
        assert_eq!(sw.apply(0.005), 0.5);
        assert_eq!(sw.apply(-3.0), -1.0);
        assert_eq!(Switching::Sign.apply(0.0), 0.0);
    }

    #[test]
    fn gains_validation() {
        assert!(AttitudeGains::nominal().validate().is_ok());
        let bad = AttitudeGains { epsilon: 0.5, ..AttitudeGains::nominal() };
        assert!(bad.validate().is_err());
        let bad = AttitudeGains { switching: Switching::BoundaryLayer { width: 0.0 }, ..AttitudeGains::nominal() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn setpoint_filter_settles_on_step() {
        let mut f = SetpointFilter::new(20.0);
        f.reset(Vector3::zeros());
        let target = Vector3::new(0.1, -0.05, 0.0);
        let mut last = AttitudeReference::default();
        for _ in 0..500 {
            last = f.update(&target, 0.001);
        }
        assert_relative_eq!(last.angles, target, epsilon = 1e-9);
        assert!(last.rates.norm() < 1e-7);
    }
}
