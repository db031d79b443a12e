//! Outer loop: adaptive backstepping on the translational subsystem.
//!
//! Errors `E_p = X_d − X` and `E_v = K_p E_p + Ẋ_d − ν` drive the virtual
//! control
//!
//! ```text
//! U_v = K̂_v E_v − E_p + K_p Ė_p + Ẍ_d − Q_p,    Q_p = −k_dl ν / m_s
//! ```
//!
//! with the adaptive gain `K̂̇_v = B E_v²`. `U_v` is then turned into total
//! thrust and the roll/pitch the attitude loop must hold.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::admittance::ReferenceTrajectory;
use crate::dynamics::{SimState, SystemParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionGains {
    /// `K_p` diagonal.
    pub kp: Vector3<f64>,
    /// Adaptation rates `B` diagonal.
    pub beta: Vector3<f64>,
    /// Reference value of the unknown `K_v`, used only by the Lyapunov
    /// diagnostic [`lyapunov_pv`]; the control law never reads it.
    pub kv_nominal: Vector3<f64>,
    pub law: PositionLaw,
}

/// Sign of the `E_p` feedback in `U_v`.
///
/// Differentiating `½E_p²` leaves `+E_p E_v`, so `U_v` needs `+E_p` to cancel
/// it. With `−E_p` the cross term doubles instead, and the
/// closed loop is then only stable once `k_p k̂_v > 1` and is a saddle while
/// `k̂_v` is still near its zero start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionLaw {
    /// `U_v = K̂_v E_v − E_p + …`
    CrossTermDoubling,
    /// `U_v = K̂_v E_v + E_p + …`; `V̇_pv = −K_p E_p² − K_v E_v²`.
    #[default]
    CrossTermCancelling,
}

impl PositionLaw {
    pub fn ep_sign(self) -> f64 {
        match self {
            PositionLaw::CrossTermDoubling => -1.0,
            PositionLaw::CrossTermCancelling => 1.0,
        }
    }
}

impl Default for PositionGains {
    fn default() -> Self {
        Self::nominal()
    }
}

impl PositionGains {
    pub fn nominal() -> Self {
        Self {
            kp: Vector3::new(18.0, 9.0, 18.0),
            beta: Vector3::new(0.4, 0.4, 0.4),
            kv_nominal: Vector3::new(DEFAULT_KV_NOMINAL, DEFAULT_KV_NOMINAL, DEFAULT_KV_NOMINAL),
            law: PositionLaw::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_pos = |v: &Vector3<f64>| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !all_pos(&self.kp) || !all_pos(&self.beta) {
            return Err(Error::InvalidParameter("position gains must be positive".into()));
        }
        if !all_pos(&self.kv_nominal) {
            return Err(Error::InvalidParameter("kv_nominal must be positive".into()));
        }
        Ok(())
    }
}

pub const DEFAULT_KV_NOMINAL: f64 = 10.0;

/// Estimated velocity-loop gain and the time it was last updated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub kv_hat: Vector3<f64>,
    pub t_last: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionError {
    /// `X_d − X`, m.
    pub ep: Vector3<f64>,
    /// `K_p E_p + Ẋ_d − ν`, m/s.
    pub ev: Vector3<f64>,
}

pub fn position_errors(r: &ReferenceTrajectory, s: &SimState, gains: &PositionGains) -> PositionError {
    let ep = r.position - s.position();
    let x_temp = gains.kp.component_mul(&ep) + r.velocity;
    PositionError { ep, ev: x_temp - s.velocity() }
}

/// `Ė_p = Ẋ_d − ν`, taken analytically from the state.
pub fn position_error_rate(r: &ReferenceTrajectory, s: &SimState) -> Vector3<f64> {
    r.velocity - s.velocity()
}

/// Explicit Euler step of `K̂̇_v = B E_v²`.
pub fn update_adaptation(a: &AdaptiveState, e: &PositionError, gains: &PositionGains, dt: f64) -> AdaptiveState {
    debug_assert!(dt > 0.0);
    let growth = gains.beta.component_mul(&e.ev.component_mul(&e.ev)) * dt;
    AdaptiveState { kv_hat: a.kv_hat + growth, t_last: a.t_last + dt }
}

/// Drag term `Q_p = −k_dl ν / m_s`.
pub fn drag_term(s: &SimState, p: &SystemParams) -> Vector3<f64> {
    -s.velocity() * (p.linear_drag / p.total_mass())
}

pub fn virtual_controls(
    e: &PositionError,
    ep_dot: &Vector3<f64>,
    a: &AdaptiveState,
    r: &ReferenceTrajectory,
    s: &SimState,
    gains: &PositionGains,
    p: &SystemParams,
) -> Vector3<f64> {
    e.ep * gains.law.ep_sign() + a.kv_hat.component_mul(&e.ev) + gains.kp.component_mul(ep_dot) + r.acceleration - drag_term(s, p)
}

/// Total thrust and the roll/pitch set-point produced by the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustAttitude {
    pub thrust: f64,
    pub roll: f64,
    pub pitch: f64,
}

/// Inverts the thrust-direction map for a virtual acceleration `u_v`.
///
/// The vertical component combines gravity with `u_vz`, since the z-row of the
/// virtual control is `−g + cφcθ U_th / m_s`.
pub fn extract_thrust_attitude(uv: &Vector3<f64>, yaw_d: f64, p: &SystemParams) -> Result<ThrustAttitude> {
    if !uv.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("virtual control"));
    }
    let lift = uv.z + p.gravity;
    if lift <= 0.0 {
        return Err(Error::ThrustSingularity(lift));
    }
    let thrust = p.total_mass() * (uv.x * uv.x + uv.y * uv.y + lift * lift).sqrt();
    let (s, c) = yaw_d.sin_cos();
    let pitch = ((uv.x * c + uv.y * s) / lift).atan();
    let roll = (pitch.cos() * (uv.x * s - uv.y * c) / lift).atan();
    Ok(ThrustAttitude { thrust, roll, pitch })
}

/// Per-axis `V_pv = ½E_p² + ½E_v² + ½B⁻¹(K_v − K̂_v)²`.
pub fn lyapunov_pv(e: &PositionError, a: &AdaptiveState, gains: &PositionGains) -> Vector3<f64> {
    let kt = gains.kv_nominal - a.kv_hat;
    (e.ep.component_mul(&e.ep) + e.ev.component_mul(&e.ev) + kt.component_mul(&kt).component_div(&gains.beta)) * 0.5
}

/// Everything one outer-loop update produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionOutput {
    pub error: PositionError,
    pub virtual_control: Vector3<f64>,
    pub command: ThrustAttitude,
    /// Set when [`CommandLimits`] changed `U_v`.
    pub limited: bool,
    /// Set when `u_vz + g ≤ 0` and the previous command was held.
    pub singular: bool,
}

/// Envelope applied to `U_v` before thrust/attitude extraction.
///
/// The raw law asks for accelerations far outside what the vehicle can do
/// right after a large reference jump (`K̂_v E_v` alone is ~20 m/s² one outer
/// step into a 1 m step). Clamping keeps the commanded tilt below the plant's
/// divergence guard and `u_vz + g` strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandLimits {
    /// Largest commanded tilt, rad.
    pub max_tilt: f64,
    /// Largest upward `u_vz`, m/s².
    pub max_climb_accel: f64,
    /// Largest downward `u_vz`, m/s²; must stay below `g`.
    pub max_descent_accel: f64,
    /// Hold `K̂_v` on axes whose command was clamped.
    pub anti_windup: bool,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self { max_tilt: DEFAULT_MAX_TILT_CMD, max_climb_accel: 5.0, max_descent_accel: 5.0, anti_windup: true }
    }
}

pub const DEFAULT_MAX_TILT_CMD: f64 = 0.35;

impl CommandLimits {
    /// No clamping at all; the law is applied as written.
    pub fn unlimited() -> Self {
        Self { max_tilt: f64::INFINITY, max_climb_accel: f64::INFINITY, max_descent_accel: f64::INFINITY, anti_windup: false }
    }

    pub fn validate(&self, p: &SystemParams) -> Result<()> {
        let ok = self.max_tilt > 0.0
            && self.max_climb_accel > 0.0
            && self.max_descent_accel > 0.0
            && !self.max_tilt.is_nan()
            && (self.max_descent_accel < p.gravity || self.max_descent_accel.is_infinite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("command limits must be positive with descent below g".into()))
        }
    }

    /// Clamps `u_vz`, then scales the horizontal part so the tilt fits.
    pub fn apply(&self, uv: &Vector3<f64>, gravity: f64) -> Vector3<f64> {
        let z = uv.z.clamp(-self.max_descent_accel, self.max_climb_accel);
        let h = uv.xy();
        let h_max = (z + gravity) * self.max_tilt.min(std::f64::consts::FRAC_PI_2).tan();
        let n = h.norm();
        let h = if h_max.is_finite() && h_max >= 0.0 && n > h_max { h * (h_max / n) } else { h };
        Vector3::new(h.x, h.y, z)
    }
}

/// Stateful outer loop: owns the adaptive gain and the last good command.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionController {
    pub gains: PositionGains,
    pub params: SystemParams,
    pub limits: CommandLimits,
    adaptive: AdaptiveState,
    last: ThrustAttitude,
}

impl PositionController {
    pub fn new(gains: PositionGains, params: SystemParams, kv_initial: Vector3<f64>) -> Self {
        let last = ThrustAttitude { thrust: params.hover_thrust(), roll: 0.0, pitch: 0.0 };
        Self {
            gains,
            params,
            limits: CommandLimits::default(),
            adaptive: AdaptiveState { kv_hat: kv_initial, t_last: 0.0 },
            last,
        }
    }

    pub fn with_limits(mut self, limits: CommandLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn adaptive(&self) -> &AdaptiveState {
        &self.adaptive
    }

    /// One outer-loop update at interval `dt`. With `adapt == false` the gain
    /// estimate is left untouched.
    pub fn update(&mut self, r: &ReferenceTrajectory, s: &SimState, dt: f64, adapt: bool) -> PositionOutput {
        let error = position_errors(r, s, &self.gains);
        let ep_dot = position_error_rate(r, s);
        let uv = virtual_controls(&error, &ep_dot, &self.adaptive, r, s, &self.gains, &self.params);
        let limited = self.limits.apply(&uv, self.params.gravity);
        if adapt {
            let next = update_adaptation(&self.adaptive, &error, &self.gains, dt);
            // the Lyapunov argument assumes U_v is applied; skip axes that were clamped
            for i in 0..3 {
                if !self.limits.anti_windup || limited[i] == uv[i] {
                    self.adaptive.kv_hat[i] = next.kv_hat[i];
                }
            }
        }
        self.adaptive.t_last = s.t;
        let was_limited = limited != uv;
        match extract_thrust_attitude(&limited, r.yaw, &self.params) {
            Ok(cmd) => {
                self.last = cmd;
                PositionOutput { error, virtual_control: uv, command: cmd, limited: was_limited, singular: false }
            }
            Err(_) => PositionOutput { error, virtual_control: uv, command: self.last, limited: was_limited, singular: true },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn reference_at(position: Vector3<f64>, velocity: Vector3<f64>) -> ReferenceTrajectory {
        ReferenceTrajectory { position, velocity, ..Default::default() }
    }

    #[test]
    fn perfect_tracking_has_no_error() {
        let s = SimState::from_parts(0.0, Vector3::new(1.0, 2.0, 3.0), Vector3::new(0.1, 0.0, -0.2), Vector3::zeros(), Vector3::zeros());
        let r = reference_at(s.position(), s.velocity());
        let e = position_errors(&r, &s, &PositionGains::nominal());
        assert_eq!(e.ep, Vector3::zeros());
        assert_eq!(e.ev, Vector3::zeros());
    }

    #[test]
    fn unit_offset_gives_kp_velocity_error() {
        let s = SimState::default();
        let r = reference_at(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros());
        let e = position_errors(&r, &s, &PositionGains::nominal());
        assert_eq!(e.ev, Vector3::new(18.0, 0.0, 0.0));
    }

    #[test]
    fn reference_velocity_is_fed_forward() {
        let s = SimState::default();
        let r = reference_at(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0));
        let e = position_errors(&r, &s, &PositionGains::nominal());
        assert_eq!(e.ev, Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn adaptation_square_law() {
        let g = PositionGains::nominal();
        let a = AdaptiveState::default();
        let still = update_adaptation(&a, &PositionError::default(), &g, 0.01);
        assert_eq!(still.kv_hat, a.kv_hat);

        let e = PositionError { ep: Vector3::zeros(), ev: Vector3::new(1.0, 1.0, 1.0) };
        let next = update_adaptation(&a, &e, &g, 0.01);
        for k in next.kv_hat.iter() {
            assert_relative_eq!(*k, 0.004, epsilon = 1e-15);
        }
        let flipped = PositionError { ep: e.ep, ev: -e.ev };
        assert_eq!(update_adaptation(&a, &flipped, &g, 0.01), next);
    }

    #[test]
    fn virtual_control_vanishes_at_equilibrium() {
        let p = SystemParams::nominal();
        let s = SimState::default();
        let r = ReferenceTrajectory::default();
        let uv = virtual_controls(&PositionError::default(), &Vector3::zeros(), &AdaptiveState::default(), &r, &s, &PositionGains::nominal(), &p);
        assert_eq!(uv, Vector3::zeros());
    }

    #[test]
    fn drag_is_compensated() {
        let p = SystemParams::nominal();
        let s = SimState::from_parts(0.0, Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::zeros(), Vector3::zeros());
        let uv = virtual_controls(
            &PositionError::default(),
            &Vector3::zeros(),
            &AdaptiveState::default(),
            &ReferenceTrajectory::default(),
            &s,
            &PositionGains::nominal(),
            &p,
        );
        assert_relative_eq!(uv.x, 55e-4 / 3.25, epsilon = 1e-15);
        assert_eq!(uv.y, 0.0);
    }

    #[test]
    fn unit_position_error_substitution() {
        // E_px = 1 with the vehicle at rest: E_vx = 18, Ė_px = 0.
        let p = SystemParams::nominal();
        let g = PositionGains::nominal();
        let s = SimState::default();
        let r = reference_at(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros());
        let e = position_errors(&r, &s, &g);
        let a = AdaptiveState { kv_hat: Vector3::new(2.0, 0.0, 0.0), t_last: 0.0 };
        let uv = virtual_controls(&e, &position_error_rate(&r, &s), &a, &r, &s, &g, &p);
        // 1 + 2·18 + 18·0 + 0 - 0
        assert_relative_eq!(uv.x, 37.0, epsilon = 1e-14);
        let g = PositionGains { law: PositionLaw::CrossTermDoubling, ..g };
        let uv = virtual_controls(&e, &position_error_rate(&r, &s), &a, &r, &s, &g, &p);
        assert_relative_eq!(uv.x, 35.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_virtual_control_is_hover() {
        let p = SystemParams::nominal();
        let out = extract_thrust_attitude(&Vector3::zeros(), 0.0, &p).unwrap();
        assert_relative_eq!(out.thrust, 31.8825, epsilon = 1e-9);
        assert_eq!(out.roll, 0.0);
        assert_eq!(out.pitch, 0.0);
    }

    #[test]
    fn forward_acceleration_of_g_pitches_forty_five_degrees() {
        let p = SystemParams::nominal();
        let out = extract_thrust_attitude(&Vector3::new(9.81, 0.0, 0.0), 0.0, &p).unwrap();
        assert_relative_eq!(out.pitch, FRAC_PI_4, epsilon = 1e-15);
        assert_relative_eq!(out.thrust, 3.25 * 9.81 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn yaw_quarter_turn_swaps_axes() {
        let p = SystemParams::nominal();
        let uv = Vector3::new(0.7, -1.3, 0.4);
        let swapped = Vector3::new(-1.3, 0.7, 0.4);
        let a = extract_thrust_attitude(&uv, std::f64::consts::FRAC_PI_2, &p).unwrap();
        let b = extract_thrust_attitude(&swapped, 0.0, &p).unwrap();
        assert_relative_eq!(a.pitch, b.pitch, epsilon = 1e-15);
    }

    #[test]
    fn thrust_singularity_detected() {
        let p = SystemParams::nominal();
        let err = extract_thrust_attitude(&Vector3::new(0.0, 0.0, -9.81), 0.0, &p).unwrap_err();
        assert!(matches!(err, Error::ThrustSingularity(_)));
    }

    #[test]
    fn controller_holds_previous_command_on_singularity() {
        let p = SystemParams::nominal();
        let mut c = PositionController::new(PositionGains::nominal(), p.clone(), Vector3::new(1.0, 1.0, 1.0))
            .with_limits(CommandLimits::unlimited());
        let s = SimState::default();
        // far below: u_vz ≈ -E_pz + k̂·18·E_pz, strongly negative for E_pz = -10
        let r = reference_at(Vector3::new(0.0, 0.0, -10.0), Vector3::zeros());
        let out = c.update(&r, &s, 0.01, false);
        assert!(out.singular);
        assert_relative_eq!(out.command.thrust, p.hover_thrust(), epsilon = 1e-12);
    }

    #[test]
    fn limits_pass_small_commands_through() {
        let l = CommandLimits::default();
        let uv = Vector3::new(0.5, -0.3, 1.0);
        assert_eq!(l.apply(&uv, 9.81), uv);
    }

    #[test]
    fn limits_clamp_vertical_then_tilt() {
        let l = CommandLimits::default();
        let out = l.apply(&Vector3::new(30.0, 40.0, -20.0), 9.81);
        assert_eq!(out.z, -5.0);
        let tilt = out.xy().norm().atan2(out.z + 9.81);
        assert_relative_eq!(tilt, l.max_tilt, epsilon = 1e-12);
        // direction of the horizontal demand survives
        assert_relative_eq!(out.y / out.x, 40.0 / 30.0, epsilon = 1e-12);
    }

    #[test]
    fn unlimited_is_identity() {
        let uv = Vector3::new(100.0, -50.0, -30.0);
        assert_eq!(CommandLimits::unlimited().apply(&uv, 9.81), uv);
    }

    #[test]
    fn descent_limit_must_stay_below_g() {
        let p = SystemParams::nominal();
        assert!(CommandLimits::default().validate(&p).is_ok());
        assert!(CommandLimits::unlimited().validate(&p).is_ok());
        let bad = CommandLimits { max_descent_accel: 10.0, ..CommandLimits::default() };
        assert!(bad.validate(&p).is_err());
    }

    #[test]
    fn clamped_axes_do_not_adapt() {
        let p = SystemParams::nominal();
        let kv0 = Vector3::new(1.0, 1.0, 1.0);
        let mut c = PositionController::new(PositionGains::nominal(), p, kv0);
        let s = SimState::default();
        let r = reference_at(Vector3::new(5.0, 0.0, 0.01), Vector3::zeros());
        let out = c.update(&r, &s, 0.01, true);
        assert!(out.limited);
        assert_eq!(c.adaptive().kv_hat.x, 1.0);
        assert!(c.adaptive().kv_hat.z > 1.0);
    }
}
