//! Scenario files: TOML with the unit spelled out in every key.
//!
//! Every table is optional and falls back to the nominal vehicle and
//! controller constants. See `scenarios/` for complete files.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::admittance::AdmittanceParams;
use crate::allocation::{AllocationWeights, RotorModel};
use crate::attitude_ctrl::{AttitudeGains, Switching};
use crate::dynamics::{SimState, SystemParams, DEFAULT_FORCE_LIMIT, DEFAULT_MAX_TILT};
use crate::error::{Error, Result};
use crate::position_ctrl::{CommandLimits, PositionLaw, PositionGains, DEFAULT_KV_NOMINAL};

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub quad_mass_kg: f64,
    pub payload_mass_kg: f64,
    pub arm_length_m: f64,
    pub payload_length_m: f64,
    pub gravity_mps2: f64,
    pub inertia_kgm2: [f64; 3],
    pub linear_drag_nspm: f64,
    pub angular_drag_nms: f64,
    pub max_tilt_rad: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        let p = SystemParams::nominal();
        Self {
            quad_mass_kg: p.quad_mass,
            payload_mass_kg: p.payload_mass,
            arm_length_m: p.arm_length,
            payload_length_m: p.payload_length,
            gravity_mps2: p.gravity,
            inertia_kgm2: [p.inertia.x, p.inertia.y, p.inertia.z],
            linear_drag_nspm: p.linear_drag,
            angular_drag_nms: p.angular_drag,
            max_tilt_rad: DEFAULT_MAX_TILT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotorConfig {
    pub thrust_coeff_ns2prad2: f64,
    pub moment_coeff_nms2prad2: f64,
}

impl Default for RotorConfig {
    fn default() -> Self {
        let r = RotorModel::nominal(0.0);
        Self { thrust_coeff_ns2prad2: r.thrust_coeff, moment_coeff_nms2prad2: r.moment_coeff }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationConfig {
    pub weights: [f64; 8],
}

impl Default for AllocationConfig {
    fn default() -> Self {
        Self { weights: [1.0; 8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositionConfig {
    pub kp_per_s: [f64; 3],
    pub beta: [f64; 3],
    pub kv_initial: [f64; 3],
    pub kv_nominal: [f64; 3],
    /// Envelope on the virtual control; see [`CommandLimits`].
    pub max_tilt_cmd_rad: f64,
    pub max_climb_accel_mps2: f64,
    pub max_descent_accel_mps2: f64,
    pub anti_windup: bool,
    pub law: PositionLaw,
}

impl Default for PositionConfig {
    fn default() -> Self {
        let lim = CommandLimits::default();
        Self {
            kp_per_s: [18.0, 9.0, 18.0],
            beta: [0.4; 3],
            kv_initial: [0.0; 3],
            kv_nominal: [DEFAULT_KV_NOMINAL; 3],
            max_tilt_cmd_rad: lim.max_tilt,
            max_climb_accel_mps2: lim.max_climb_accel,
            max_descent_accel_mps2: lim.max_descent_accel,
            anti_windup: lim.anti_windup,
            law: PositionLaw::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchingKind {
    Sign,
    BoundaryLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttitudeConfig {
    pub zeta_per_s: [f64; 3],
    pub gamma: f64,
    pub epsilon: f64,
    pub kappa1_per_s: f64,
    pub kappa2: f64,
    pub switching: SwitchingKind,
    pub boundary_layer_width: f64,
    pub setpoint_filter_hz: f64,
    /// Fixed attitude target used when the position loop is frozen.
    pub frozen_target_rad: [f64; 3],
}

impl Default for AttitudeConfig {
    fn default() -> Self {
        Self {
            zeta_per_s: [22.0, 30.0, 22.0],
            gamma: 5.0,
            epsilon: 2.0,
            kappa1_per_s: 85.0,
            kappa2: 55.0,
            switching: SwitchingKind::Sign,
            boundary_layer_width: 0.01,
            setpoint_filter_hz: 20.0,
            frozen_target_rad: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmittanceConfig {
    pub virtual_mass_kg: [f64; 3],
    pub virtual_damping_nspm: [f64; 3],
    pub virtual_stiffness_npm: [f64; 3],
    pub threshold_n: f64,
    pub release_ratio: f64,
    pub sensor_noise_std_n: f64,
    pub force_limit_n: f64,
}

impl Default for AdmittanceConfig {
    fn default() -> Self {
        Self {
            virtual_mass_kg: [0.95; 3],
            virtual_damping_nspm: [1.54; 3],
            virtual_stiffness_npm: [0.0; 3],
            threshold_n: 0.5,
            release_ratio: 0.9,
            sensor_noise_std_n: 0.0,
            force_limit_n: DEFAULT_FORCE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub position_m: [f64; 3],
    pub velocity_mps: [f64; 3],
    pub attitude_rad: [f64; 3],
    pub rates_radps: [f64; 3],
    /// Initial reference position; defaults to `position_m`.
    pub reference_position_m: Option<[f64; 3]>,
    /// Below this altitude and speed the vehicle counts as landed.
    pub landed_altitude_m: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            position_m: [0.0; 3],
            velocity_mps: [0.0; 3],
            attitude_rad: [0.0; 3],
            rates_radps: [0.0; 3],
            reference_position_m: None,
            landed_altitude_m: 0.05,
        }
    }
}

/// Constant operator push over `[t_start_s, t_end_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSegment {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub force_n: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub live_mode: bool,
    pub outer_loop_hz: f64,
    pub log_rate_hz: f64,
    /// Hold thrust at hover and the attitude target fixed; attitude loop only.
    pub freeze_position_loop: bool,
    pub vehicle: VehicleConfig,
    pub rotor: RotorConfig,
    pub allocation: AllocationConfig,
    pub position: PositionConfig,
    pub attitude: AttitudeConfig,
    pub admittance: AdmittanceConfig,
    pub initial: InitialConfig,
    #[serde(rename = "force_segment")]
    pub force_segments: Vec<ForceSegment>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            duration_s: 10.0,
            dt_s: 0.001,
            seed: 0,
            live_mode: false,
            outer_loop_hz: 100.0,
            log_rate_hz: 100.0,
            freeze_position_loop: false,
            vehicle: VehicleConfig::default(),
            rotor: RotorConfig::default(),
            allocation: AllocationConfig::default(),
            position: PositionConfig::default(),
            attitude: AttitudeConfig::default(),
            admittance: AdmittanceConfig::default(),
            initial: InitialConfig::default(),
            force_segments: Vec::new(),
        }
    }
}

/// Number of plant steps in one period of `rate_hz`, if it is a whole number.
fn decimation(dt: f64, rate_hz: f64) -> Option<u64> {
    let ratio = 1.0 / (rate_hz * dt);
    let n = ratio.round();
    ((ratio - n).abs() < 1e-9 && n >= 1.0).then_some(n as u64)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn system_params(&self) -> SystemParams {
        let v = &self.vehicle;
        SystemParams {
            quad_mass: v.quad_mass_kg,
            payload_mass: v.payload_mass_kg,
            arm_length: v.arm_length_m,
            payload_length: v.payload_length_m,
            gravity: v.gravity_mps2,
            inertia: v3(v.inertia_kgm2),
            linear_drag: v.linear_drag_nspm,
            angular_drag: v.angular_drag_nms,
        }
    }

    pub fn rotor_model(&self) -> RotorModel {
        RotorModel {
            thrust_coeff: self.rotor.thrust_coeff_ns2prad2,
            moment_coeff: self.rotor.moment_coeff_nms2prad2,
            arm_length: self.vehicle.arm_length_m,
        }
    }

    pub fn allocation_weights(&self) -> AllocationWeights {
        AllocationWeights(self.allocation.weights)
    }

    pub fn position_gains(&self) -> PositionGains {
        PositionGains {
            kp: v3(self.position.kp_per_s),
            beta: v3(self.position.beta),
            kv_nominal: v3(self.position.kv_nominal),
            law: self.position.law,
        }
    }

    pub fn command_limits(&self) -> CommandLimits {
        CommandLimits {
            max_tilt: self.position.max_tilt_cmd_rad,
            max_climb_accel: self.position.max_climb_accel_mps2,
            max_descent_accel: self.position.max_descent_accel_mps2,
            anti_windup: self.position.anti_windup,
        }
    }

    pub fn attitude_gains(&self) -> AttitudeGains {
        let a = &self.attitude;
        AttitudeGains {
            zeta: v3(a.zeta_per_s),
            gamma: a.gamma,
            epsilon: a.epsilon,
            kappa1: a.kappa1_per_s,
            kappa2: a.kappa2,
            switching: match a.switching {
                SwitchingKind::Sign => Switching::Sign,
                SwitchingKind::BoundaryLayer => Switching::BoundaryLayer { width: a.boundary_layer_width },
            },
        }
    }

    pub fn admittance_params(&self) -> AdmittanceParams {
        let a = &self.admittance;
        AdmittanceParams {
            mass: v3(a.virtual_mass_kg),
            damping: v3(a.virtual_damping_nspm),
            stiffness: v3(a.virtual_stiffness_npm),
            threshold: a.threshold_n,
            release_ratio: a.release_ratio,
        }
    }

    pub fn initial_state(&self) -> SimState {
        let i = &self.initial;
        SimState::from_parts(0.0, v3(i.position_m), v3(i.velocity_mps), v3(i.attitude_rad), v3(i.rates_radps))
    }

    pub fn initial_reference_position(&self) -> Vector3<f64> {
        v3(self.initial.reference_position_m.unwrap_or(self.initial.position_m))
    }

    /// Plant steps per outer-loop (admittance + position) update.
    pub fn outer_decimation(&self) -> u64 {
        decimation(self.dt_s, self.outer_loop_hz).unwrap_or(1)
    }

    /// Plant steps per logged row.
    pub fn log_decimation(&self) -> u64 {
        decimation(self.dt_s, self.log_rate_hz).unwrap_or(1)
    }

    pub fn total_steps(&self) -> u64 {
        (self.duration_s / self.dt_s).round() as u64
    }

    /// Scripted operator force at time `t`.
    pub fn scripted_force(&self, t: f64) -> Vector3<f64> {
        self.force_segments
            .iter()
            .find(|s| t >= s.t_start_s && t < s.t_end_s)
            .map(|s| v3(s.force_n))
            .unwrap_or_else(Vector3::zeros)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad("duration_s must be positive".into());
        }
        if !(self.dt_s > 0.0 && self.dt_s <= 0.01) {
            return bad(format!("dt_s = {} outside (0, 0.01]", self.dt_s));
        }
        for (name, hz) in [("outer_loop_hz", self.outer_loop_hz), ("log_rate_hz", self.log_rate_hz)] {
            if decimation(self.dt_s, hz).is_none() {
                return bad(format!("{name} = {hz} is not a whole divisor of 1/dt_s"));
            }
        }
        self.system_params().validate()?;
        if !(self.vehicle.max_tilt_rad > 0.0 && self.vehicle.max_tilt_rad < std::f64::consts::FRAC_PI_2) {
            return bad("max_tilt_rad must lie in (0, π/2)".into());
        }
        self.rotor_model().validate()?;
        self.allocation_weights().validate()?;
        self.position_gains().validate()?;
        self.command_limits().validate(&self.system_params())?;
        self.attitude_gains().validate()?;
        self.admittance_params().validate()?;
        if !(self.admittance.sensor_noise_std_n >= 0.0 && self.admittance.force_limit_n > 0.0) {
            return bad("sensor noise must be ≥ 0 and force limit > 0".into());
        }
        if !(self.attitude.setpoint_filter_hz > 0.0) {
            return bad("setpoint_filter_hz must be positive".into());
        }
        if !self.initial_state().is_finite() {
            return bad("initial state must be finite".into());
        }
        let mut segs: Vec<&ForceSegment> = self.force_segments.iter().collect();
        segs.sort_by(|a, b| a.t_start_s.total_cmp(&b.t_start_s));
        for s in &segs {
            if !(s.t_start_s >= 0.0 && s.t_end_s > s.t_start_s && s.t_end_s <= self.duration_s) {
                return bad(format!("force segment [{}, {}) outside [0, duration]", s.t_start_s, s.t_end_s));
            }
            if !s.force_n.iter().all(|f| f.is_finite()) {
                return bad("force segment contains a non-finite force".into());
            }
        }
        for w in segs.windows(2) {
            if w[1].t_start_s < w[0].t_end_s {
                return bad(format!("force segments overlap at t = {}", w[1].t_start_s));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_nominal() {
        let s = Scenario::from_toml_str("").unwrap();
        assert_eq!(s.system_params(), SystemParams::nominal());
        assert_eq!(s.position_gains().kp, Vector3::new(18.0, 9.0, 18.0));
        assert_eq!(s.attitude_gains(), AttitudeGains::nominal());
        assert_eq!(s.admittance_params(), AdmittanceParams::nominal());
        assert_eq!(s.outer_decimation(), 10);
        assert_eq!(s.log_decimation(), 10);
    }

    #[test]
    fn parses_segments_and_units() {
        let text = r#"
            name = "push"
            duration_s = 5.0
            seed = 3

            [vehicle]
            payload_mass_kg = 0.5

            [attitude]
            switching = "boundary_layer"
            boundary_layer_width = 0.2

            [[force_segment]]
            t_start_s = 1.0
            t_end_s = 2.0
            force_n = [0.0, 0.0, 1.54]
        "#;
        let s = Scenario::from_toml_str(text).unwrap();
        assert_eq!(s.system_params().payload_mass, 0.5);
        assert_eq!(s.scripted_force(1.5), Vector3::new(0.0, 0.0, 1.54));
        assert_eq!(s.scripted_force(2.0), Vector3::zeros());
        assert_eq!(s.attitude_gains().switching, Switching::BoundaryLayer { width: 0.2 });
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Scenario::from_toml_str("duration = 3.0").is_err());
    }

    #[test]
    fn rejects_overlapping_segments() {
        let text = r#"
            duration_s = 5.0
            [[force_segment]]
            t_start_s = 1.0
            t_end_s = 3.0
            force_n = [1.0, 0.0, 0.0]
            [[force_segment]]
            t_start_s = 2.0
            t_end_s = 4.0
            force_n = [0.0, 1.0, 0.0]
        "#;
        let err = Scenario::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn rejects_segment_past_duration() {
        let text = "duration_s = 2.0\n[[force_segment]]\nt_start_s = 1.0\nt_end_s = 3.0\nforce_n = [1.0, 0.0, 0.0]\n";
        assert!(Scenario::from_toml_str(text).is_err());
    }

    #[test]
    fn rejects_rates_that_do_not_divide() {
        assert!(Scenario::from_toml_str("outer_loop_hz = 300.0").is_err());
        assert!(Scenario::from_toml_str("dt_s = 0.0").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let s = Scenario { name: "rt".into(), seed: 9, ..Default::default() };
        let back = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
