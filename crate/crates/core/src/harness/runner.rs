//! The cascaded loop: admittance and position control at the outer rate,
//! attitude control, allocation and the RK4 plant at every step.

use nalgebra::Vector3;

use super::log::{Event, EventKind, LogRow, RunLog, RunStatus};
use super::scenario::Scenario;
use crate::admittance::{Admittance, ForceSensors, ReferenceTrajectory};
use crate::allocation::{mix_command, ActuatorCommand, Allocator, RotorModel};
use crate::attitude_ctrl::{attitude_control, surface_rate, AttitudeGains, AttitudeReference, SetpointFilter};
use crate::dynamics::{ExternalForce, Plant, SimState, WrenchCommand};
use crate::error::{Error, Result};
use crate::position_ctrl::{lyapunov_pv, position_errors, PositionController};

/// What one plant step did, for callers that drive the loop themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Present when this step was a logging instant.
    pub row: Option<LogRow>,
    pub diverged: bool,
}

/// Loop signals that live between outer-loop updates.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Held {
    thrust: f64,
    tilt_target: Vector3<f64>,
    f_h: Vector3<f64>,
    limited: bool,
}

/// A scenario being stepped.
pub struct Simulation {
    scenario: Scenario,
    plant: Plant,
    allocator: Allocator,
    rotor: RotorModel,
    position: PositionController,
    attitude_gains: AttitudeGains,
    filter: SetpointFilter,
    admittance: Admittance,
    sensors: ForceSensors,
    state: SimState,
    step: u64,
    outer_every: u64,
    log_every: u64,
    held: Held,
    last_row: Option<LogRow>,
    events: Vec<Event>,
    streaks: [bool; 4],
    diverged: Option<Error>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let params = scenario.system_params();
        let plant = Plant::new(params.clone()).with_max_tilt(scenario.vehicle.max_tilt_rad);
        let allocator = Allocator::for_vehicle(&params, scenario.allocation_weights())?;
        let position = PositionController::new(
            scenario.position_gains(),
            params.clone(),
            Vector3::from(scenario.position.kv_initial),
        )
        .with_limits(scenario.command_limits());
        let start_ref = ReferenceTrajectory::hold(scenario.initial_reference_position());
        let admittance = Admittance::new(scenario.admittance_params(), start_ref);
        let sensors = ForceSensors::new(scenario.admittance.sensor_noise_std_n, scenario.seed)?;
        let state = scenario.initial_state();
        let held = Held {
            thrust: params.hover_thrust(),
            tilt_target: Vector3::from(scenario.attitude.frozen_target_rad),
            f_h: Vector3::zeros(),
            limited: false,
        };
        Ok(Self {
            plant,
            allocator,
            rotor: scenario.rotor_model(),
            position,
            attitude_gains: scenario.attitude_gains(),
            filter: SetpointFilter::new(scenario.attitude.setpoint_filter_hz),
            admittance,
            sensors,
            state,
            step: 0,
            outer_every: scenario.outer_decimation(),
            log_every: scenario.log_decimation(),
            held,
            last_row: None,
            events: Vec::new(),
            streaks: [false; 4],
            diverged: None,
            scenario,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn reference(&self) -> &ReferenceTrajectory {
        self.admittance.reference()
    }

    pub fn kv_hat(&self) -> Vector3<f64> {
        self.position.adaptive().kv_hat
    }

    /// Latest logged row, if any.
    pub fn last_row(&self) -> Option<&LogRow> {
        self.last_row.as_ref()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.diverged.is_some() || self.step >= self.scenario.total_steps()
    }

    fn landed(&self) -> bool {
        self.state.position().z <= self.scenario.initial.landed_altitude_m && self.state.velocity().norm() < 0.05
    }

    fn note(&mut self, kind: EventKind, active: bool, detail: impl FnOnce() -> String) {
        let slot = kind as usize;
        if active && !self.streaks[slot] {
            self.events.push(Event { t_s: self.state.t, kind, detail: detail() });
        }
        self.streaks[slot] = active;
    }

    /// Records a dropped live command.
    pub fn note_stale_command(&mut self, age_ms: f64) {
        self.events.push(Event {
            t_s: self.state.t,
            kind: EventKind::StaleCommand,
            detail: format!("command {age_ms:.0} ms old"),
        });
    }

    fn outer_update(&mut self, applied: &Vector3<f64>) {
        let dt_outer = self.outer_every as f64 * self.scenario.dt_s;
        let measured = self.sensors.measure(applied);
        self.held.f_h = self.admittance.step(&measured.total, dt_outer);
        if self.scenario.freeze_position_loop {
            return;
        }
        let adapt = self.admittance.gate_open() || !self.landed();
        let r = *self.admittance.reference();
        let out = self.position.update(&r, &self.state, dt_outer, adapt);
        let lift = out.virtual_control.z + self.plant.params.gravity;
        self.note(EventKind::ThrustSingularity, out.singular, || format!("u_vz + g = {lift:.4}"));
        self.held.thrust = out.command.thrust;
        self.held.limited = out.limited;
        self.held.tilt_target = Vector3::new(out.command.roll, out.command.pitch, r.yaw);
    }

    fn attitude_reference(&mut self) -> AttitudeReference {
        if self.scenario.freeze_position_loop {
            AttitudeReference::fixed(self.held.tilt_target)
        } else {
            self.filter.update(&self.held.tilt_target, self.scenario.dt_s)
        }
    }

    /// Advances one plant step under operator force `force` (N, world frame).
    pub fn step(&mut self, force: Vector3<f64>) -> Result<StepOutcome> {
        if let Some(e) = &self.diverged {
            return Err(e.clone());
        }
        let applied = ExternalForce::saturated(force, self.scenario.admittance.force_limit_n)?;
        if self.step % self.outer_every == 0 {
            self.outer_update(&applied.0);
        }

        let att_ref = self.attitude_reference();
        let params = &self.plant.params;
        let att = attitude_control(&att_ref, &self.state, &self.attitude_gains, params);
        let wrench = WrenchCommand::new(self.held.thrust, att.moments);
        let cmd = self.allocator.allocate(&wrench);
        let applied_wrench = self.allocator.wrench_of(&cmd);
        let rotors = mix_command(&cmd, &self.rotor);

        let quads_ok = cmd.thrusts_feasible();
        self.note(EventKind::NegativeQuadThrust, !quads_ok, || {
            format!("F_q = ({:.3}, {:.3}) N", cmd.u_d[0], cmd.u_d[4])
        });
        let rotor_err = rotors.as_ref().err().map(|e| e.to_string());
        self.note(EventKind::RotorSaturation, rotor_err.is_some(), || rotor_err.clone().unwrap_or_default());

        let row = if self.step % self.log_every == 0 {
            let row = self.log_row(&att_ref, &wrench, &applied_wrench, &cmd, rotors.ok(), &applied.0)?;
            self.last_row = Some(row.clone());
            Some(row)
        } else {
            None
        };

        match self.plant.step(&self.state, &applied_wrench, &applied, self.scenario.dt_s) {
            Ok(mut next) => {
                self.step += 1;
                // keep the clock on the step grid instead of accumulating dt
                next.t = self.step as f64 * self.scenario.dt_s;
                self.state = next;
                Ok(StepOutcome { row, diverged: false })
            }
            Err(e @ Error::Diverged(_)) => {
                self.diverged = Some(e);
                Ok(StepOutcome { row, diverged: true })
            }
            Err(e) => Err(e),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn log_row(
        &self,
        att_ref: &AttitudeReference,
        wrench: &WrenchCommand,
        applied_wrench: &WrenchCommand,
        cmd: &ActuatorCommand,
        rotor_speeds: Option<[[f64; 4]; 2]>,
        f_applied: &Vector3<f64>,
    ) -> Result<LogRow> {
        let params = &self.plant.params;
        let gains = &self.attitude_gains;
        let reference = *self.admittance.reference();
        let perr = position_errors(&reference, &self.state, &self.position.gains);
        let adaptive = *self.position.adaptive();
        let sliding = crate::attitude_ctrl::SlidingState::from_tracking(att_ref, &self.state, gains);
        let sdot = surface_rate(att_ref, &self.state, applied_wrench, gains, params)?;
        Ok(LogRow {
            state: self.state,
            reference,
            attitude_reference: *att_ref,
            wrench: *wrench,
            actuators: *cmd,
            rotor_speeds,
            ep: perr.ep,
            ev: perr.ev,
            e_phi: sliding.error,
            e_phi_rate: sliding.error_rate,
            s_phi: sliding.surface,
            kv_hat: adaptive.kv_hat,
            v_pv: lyapunov_pv(&perr, &adaptive, &self.position.gains),
            v_phi: sliding.lyapunov(),
            v_phi_dot: sliding.surface.component_mul(&sdot),
            f_applied: *f_applied,
            f_h: self.held.f_h,
            gate_open: self.admittance.gate_open(),
            command_limited: self.held.limited,
        })
    }

    /// Consumes the simulation into a log built from `rows`.
    pub fn finish(self, rows: Vec<LogRow>) -> RunLog {
        let status = match &self.diverged {
            Some(e) => RunStatus::Diverged { t_s: self.state.t, message: e.to_string() },
            None => RunStatus::Completed,
        };
        RunLog { scenario_name: self.scenario.name.clone(), rows, status, events: self.events }
    }
}

/// Runs a scripted scenario to completion or divergence.
pub fn run(scenario: &Scenario) -> Result<RunLog> {
    let mut sim = Simulation::new(scenario.clone())?;
    let mut rows = Vec::with_capacity((scenario.duration_s * scenario.log_rate_hz) as usize + 1);
    while !sim.is_finished() {
        let t = sim.time();
        let out = sim.step(scenario.scripted_force(t))?;
        if let Some(r) = out.row {
            rows.push(r);
        }
    }
    Ok(sim.finish(rows))
}
