//! Run logs and their CSV form.
//!
//! Column order is fixed; see [`COLUMNS`]. Angles are in rad, forces in N,
//! moments in N·m, rotor speeds in rad/s. Rotor-speed cells are empty on rows
//! where the allocated command needs a negative rotor thrust.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::admittance::ReferenceTrajectory;
use crate::allocation::ActuatorCommand;
use crate::attitude_ctrl::AttitudeReference;
use crate::dynamics::{SimState, WrenchCommand};
use crate::error::{Error, Result};

/// One logged sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub state: SimState,
    pub reference: ReferenceTrajectory,
    pub attitude_reference: AttitudeReference,
    pub wrench: WrenchCommand,
    pub actuators: ActuatorCommand,
    pub rotor_speeds: Option<[[f64; 4]; 2]>,
    pub ep: Vector3<f64>,
    pub ev: Vector3<f64>,
    pub e_phi: Vector3<f64>,
    pub e_phi_rate: Vector3<f64>,
    pub s_phi: Vector3<f64>,
    pub kv_hat: Vector3<f64>,
    pub v_pv: Vector3<f64>,
    pub v_phi: Vector3<f64>,
    pub v_phi_dot: Vector3<f64>,
    /// Force actually pushing on the payload.
    pub f_applied: Vector3<f64>,
    /// Measured force after the gate, as seen by the admittance layer.
    pub f_h: Vector3<f64>,
    pub gate_open: bool,
    /// The outer loop clamped `U_v` at its last update.
    pub command_limited: bool,
}

impl LogRow {
    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.map_or(true, f64::is_finite))
    }

    /// Values in [`COLUMNS`] order.
    pub fn values(&self) -> Vec<Option<f64>> {
        let mut v: Vec<Option<f64>> = Vec::with_capacity(COLUMNS.len());
        let push3 = |v: &mut Vec<Option<f64>>, x: &Vector3<f64>| v.extend(x.iter().map(|a| Some(*a)));
        v.push(Some(self.state.t));
        v.extend(self.state.eta.iter().map(|a| Some(*a)));
        push3(&mut v, &self.reference.position);
        push3(&mut v, &self.reference.velocity);
        push3(&mut v, &self.reference.acceleration);
        v.push(Some(self.reference.yaw));
        push3(&mut v, &self.attitude_reference.angles);
        push3(&mut v, &self.attitude_reference.rates);
        push3(&mut v, &self.attitude_reference.accels);
        v.push(Some(self.wrench.thrust));
        push3(&mut v, &self.wrench.moments);
        v.extend(self.actuators.u_d.iter().map(|a| Some(*a)));
        match &self.rotor_speeds {
            Some(q) => v.extend(q.iter().flatten().map(|a| Some(*a))),
            None => v.extend(std::iter::repeat(None).take(8)),
        }
        for x in [
            &self.ep,
            &self.ev,
            &self.e_phi,
            &self.e_phi_rate,
            &self.s_phi,
            &self.kv_hat,
            &self.v_pv,
            &self.v_phi,
            &self.v_phi_dot,
            &self.f_applied,
            &self.f_h,
        ] {
            push3(&mut v, x);
        }
        v.push(Some(if self.gate_open { 1.0 } else { 0.0 }));
        v.push(Some(if self.command_limited { 1.0 } else { 0.0 }));
        v
    }
}

pub const COLUMNS: &[&str] = &[
    "t_s",
    "x_m", "vx_mps", "y_m", "vy_mps", "z_m", "vz_mps",
    "roll_rad", "roll_rate_radps", "pitch_rad", "pitch_rate_radps", "yaw_rad", "yaw_rate_radps",
    "ref_x_m", "ref_y_m", "ref_z_m",
    "ref_vx_mps", "ref_vy_mps", "ref_vz_mps",
    "ref_ax_mps2", "ref_ay_mps2", "ref_az_mps2",
    "ref_yaw_rad",
    "roll_d_rad", "pitch_d_rad", "yaw_d_rad",
    "roll_rate_d_radps", "pitch_rate_d_radps", "yaw_rate_d_radps",
    "roll_acc_d_radps2", "pitch_acc_d_radps2", "yaw_acc_d_radps2",
    "thrust_n", "moment_x_nm", "moment_y_nm", "moment_z_nm",
    "f_q1_n", "tau_q11_nm", "tau_q12_nm", "tau_q13_nm",
    "f_q2_n", "tau_q21_nm", "tau_q22_nm", "tau_q23_nm",
    "w11_radps", "w12_radps", "w13_radps", "w14_radps",
    "w21_radps", "w22_radps", "w23_radps", "w24_radps",
    "ep_x_m", "ep_y_m", "ep_z_m",
    "ev_x_mps", "ev_y_mps", "ev_z_mps",
    "e_roll_rad", "e_pitch_rad", "e_yaw_rad",
    "e_roll_rate_radps", "e_pitch_rate_radps", "e_yaw_rate_radps",
    "s_roll", "s_pitch", "s_yaw",
    "kv_hat_x", "kv_hat_y", "kv_hat_z",
    "v_pv_x", "v_pv_y", "v_pv_z",
    "v_phi_roll", "v_phi_pitch", "v_phi_yaw",
    "v_phi_dot_roll", "v_phi_dot_pitch", "v_phi_dot_yaw",
    "f_applied_x_n", "f_applied_y_n", "f_applied_z_n",
    "f_h_x_n", "f_h_y_n", "f_h_z_n",
    "gate_open",
    "cmd_limited",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Diverged { t_s: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `u_vz + g ≤ 0`; the previous thrust and attitude target were held.
    ThrustSingularity,
    /// An allocated quadrotor thrust was negative.
    NegativeQuadThrust,
    /// A rotor would need negative thrust.
    RotorSaturation,
    /// A live force command arrived too old and was dropped.
    StaleCommand,
}

/// Start of a streak of one kind of event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_s: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub scenario_name: String,
    pub rows: Vec<LogRow>,
    pub status: RunStatus,
    pub events: Vec<Event>,
}

impl RunLog {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(COLUMNS).map_err(err)?;
        for row in &self.rows {
            let rec: Vec<String> = row.values().iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect();
            w.write_record(&rec).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}
