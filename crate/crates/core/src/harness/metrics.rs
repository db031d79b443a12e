//! Summary statistics over a run log.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::log::{EventKind, LogRow, RunLog, RunStatus};
use crate::attitude_ctrl::{reaching_time_bound, AttitudeGains};

/// Band used for settling times: m for position, rad for attitude.
pub const SETTLE_BAND: f64 = 0.01;
/// `|S|` below which the surface counts as reached.
pub const SURFACE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub rms: [f64; 3],
    pub max_abs: [f64; 3],
    /// Time after which the error stays inside [`SETTLE_BAND`]; `None` if it never does.
    pub settling_time_s: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachingStats {
    pub initial_surface: [f64; 3],
    /// First instant `|S|` drops below [`SURFACE_TOL`] or changes sign.
    pub measured_s: [Option<f64>; 3],
    pub bound_s: [f64; 3],
}

impl ReachingStats {
    pub fn within_bound(&self) -> bool {
        (0..3).all(|i| matches!(self.measured_s[i], Some(t) if t <= self.bound_s[i]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustStats {
    pub min_n: f64,
    pub max_n: f64,
    pub mean_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub status: RunStatus,
    pub rows: usize,
    pub duration_s: f64,
    pub position_error: AxisStats,
    pub attitude_error: AxisStats,
    pub max_abs_surface: [f64; 3],
    pub reaching: ReachingStats,
    pub thrust: ThrustStats,
    pub final_position_m: [f64; 3],
    pub kv_hat_final: [f64; 3],
    pub events: Vec<(EventKind, usize)>,
}

fn axis_stats(rows: &[LogRow], get: impl Fn(&LogRow) -> Vector3<f64>) -> AxisStats {
    let n = rows.len().max(1) as f64;
    let mut sq = [0.0; 3];
    let mut max_abs = [0.0f64; 3];
    let mut last_out: [Option<f64>; 3] = [None; 3];
    for r in rows {
        let e = get(r);
        for i in 0..3 {
            sq[i] += e[i] * e[i];
            max_abs[i] = max_abs[i].max(e[i].abs());
            if e[i].abs() > SETTLE_BAND {
                last_out[i] = Some(r.t());
            }
        }
    }
    let end = rows.last().map(|r| r.t());
    let settling_time_s = std::array::from_fn(|i| match (last_out[i], end) {
        (None, _) => Some(rows.first().map_or(0.0, |r| r.t())),
        (Some(t), Some(end)) if t < end => Some(t),
        _ => None,
    });
    AxisStats { rms: sq.map(|s| (s / n).sqrt()), max_abs, settling_time_s }
}

/// Time the surface first reaches zero on each axis, with linear
/// interpolation across a sign change between rows.
pub fn reaching_times(rows: &[LogRow]) -> [Option<f64>; 3] {
    std::array::from_fn(|i| {
        let first = rows.first()?;
        if first.s_phi[i].abs() < SURFACE_TOL {
            return Some(first.t());
        }
        rows.windows(2).find_map(|w| {
            let (a, b) = (w[0].s_phi[i], w[1].s_phi[i]);
            if b.abs() < SURFACE_TOL {
                Some(w[1].t())
            } else if a * b < 0.0 {
                Some(w[0].t() + (w[1].t() - w[0].t()) * a / (a - b))
            } else {
                None
            }
        })
    })
}

pub fn reaching_stats(rows: &[LogRow], gains: &AttitudeGains) -> ReachingStats {
    let s0 = rows.first().map(|r| r.s_phi).unwrap_or_else(Vector3::zeros);
    let v0 = s0.component_mul(&s0) * 0.5;
    let bound = reaching_time_bound(&v0, gains);
    ReachingStats { initial_surface: s0.into(), measured_s: reaching_times(rows), bound_s: bound.into() }
}

/// Scales a series so its largest magnitude is 1. All-zero input is returned unchanged.
pub fn normalized(series: &[f64]) -> Vec<f64> {
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        series.to_vec()
    } else {
        series.iter().map(|v| v / peak).collect()
    }
}

pub fn metrics(log: &RunLog, gains: &AttitudeGains) -> Summary {
    let rows = &log.rows;
    let thrusts: Vec<f64> = rows.iter().map(|r| r.wrench.thrust).collect();
    let thrust = ThrustStats {
        min_n: thrusts.iter().copied().fold(f64::INFINITY, f64::min),
        max_n: thrusts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_n: thrusts.iter().sum::<f64>() / thrusts.len().max(1) as f64,
    };
    let mut max_abs_surface = [0.0f64; 3];
    for r in rows {
        for i in 0..3 {
            max_abs_surface[i] = max_abs_surface[i].max(r.s_phi[i].abs());
        }
    }
    let mut events: Vec<(EventKind, usize)> = Vec::new();
    for e in &log.events {
        match events.iter_mut().find(|(k, _)| *k == e.kind) {
            Some((_, n)) => *n += 1,
            None => events.push((e.kind, 1)),
        }
    }
    let last = rows.last();
    Summary {
        scenario: log.scenario_name.clone(),
        status: log.status.clone(),
        rows: rows.len(),
        duration_s: last.map_or(0.0, |r| r.t()),
        position_error: axis_stats(rows, |r| r.ep),
        attitude_error: axis_stats(rows, |r| r.e_phi),
        max_abs_surface,
        reaching: reaching_stats(rows, gains),
        thrust,
        final_position_m: last.map_or([0.0; 3], |r| r.state.position().into()),
        kv_hat_final: last.map_or([0.0; 3], |r| r.kv_hat.into()),
        events,
    }
}
