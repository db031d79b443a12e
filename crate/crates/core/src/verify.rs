//! Acceptance checks, runnable from the library, the CLI and the test suite.
//!
//! Each check returns a [`Check`] with a one-line verdict. Tolerances are the
//! `pub const`s below; nothing here is tuned per run.

use std::time::{Duration, Instant};

use nalgebra::{SMatrix, SVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{Allocator, AllocationWeights, Lambda};
use crate::attitude_ctrl::reaching_time_bound;
use crate::dynamics::{idx, step_rk4, ExternalForce, SimState, SystemParams, WrenchCommand};
use crate::error::Result;
use crate::harness::metrics::{reaching_times, SURFACE_TOL};
use crate::harness::{run, RunLog, Scenario};

pub const HOVER_DURATION_S: f64 = 60.0;
pub const HOVER_DRIFT_M: f64 = 1e-3;
pub const HOVER_THRUST_TOL_N: f64 = 1e-9;
pub const HOVER_RUNTIME: Duration = Duration::from_secs(5);

pub const ALLOC_SAMPLES: usize = 1000;
pub const ALLOC_RESIDUAL: f64 = 1e-9;
pub const ALLOC_ORACLE_TOL: f64 = 1e-7;
pub const ALLOC_RUNTIME: Duration = Duration::from_secs(1);

pub const REACHING_SAMPLES: usize = 100;
pub const REACHING_RUNTIME: Duration = Duration::from_secs(30);

pub const STEP_TOL_M: f64 = 1e-3;
pub const STEP_DEADLINE_S: f64 = 10.0;
/// Relative slack on "non-increasing" to absorb rounding in `V_pv`.
pub const LYAPUNOV_REL_SLACK: f64 = 1e-9;
/// `K̂_v` within this fraction of its final value ends the adaptation transient.
pub const ADAPTATION_SETTLED: f64 = 0.01;

pub const ADMITTANCE_FORCE_N: f64 = 1.54;
pub const ADMITTANCE_VELOCITY_TOL: f64 = 0.02;
pub const SUBTHRESHOLD_FORCE_N: f64 = 0.4;

pub const RK4_DTS: [f64; 4] = [0.004, 0.002, 0.001, 0.0005];
pub const RK4_ORDER: f64 = 4.0;
pub const RK4_ORDER_TOL: f64 = 0.2;
/// Short enough that drag has not yet damped away the accumulated error.
pub const RK4_HORIZON_S: f64 = 0.2;

/// Scripted lift, guide and land run.
pub const LIFT_GUIDE_LAND_TOML: &str = include_str!("../scenarios/lift_guide_land.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<22} {} [{:.3} s]", self.name, self.detail, self.elapsed.as_secs_f64())
    }
}

fn finish(name: &'static str, started: Instant, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check { name, passed, detail, elapsed: started.elapsed() }
}

/// Hovering at 1 m with zero error: exact weight compensation, no moments, no drift.
pub fn hover() -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let mut s = Scenario { name: "hover".into(), duration_s: HOVER_DURATION_S, ..Scenario::default() };
        s.initial.position_m = [0.0, 0.0, 1.0];
        let log = run(&s)?;
        let elapsed = t0.elapsed();
        let weight = s.system_params().hover_thrust();
        let start = Vector3::from(s.initial.position_m);
        let thrust_err = log.rows.iter().map(|r| (r.wrench.thrust - weight).abs()).fold(0.0, f64::max);
        let moment = log.rows.iter().map(|r| r.wrench.moments.amax()).fold(0.0, f64::max);
        let drift = log.rows.iter().map(|r| (r.state.position() - start).norm()).fold(0.0, f64::max);
        let ok = !log.diverged()
            && thrust_err <= HOVER_THRUST_TOL_N
            && moment <= HOVER_THRUST_TOL_N
            && drift < HOVER_DRIFT_M
            && elapsed < HOVER_RUNTIME;
        Ok((
            ok,
            format!(
                "U_th = {weight:.4} N ± {thrust_err:.1e}, max |U_m| {moment:.1e}, drift {drift:.1e} m over {HOVER_DURATION_S} s"
            ),
        ))
    })();
    finish("hover", t0, out)
}

/// Weighted minimum-norm solution via the KKT system of
/// `min ½‖Γu‖² s.t. Λu = w`, solved by LU. Independent of [`Allocator`].
pub fn kkt_oracle(lambda: &Lambda, weights: &AllocationWeights, w: &WrenchCommand) -> Option<SVector<f64, 8>> {
    let mut kkt = SMatrix::<f64, 12, 12>::zeros();
    let mut rhs = SVector::<f64, 12>::zeros();
    for i in 0..8 {
        kkt[(i, i)] = weights.0[i];
    }
    for r in 0..4 {
        for c in 0..8 {
            kkt[(8 + r, c)] = lambda[(r, c)];
            kkt[(c, 8 + r)] = lambda[(r, c)];
        }
        rhs[8 + r] = w.as_vector()[r];
    }
    let sol = kkt.lu().solve(&rhs)?;
    Some(sol.fixed_rows::<8>(0).into_owned())
}

/// Random wrenches: exact reproduction and agreement with the KKT oracle.
pub fn allocation(seed: u64) -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let p = SystemParams::nominal();
        let weights = AllocationWeights::uniform();
        let alloc = Allocator::for_vehicle(&p, weights)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wrenches: Vec<WrenchCommand> = (0..ALLOC_SAMPLES)
            .map(|_| {
                WrenchCommand::new(
                    rng.random_range(0.0..80.0),
                    Vector3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-5.0..5.0)),
                )
            })
            .collect();
        let ta = Instant::now();
        let cmds: Vec<_> = wrenches.iter().map(|w| alloc.allocate(w)).collect();
        let alloc_time = ta.elapsed();

        let gamma = weights.gamma();
        let mut residual = 0.0f64;
        let mut gap = 0.0f64;
        for (w, c) in wrenches.iter().zip(&cmds) {
            residual = residual.max((alloc.lambda() * c.u_d - w.as_vector()).norm());
            let oracle = kkt_oracle(alloc.lambda(), &weights, w)
                .ok_or_else(|| crate::Error::AllocationInfeasible("KKT system singular".into()))?;
            let norm = |u: &SVector<f64, 8>| u.component_mul(&gamma).norm();
            gap = gap.max((norm(&c.u_d) - norm(&oracle)).abs());
        }
        let ok = residual < ALLOC_RESIDUAL && gap < ALLOC_ORACLE_TOL && alloc_time < ALLOC_RUNTIME;
        Ok((
            ok,
            format!(
                "{ALLOC_SAMPLES} wrenches: max ‖Λu−w‖ {residual:.1e}, max |‖Γu‖−‖Γu_kkt‖| {gap:.1e}, {:.2} ms",
                alloc_time.as_secs_f64() * 1e3
            ),
        ))
    })();
    finish("allocation", t0, out)
}

/// Scenario used for one reaching trial: attitude loop only, logged every step.
pub fn reaching_scenario(attitude: [f64; 3], rates: [f64; 3]) -> Scenario {
    let mut s = Scenario {
        name: "attitude_reaching".into(),
        duration_s: 0.5,
        log_rate_hz: 1000.0,
        freeze_position_loop: true,
        ..Scenario::default()
    };
    s.initial.position_m = [0.0, 0.0, 5.0];
    s.initial.attitude_rad = attitude;
    s.initial.rates_radps = rates;
    s
}

/// Per-trial reaching outcome, used by the check and the example.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachingTrial {
    pub initial_surface: Vector3<f64>,
    pub measured_s: [Option<f64>; 3],
    pub bound_s: Vector3<f64>,
    /// Largest `V̇_Φ` logged while `|S_Φ| > SURFACE_TOL`.
    pub worst_vdot: f64,
}

impl ReachingTrial {
    pub fn from_log(log: &RunLog, gains: &crate::attitude_ctrl::AttitudeGains) -> Option<Self> {
        let first = log.rows.first()?;
        let s0 = first.s_phi;
        let bound_s = reaching_time_bound(&(s0.component_mul(&s0) * 0.5), gains);
        let mut worst_vdot = f64::NEG_INFINITY;
        for r in &log.rows {
            for i in 0..3 {
                if r.s_phi[i].abs() > SURFACE_TOL {
                    worst_vdot = worst_vdot.max(r.v_phi_dot[i]);
                }
            }
        }
        Some(Self { initial_surface: s0, measured_s: reaching_times(&log.rows), bound_s, worst_vdot })
    }

    pub fn within_bound(&self) -> bool {
        (0..3).all(|i| matches!(self.measured_s[i], Some(t) if t <= self.bound_s[i]))
    }
}

/// Random initial attitude errors: measured reaching time never exceeds the
/// bound from the initial `V_Φ`, and `V̇_Φ ≤ 0` off the surface.
pub fn fntsmc_reaching(seed: u64) -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_margin = f64::INFINITY;
        let mut worst_vdot = f64::NEG_INFINITY;
        let mut failures = 0;
        for _ in 0..REACHING_SAMPLES {
            let att = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let rates = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let s = reaching_scenario(att, rates);
            let log = run(&s)?;
            let trial = ReachingTrial::from_log(&log, &s.attitude_gains())
                .ok_or_else(|| crate::Error::Scenario("empty log".into()))?;
            for i in 0..3 {
                let m = trial.measured_s[i].map_or(f64::NEG_INFINITY, |t| trial.bound_s[i] - t);
                worst_margin = worst_margin.min(m);
            }
            worst_vdot = worst_vdot.max(trial.worst_vdot);
            if log.diverged() || !trial.within_bound() || trial.worst_vdot > 0.0 {
                failures += 1;
            }
        }
        let elapsed = t0.elapsed();
        let ok = failures == 0 && elapsed < REACHING_RUNTIME;
        Ok((
            ok,
            format!(
                "{REACHING_SAMPLES} trials, {failures} failed; min (bound − t_reach) {:.2} ms, max V̇ off-surface {worst_vdot:.2e}",
                worst_margin * 1e3
            ),
        ))
    })();
    finish("fntsmc_reaching", t0, out)
}

/// Scenario for a 1 m reference step on `axis` from hover at 2 m.
pub fn step_scenario(axis: usize, duration_s: f64) -> Scenario {
    let mut s = Scenario { name: format!("step_{}", ["x", "y", "z"][axis]), duration_s, ..Scenario::default() };
    s.initial.position_m = [0.0, 0.0, 2.0];
    let mut r = s.initial.position_m;
    r[axis] += 1.0;
    s.initial.reference_position_m = Some(r);
    s
}

/// Convergence facts for one step response.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    /// From here on `‖E_p‖ < STEP_TOL_M`.
    pub settled_s: Option<f64>,
    /// Per-axis end of the adaptation transient: `K̂_v` within
    /// [`ADAPTATION_SETTLED`] of its final value, and no earlier than the last
    /// clamped command.
    pub adaptation_settled_s: [f64; 3],
    /// Last instant `V_pv` grew after the adaptation transient, if any.
    pub lyapunov_increase_s: Option<f64>,
    pub kv_monotone: bool,
    pub final_error_m: f64,
}

impl StepResponse {
    pub fn from_log(log: &RunLog) -> Self {
        let rows = &log.rows;
        let settled_s = match rows.iter().rposition(|r| r.ep.norm() >= STEP_TOL_M) {
            None => rows.first().map(|r| r.t()),
            Some(i) if i + 1 < rows.len() => Some(rows[i + 1].t()),
            Some(_) => None,
        };
        let kv_end = rows.last().map_or(Vector3::zeros(), |r| r.kv_hat);
        let last_clamp = rows.iter().rev().find(|r| r.command_limited).map_or(0.0, |r| r.t());
        let settled_at: [f64; 3] = std::array::from_fn(|i| {
            rows.iter()
                .find(|r| kv_end[i] - r.kv_hat[i] <= ADAPTATION_SETTLED * kv_end[i])
                .map_or(f64::INFINITY, |r| r.t())
                .max(last_clamp)
        });
        let mut lyapunov_increase_s = None;
        let mut kv_monotone = true;
        for w in rows.windows(2) {
            for i in 0..3 {
                if w[1].kv_hat[i] < w[0].kv_hat[i] {
                    kv_monotone = false;
                }
                if w[0].t() >= settled_at[i] && w[1].v_pv[i] > w[0].v_pv[i] * (1.0 + LYAPUNOV_REL_SLACK) {
                    lyapunov_increase_s = Some(w[1].t());
                }
            }
        }
        Self {
            settled_s,
            adaptation_settled_s: settled_at,
            lyapunov_increase_s,
            kv_monotone,
            final_error_m: rows.last().map_or(f64::NAN, |r| r.ep.norm()),
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.settled_s, Some(t) if t <= STEP_DEADLINE_S) && self.lyapunov_increase_s.is_none() && self.kv_monotone
    }
}

/// 1 m steps on each axis: settle under 1 mm, `V_pv` non-increasing after
/// adaptation settles, `K̂_v` monotone.
pub fn backstepping() -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for axis in 0..3 {
            let log = run(&step_scenario(axis, 15.0))?;
            let r = StepResponse::from_log(&log);
            ok &= !log.diverged() && r.passed();
            parts.push(format!(
                "{}: settled {} s, K̂ settled {:.2} s, V↑ after {}",
                ["x", "y", "z"][axis],
                r.settled_s.map_or("never".into(), |t| format!("{t:.2}")),
                r.adaptation_settled_s[axis],
                r.lyapunov_increase_s.map_or("none".into(), |t| format!("{t:.2} s")),
            ));
        }
        Ok((ok, parts.join("; ")))
    })();
    finish("backstepping", t0, out)
}

/// Constant push on one axis through the full sensor/gate/admittance chain.
pub fn push_scenario(axis: usize, force_n: f64, duration_s: f64) -> Scenario {
    let mut s = Scenario { name: "push".into(), duration_s, ..Scenario::default() };
    s.initial.position_m = [0.0, 0.0, 2.0];
    let mut f = [0.0; 3];
    f[axis] = force_n;
    s.force_segments = vec![crate::harness::ForceSegment { t_start_s: 0.0, t_end_s: duration_s, force_n: f }];
    s
}

/// Terminal reference velocity `F/C` and a dead zone below the gate threshold.
pub fn admittance() -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let mut ok = true;
        let mut worst = 0.0f64;
        let mut still = true;
        for axis in 0..3 {
            let probe = push_scenario(axis, ADMITTANCE_FORCE_N, 1.0);
            let a = probe.admittance_params();
            let settle = 5.0 * a.mass[axis] / a.damping[axis];
            let s = push_scenario(axis, ADMITTANCE_FORCE_N, settle + 0.05);
            let log = run(&s)?;
            let expected = ADMITTANCE_FORCE_N / a.damping[axis];
            let v = log
                .rows
                .iter()
                .find(|r| r.t() >= settle)
                .map_or(f64::NAN, |r| r.reference.velocity[axis]);
            let rel = (v - expected).abs() / expected;
            worst = worst.max(rel);
            ok &= rel <= ADMITTANCE_VELOCITY_TOL;

            let quiet = run(&push_scenario(axis, SUBTHRESHOLD_FORCE_N, 2.0))?;
            let start = quiet.rows[0].reference;
            still &= quiet.rows.iter().all(|r| r.reference == start && !r.gate_open);
        }
        Ok((
            ok && still,
            format!(
                "v_ref after 5·M/C within {:.2}% of F/C; {SUBTHRESHOLD_FORCE_N} N push moves reference: {}",
                worst * 100.0,
                if still { "no" } else { "yes" }
            ),
        ))
    })();
    finish("admittance", t0, out)
}

pub fn lift_guide_land_scenario() -> Result<Scenario> {
    Scenario::from_toml_str(LIFT_GUIDE_LAND_TOML)
}

/// Qualitative features of the lift, guide and land run.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftGuideLand {
    pub max_attitude_error_rad: f64,
    /// `‖E_p‖` at the end of each hold window.
    pub hold_errors_m: Vec<f64>,
    pub lift_peak_thrust_n: f64,
    pub hold_thrust_dev: f64,
    pub descent_min_thrust_n: f64,
    pub weight_n: f64,
}

/// Hold windows are the gaps between force segments plus the tail of the run.
pub fn hold_windows(s: &Scenario) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut t = 0.0;
    for seg in &s.force_segments {
        if seg.t_start_s > t {
            out.push((t, seg.t_start_s));
        }
        t = seg.t_end_s;
    }
    if t < s.duration_s {
        out.push((t, s.duration_s));
    }
    out
}

impl LiftGuideLand {
    pub fn from_log(s: &Scenario, log: &RunLog) -> Self {
        let weight = s.system_params().hover_thrust();
        let rows = &log.rows;
        let max_attitude_error_rad = rows.iter().map(|r| r.e_phi.amax()).fold(0.0, f64::max);
        let at = |t: f64| rows.iter().rev().find(|r| r.t() < t - 1e-9);
        let mut hold_errors_m = Vec::new();
        let mut hold_thrust_dev = 0.0f64;
        for (a, b) in hold_windows(s) {
            if a == 0.0 {
                continue;
            }
            hold_errors_m.push(at(b).map_or(f64::NAN, |r| r.ep.norm()));
            for r in rows.iter().filter(|r| r.t() >= b - 1.0 && r.t() < b) {
                hold_thrust_dev = hold_thrust_dev.max((r.wrench.thrust - weight).abs() / weight);
            }
        }
        let thrusts = |seg: &crate::harness::ForceSegment| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.t() >= seg.t_start_s && r.t() < seg.t_end_s + 1.0)
                .map(|r| r.wrench.thrust)
                .collect()
        };
        let up = s.force_segments.iter().find(|g| g.force_n[2] > 0.0);
        let down = s.force_segments.iter().rev().find(|g| g.force_n[2] < 0.0);
        let lift_peak_thrust_n = up.map_or(f64::NAN, |g| thrusts(g).into_iter().fold(f64::MIN, f64::max));
        let descent_min_thrust_n = down.map_or(f64::NAN, |g| thrusts(g).into_iter().fold(f64::MAX, f64::min));
        Self { max_attitude_error_rad, hold_errors_m, lift_peak_thrust_n, hold_thrust_dev, descent_min_thrust_n, weight_n: weight }
    }

    pub fn passed(&self) -> bool {
        self.max_attitude_error_rad < LGL_MAX_ATTITUDE_ERR
            && self.hold_errors_m.iter().all(|e| *e < LGL_HOLD_ERR_M)
            && self.lift_peak_thrust_n > self.weight_n * (1.0 + LGL_PHASE_MARGIN)
            && self.descent_min_thrust_n < self.weight_n * (1.0 - LGL_PHASE_MARGIN)
            && self.hold_thrust_dev < LGL_PHASE_MARGIN
    }
}

pub const LGL_MAX_ATTITUDE_ERR: f64 = 0.2;
pub const LGL_HOLD_ERR_M: f64 = 1e-3;
pub const LGL_PHASE_MARGIN: f64 = 0.02;

/// Lift, guide and land: bounded attitude error, position error back under
/// 1 mm before each new push, thrust above/near/below weight by phase, and two
/// runs that agree bit for bit.
pub fn lift_guide_land() -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let s = lift_guide_land_scenario()?;
        let log = run(&s)?;
        let again = run(&s)?;
        let deterministic = log.to_csv_string()? == again.to_csv_string()?;
        let f = LiftGuideLand::from_log(&s, &log);
        let worst_hold = f.hold_errors_m.iter().copied().fold(0.0, f64::max);
        Ok((
            !log.diverged() && deterministic && f.passed(),
            format!(
                "max |e_Φ| {:.3} rad, worst hold ‖E_p‖ {worst_hold:.1e} m, thrust peak/hold dev/min {:.2}/{:.2}%/{:.2} N (weight {:.2}), deterministic {deterministic}",
                f.max_attitude_error_rad,
                f.lift_peak_thrust_n,
                f.hold_thrust_dev * 100.0,
                f.descent_min_thrust_n,
                f.weight_n
            ),
        ))
    })();
    finish("lift_guide_land", t0, out)
}

/// Plant used for the order study: drag raised so truncation error sits well
/// above rounding at the smallest step.
pub fn rk4_study_params() -> SystemParams {
    SystemParams { linear_drag: 65.0, ..SystemParams::nominal() }
}

/// Closed-form free fall with linear drag from `v0` at the origin.
pub fn free_fall_exact(p: &SystemParams, v0: &Vector3<f64>, t: f64) -> (Vector3<f64>, Vector3<f64>) {
    let k = p.linear_drag / p.total_mass();
    let v_inf = Vector3::new(0.0, 0.0, -p.gravity / k);
    let decay = (-k * t).exp();
    let v = v_inf + (v0 - v_inf) * decay;
    let x = v_inf * t + (v0 - v_inf) * ((1.0 - decay) / k);
    (x, v)
}

/// Final-state error of unpowered RK4 against the closed form, per step size.
pub fn rk4_errors(dts: &[f64], horizon_s: f64) -> Result<Vec<f64>> {
    let p = rk4_study_params();
    let v0 = Vector3::new(3.0, -2.0, 5.0);
    let (x_ref, v_ref) = free_fall_exact(&p, &v0, horizon_s);
    let u = WrenchCommand::new(0.0, Vector3::zeros());
    dts.iter()
        .map(|&dt| {
            let n = (horizon_s / dt).round() as usize;
            let mut s = SimState::from_parts(0.0, Vector3::zeros(), v0, Vector3::zeros(), Vector3::zeros());
            for _ in 0..n {
                s = step_rk4(&s, &u, &ExternalForce::zero(), &p, dt)?;
            }
            let e = Vector3::new(
                s.eta[idx::X] - x_ref.x,
                s.eta[idx::Y] - x_ref.y,
                s.eta[idx::Z] - x_ref.z,
            )
            .norm()
                + (s.velocity() - v_ref).norm();
            Ok(e)
        })
        .collect()
}

/// Least-squares slope of `log e` against `log dt`.
pub fn observed_order(dts: &[f64], errors: &[f64]) -> f64 {
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn rk4_order() -> Check {
    let t0 = Instant::now();
    let out = (|| {
        let errors = rk4_errors(&RK4_DTS, RK4_HORIZON_S)?;
        let order = observed_order(&RK4_DTS, &errors);
        let errs: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
        Ok(((order - RK4_ORDER).abs() <= RK4_ORDER_TOL, format!("order {order:.3} (errors {})", errs.join(", "))))
    })();
    finish("rk4_order", t0, out)
}

/// Every check, in a fixed order.
pub fn all(seed: u64) -> Vec<Check> {
    vec![hover(), allocation(seed), fntsmc_reaching(seed), backstepping(), admittance(), lift_guide_land(), rk4_order()]
}
