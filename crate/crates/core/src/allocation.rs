//! Minimum-effort distribution of the total wrench over the two quadrotors,
//! and the per-quadrotor rotor mixer.
//!
//! The configuration matrix `Λ` (4×8) maps
//! `u_d = [F_q1, τ_11, τ_12, τ_13, F_q2, τ_21, τ_22, τ_23]` to
//! `[U_th, U_m]`. With `Γ = sqrt(diag(σ))` the allocation is
//! `u_d* = Γ⁻²Λᵀ(ΛΓ⁻²Λᵀ)⁻¹ w`, the minimiser of `‖Γu_d‖₂` among all exact
//! solutions of `Λu_d = w`.

use nalgebra::{Matrix4, SMatrix, SVector, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::dynamics::{SystemParams, WrenchCommand};
use crate::error::{Error, Result};

pub type Lambda = SMatrix<f64, 4, 8>;
pub type ActuatorVector = SVector<f64, 8>;

/// Cost coefficients `σ_11…σ_24`, one per entry of `u_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationWeights(pub [f64; 8]);

impl Default for AllocationWeights {
    fn default() -> Self {
        Self::uniform()
    }
}

impl AllocationWeights {
    pub fn uniform() -> Self {
        Self([1.0; 8])
    }

    pub fn validate(&self) -> Result<()> {
        match self.0.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            Some(i) => Err(Error::InvalidParameter(format!("allocation weight {i} must be positive"))),
            None => Ok(()),
        }
    }

    /// `Γ⁻²` as a diagonal.
    fn inverse_squared_gamma(&self) -> ActuatorVector {
        ActuatorVector::from_iterator(self.0.iter().map(|s| 1.0 / s))
    }

    /// Diagonal of `Γ`.
    pub fn gamma(&self) -> ActuatorVector {
        ActuatorVector::from_iterator(self.0.iter().map(|s| s.sqrt()))
    }
}

/// Per-quadrotor thrust and moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub u_d: ActuatorVector,
}

impl ActuatorCommand {
    pub fn zero() -> Self {
        Self { u_d: ActuatorVector::zeros() }
    }

    /// Thrust and moment triple of quadrotor `i` (0 or 1).
    pub fn quad(&self, i: usize) -> (f64, Vector3<f64>) {
        let o = 4 * i;
        (self.u_d[o], Vector3::new(self.u_d[o + 1], self.u_d[o + 2], self.u_d[o + 3]))
    }

    /// Both quadrotors produce non-negative thrust.
    pub fn thrusts_feasible(&self) -> bool {
        self.u_d[0] >= 0.0 && self.u_d[4] >= 0.0
    }

    /// `‖Γu_d‖₂`
    pub fn weighted_norm(&self, w: &AllocationWeights) -> f64 {
        self.u_d.component_mul(&w.gamma()).norm()
    }
}

/// Builds `Λ` from the attachment geometry.
pub fn build_lambda(p: &SystemParams) -> Lambda {
    lambda_from_offsets(&p.attach_offsets())
}

pub fn lambda_from_offsets(rho: &[Vector3<f64>; 2]) -> Lambda {
    let mut l = Lambda::zeros();
    for (i, r) in rho.iter().enumerate() {
        let c = 4 * i;
        l[(0, c)] = 1.0;
        l[(1, c)] = r.y;
        l[(2, c)] = -r.x;
        l[(1, c + 1)] = 1.0;
        l[(2, c + 2)] = 1.0;
        l[(3, c + 3)] = 1.0;
    }
    l
}

/// Numerical rank of `Λ` from its singular values.
pub fn lambda_rank(lambda: &Lambda) -> usize {
    lambda.transpose().rank(1e-10)
}

/// Precomputed weighted pseudo-inverse for a fixed geometry and weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocator {
    lambda: Lambda,
    weights: AllocationWeights,
    pinv: SMatrix<f64, 8, 4>,
}

impl Allocator {
    pub fn new(lambda: Lambda, weights: AllocationWeights) -> Result<Self> {
        weights.validate()?;
        if lambda_rank(&lambda) < 4 {
            return Err(Error::AllocationInfeasible("Λ is rank deficient".into()));
        }
        let ginv = Matrix8::from_diagonal(&weights.inverse_squared_gamma());
        let gram: Matrix4<f64> = lambda * ginv * lambda.transpose();
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::AllocationInfeasible("ΛΓ⁻²Λᵀ is singular".into()))?;
        if !gram_inv.iter().all(|v| v.is_finite()) {
            return Err(Error::AllocationInfeasible("ΛΓ⁻²Λᵀ is singular".into()));
        }
        let pinv = ginv * lambda.transpose() * gram_inv;
        Ok(Self { lambda, weights, pinv })
    }

    pub fn for_vehicle(p: &SystemParams, weights: AllocationWeights) -> Result<Self> {
        Self::new(build_lambda(p), weights)
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn weights(&self) -> &AllocationWeights {
        &self.weights
    }

    pub fn allocate(&self, w: &WrenchCommand) -> ActuatorCommand {
        ActuatorCommand { u_d: self.pinv * w.as_vector() }
    }

    /// `Λu_d` mapped back to a wrench.
    pub fn wrench_of(&self, cmd: &ActuatorCommand) -> WrenchCommand {
        WrenchCommand::from_vector(&(self.lambda * cmd.u_d))
    }
}

type Matrix8 = SMatrix<f64, 8, 8>;

/// One-shot allocation. Prefer [`Allocator`] inside loops.
pub fn allocate(w: &WrenchCommand, lambda: &Lambda, weights: &AllocationWeights) -> Result<ActuatorCommand> {
    Ok(Allocator::new(*lambda, *weights)?.allocate(w))
}

/// Rotor thrust/moment coefficients and arm length of one quadrotor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorModel {
    /// N·s²/rad²
    pub thrust_coeff: f64,
    /// N·m·s²/rad²
    pub moment_coeff: f64,
    /// m
    pub arm_length: f64,
}

impl RotorModel {
    /// Placeholder coefficients for a 1.4 kg class airframe. Not measured values.
    pub fn nominal(arm_length: f64) -> Self {
        Self { thrust_coeff: 8.55e-6, moment_coeff: 1.6e-7, arm_length }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.thrust_coeff, self.moment_coeff, self.arm_length].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("rotor coefficients and arm length must be positive".into()))
        }
    }

    /// Thrust and moments produced by four rotor speeds (rad/s).
    pub fn forward(&self, speeds: &[f64; 4]) -> (f64, Vector3<f64>) {
        let f: Vec<f64> = speeds.iter().map(|w| self.thrust_coeff * w * w).collect();
        let m: Vec<f64> = speeds.iter().map(|w| self.moment_coeff * w * w).collect();
        let thrust = f.iter().sum();
        let tau = Vector3::new(
            self.arm_length * (f[1] - f[3]),
            self.arm_length * (f[2] - f[0]),
            m[0] - m[1] + m[2] - m[3],
        );
        (thrust, tau)
    }

    /// Per-rotor thrusts that realise `(thrust, tau)`; may be negative.
    pub fn rotor_thrusts(&self, thrust: f64, tau: &Vector3<f64>) -> [f64; 4] {
        // rotors 1,3 spin one way and 2,4 the other: c = k_m / k_f
        let c = self.moment_coeff / self.thrust_coeff;
        let odd = 0.5 * (thrust + tau.z / c);
        let even = 0.5 * (thrust - tau.z / c);
        let d = self.arm_length;
        [
            0.5 * (odd - tau.y / d),
            0.5 * (even + tau.x / d),
            0.5 * (odd + tau.y / d),
            0.5 * (even - tau.x / d),
        ]
    }
}

/// Rotor speeds for one quadrotor. Fails on the first rotor whose required
/// thrust is negative rather than clamping it.
pub fn mix_to_rotors(thrust: f64, tau: &Vector3<f64>, rotor: &RotorModel) -> Result<[f64; 4]> {
    let f = rotor.rotor_thrusts(thrust, tau);
    let mut out = [0.0; 4];
    for (j, fj) in f.iter().enumerate() {
        // round-off around an exactly zero command
        let fj = if fj.abs() < 1e-12 * (1.0 + thrust.abs()) { 0.0 } else { *fj };
        if fj < 0.0 {
            return Err(Error::ActuatorSaturation { rotor: j + 1, thrust: fj });
        }
        out[j] = (fj / rotor.thrust_coeff).sqrt();
    }
    Ok(out)
}

/// Rotor speeds for both quadrotors of an allocated command.
pub fn mix_command(cmd: &ActuatorCommand, rotor: &RotorModel) -> Result<[[f64; 4]; 2]> {
    let (f1, t1) = cmd.quad(0);
    let (f2, t2) = cmd.quad(1);
    let a = mix_to_rotors(f1, &t1, rotor).map_err(|e| relabel(e, 0))?;
    let b = mix_to_rotors(f2, &t2, rotor).map_err(|e| relabel(e, 1))?;
    Ok([a, b])
}

fn relabel(e: Error, quad: usize) -> Error {
    match e {
        Error::ActuatorSaturation { rotor, thrust } => Error::ActuatorSaturation { rotor: 4 * quad + rotor, thrust },
        other => other,
    }
}

/// Wrench vector helper for tests and examples.
pub fn wrench(thrust: f64, mx: f64, my: f64, mz: f64) -> WrenchCommand {
    WrenchCommand::from_vector(&Vector4::new(thrust, mx, my, mz))
}
