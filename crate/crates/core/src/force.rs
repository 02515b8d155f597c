//! Quasi-static grasp forces by virtual work, for both grasp modes.
//!
//! Pinching: the crank torque becomes a horizontal drive force at `D`
//! through `dx_D/dθ_A`, then a joint moment, then the normal force at the
//! contact. Enveloping: the actuation torque and the differential spring
//! torque balance the two phalanx contact forces.
//!
//! Forces are in newtons when lengths are millimetres and torques N·mm.
//! Normal forces are positive toward the object; a negative `f3` is
//! reported as computed and means the spring pulls the distal phalanx away
//! from the contact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finger::{FingerParams, FingerState};
use crate::geom::Point2;
use crate::hoecken::{dxd_dtheta, HoeckenDims};
use crate::scalar::Scalar;
use crate::spring::{sensitivities, spring_torque};

/// Smallest usable `|dx_D/dθ_A|` (mm/rad) and contact lever (mm).
pub const SINGULAR_EPS: f64 = 1e-9;

/// `F_Dx = τ_A / (dx_D/dθ_A)`.
pub fn pinch_drive_force<T: Scalar>(tau_a: T, dxd: T) -> Result<T> {
    if !(dxd.abs() > T::lit(SINGULAR_EPS)) {
        return Err(Error::SingularJacobian(dxd.as_f64()));
    }
    Ok(tau_a / dxd)
}

/// `M_mid = F_Dx · r_eq`.
pub fn mid_joint_torque<T: Scalar>(drive_force: T, r_eq: T) -> T {
    drive_force * r_eq
}

/// `F1 = M_mid / (h2 + l1 cos θ1)`.
pub fn pinch_force<T: Scalar>(m_mid: T, h2: T, theta1: T, l1: T) -> Result<T> {
    let lever = h2 + l1 * theta1.cos();
    if !(lever > T::lit(SINGULAR_EPS)) {
        return Err(Error::DegenerateLever(lever.as_f64()));
    }
    Ok(m_mid / lever)
}

/// How the drive force is carried to the middle joint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PinchModel<T> {
    /// Jacobian from the stage kinematics at `θ_A`; the horizontal drive
    /// force acts at `D` with lever `l1 cos θ1` about the middle joint.
    Auto,
    /// Fixed Jacobian and moment arm (the constant-coefficient surface).
    ConstantR { j_x: T, r_eq: T },
}

/// Inputs of one pinch force evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchForceInput<T> {
    /// Motor torque at `A` (N·mm).
    pub tau_a: T,
    /// Crank angle, used by [`PinchModel::Auto`].
    pub theta_a: T,
    pub theta1: T,
    /// Contact offset along the distal phalanx from `D` (mm).
    pub h2_pinch: T,
    pub model: PinchModel<T>,
}

/// Pinch contact force `F1` for the given stage and lever `l1`.
///
/// The drive force is taken along the closing direction, so the sign of the
/// crank Jacobian does not flip the result.
pub fn pinch_contact_force<T: Scalar>(
    dims: &HoeckenDims<T>,
    l1: T,
    input: &PinchForceInput<T>,
) -> Result<T> {
    match input.model {
        PinchModel::Auto => {
            let dxd = dxd_dtheta(dims, input.theta_a).abs();
            let drive = pinch_drive_force(input.tau_a, dxd)?;
            let m_mid = mid_joint_torque(drive, l1 * input.theta1.cos());
            pinch_force(m_mid, input.h2_pinch, input.theta1, l1)
        }
        PinchModel::ConstantR { j_x, r_eq } => {
            let drive = pinch_drive_force(input.tau_a, j_x)?;
            pinch_force(mid_joint_torque(drive, r_eq), input.h2_pinch, input.theta1, l1)
        }
    }
}

/// Normal contact forces on the second and distal phalanges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeForces<T> {
    pub f2: T,
    pub f3: T,
}

/// Closed-form envelope forces with the finger's own contact arms.
pub fn envelope_forces<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<EnvelopeForces<T>> {
    envelope_forces_with_arms(p, theta1, theta2, p.h1, p.h2_env)
}

/// Closed-form envelope forces with explicit contact arms `h1`, `h2`:
///
/// `F3 = −τ_d s2 / h2`,
/// `F2 = (τ1 − τ_d s1)/h1 − l1 cos(θ2 − θ1) F3 / h1`.
pub fn envelope_forces_with_arms<T: Scalar>(
    p: &FingerParams<T>,
    theta1: T,
    theta2: T,
    h1: T,
    h2: T,
) -> Result<EnvelopeForces<T>> {
    check_arms(h1, h2)?;
    let tau_d = spring_torque(p, theta1, theta2)?;
    let (s1, s2) = sensitivities(p, theta1, theta2)?;
    let f3 = -(tau_d * s2) / h2;
    let f2 = (p.tau1 - tau_d * s1) / h1 - p.l1 * (theta2 - theta1).cos() / h1 * f3;
    Ok(EnvelopeForces { f2, f3 })
}

fn check_arms<T: Scalar>(h1: T, h2: T) -> Result<()> {
    if !(h1 > T::zero() && h2 > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "contact arms must be positive, got h1 = {}, h2 = {}",
            h1.as_f64(),
            h2.as_f64()
        )));
    }
    Ok(())
}

/// Envelope forces by solving the 2×2 contact Jacobian system
///
/// ```text
/// [ h1  l1 cos(θ2 − θ1) ] [F2]   [ τ1 − τ_d s1 ]
/// [ 0   h2              ] [F3] = [ −τ_d s2     ]
/// ```
///
/// with partial pivoting, independently of the closed form.
pub fn envelope_forces_matrix<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<EnvelopeForces<T>> {
    check_arms(p.h1, p.h2_env)?;
    let tau_d = spring_torque(p, theta1, theta2)?;
    let (s1, s2) = sensitivities(p, theta1, theta2)?;
    let m = [[p.h1, p.l1 * (theta2 - theta1).cos()], [T::zero(), p.h2_env]];
    let rhs = [p.tau1 - tau_d * s1, -(tau_d * s2)];
    let [f2, f3] = solve2(m, rhs).ok_or(Error::DegenerateLever(0.0))?;
    Ok(EnvelopeForces { f2, f3 })
}

fn solve2<T: Scalar>(mut m: [[T; 2]; 2], mut b: [T; 2]) -> Option<[T; 2]> {
    if m[1][0].abs() > m[0][0].abs() {
        m.swap(0, 1);
        b.swap(0, 1);
    }
    if m[0][0] == T::zero() {
        return None;
    }
    let k = m[1][0] / m[0][0];
    let m11 = m[1][1] - k * m[0][1];
    let b1 = b[1] - k * b[0];
    if m11 == T::zero() {
        return None;
    }
    let x1 = b1 / m11;
    let x0 = (b[0] - m[0][1] * x1) / m[0][0];
    Some([x0, x1])
}

/// Contact points and their Jacobians with respect to `(θ1, θ2)`, with the
/// middle joint at the origin and phalanges pointing up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactKinematics<T> {
    pub g1: Point2<T>,
    pub g2: Point2<T>,
    /// `[∂G1/∂θ1, ∂G1/∂θ2]`.
    pub dg1: [Point2<T>; 2],
    /// `[∂G2/∂θ1, ∂G2/∂θ2]`.
    pub dg2: [Point2<T>; 2],
}

pub fn contact_kinematics<T: Scalar>(p: &FingerParams<T>, state: &FingerState<T>) -> ContactKinematics<T> {
    contact_points_with_arms(state.theta1, state.theta2, p.l1, p.h1, p.h2_env)
}

pub(crate) fn contact_points_with_arms<T: Scalar>(
    theta1: T,
    theta2: T,
    l1: T,
    h1: T,
    h2: T,
) -> ContactKinematics<T> {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    ContactKinematics {
        g1: Point2::new(h1 * s1, h1 * c1),
        g2: Point2::new(l1 * s1 + h2 * s2, l1 * c1 + h2 * c2),
        dg1: [Point2::new(h1 * c1, -h1 * s1), Point2::origin()],
        dg2: [Point2::new(l1 * c1, -l1 * s1), Point2::new(h2 * c2, -h2 * s2)],
    }
}

/// Cartesian contact forces, normal to their phalanges.
pub fn contact_force_vectors<T: Scalar>(forces: &EnvelopeForces<T>, theta1: T, theta2: T) -> [Point2<T>; 2] {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    [Point2::new(forces.f2 * c1, -forces.f2 * s1), Point2::new(forces.f3 * c2, -forces.f3 * s2)]
}

/// Net virtual work of actuation, spring and contact forces for a virtual
/// displacement `(δθ1, δθ2)`; zero at equilibrium.
pub fn virtual_work_residual<T: Scalar>(
    p: &FingerParams<T>,
    theta1: T,
    theta2: T,
    forces: &EnvelopeForces<T>,
    d_theta1: T,
    d_theta2: T,
) -> Result<T> {
    let tau_d = spring_torque(p, theta1, theta2)?;
    let (s1, s2) = sensitivities(p, theta1, theta2)?;
    let drive = (p.tau1 - tau_d * s1) * d_theta1 - tau_d * s2 * d_theta2;
    let k = contact_points_with_arms(theta1, theta2, p.l1, p.h1, p.h2_env);
    let [f2, f3] = contact_force_vectors(forces, theta1, theta2);
    let dg1 = k.dg1[0] * d_theta1 + k.dg1[1] * d_theta2;
    let dg2 = k.dg2[0] * d_theta1 + k.dg2[1] * d_theta2;
    Ok(drive - (f2.dot(dg1) + f3.dot(dg2)))
}
