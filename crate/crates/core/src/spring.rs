//! Differential spring: hinge opening, torque, and the geometric
//! sensitivities that feed the envelope force balance.
//!
//! The hardware uses a tension spring between the two differential links;
//! the model here is the equivalent torsional spring at the hinge `H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finger::{pre_contact_theta2, virtual_ab_length, FingerParams};
use crate::geom::triangle_angle;
use crate::scalar::Scalar;

/// Hinge angle of the pair for a given virtual bar length.
pub fn hinge_angle<T: Scalar>(p: &FingerParams<T>, ab: T) -> Result<T> {
    let limit = p.ah + p.bh;
    if ab >= limit {
        return Err(Error::StopperLimit { ab: ab.as_f64(), limit: limit.as_f64() });
    }
    triangle_angle(p.ah, p.bh, ab)
}

/// Hinge angle `α(θ1, θ2)` of the differential pair.
pub fn opening_angle<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<T> {
    hinge_angle(p, virtual_ab_length(p, theta1, theta2)?)
}

/// Hinge angle of the closed pair, `α0(θ1)`.
///
/// The parallelogram makes the pre-contact bar exactly `ab0` at every
/// inclination, so this is the same value for all reachable `θ1`.
pub fn rest_angle<T: Scalar>(p: &FingerParams<T>, theta1: T) -> Result<T> {
    opening_angle(p, theta1, pre_contact_theta2(p, theta1)?)
}

/// Spring torque for a hinge deflection. The stopper carries any load while
/// the pair is closed, so non-positive deflections give zero torque.
pub fn torque_for_deflection<T: Scalar>(p: &FingerParams<T>, deflection: T) -> T {
    if deflection > T::zero() {
        p.k_d * deflection + p.preload
    } else {
        T::zero()
    }
}

/// `τ_d = k_d (α − α0)` (plus preload once the pair has opened).
pub fn spring_torque<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<T> {
    let alpha = opening_angle(p, theta1, theta2)?;
    let alpha0 = rest_angle(p, theta1)?;
    Ok(torque_for_deflection(p, alpha - alpha0))
}

/// `(∂α/∂θ1, ∂α/∂θ2)` by central differences.
pub fn sensitivities<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<(T, T)> {
    sensitivities_with_step(p, theta1, theta2, T::sensitivity_step())
}

pub fn sensitivities_with_step<T: Scalar>(
    p: &FingerParams<T>,
    theta1: T,
    theta2: T,
    h: T,
) -> Result<(T, T)> {
    let eval = |t1: T, t2: T| {
        opening_angle(p, t1, t2)
            .map_err(|_| Error::NonSmooth { theta1: theta1.as_f64(), theta2: theta2.as_f64() })
    };
    let two_h = h + h;
    let s1 = (eval(theta1 + h, theta2)? - eval(theta1 - h, theta2)?) / two_h;
    let s2 = (eval(theta1, theta2 + h)? - eval(theta1, theta2 - h)?) / two_h;
    Ok((s1, s2))
}

/// Spring state at one `(θ1, θ2)` point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpringStateSample<T> {
    pub theta1: T,
    pub theta2: T,
    pub alpha: T,
    pub alpha0: T,
    pub tau_d: T,
    pub s1: T,
    pub s2: T,
}

pub fn spring_state<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<SpringStateSample<T>> {
    let alpha = opening_angle(p, theta1, theta2)?;
    let alpha0 = rest_angle(p, theta1)?;
    let (s1, s2) = sensitivities(p, theta1, theta2)?;
    Ok(SpringStateSample {
        theta1,
        theta2,
        alpha,
        alpha0,
        tau_d: torque_for_deflection(p, alpha - alpha0),
        s1,
        s2,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn params() -> FingerParams<f64> {
        FingerParams::nominal()
    }

    #[test]
    fn rest_angle_value() {
        let a0 = rest_angle(&params(), 0.0).unwrap();
        assert_abs_diff_eq!(a0, (1988.0_f64 / 2888.0).acos(), epsilon = 1e-12);
        for deg in [5.0, 20.0, 40.0] {
            assert_abs_diff_eq!(rest_angle(&params(), f64::to_radians(deg)).unwrap(), a0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hinge_limits() {
        let p = params();
        assert!(matches!(hinge_angle(&p, 76.0), Err(Error::StopperLimit { .. })));
        assert_abs_diff_eq!(hinge_angle(&p, 76.0 - 1e-9).unwrap(), std::f64::consts::PI, epsilon = 1e-3);
        assert_abs_diff_eq!(hinge_angle(&p, 1e-9).unwrap(), 0.0, epsilon = 1e-9);
        assert_eq!(hinge_angle(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn torque_examples() {
        let p = params();
        assert_eq!(spring_torque(&p, 0.3, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(torque_for_deflection(&p, 0.1), 80.0, epsilon = 1e-12);
        assert_eq!(torque_for_deflection(&p, -0.1), 0.0);

        // chain B → |AB| → α → τ by hand
        let t2 = 20f64.to_radians();
        let ab = 30.0 + 30.0 * t2.tan();
        let alpha = ((38.0 * 38.0 * 2.0 - ab * ab) / (2.0 * 38.0 * 38.0)).acos();
        let expect = 800.0 * (alpha - (1988.0_f64 / 2888.0).acos());
        assert_abs_diff_eq!(spring_torque(&p, 0.0, t2).unwrap(), expect, epsilon = 1e-9);
    }

    #[test]
    fn preload_offsets_open_pair_only() {
        let mut p = params();
        p.preload = 25.0;
        assert_eq!(spring_torque(&p, 0.0, 0.0).unwrap(), 0.0);
        let t2 = 10f64.to_radians();
        let base = spring_torque(&params(), 0.0, t2).unwrap();
        assert_abs_diff_eq!(spring_torque(&p, 0.0, t2).unwrap(), base + 25.0, epsilon = 1e-9);
    }

    #[test]
    fn sensitivity_five_point_oracle() {
        let p = params();
        let (t1, t2) = (0.0, 20f64.to_radians());
        let h = 1e-3;
        let a = |x: f64| opening_angle(&p, t1, x).unwrap();
        let five = (-a(t2 + 2.0 * h) + 8.0 * a(t2 + h) - 8.0 * a(t2 - h) + a(t2 - 2.0 * h)) / (12.0 * h);
        let (_, s2) = sensitivities(&p, t1, t2).unwrap();
        assert!(((s2 - five) / five).abs() < 1e-5, "{s2} vs {five}");
    }

    #[test]
    fn sensitivity_errors_near_limit() {
        let p = params();
        // |AB| reaches 76 mm near theta2 = 56.2° at theta1 = 0
        let edge = ((76.0_f64 - 30.0) / 30.0).atan();
        assert!(matches!(
            sensitivities(&p, 0.0, edge - 1e-6),
            Err(Error::NonSmooth { .. })
        ));
    }

    #[test]
    fn spring_state_consistency() {
        let p = params();
        let s = spring_state(&p, 0.2, 0.4).unwrap();
        assert_eq!(s.tau_d, p.k_d * (s.alpha - s.alpha0));
        assert!(s.s2 > 0.0);
    }
}
