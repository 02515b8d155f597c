//! Orientation constraints of the finger and the post-contact construction
//! of the virtual bar `AB`.
//!
//! Before contact the differential pair `AH`/`BH` is closed and behaves as a
//! rigid bar `AB` of length `ab0`; together with the base reference `AE` it
//! forms the parallelogram `ABFE`, which keeps the distal phalanx vertical.
//! After the coupler is blocked, `F` is frozen and `B` slides along the
//! coupler line so that `F → B` turns by the distal angle.
//!
//! Frame: `A` is the origin, the slider `C` sits on the coupler line, and
//! angles are measured from vertical, positive toward +x (inward).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::hoecken::HoeckenDims;
use crate::scalar::Scalar;

/// Geometry and stiffness of one finger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerParams<T> {
    /// Differential link on the crank side.
    pub ah: T,
    /// Differential link on the coupler side.
    pub bh: T,
    /// Length of the closed virtual bar `AB`.
    pub ab0: T,
    /// Base-side parallelogram link, equal to `ab0`.
    pub ef: T,
    /// Fixed base reference pivot.
    pub e: Point2<T>,
    /// Lever between the middle joint and the distal joint.
    pub l1: T,
    /// Contact arm on the second phalanx.
    pub h1: T,
    /// Contact arm on the distal phalanx while enveloping.
    pub h2_env: T,
    /// Torsional stiffness of the differential spring (N·mm/rad).
    pub k_d: T,
    /// Actuation torque at joint 1 (N·mm).
    pub tau1: T,
    /// Spring preload held by the stopper (N·mm).
    pub preload: T,
    pub hoecken: HoeckenDims<T>,
}

impl<T: Scalar> FingerParams<T> {
    /// Nominal finger: 38 mm differential links, 30 mm closed bar,
    /// 180/150/40 mm levers, 800 N·mm/rad spring, 400 N·mm drive torque, on
    /// a 30 mm crank stage with the slider 45 mm above the pivot.
    pub fn nominal() -> Self {
        let mm = T::lit;
        Self {
            ah: mm(38.0),
            bh: mm(38.0),
            ab0: mm(30.0),
            ef: mm(30.0),
            e: Point2::new(mm(-30.0), T::zero()),
            l1: mm(180.0),
            h1: mm(150.0),
            h2_env: mm(40.0),
            k_d: mm(800.0),
            tau1: mm(400.0),
            preload: T::zero(),
            hoecken: HoeckenDims::nominal(mm(30.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hoecken.validate()?;
        self.e.ensure_finite("base pivot E")?;
        let positive = [
            ("ah", self.ah),
            ("bh", self.bh),
            ("ab0", self.ab0),
            ("ef", self.ef),
            ("l1", self.l1),
            ("h1", self.h1),
            ("h2_env", self.h2_env),
            ("k_d", self.k_d),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {}", v.as_f64())));
            }
        }
        if !self.tau1.is_finite() {
            return Err(Error::InvalidInput("tau1 must be finite".into()));
        }
        if !(self.preload >= T::zero()) {
            return Err(Error::InvalidInput("preload must be non-negative".into()));
        }
        if !(self.ab0 < self.ah + self.bh) {
            return Err(Error::InvalidInput(format!(
                "ab0 = {} must be shorter than ah + bh = {}",
                self.ab0.as_f64(),
                (self.ah + self.bh).as_f64()
            )));
        }
        let tol = T::geom_tol() * (T::one() + self.ab0);
        if (self.ef - self.ab0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "ef = {} must equal ab0 = {} to close the parallelogram",
                self.ef.as_f64(),
                self.ab0.as_f64()
            )));
        }
        Ok(())
    }
}

/// Which constraint set currently holds the distal phalanx.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraspMode {
    Pinch,
    Envelope,
}

/// Generalized coordinates of a finger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerState<T> {
    /// Second-phalanx rotation from vertical, positive inward (rad).
    pub theta1: T,
    /// Distal rotation from vertical, positive inward (rad).
    pub theta2: T,
    pub mode: GraspMode,
}

impl<T: Scalar> FingerState<T> {
    pub fn pinch(theta1: T) -> Result<Self> {
        Self::new(theta1, T::zero(), GraspMode::Pinch)
    }

    pub fn envelope(theta1: T, theta2: T) -> Result<Self> {
        Self::new(theta1, theta2, GraspMode::Envelope)
    }

    pub fn new(theta1: T, theta2: T, mode: GraspMode) -> Result<Self> {
        if !(theta1.abs() < T::FRAC_PI_2()) || !theta2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "finger angles out of range: theta1 = {}, theta2 = {}",
                theta1.as_f64(),
                theta2.as_f64()
            )));
        }
        Ok(Self { theta1, theta2, mode })
    }
}

/// Closed-pair configuration at a coupler inclination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreContact<T> {
    pub b0: Point2<T>,
    pub f: Point2<T>,
}

/// Direction of the coupler line, pointing from `B` toward `D`.
pub fn coupler_direction<T: Scalar>(theta1: T) -> Point2<T> {
    let (s, c) = theta1.sin_cos();
    Point2::new(s, c)
}

/// `B0` where the closed bar meets the coupler line through `C`, and the
/// parallelogram corner `F = E + (B0 − A)`.
///
/// Of the two circle–line intersections, the one on the lower ray nearest to
/// `C` is kept, so `B0` lies between `A` and `C`.
pub fn pre_contact_geometry<T: Scalar>(p: &FingerParams<T>, theta1: T) -> Result<PreContact<T>> {
    let a = p.hoecken.a;
    let u = coupler_direction(theta1);
    let w = p.hoecken.c - a;
    let along = w.dot(u);
    let disc = along * along - (w.dot(w) - p.ab0 * p.ab0);
    if !(disc >= T::zero()) {
        return Err(Error::NoIntersection { theta1: theta1.as_f64() });
    }
    let t = along - disc.sqrt();
    if !(t > T::zero()) {
        return Err(Error::NoIntersection { theta1: theta1.as_f64() });
    }
    let b0 = p.hoecken.c - u * t;
    Ok(PreContact { b0, f: p.e + (b0 - a) })
}

/// Angle of `F → B0` from +x; the distal angle at which the pair is closed.
pub fn pre_contact_theta2<T: Scalar>(p: &FingerParams<T>, theta1: T) -> Result<T> {
    let pc = pre_contact_geometry(p, theta1)?;
    Ok((pc.b0 - pc.f).angle())
}

/// Intersection of the ray from the frozen `F` at angle `theta2` with the
/// coupler line through `C`.
pub fn locate_b<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<Point2<T>> {
    let f = pre_contact_geometry(p, theta1)?.f;
    let u = coupler_direction(theta1);
    let d = Point2::unit(theta2);
    let denom = d.cross(u);
    let no_solution = || Error::NoSolution { theta1: theta1.as_f64(), theta2: theta2.as_f64() };
    if denom.abs() <= T::geom_tol() {
        return Err(no_solution());
    }
    let r = (p.hoecken.c - f).cross(u) / denom;
    if !(r > T::zero()) {
        return Err(no_solution());
    }
    Ok(f + d * r)
}

/// Length of the virtual bar `|B(θ1, θ2) − A|`.
pub fn virtual_ab_length<T: Scalar>(p: &FingerParams<T>, theta1: T, theta2: T) -> Result<T> {
    Ok(locate_b(p, theta1, theta2)?.distance(p.hoecken.a))
}

/// Distal phalanx angle from vertical: held at zero by the double
/// parallelogram while pinching, free once enveloping.
pub fn distal_orientation<T: Scalar>(state: &FingerState<T>) -> T {
    match state.mode {
        GraspMode::Pinch => T::zero(),
        GraspMode::Envelope => state.theta2,
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn params() -> FingerParams<f64> {
        FingerParams::nominal()
    }

    #[test]
    fn nominal_is_valid() {
        params().validate().unwrap();
        let mut p = params();
        p.ef = 31.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.ab0 = 80.0;
        p.ef = 80.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn vertical_pre_contact() {
        let pc = pre_contact_geometry(&params(), 0.0).unwrap();
        assert_abs_diff_eq!(pc.b0.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.b0.y, 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.f.x, -30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.f.y, 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.b0.norm(), 30.0, epsilon = 1e-12);
    }

    #[test]
    fn tilted_pre_contact_matches_root_find() {
        // Independent route: bisect along the coupler line for |B| = 30.
        let th = 10f64.to_radians();
        let (s, c) = th.sin_cos();
        let point = |t: f64| Point2::new(-t * s, 45.0 - t * c);
        let (mut lo, mut hi) = (0.0, 45.0 * c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if point(mid).norm() > 30.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = point(0.5 * (lo + hi));
        let pc = pre_contact_geometry(&params(), th).unwrap();
        assert_abs_diff_eq!(pc.b0.x, oracle.x, epsilon = 1e-9);
        assert_abs_diff_eq!(pc.b0.y, oracle.y, epsilon = 1e-9);
        // on the line through C at inclination theta1
        assert_abs_diff_eq!((pc.b0 - Point2::new(0.0, 45.0)).cross(coupler_direction(th)), 0.0, epsilon = 1e-9);
        let fe = pc.f - params().e;
        assert_abs_diff_eq!(fe.x, pc.b0.x, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.y, pc.b0.y, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_inclination() {
        // sin(theta1) > 2/3 puts the line out of reach of the 30 mm circle
        assert!(matches!(
            pre_contact_geometry(&params(), 45f64.to_radians()),
            Err(Error::NoIntersection { .. })
        ));
        assert!(pre_contact_geometry(&params(), 41f64.to_radians()).is_ok());
    }

    #[test]
    fn pre_contact_theta2_is_base_direction() {
        for deg in [-30.0, 0.0, 15.0, 40.0] {
            let t2 = pre_contact_theta2(&params(), f64::to_radians(deg)).unwrap();
            assert_abs_diff_eq!(t2, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn locate_b_examples() {
        let p = params();
        let b = locate_b(&p, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(b.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.y, 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(virtual_ab_length(&p, 0.0, 0.0).unwrap(), 30.0, epsilon = 1e-12);

        let t2 = 20f64.to_radians();
        let b = locate_b(&p, 0.0, t2).unwrap();
        assert_abs_diff_eq!(b.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.y, 30.0 + 30.0 * t2.tan(), epsilon = 1e-12);
        assert_abs_diff_eq!(virtual_ab_length(&p, 0.0, t2).unwrap(), 40.919_107, epsilon = 1e-6);

        let ab30 = virtual_ab_length(&p, 0.0, 30f64.to_radians()).unwrap();
        assert!(ab30 > virtual_ab_length(&p, 0.0, t2).unwrap());
    }

    #[test]
    fn locate_b_continuity_at_pre_contact() {
        let p = params();
        for deg in [0.0, 12.0, 25.0, 40.0] {
            let th = f64::to_radians(deg);
            let pc = pre_contact_geometry(&p, th).unwrap();
            let b = locate_b(&p, th, pre_contact_theta2(&p, th).unwrap()).unwrap();
            assert_abs_diff_eq!(b.distance(pc.b0), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn locate_b_parallel_ray_has_no_solution() {
        let p = params();
        let th = 20f64.to_radians();
        // ray parallel to the coupler line
        let err = locate_b(&p, th, std::f64::consts::FRAC_PI_2 - th).unwrap_err();
        assert!(matches!(err, Error::NoSolution { .. }));
        // ray pointing away from the line
        assert!(locate_b(&p, 0.0, std::f64::consts::PI).is_err());
    }

    #[test]
    fn distal_orientation_by_mode() {
        for deg in [0.0, 10.0, 30.0] {
            let s = FingerState::pinch(f64::to_radians(deg)).unwrap();
            assert_eq!(distal_orientation(&s), 0.0);
        }
        let s = FingerState::envelope(0.1, 0.3).unwrap();
        assert_eq!(distal_orientation(&s), 0.3);
        assert!(FingerState::pinch(2.0).is_err());
    }
}
