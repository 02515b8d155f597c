//! Quasi-static closure of the two-finger hand on a planar object.
//!
//! Hand frame: x is the closing axis with the hand centerline at `x = 0`,
//! y points up and the support plane is `y = 0`. Each finger is its crank
//! stage turned upside down, so the coupler end `D` runs horizontally a
//! fixed height above the plane and the distal phalanx hangs from `D`. The
//! left finger closes toward +x; the right finger is its mirror image.
//!
//! The crank sweeps the flattest window of the coupler path. A contact on
//! the distal phalanx ends the closure as a parallel pinch. A contact on the
//! coupler `BD` blocks the stage; if the drive torque beats the stopper
//! preload the differential pair opens, `F` is frozen, and the distal
//! phalanx wraps inward at fixed `θ1` until it touches the object, reaches
//! 90°, or the pair hits its opening limit.
//!
//! Contacts are refined by bisection to [`CONTACT_TOL_MM`], which bounds the
//! penetration at termination independently of the step size (without the
//! refinement the bound would be `|dx_D/dθ_A| · step`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finger::{pre_contact_theta2, FingerParams, FingerState, GraspMode};
use crate::force::{envelope_forces, pinch_contact_force, EnvelopeForces, PinchForceInput, PinchModel};
use crate::geom::{segment_shape_closest, ObjectShape, Point2, Segment2};
use crate::hoecken::{flattest_segment, solve_position, trace_path, FlatSegment, HoeckenDims};

type P = Point2<f64>;

/// Contact refinement tolerance on the signed distance.
pub const CONTACT_TOL_MM: f64 = 1e-6;
/// Largest opening between the fingertips.
pub const MAX_SPAN_MM: f64 = 200.0;
/// Largest crank or wrap increment.
pub const MAX_STEP_RAD: f64 = 0.01;

/// Hand geometry and stepping parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandConfig {
    pub finger: FingerParams<f64>,
    /// Fingertip opening at the start of the closure (mm).
    pub span: f64,
    /// Crank and wrap increment (rad).
    pub step: f64,
    /// Simulate one finger and mirror it; assumes a centered object.
    pub symmetric: bool,
    /// Length of the distal phalanx below `D` (mm).
    pub distal_length: f64,
    /// Gap between the fingertip and the support plane while pinching (mm).
    pub tip_clearance: f64,
    /// Motor torque at the crank (N·mm).
    pub tau_a: f64,
    pub pinch_model: PinchModel<f64>,
    /// Required straight-line travel of `D`, in crank lengths.
    pub min_travel_units: f64,
    /// Samples per crank revolution for the window search.
    pub window_samples: usize,
    pub record_trajectory: bool,
}

impl Default for HandConfig {
    fn default() -> Self {
        Self {
            finger: FingerParams::nominal(),
            span: MAX_SPAN_MM,
            step: 0.25f64.to_radians(),
            symmetric: true,
            distal_length: 25.0,
            tip_clearance: 2.0,
            tau_a: 400.0,
            pinch_model: PinchModel::Auto,
            min_travel_units: 5.18,
            window_samples: 3600,
            record_trajectory: false,
        }
    }
}

impl HandConfig {
    pub fn validate(&self) -> Result<()> {
        self.finger.validate()?;
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(0.0..=MAX_SPAN_MM).contains(&self.span) {
            return bad(format!("span {} mm outside [0, {MAX_SPAN_MM}]", self.span));
        }
        if !(self.step > 0.0 && self.step <= MAX_STEP_RAD) {
            return bad(format!("step {} rad outside (0, {MAX_STEP_RAD}]", self.step));
        }
        if !(self.distal_length > 0.0 && self.distal_length.is_finite()) {
            return bad("distal_length must be positive".into());
        }
        if !(self.tip_clearance >= 0.0 && self.tip_clearance.is_finite()) {
            return bad("tip_clearance must be non-negative".into());
        }
        if !(self.tau_a > 0.0 && self.tau_a.is_finite()) {
            return bad("tau_a must be positive".into());
        }
        if !(self.min_travel_units > 0.0) {
            return bad("min_travel_units must be positive".into());
        }
        if self.window_samples < 360 {
            return bad("window_samples must be at least 360".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Finger link that touched the object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// Coupler `BD`, the second phalanx.
    Coupler,
    Distal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeMode {
    Pinch,
    Envelope,
    Failure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub side: Side,
    pub link: Link,
    pub point: P,
    /// Normal force (N).
    pub force: f64,
}

/// One recorded step of a closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub side: Side,
    pub theta_a: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub mode: GraspMode,
    pub d: P,
    pub tip: P,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerOutcome {
    pub side: Side,
    pub mode: OutcomeMode,
    pub state: FingerState<f64>,
    pub crank_angle_at_stop: f64,
    /// Crank angle at which the differential pair opened.
    pub transition_angle: Option<f64>,
    pub envelope_forces: Option<EnvelopeForces<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspOutcome {
    pub mode: OutcomeMode,
    pub contacts: Vec<Contact>,
    pub fingers: Vec<FingerOutcome>,
    pub crank_angle_at_stop: f64,
    pub trajectory: Option<Vec<TrajectorySample>>,
}

/// Finger placement derived from a [`HandConfig`].
///
/// The fingertips meet on the centerline at the closed end of the crank
/// window; the opening `span` picks the crank angle the closure starts from.
#[derive(Clone, Debug)]
pub struct Hand {
    pub cfg: HandConfig,
    pub window: FlatSegment<f64>,
    /// Crank angle at which the fingertips are `span` apart.
    pub theta_open: f64,
    /// World position of the crank pivot of the left finger.
    offset: P,
}

/// Pose of the left finger in the hand frame.
#[derive(Clone, Copy, Debug)]
struct Pose {
    b: P,
    d: P,
    tip: P,
    theta1: f64,
}

impl Pose {
    fn coupler(&self) -> Segment2<f64> {
        Segment2 { p0: self.b, p1: self.d }
    }
    fn distal(&self) -> Segment2<f64> {
        Segment2 { p0: self.d, p1: self.tip }
    }
}

impl Hand {
    pub fn new(cfg: HandConfig) -> Result<Self> {
        cfg.validate()?;
        let dims = cfg.finger.hoecken;
        let trace = trace_path(&dims, 0.0, std::f64::consts::TAU, cfg.window_samples + 1)?;
        let window = flattest_segment(&trace, cfg.min_travel_units * dims.l)?;
        let d_closed = solve_position(&dims, window.theta_end).d;
        let d_height = cfg.distal_length + cfg.tip_clearance;
        let offset = P::new(d_closed.x, d_height + d_closed.y);
        let theta_open = open_angle(&dims, &window, d_closed.x + 0.5 * cfg.span)?;
        Ok(Self { cfg, window, theta_open, offset })
    }

    fn to_world(&self, p: P) -> P {
        self.offset - p
    }

    /// Height of the slider guide, the lowest point of the palm.
    pub fn palm_height(&self) -> f64 {
        self.to_world(self.cfg.finger.hoecken.c).y
    }

    fn pose(&self, theta_a: f64, distal_angle: f64) -> Pose {
        let local = solve_position(&self.cfg.finger.hoecken, theta_a);
        let lean = local.d - local.b;
        let theta1 = (-lean.x).atan2(lean.y);
        let d = self.to_world(local.d);
        let tip = d + P::new(distal_angle.sin(), -distal_angle.cos()) * self.cfg.distal_length;
        Pose { b: self.to_world(local.b), d, tip, theta1 }
    }

    fn check_object(&self, obj: &ObjectShape<f64>) -> Result<()> {
        let obj = obj.validated()?;
        let c = obj.center();
        let h = obj.half_extents();
        let half_span = 0.5 * self.cfg.span;
        if c.x - h.x <= -half_span || c.x + h.x >= half_span {
            return Err(Error::InvalidObject(format!(
                "object spans x in [{:.3}, {:.3}] but the opening is ±{half_span:.3} mm",
                c.x - h.x,
                c.x + h.x
            )));
        }
        if c.y - h.y < -1e-9 {
            return Err(Error::InvalidObject("object extends below the support plane".into()));
        }
        if c.y + h.y >= self.palm_height() {
            return Err(Error::InvalidObject(format!(
                "object top {:.3} mm reaches the palm at {:.3} mm",
                c.y + h.y,
                self.palm_height()
            )));
        }
        let start = self.pose(self.theta_open, 0.0);
        for shape in [obj, mirror(&obj)] {
            for seg in [start.coupler(), start.distal()] {
                if segment_shape_closest(&seg, &shape).0 <= 0.0 {
                    return Err(Error::InvalidObject("object overlaps a finger at the start".into()));
                }
            }
        }
        Ok(())
    }

    /// Closes the left finger on `obj` (already in the left finger's frame).
    fn run_finger(
        &self,
        obj: &ObjectShape<f64>,
        side: Side,
        traj: &mut Option<Vec<TrajectorySample>>,
    ) -> Result<(FingerOutcome, Vec<Contact>)> {
        let cfg = &self.cfg;
        let p = &cfg.finger;
        let gap = |pose: &Pose| {
            let c = segment_shape_closest(&pose.coupler(), obj);
            let d = segment_shape_closest(&pose.distal(), obj);
            (c, d)
        };
        let mut record = |theta_a: f64, pose: &Pose, theta2: f64, mode: GraspMode| {
            if let Some(t) = traj.as_mut() {
                let (d, tip) = match side {
                    Side::Left => (pose.d, pose.tip),
                    Side::Right => (pose.d.mirror_x(), pose.tip.mirror_x()),
                };
                t.push(TrajectorySample { side, theta_a, theta1: pose.theta1, theta2, mode, d, tip });
            }
        };
        let flip = |q: P| match side {
            Side::Left => q,
            Side::Right => q.mirror_x(),
        };

        // Pinch phase: advance the crank until something touches.
        let end = self.window.theta_end;
        let mut theta = self.theta_open;
        record(theta, &self.pose(theta, 0.0), 0.0, GraspMode::Pinch);
        let contact_theta = loop {
            let next = (theta + cfg.step).min(end);
            let pose = self.pose(next, 0.0);
            let (c, d) = gap(&pose);
            if c.0.min(d.0) <= 0.0 {
                let min_gap = |t: f64| {
                    let (c, d) = gap(&self.pose(t, 0.0));
                    c.0.min(d.0)
                };
                break refine(min_gap, theta, next);
            }
            record(next, &pose, 0.0, GraspMode::Pinch);
            if next >= end {
                let state = FingerState::pinch(pose.theta1)?;
                let outcome = FingerOutcome {
                    side,
                    mode: OutcomeMode::Failure,
                    state,
                    crank_angle_at_stop: next,
                    transition_angle: None,
                    envelope_forces: None,
                };
                return Ok((outcome, Vec::new()));
            }
            theta = next;
        };

        let pose = self.pose(contact_theta, 0.0);
        record(contact_theta, &pose, 0.0, GraspMode::Pinch);
        let (c, d) = gap(&pose);
        let distal_first = d.0 <= c.0 + CONTACT_TOL_MM;
        let opens = !distal_first && p.tau1 > p.preload;
        if !opens {
            let (seg, t, link) = if distal_first {
                (pose.distal(), d.1, Link::Distal)
            } else {
                (pose.coupler(), c.1, Link::Coupler)
            };
            let point = seg.at(t);
            let input = PinchForceInput {
                tau_a: cfg.tau_a,
                theta_a: contact_theta,
                theta1: pose.theta1,
                h2_pinch: pose.d.y - point.y,
                model: cfg.pinch_model,
            };
            let force = pinch_contact_force(&p.hoecken, p.l1, &input)?;
            let outcome = FingerOutcome {
                side,
                mode: OutcomeMode::Pinch,
                state: FingerState::pinch(pose.theta1)?,
                crank_angle_at_stop: contact_theta,
                transition_angle: None,
                envelope_forces: None,
            };
            return Ok((outcome, vec![Contact { side, link, point: flip(point), force }]));
        }

        // Envelope phase: the stage is blocked, the distal phalanx wraps.
        let coupler_point = pose.coupler().at(c.1);
        let theta1 = pose.theta1;
        let theta2_pre = pre_contact_theta2(p, theta1)?;
        let limit = std::f64::consts::FRAC_PI_2;
        let distal_gap = |phi: f64| segment_shape_closest(&self.pose(contact_theta, phi).distal(), obj);
        let mut phi = theta2_pre;
        let mut distal_contact = None;
        while phi < limit {
            let next = (phi + cfg.step).min(limit);
            if envelope_forces(p, theta1, next).is_err() {
                break;
            }
            let (g, _) = distal_gap(next);
            if g <= 0.0 {
                let hit = refine(|x| distal_gap(x).0, phi, next);
                let (_, t) = distal_gap(hit);
                distal_contact = Some(self.pose(contact_theta, hit).distal().at(t));
                phi = hit;
                break;
            }
            phi = next;
            record(contact_theta, &self.pose(contact_theta, phi), phi, GraspMode::Envelope);
        }
        record(contact_theta, &self.pose(contact_theta, phi), phi, GraspMode::Envelope);
        let forces = envelope_forces(p, theta1, phi)?;
        let mut contacts = vec![Contact { side, link: Link::Coupler, point: flip(coupler_point), force: forces.f2 }];
        if let Some(q) = distal_contact {
            contacts.push(Contact { side, link: Link::Distal, point: flip(q), force: forces.f3 });
        }
        let outcome = FingerOutcome {
            side,
            mode: OutcomeMode::Envelope,
            state: FingerState::envelope(theta1, phi)?,
            crank_angle_at_stop: contact_theta,
            transition_angle: Some(contact_theta),
            envelope_forces: Some(forces),
        };
        Ok((outcome, contacts))
    }

    pub fn close_on_object(&self, obj: &ObjectShape<f64>) -> Result<GraspOutcome> {
        self.check_object(obj)?;
        let mut traj = self.cfg.record_trajectory.then(Vec::new);
        let (left, mut contacts) = self.run_finger(obj, Side::Left, &mut traj)?;
        let right = if self.cfg.symmetric {
            let mut r = left.clone();
            r.side = Side::Right;
            let mirrored: Vec<Contact> = contacts
                .iter()
                .map(|c| Contact { side: Side::Right, point: c.point.mirror_x(), ..*c })
                .collect();
            contacts.extend(mirrored);
            if let Some(t) = traj.as_mut() {
                let right: Vec<_> = t
                    .iter()
                    .map(|s| TrajectorySample { side: Side::Right, d: s.d.mirror_x(), tip: s.tip.mirror_x(), ..*s })
                    .collect();
                t.extend(right);
            }
            r
        } else {
            let (r, c) = self.run_finger(&mirror(obj), Side::Right, &mut traj)?;
            contacts.extend(c);
            r
        };
        let modes = [left.mode, right.mode];
        let mode = if modes.contains(&OutcomeMode::Failure) {
            OutcomeMode::Failure
        } else if modes.contains(&OutcomeMode::Envelope) {
            OutcomeMode::Envelope
        } else {
            OutcomeMode::Pinch
        };
        Ok(GraspOutcome {
            mode,
            contacts,
            crank_angle_at_stop: left.crank_angle_at_stop,
            fingers: vec![left, right],
            trajectory: traj,
        })
    }

    /// Earliest crank angle at which a finger's differential pair opened.
    pub fn transition_angle(&self, obj: &ObjectShape<f64>) -> Result<f64> {
        let out = self.close_on_object(obj)?;
        out.fingers
            .iter()
            .filter_map(|f| f.transition_angle)
            .reduce(f64::min)
            .ok_or(Error::NotEnveloping)
    }
}

/// Crank angle in the window where the local `D_x` equals `target`.
fn open_angle(dims: &HoeckenDims<f64>, window: &FlatSegment<f64>, target: f64) -> Result<f64> {
    let x = |t: f64| solve_position(dims, t).d.x - target;
    let (mut lo, mut hi) = (window.theta_start, window.theta_end);
    if x(lo) < 0.0 {
        return Err(Error::InvalidInput(format!(
            "opening exceeds the straight-line travel of {:.3} mm per finger",
            window.x_travel
        )));
    }
    if x(hi) >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if x(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn mirror(obj: &ObjectShape<f64>) -> ObjectShape<f64> {
    obj.with_center(obj.center().mirror_x())
}

/// Bisects `[lo, hi]` (with `f(lo) > 0 ≥ f(hi)`) until `f(hi)` is within the
/// contact tolerance; returns that upper end.
fn refine(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if f(hi) >= -CONTACT_TOL_MM {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Closes a hand built from `cfg` on `obj`.
pub fn close_on_object(cfg: &HandConfig, obj: &ObjectShape<f64>) -> Result<GraspOutcome> {
    Hand::new(*cfg)?.close_on_object(obj)
}

/// Crank angle at which the grasp switches to enveloping.
pub fn transition_angle(cfg: &HandConfig, obj: &ObjectShape<f64>) -> Result<f64> {
    Hand::new(*cfg)?.transition_angle(obj)
}

/// Object of the given kind resting on the support plane, centered between
/// the fingers.
pub fn resting_circle(diameter: f64) -> Result<ObjectShape<f64>> {
    ObjectShape::circle(P::new(0.0, 0.5 * diameter), diameter)
}
