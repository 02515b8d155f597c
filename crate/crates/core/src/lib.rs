//! Analysis toolkit for a Hoecken-linkage underactuated finger with a
//! differential spring.
//!
//! The mechanism math ([`geom`], [`hoecken`], [`finger`], [`spring`],
//! [`force`]) is generic over [`Scalar`], so it runs in `f32` or `f64`. The
//! simulation ([`grasp`]), [`sweep`] and [`synth`] layers work in `f64`; the
//! aliases below name the `f64` instances.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod error;
pub mod finger;
pub mod force;
pub mod geom;
pub mod grasp;
pub mod hoecken;
pub mod scalar;
pub mod spring;
pub mod svg;
pub mod sweep;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use finger::GraspMode;
pub use scalar::Scalar;
pub use table::{RowStatus, Table};

pub type Point = geom::Point2<f64>;
pub type Segment = geom::Segment2<f64>;
pub type Shape = geom::ObjectShape<f64>;
pub type Dims = hoecken::HoeckenDims<f64>;
pub type Trace = hoecken::PathTrace<f64>;
pub type Finger = finger::FingerParams<f64>;
pub type State = finger::FingerState<f64>;
pub type Forces = force::EnvelopeForces<f64>;
