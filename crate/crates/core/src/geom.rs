//! Planar geometry kernel: points, segments, and the object shapes used for
//! contact queries.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point (or free vector) in the plane, millimetres.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` from the +x axis.
    pub fn unit(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, rhs: Self) -> T {
        self.x * rhs.x + self.y * rhs.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, rhs: Self) -> T {
        self.x * rhs.y - self.y * rhs.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, rhs: Self) -> T {
        (self - rhs).norm()
    }

    /// Angle from the +x axis, in `(-π, π]`.
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Self {
        self * self.norm().recip()
    }

    pub fn mirror_x(self) -> Self {
        Self::new(-self.x, self.y)
    }

    pub(crate) fn ensure_finite(self, what: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::InvalidInput(format!("{what} has a non-finite coordinate")))
        }
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Rigid rotation of `p` about `about` by `angle` (counter-clockwise).
pub fn rotate<T: Scalar>(p: Point2<T>, about: Point2<T>, angle: T) -> Point2<T> {
    let (s, c) = angle.sin_cos();
    let d = p - about;
    about + Point2::new(c * d.x - s * d.y, s * d.x + c * d.y)
}

/// Angle opposite side `c` in a triangle with sides `a`, `b`, `c`.
///
/// The cosine is clamped to `[-1, 1]` when it overshoots by less than the
/// geometric tolerance; flat triangles return `0` or `π`.
pub fn triangle_angle<T: Scalar>(a: T, b: T, c: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero() && c >= T::zero()) || !c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "triangle sides must be positive, got ({}, {}, {})",
            a.as_f64(),
            b.as_f64(),
            c.as_f64()
        )));
    }
    let cos = (a * a + b * b - c * c) / (T::lit(2.0) * a * b);
    let tol = T::geom_tol();
    if cos > T::one() + tol || cos < -T::one() - tol {
        return Err(Error::DegenerateTriangle { a: a.as_f64(), b: b.as_f64(), c: c.as_f64() });
    }
    Ok(cos.max(-T::one()).min(T::one()).acos())
}

/// Straight link between two distinct points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment2<T> {
    pub p0: Point2<T>,
    pub p1: Point2<T>,
}

impl<T: Scalar> Segment2<T> {
    pub fn new(p0: Point2<T>, p1: Point2<T>) -> Result<Self> {
        p0.ensure_finite("segment start")?;
        p1.ensure_finite("segment end")?;
        if p0 == p1 {
            return Err(Error::InvalidInput("zero-length segment".into()));
        }
        Ok(Self { p0, p1 })
    }

    pub fn direction(&self) -> Point2<T> {
        self.p1 - self.p0
    }

    pub fn length(&self) -> T {
        self.direction().norm()
    }

    pub fn at(&self, t: T) -> Point2<T> {
        self.p0 + self.direction() * t
    }

    /// Parameter in `[0, 1]` of the point closest to `p`.
    pub fn project(&self, p: Point2<T>) -> T {
        let d = self.direction();
        let t = (p - self.p0).dot(d) / d.dot(d);
        t.max(T::zero()).min(T::one())
    }

    pub fn closest_point(&self, p: Point2<T>) -> Point2<T> {
        self.at(self.project(p))
    }

    pub fn distance_to_point(&self, p: Point2<T>) -> T {
        self.closest_point(p).distance(p)
    }

    pub fn transformed(&self, f: impl Fn(Point2<T>) -> Point2<T>) -> Self {
        Self { p0: f(self.p0), p1: f(self.p1) }
    }
}

/// Planar object section, positioned in the hand frame.
///
/// `ThinPlate` is an upright sheet: `thickness` runs along the closing (x)
/// axis and `width` is its visible extent along y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectShape<T> {
    Circle { center: Point2<T>, diameter: T },
    Box { center: Point2<T>, width: T, height: T },
    ThinPlate { center: Point2<T>, width: T, thickness: T },
}

/// Thickest sheet still classified as a plate.
pub const MAX_PLATE_THICKNESS_MM: f64 = 5.0;

impl<T: Scalar> ObjectShape<T> {
    pub fn circle(center: Point2<T>, diameter: T) -> Result<Self> {
        Self::Circle { center, diameter }.validated()
    }

    pub fn rect(center: Point2<T>, width: T, height: T) -> Result<Self> {
        Self::Box { center, width, height }.validated()
    }

    pub fn plate(center: Point2<T>, width: T, thickness: T) -> Result<Self> {
        Self::ThinPlate { center, width, thickness }.validated()
    }

    /// Checks dimensions and returns the shape unchanged.
    pub fn validated(self) -> Result<Self> {
        self.center().ensure_finite("object center")?;
        let dims: &[T] = match &self {
            Self::Circle { diameter, .. } => &[*diameter],
            Self::Box { width, height, .. } => &[*width, *height],
            Self::ThinPlate { width, thickness, .. } => &[*width, *thickness],
        };
        if dims.iter().any(|d| !(d.is_finite() && *d > T::zero())) {
            return Err(Error::InvalidObject("object dimensions must be positive".into()));
        }
        if let Self::ThinPlate { thickness, .. } = self {
            if thickness > T::lit(MAX_PLATE_THICKNESS_MM) {
                return Err(Error::InvalidObject(format!(
                    "plate thickness {} mm exceeds {MAX_PLATE_THICKNESS_MM} mm",
                    thickness.as_f64()
                )));
            }
        }
        Ok(self)
    }

    pub fn center(&self) -> Point2<T> {
        match *self {
            Self::Circle { center, .. } | Self::Box { center, .. } | Self::ThinPlate { center, .. } => {
                center
            }
        }
    }

    /// Half extents along x and y of the axis-aligned bounding box.
    pub fn half_extents(&self) -> Point2<T> {
        let half = T::lit(0.5);
        match *self {
            Self::Circle { diameter, .. } => Point2::new(diameter * half, diameter * half),
            Self::Box { width, height, .. } => Point2::new(width * half, height * half),
            Self::ThinPlate { width, thickness, .. } => Point2::new(thickness * half, width * half),
        }
    }

    pub fn with_center(self, center: Point2<T>) -> Self {
        match self {
            Self::Circle { diameter, .. } => Self::Circle { center, diameter },
            Self::Box { width, height, .. } => Self::Box { center, width, height },
            Self::ThinPlate { width, thickness, .. } => Self::ThinPlate { center, width, thickness },
        }
    }

    /// Signed distance from a point to the boundary; negative inside.
    pub fn signed_distance(&self, p: Point2<T>) -> T {
        match *self {
            Self::Circle { center, diameter } => p.distance(center) - diameter * T::lit(0.5),
            _ => rect_sdf(p - self.center(), self.half_extents()),
        }
    }
}

fn rect_sdf<T: Scalar>(p: Point2<T>, half: Point2<T>) -> T {
    let qx = p.x.abs() - half.x;
    let qy = p.y.abs() - half.y;
    let outside = Point2::new(qx.max(T::zero()), qy.max(T::zero())).norm();
    outside + qx.max(qy).min(T::zero())
}

/// Signed distance between a segment and a shape boundary.
///
/// Positive values are the clearance between them; a segment that enters the
/// shape gets the negated depth of its deepest point.
pub fn segment_shape_distance<T: Scalar>(s: &Segment2<T>, shape: &ObjectShape<T>) -> T {
    segment_shape_closest(s, shape).0
}

/// [`segment_shape_distance`] together with the segment parameter in
/// `[0, 1]` where it is attained.
pub fn segment_shape_closest<T: Scalar>(s: &Segment2<T>, shape: &ObjectShape<T>) -> (T, T) {
    match *shape {
        ObjectShape::Circle { center, diameter } => {
            let t = s.project(center);
            (s.at(t).distance(center) - diameter * T::lit(0.5), t)
        }
        _ => segment_rect_closest(s, shape.center(), shape.half_extents()),
    }
}

fn segment_rect_closest<T: Scalar>(s: &Segment2<T>, center: Point2<T>, half: Point2<T>) -> (T, T) {
    let p0 = s.p0 - center;
    let p1 = s.p1 - center;
    let local = Segment2 { p0, p1 };
    let sdf = |t: T| rect_sdf(local.at(t), half);
    if let Some((t0, t1)) = clip_to_rect(p0, p1, half) {
        // The box SDF is convex along a line, so golden-section search on the
        // clipped part finds the deepest point.
        let t = golden_argmin(sdf, t0, t1);
        return (sdf(t), t);
    }
    let corners = [
        Point2::new(half.x, half.y),
        Point2::new(-half.x, half.y),
        Point2::new(-half.x, -half.y),
        Point2::new(half.x, -half.y),
    ];
    corners
        .iter()
        .map(|&c| local.project(c))
        .chain([T::zero(), T::one()])
        .map(|t| (sdf(t), t))
        .fold((T::infinity(), T::zero()), |best, cand| if cand.0 < best.0 { cand } else { best })
}

/// Liang–Barsky clip of `p0 → p1` against the closed box `|x| ≤ hx, |y| ≤ hy`.
fn clip_to_rect<T: Scalar>(p0: Point2<T>, p1: Point2<T>, half: Point2<T>) -> Option<(T, T)> {
    let d = p1 - p0;
    let mut t0 = T::zero();
    let mut t1 = T::one();
    for (p, q) in [
        (-d.x, p0.x + half.x),
        (d.x, half.x - p0.x),
        (-d.y, p0.y + half.y),
        (d.y, half.y - p0.y),
    ] {
        if p == T::zero() {
            if q < T::zero() {
                return None;
            }
        } else {
            let r = q / p;
            if p < T::zero() {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

fn golden_argmin<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= T::epsilon() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    [a, b, c, d].into_iter().fold(a, |best, t| if f(t) < f(best) { t } else { best })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    use approx::assert_abs_diff_eq;

    use super::*;

    type P = Point2<f64>;

    #[test]
    fn rotate_examples() {
        let o = P::origin();
        let r = rotate(P::new(1.0, 0.0), o, 0.0);
        assert_eq!(r, P::new(1.0, 0.0));
        let r = rotate(P::new(1.0, 0.0), o, FRAC_PI_2);
        assert_abs_diff_eq!(r.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 1.0, epsilon = 1e-15);
        let r = rotate(P::new(2.0, 0.0), P::new(1.0, 0.0), PI);
        assert_abs_diff_eq!(r.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn triangle_angle_examples() {
        assert_abs_diff_eq!(triangle_angle(1.0, 1.0, 1.0).unwrap(), FRAC_PI_3, epsilon = 1e-15);
        assert_abs_diff_eq!(triangle_angle(1.0, 1.0, 2.0).unwrap(), PI, epsilon = 1e-15);
        assert_eq!(triangle_angle(1.0, 1.0, 0.0).unwrap(), 0.0);
        // just past the flat limit but inside tolerance
        assert_abs_diff_eq!(triangle_angle(1.0, 1.0, 2.0 + 1e-10).unwrap(), PI, epsilon = 1e-15);
    }

    #[test]
    fn triangle_angle_isoceles_matches_construction() {
        // Build the isoceles triangle explicitly: apex at origin, legs of 38 at
        // ±half-angle, and recover the apex angle from the base length.
        let got = triangle_angle(38.0, 38.0, 30.0).unwrap();
        let half = (15.0_f64 / 38.0).asin();
        let p = P::new(38.0 * half.cos(), 38.0 * half.sin());
        let q = P::new(p.x, -p.y);
        assert_abs_diff_eq!(p.distance(q), 30.0, epsilon = 1e-12);
        let apex = (p.angle() - q.angle()).abs();
        assert_abs_diff_eq!(got, apex, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 0.811_562_833_708_480_4, epsilon = 1e-12);
    }

    #[test]
    fn triangle_angle_rejects_violations() {
        assert!(matches!(triangle_angle(1.0, 1.0, 2.1), Err(Error::DegenerateTriangle { .. })));
        assert!(matches!(triangle_angle(1.0, 3.0, 1.0), Err(Error::DegenerateTriangle { .. })));
        assert!(matches!(triangle_angle(0.0, 1.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(triangle_angle(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn segment_rejects_degenerate() {
        assert!(Segment2::new(P::new(1.0, 1.0), P::new(1.0, 1.0)).is_err());
        assert!(Segment2::new(P::new(f64::NAN, 1.0), P::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn circle_distance_examples() {
        let c = ObjectShape::circle(P::origin(), 10.0).unwrap();
        let s = Segment2::new(P::new(10.0, -20.0), P::new(10.0, 20.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &c), 5.0, epsilon = 1e-12);
        let s = Segment2::new(P::new(-20.0, 0.0), P::new(20.0, 0.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &c), -5.0, epsilon = 1e-12);
        let s = Segment2::new(P::new(5.0, -20.0), P::new(5.0, 20.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &c), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rect_distance_outside_and_inside() {
        let b = ObjectShape::rect(P::new(0.0, 0.0), 20.0, 10.0).unwrap();
        // vertical segment 5 mm right of the box face
        let s = Segment2::new(P::new(15.0, -2.0), P::new(15.0, 2.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &b), 5.0, epsilon = 1e-12);
        // diagonal approach to a corner
        let s = Segment2::new(P::new(13.0, 9.0), P::new(20.0, 9.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &b), 5.0, epsilon = 1e-12);
        // through the middle: deepest point is the center, 5 mm from the long faces
        let s = Segment2::new(P::new(-30.0, 0.0), P::new(30.0, 0.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &b), -5.0, epsilon = 1e-9);
        // grazing a face
        let s = Segment2::new(P::new(-30.0, 5.0), P::new(30.0, 5.0)).unwrap();
        assert_abs_diff_eq!(segment_shape_distance(&s, &b), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn plate_extents_follow_thickness_along_x() {
        let p = ObjectShape::plate(P::new(0.0, 10.0), 20.0, 1.0).unwrap();
        assert_eq!(p.half_extents(), P::new(0.5, 10.0));
        assert!(ObjectShape::plate(P::origin(), 20.0, 6.0).is_err());
        assert!(ObjectShape::circle(P::origin(), -1.0).is_err());
    }

    #[test]
    fn f32_kernel_agrees() {
        let a = triangle_angle(38.0_f32, 38.0, 30.0).unwrap();
        assert!((a - 0.811_562_8).abs() < 1e-5);
        let r = rotate(Point2::new(1.0_f32, 0.0), Point2::origin(), std::f32::consts::FRAC_PI_2);
        assert!((r.y - 1.0).abs() < 1e-6);
    }
}
