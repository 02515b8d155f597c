//! Position analysis of the crank–slider–coupler straight-line stage.
//!
//! The crank `AB` turns about the fixed pivot `A`, the coupler `BD` slides
//! through a fixed guide at `C`, and the coupler end `D` carries the
//! fingertip. Over roughly half a crank turn `D` runs along a nearly
//! horizontal line.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;

/// Default slider offset as a multiple of the crank length.
pub const NOMINAL_AC_RATIO: f64 = 1.5;
/// Default coupler length as a multiple of the crank length.
pub const NOMINAL_BD_RATIO: f64 = 6.0;

/// Link lengths and fixed pivots of the straight-line stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoeckenDims<T> {
    /// Crank length `|AB|`, the unit length of the mechanism.
    pub l: T,
    /// Distance from the crank pivot to the slider.
    pub l_ac: T,
    /// Coupler length `|BD|`.
    pub l_bd: T,
    pub a: Point2<T>,
    pub c: Point2<T>,
}

impl<T: Scalar> HoeckenDims<T> {
    /// Crank pivot at the origin with the slider straight above it.
    pub fn new(l: T, l_ac: T, l_bd: T) -> Result<Self> {
        Self::with_pivots(l, l_ac, l_bd, Point2::origin(), Point2::new(T::zero(), l_ac))
    }

    pub fn with_pivots(l: T, l_ac: T, l_bd: T, a: Point2<T>, c: Point2<T>) -> Result<Self> {
        let dims = Self { l, l_ac, l_bd, a, c };
        dims.validate()?;
        Ok(dims)
    }

    /// Stage scaled from the crank length with the given length ratios.
    pub fn from_ratios(l: T, ac_ratio: T, bd_ratio: T) -> Result<Self> {
        Self::new(l, l * ac_ratio, l * bd_ratio)
    }

    /// The 1 : 1.5 : 6 proportions at crank length `l`.
    pub fn nominal(l: T) -> Self {
        Self::from_ratios(l, T::lit(NOMINAL_AC_RATIO), T::lit(NOMINAL_BD_RATIO))
            .expect("nominal ratios are valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.a.ensure_finite("crank pivot A")?;
        self.c.ensure_finite("slider C")?;
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.l.is_finite() && self.l > T::zero()) {
            return fail(format!("crank length must be positive, got {}", self.l.as_f64()));
        }
        if !(self.l_ac.is_finite() && self.l_ac > self.l) {
            return fail(format!(
                "slider offset {} must exceed the crank length {}",
                self.l_ac.as_f64(),
                self.l.as_f64()
            ));
        }
        if !(self.l_bd.is_finite() && self.l_bd > self.l_ac + self.l) {
            return fail(format!(
                "coupler length {} must exceed l_ac + l = {}",
                self.l_bd.as_f64(),
                (self.l_ac + self.l).as_f64()
            ));
        }
        let ac = self.a.distance(self.c);
        if (ac - self.l_ac).abs() > T::geom_tol() * (T::one() + self.l_ac) {
            return fail(format!(
                "|AC| = {} does not match l_ac = {}",
                ac.as_f64(),
                self.l_ac.as_f64()
            ));
        }
        Ok(())
    }

    pub fn ac_ratio(&self) -> T {
        self.l_ac / self.l
    }

    pub fn bd_ratio(&self) -> T {
        self.l_bd / self.l
    }
}

/// Crank pin and coupler end at one crank angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagePose<T> {
    pub b: Point2<T>,
    pub d: Point2<T>,
}

/// Places `B` on the crank circle and `D` on the ray `B → C`, past the slider.
pub fn solve_position<T: Scalar>(dims: &HoeckenDims<T>, theta_a: T) -> StagePose<T> {
    let b = dims.a + Point2::unit(theta_a) * dims.l;
    let d = b + (dims.c - b).normalized() * dims.l_bd;
    StagePose { b, d }
}

/// One crank sample of a coupler path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample<T> {
    pub theta_a: T,
    pub b: Point2<T>,
    pub d: Point2<T>,
}

/// Uniformly sampled coupler path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTrace<T> {
    pub samples: Vec<PathSample<T>>,
    pub dims: HoeckenDims<T>,
}

impl<T: Scalar> PathTrace<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Samples `n` crank angles evenly over `[theta_start, theta_end]`, both ends
/// included.
pub fn trace_path<T: Scalar>(
    dims: &HoeckenDims<T>,
    theta_start: T,
    theta_end: T,
    n: usize,
) -> Result<PathTrace<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("a trace needs at least 2 samples, got {n}")));
    }
    if !(theta_start < theta_end) || !theta_end.is_finite() {
        return Err(Error::InvalidInput("trace range must be increasing and finite".into()));
    }
    dims.validate()?;
    let span = theta_end - theta_start;
    let last = T::lit((n - 1) as f64);
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let theta_a = if i == n - 1 {
                theta_end
            } else {
                theta_start + span * T::lit(i as f64) / last
            };
            let StagePose { b, d } = solve_position(dims, theta_a);
            PathSample { theta_a, b, d }
        })
        .collect();
    Ok(PathTrace { samples, dims: *dims })
}

/// Crank window over which `D` stays inside the thinnest horizontal band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSegment<T> {
    pub theta_start: T,
    pub theta_end: T,
    pub start_index: usize,
    pub end_index: usize,
    /// Height of the band `max D_y - min D_y` over the window.
    pub max_dev: T,
    /// Horizontal extent `max D_x - min D_x` over the window.
    pub x_travel: T,
}

/// Monotone deque tracking the extreme of a sliding window.
struct Extreme<'a, T> {
    values: &'a [T],
    idx: VecDeque<usize>,
    keep_max: bool,
}

impl<'a, T: Scalar> Extreme<'a, T> {
    fn new(values: &'a [T], keep_max: bool) -> Self {
        Self { values, idx: VecDeque::new(), keep_max }
    }

    fn push(&mut self, i: usize) {
        let v = self.values[i];
        while let Some(&last) = self.idx.back() {
            let w = self.values[last];
            if (self.keep_max && w <= v) || (!self.keep_max && w >= v) {
                self.idx.pop_back();
            } else {
                break;
            }
        }
        self.idx.push_back(i);
    }

    fn evict_before(&mut self, i: usize) {
        while self.idx.front().is_some_and(|&f| f < i) {
            self.idx.pop_front();
        }
    }

    fn get(&self) -> T {
        self.values[*self.idx.front().expect("window is non-empty")]
    }
}

/// Finds the contiguous run of samples with at least `min_x_travel` of
/// horizontal travel whose vertical band is thinnest.
///
/// Two-pointer scan with monotone deques, O(n) in the number of samples. The
/// sampling density bounds the accuracy of the reported band. A zero travel
/// requirement degenerates to a single-sample window with zero band.
pub fn flattest_segment<T: Scalar>(trace: &PathTrace<T>, min_x_travel: T) -> Result<FlatSegment<T>> {
    if !(min_x_travel >= T::zero()) {
        return Err(Error::InvalidInput("minimum travel must be non-negative".into()));
    }
    let xs: Vec<T> = trace.samples.iter().map(|s| s.d.x).collect();
    let ys: Vec<T> = trace.samples.iter().map(|s| s.d.y).collect();
    let n = xs.len();
    let (mut xmax, mut xmin) = (Extreme::new(&xs, true), Extreme::new(&xs, false));
    let (mut ymax, mut ymin) = (Extreme::new(&ys, true), Extreme::new(&ys, false));
    let mut best: Option<FlatSegment<T>> = None;
    let mut widest = T::zero();
    let mut next = 0;
    for i in 0..n {
        for q in [&mut xmax, &mut xmin, &mut ymax, &mut ymin] {
            q.evict_before(i);
        }
        while next < n && (next <= i || xmax.get() - xmin.get() < min_x_travel) {
            for q in [&mut xmax, &mut xmin, &mut ymax, &mut ymin] {
                q.push(next);
            }
            next += 1;
        }
        let travel = xmax.get() - xmin.get();
        widest = widest.max(travel);
        if travel < min_x_travel {
            break;
        }
        let band = ymax.get() - ymin.get();
        if best.is_none_or(|b| band < b.max_dev) {
            let j = next - 1;
            best = Some(FlatSegment {
                theta_start: trace.samples[i].theta_a,
                theta_end: trace.samples[j].theta_a,
                start_index: i,
                end_index: j,
                max_dev: band,
                x_travel: travel,
            });
        }
    }
    best.ok_or(Error::InsufficientTravel {
        requested: min_x_travel.as_f64(),
        available: widest.as_f64(),
    })
}

/// Horizontal speed of `D` per radian of crank rotation, by central
/// difference. Positive when `D` moves toward +x as the crank angle grows.
pub fn dxd_dtheta<T: Scalar>(dims: &HoeckenDims<T>, theta_a: T) -> T {
    let h = T::jacobian_step();
    let fwd = solve_position(dims, theta_a + h).d.x;
    let back = solve_position(dims, theta_a - h).d.x;
    (fwd - back) / (h + h)
}
