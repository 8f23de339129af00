//! Core geometry types: points, trajectories and power-basis cubics.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::{Error, Result};

/// A point (or vector) in 3D space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// The same value on all three axes.
    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn zip_map(self, other: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(f(self.x, other.x), f(self.y, other.y), f(self.z, other.z))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Index<usize> for Point3 {
    type Output = f64;

    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        self.map(|a| -a)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        self.map(|a| a * rhs)
    }
}

impl Mul<Point3> for f64 {
    type Output = Point3;
    fn mul(self, rhs: Point3) -> Point3 {
        rhs * self
    }
}

/// One particle path: an ordered list of at least four points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: u64,
    pub points: Vec<Point3>,
}

/// A validated collection of trajectories that all share the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
    points_per_trajectory: usize,
}

impl TrajectorySet {
    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    /// M, the number of trajectories.
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// S, the shared point count.
    pub fn points_per_trajectory(&self) -> usize {
        self.points_per_trajectory
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn into_trajectories(self) -> Vec<Trajectory> {
        self.trajectories
    }
}

impl<'a> IntoIterator for &'a TrajectorySet {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// Checks raw `(id, points)` pairs and assembles a [`TrajectorySet`].
///
/// Trajectories must be non-empty in number, at least four points long, of
/// uniform length and free of NaN/Inf coordinates.
pub fn validate_set<I>(raw: I) -> Result<TrajectorySet>
where
    I: IntoIterator<Item = (u64, Vec<Point3>)>,
{
    let mut trajectories = Vec::new();
    let mut expected = None;
    for (id, points) in raw {
        let len = points.len();
        if len < 4 {
            return Err(Error::TooShort { id, len });
        }
        match expected {
            None => expected = Some(len),
            Some(s) if s != len => {
                return Err(Error::NonUniformLength {
                    id,
                    len,
                    expected: s,
                })
            }
            Some(_) => {}
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("trajectory {id}, point {i}"),
            });
        }
        trajectories.push(Trajectory { id, points });
    }
    let points_per_trajectory = expected.ok_or(Error::Empty)?;
    Ok(TrajectorySet {
        trajectories,
        points_per_trajectory,
    })
}

impl TryFrom<Vec<Trajectory>> for TrajectorySet {
    type Error = Error;

    fn try_from(trajectories: Vec<Trajectory>) -> Result<Self> {
        validate_set(trajectories.into_iter().map(|t| (t.id, t.points)))
    }
}

/// Power-basis cubic `a t^3 + b t^2 + c t + d`, applied per axis, `t` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CubicCoeffs {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
    pub d: Point3,
}

impl CubicCoeffs {
    pub const fn new(a: Point3, b: Point3, c: Point3, d: Point3) -> Self {
        Self { a, b, c, d }
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> Point3 {
        ((self.a * t + self.b) * t + self.c) * t + self.d
    }

    /// First derivative with respect to `t`.
    pub fn derivative(&self, t: f64) -> Point3 {
        (self.a * (3.0 * t) + self.b * 2.0) * t + self.c
    }

    /// Second derivative with respect to `t`.
    pub fn second_derivative(&self, t: f64) -> Point3 {
        self.a * (6.0 * t) + self.b * 2.0
    }

    /// Scalar coefficients `[a, b, c, d]` of one axis.
    pub fn axis(&self, axis: usize) -> [f64; 4] {
        [self.a[axis], self.b[axis], self.c[axis], self.d[axis]]
    }

    /// Reassembles a cubic from its three per-axis coefficient rows.
    pub fn from_axes(axes: [[f64; 4]; 3]) -> Self {
        let pick = |k: usize| Point3::new(axes[0][k], axes[1][k], axes[2][k]);
        Self::new(pick(0), pick(1), pick(2), pick(3))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Coefficient-wise linear combination `self * wa + other * wb`.
    pub fn combine(&self, wa: f64, other: &CubicCoeffs, wb: f64) -> CubicCoeffs {
        CubicCoeffs::new(
            self.a * wa + other.a * wb,
            self.b * wa + other.b * wb,
            self.c * wa + other.c * wb,
            self.d * wa + other.d * wb,
        )
    }
}

/// Where a segment sits inside its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    /// Segment `index` (1..=3) of a four-point group.
    Group { index: u8 },
    /// Connector between two disjoint groups; not blended.
    Bridge,
}

/// Identifies one two-point segment of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentSpec {
    pub trajectory_id: u64,
    /// Group index (0-based). For bridges, the group the bridge leaves from.
    pub group_index: usize,
    pub kind: SegmentKind,
    pub start_point_index: usize,
    pub end_point_index: usize,
}

impl SegmentSpec {
    pub fn is_bridge(&self) -> bool {
        matches!(self.kind, SegmentKind::Bridge)
    }

    /// Index 1..=3 inside the group, `None` for bridges.
    pub fn segment_index(&self) -> Option<u8> {
        match self.kind {
            SegmentKind::Group { index } => Some(index),
            SegmentKind::Bridge => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Point3> {
        (0..n).map(|i| Point3::splat(i as f64)).collect()
    }

    #[test]
    fn minimal_valid_set() {
        let set = validate_set([(0, line(4))]).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.points_per_trajectory(), 4);
    }

    #[test]
    fn rejects_ragged() {
        let err = validate_set([(0, line(4)), (1, line(7))]).unwrap_err();
        assert!(matches!(err, Error::NonUniformLength { id: 1, len: 7, expected: 4 }));
    }

    #[test]
    fn rejects_short() {
        assert!(matches!(
            validate_set([(3, line(3))]),
            Err(Error::TooShort { id: 3, len: 3 })
        ));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            validate_set(Vec::<(u64, Vec<Point3>)>::new()),
            Err(Error::Empty)
        ));
        let mut pts = line(5);
        pts[2].y = f64::NAN;
        assert!(matches!(validate_set([(0, pts)]), Err(Error::NonFinite { .. })));
        let mut pts = line(5);
        pts[4].z = f64::INFINITY;
        assert!(matches!(validate_set([(0, pts)]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn validation_is_idempotent() {
        let set = validate_set([(0, line(5)), (9, line(5))]).unwrap();
        let again = TrajectorySet::try_from(set.clone().into_trajectories()).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn cubic_derivatives() {
        // t^3 + t^2 on every axis
        let c = CubicCoeffs::new(Point3::splat(1.0), Point3::splat(1.0), Point3::ZERO, Point3::ZERO);
        assert_eq!(c.eval(1.0), Point3::splat(2.0));
        assert_eq!(c.derivative(1.0), Point3::splat(5.0));
        assert_eq!(c.second_derivative(0.0), Point3::splat(2.0));
        assert_eq!(c.second_derivative(1.0), Point3::splat(8.0));
        assert_eq!(CubicCoeffs::from_axes([c.axis(0), c.axis(1), c.axis(2)]), c);
    }
}
