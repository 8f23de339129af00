//! Cubic Bezier curves in power-basis form.

use crate::{CubicCoeffs, Error, Point3, Result};

/// Tolerance on the evaluation parameter before it is rejected.
const DOMAIN_SLACK: f64 = 1e-12;

/// `b(s) = A s^3 + B s^2 + C s + D`, `s` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BezierCubic {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
    pub d: Point3,
}

/// Expands the cubic Bernstein form of a control polygon into monomials.
pub fn to_power_basis(p1: Point3, p2: Point3, p3: Point3, p4: Point3) -> Result<BezierCubic> {
    if ![p1, p2, p3, p4].iter().all(Point3::is_finite) {
        return Err(Error::NonFinite {
            context: "Bezier control polygon".into(),
        });
    }
    Ok(BezierCubic {
        a: -p1 + p2 * 3.0 - p3 * 3.0 + p4,
        b: p1 * 3.0 - p2 * 6.0 + p3 * 3.0,
        c: (p2 - p1) * 3.0,
        d: p1,
    })
}

impl BezierCubic {
    pub fn from_points(points: &[Point3; 4]) -> Result<Self> {
        to_power_basis(points[0], points[1], points[2], points[3])
    }

    /// Horner evaluation at `s`; values a hair outside [0, 1] are clamped.
    pub fn eval(&self, s: f64) -> Result<Point3> {
        if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&s) {
            return Err(Error::Domain { value: s });
        }
        Ok(self.as_cubic().eval(s.clamp(0.0, 1.0)))
    }

    /// `(b'(0), b''(0)) = (C, 2B)`.
    pub fn derivatives_at_zero(&self) -> (Point3, Point3) {
        (self.c, self.b * 2.0)
    }

    pub fn as_cubic(&self) -> CubicCoeffs {
        CubicCoeffs::new(self.a, self.b, self.c, self.d)
    }
}

/// Free-function form of [`BezierCubic::eval`].
pub fn eval(bz: &BezierCubic, s: f64) -> Result<Point3> {
    bz.eval(s)
}

/// Free-function form of [`BezierCubic::derivatives_at_zero`].
pub fn derivatives_at_zero(bz: &BezierCubic) -> (Point3, Point3) {
    bz.derivatives_at_zero()
}
