//! Spline segments, Bezier blending and trajectory grouping.
//!
//! Every segment cubic `u` is obtained from a constant 4x5 matrix applied to
//! `(P_end, P_start, m, q, 1)` per axis, where `m`/`q` are the target start
//! slope and curvature. What varies between seeding modes is only where `m`
//! and `q` come from. The blended curve `v = alpha * b + beta * u` is folded
//! into a single cubic by re-parameterising the group Bezier onto the segment.

use std::fmt;

use log::warn;

use crate::bezier::BezierCubic;
use crate::evaluator::reparameterize_cubic;
use crate::model::SegmentKind;
use crate::{CubicCoeffs, Error, OpCounter, Point3, Result, SegmentSpec, Trajectory, TrajectorySet};

/// Multiply-adds charged per operation, all three axes included.
pub mod cost {
    pub const BEZIER: u64 = 3 * 16;
    pub const BEZIER_SEED: u64 = 3;
    pub const CHAIN_SEED: u64 = 3 * 5;
    pub const SEGMENT: u64 = 3 * 20;
    pub const REPARAMETERIZE: u64 = 3 * 16;
    pub const BLEND: u64 = 3 * 8;
}

/// Constant 4x5 map from `(P_end, P_start, m, q, 1)` to `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionMatrix {
    rows: [[f64; 5]; 4],
}

impl ConstructionMatrix {
    /// Solution of `u(0) = P_start`, `u(1) = P_end`, `u'(0) = m`, `u''(0) = q`.
    pub const STANDARD: ConstructionMatrix = ConstructionMatrix {
        rows: [
            [1.0, -1.0, -1.0, -0.5, 0.0],
            [0.0, 0.0, 0.0, 0.5, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0],
        ],
    };

    /// Arbitrary block, used to exercise the global-matrix machinery.
    pub const fn from_rows(rows: [[f64; 5]; 4]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[[f64; 5]; 4] {
        &self.rows
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().flatten().filter(|v| **v != 0.0).count()
    }

    /// Dense 4x5 product; terms are summed left to right.
    #[inline]
    pub fn apply(&self, p: &[f64; 5]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let mut acc = 0.0;
            for (r, x) in row.iter().zip(p) {
                acc += r * x;
            }
            *o = acc;
        }
        out
    }
}

impl Default for ConstructionMatrix {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Source of the start slope/curvature of each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedMode {
    /// Every segment of a group starts from the group Bezier's `(C, 2B)`.
    BezierStart,
    /// The first segment of a group uses `(C, 2B)`; later ones continue the
    /// end slope and curvature of their predecessor.
    #[default]
    Chained,
}

/// Blend weights of `v = alpha * b + beta * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendParams {
    alpha: f64,
    beta: f64,
}

impl BlendParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, w) in [("alpha", alpha), ("beta", beta)] {
            if !(w > 0.0 && w < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {w} must lie strictly between 0 and 1"
                )));
            }
        }
        let params = Self { alpha, beta };
        if !params.interpolates_endpoints() {
            warn!(
                "alpha + beta = {} != 1: blended curves will not pass through group endpoints",
                alpha + beta
            );
        }
        Ok(params)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn interpolates_endpoints(&self) -> bool {
        (self.alpha + self.beta - 1.0).abs() <= f64::EPSILON
    }
}

impl Default for BlendParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

/// How a trajectory is cut into four-point groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupingMode {
    /// Stride 3: consecutive groups share their boundary point. `S = 3n + 1`.
    #[default]
    Overlap,
    /// Stride 4 with bridge segments across the gaps. `S = 4n`.
    Disjoint,
}

impl GroupingMode {
    pub fn name(&self) -> &'static str {
        match self {
            GroupingMode::Overlap => "overlap",
            GroupingMode::Disjoint => "disjoint",
        }
    }

    pub fn check(&self, points: usize) -> Result<()> {
        let ok = match self {
            GroupingMode::Overlap => points >= 4 && points % 3 == 1,
            GroupingMode::Disjoint => points >= 4 && points.is_multiple_of(4),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleLength {
                len: points,
                grouping: self.name(),
            })
        }
    }

    /// Number of Bezier groups for `points` points per trajectory.
    pub fn group_count(&self, points: usize) -> Result<usize> {
        self.check(points)?;
        Ok(match self {
            GroupingMode::Overlap => (points - 1) / 3,
            GroupingMode::Disjoint => points / 4,
        })
    }

    /// Number of segments (bridges included) per trajectory.
    pub fn segment_count(&self, points: usize) -> Result<usize> {
        let groups = self.group_count(points)?;
        Ok(match self {
            GroupingMode::Overlap => 3 * groups,
            GroupingMode::Disjoint => 4 * groups - 1,
        })
    }

    fn stride(&self) -> usize {
        match self {
            GroupingMode::Overlap => 3,
            GroupingMode::Disjoint => 4,
        }
    }
}

impl fmt::Display for GroupingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that parameterises construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuildConfig {
    pub grouping: GroupingMode,
    pub seed_mode: SeedMode,
    pub blend: BlendParams,
}

/// One built segment: raw spline `u` and blended curve `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCurve {
    pub spec: SegmentSpec,
    pub u: CubicCoeffs,
    pub v: CubicCoeffs,
}

/// Result of building one four-point group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupCurves {
    pub bezier: BezierCubic,
    pub u: [CubicCoeffs; 3],
    pub v: [CubicCoeffs; 3],
}

/// End slope and curvature `(u'(1), u''(1)) = (3a + 2b + c, 6a + 2b)`.
pub fn chain_seed(previous: &CubicCoeffs) -> (Point3, Point3) {
    let p = previous;
    (
        p.a * 3.0 + p.b * 2.0 + p.c,
        p.a * 6.0 + p.b * 2.0,
    )
}

/// Start slope and curvature for segment `segment_index` (1-based) of a group.
pub fn compute_seed(
    bezier: &BezierCubic,
    previous: Option<&CubicCoeffs>,
    mode: SeedMode,
    segment_index: u8,
) -> Result<(Point3, Point3)> {
    match mode {
        SeedMode::BezierStart => Ok(bezier.derivatives_at_zero()),
        SeedMode::Chained if segment_index <= 1 => Ok(bezier.derivatives_at_zero()),
        SeedMode::Chained => previous.map(chain_seed).ok_or(Error::MissingPredecessor),
    }
}

/// Cubic through `start` and `end` with start slope `m` and curvature `q`.
pub fn segment_coeffs(start: Point3, end: Point3, m: Point3, q: Point3) -> CubicCoeffs {
    segment_coeffs_with(&ConstructionMatrix::STANDARD, start, end, m, q)
}

pub fn segment_coeffs_with(
    t: &ConstructionMatrix,
    start: Point3,
    end: Point3,
    m: Point3,
    q: Point3,
) -> CubicCoeffs {
    let axis = |k: usize| t.apply(&[end[k], start[k], m[k], q[k], 1.0]);
    CubicCoeffs::from_axes([axis(0), axis(1), axis(2)])
}

/// Builds the Bezier, the three splines and their blends for four points.
pub fn build_group(points: &[Point3; 4], mode: SeedMode, blend: BlendParams) -> Result<GroupCurves> {
    build_group_counted(points, mode, blend, &OpCounter::new())
}

fn build_group_counted(
    points: &[Point3; 4],
    mode: SeedMode,
    blend: BlendParams,
    ops: &OpCounter,
) -> Result<GroupCurves> {
    let bezier = BezierCubic::from_points(points)?;
    let curve = bezier.as_cubic();
    let mut u = [CubicCoeffs::default(); 3];
    let mut v = [CubicCoeffs::default(); 3];
    for k in 0..3usize {
        let prev = k.checked_sub(1).map(|j| u[j]);
        let (m, q) = compute_seed(&bezier, prev.as_ref(), mode, k as u8 + 1)?;
        u[k] = segment_coeffs(points[k], points[k + 1], m, q);
        let b_k = reparameterize_cubic(&curve, k as f64 / 3.0, 1.0 / 3.0);
        v[k] = b_k.combine(blend.alpha, &u[k], blend.beta);
        let seed_cost = if prev.is_some() && mode == SeedMode::Chained {
            cost::CHAIN_SEED
        } else {
            cost::BEZIER_SEED
        };
        ops.add(seed_cost + cost::SEGMENT + cost::REPARAMETERIZE + cost::BLEND);
    }
    ops.add(cost::BEZIER);
    Ok(GroupCurves { bezier, u, v })
}

/// Cuts one trajectory into groups and builds all of its segments in order.
pub fn build_trajectory(tr: &Trajectory, config: &BuildConfig, ops: &OpCounter) -> Result<Vec<SegmentCurve>> {
    let s = tr.points.len();
    let groups = config.grouping.group_count(s)?;
    let stride = config.grouping.stride();
    let mut out = Vec::with_capacity(config.grouping.segment_count(s)?);
    for g in 0..groups {
        let first = g * stride;
        let quad: [Point3; 4] = tr.points[first..first + 4]
            .try_into()
            .expect("group slice has four points");
        let built = build_group_counted(&quad, config.seed_mode, config.blend, ops)?;
        for k in 0..3 {
            out.push(SegmentCurve {
                spec: SegmentSpec {
                    trajectory_id: tr.id,
                    group_index: g,
                    kind: SegmentKind::Group { index: k as u8 + 1 },
                    start_point_index: first + k,
                    end_point_index: first + k + 1,
                },
                u: built.u[k],
                v: built.v[k],
            });
        }
        if config.grouping == GroupingMode::Disjoint && g + 1 < groups {
            let start = first + 3;
            let (m, q) = chain_seed(&built.u[2]);
            let u = segment_coeffs(tr.points[start], tr.points[start + 1], m, q);
            ops.add(cost::CHAIN_SEED + cost::SEGMENT);
            out.push(SegmentCurve {
                spec: SegmentSpec {
                    trajectory_id: tr.id,
                    group_index: g,
                    kind: SegmentKind::Bridge,
                    start_point_index: start,
                    end_point_index: start + 1,
                },
                u,
                v: u,
            });
        }
    }
    Ok(out)
}

/// Builds every trajectory of the set on the calling thread.
///
/// See [`crate::parallel::build_set`] for the multi-worker version; both
/// produce identical output.
pub fn build_set(set: &TrajectorySet, config: &BuildConfig, ops: &OpCounter) -> Result<Vec<Vec<SegmentCurve>>> {
    set.iter().map(|tr| build_trajectory(tr, config, ops)).collect()
}
