use std::ops::Range;

use crate::builder::{self, BuildConfig, SegmentCurve};
use crate::evaluator::{self, eval_rows, stitch};
use crate::{Error, OpCounter, Point3, Result, TrajectorySet};

use super::{partition, run_parallel};

/// Build and evaluation settings for a full run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub build: BuildConfig,
    /// V: samples per segment are `V + 1`.
    pub ticks: usize,
    /// P: worker count.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            build: BuildConfig::default(),
            ticks: 100,
            workers: 1,
        }
    }
}

/// Stitched samples of one trajectory: `K V + 1` points for `K` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub trajectory_id: u64,
    pub points: Vec<Point3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub curves: Vec<Vec<SegmentCurve>>,
    pub polylines: Vec<Polyline>,
    pub build_ops: u64,
    pub eval_ops: u64,
    pub junction_mismatches: usize,
}

/// Builds all trajectories, `M/P` per worker.
pub fn build_set(
    set: &TrajectorySet,
    config: &BuildConfig,
    workers: usize,
    ops: &OpCounter,
) -> Result<Vec<Vec<SegmentCurve>>> {
    config.grouping.check(set.points_per_trajectory())?;
    let part = partition(set.len(), workers)?;
    let chunks = run_parallel(&part, |range: Range<usize>| {
        set.trajectories()[range]
            .iter()
            .map(|tr| builder::build_trajectory(tr, config, ops))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Samples every blended curve at `ticks + 1` points and stitches polylines.
///
/// Segments are distributed in eulerian order, so each worker evaluates one
/// or more contiguous row blocks of the per-position coefficient matrices.
/// Returns the polylines and the number of mismatched junctions.
pub fn evaluate(
    curves: &[Vec<SegmentCurve>],
    ticks: usize,
    workers: usize,
    ops: &OpCounter,
) -> Result<(Vec<Polyline>, usize)> {
    let w = evaluator::power_matrix(ticks)?;
    let m = curves.len();
    let k = curves.first().map_or(0, Vec::len);
    if let Some(bad) = curves.iter().find(|c| c.len() != k) {
        return Err(Error::ShapeMismatch {
            expected: k,
            actual: bad.len(),
        });
    }
    let cols = w.len();

    // Each chunk yields three per-axis sample blocks for its segment range.
    let part = partition(m * k, workers)?;
    let blocks = run_parallel(&part, |range: Range<usize>| {
        let mut axes: [Vec<f64>; 3] = Default::default();
        let mut e = range.start;
        while e < range.end {
            let (pos, first) = (e / m, e % m);
            let last = m.min(first + (range.end - e));
            for (axis, out) in axes.iter_mut().enumerate() {
                let rows: Vec<[f64; 4]> = curves[first..last]
                    .iter()
                    .map(|segs| segs[pos].v.axis(axis))
                    .collect();
                out.extend_from_slice(eval_rows(&rows, &w, ops).values());
            }
            e += last - first;
        }
        Ok(axes)
    })?;
    let mut samples: [Vec<f64>; 3] = Default::default();
    for block in blocks {
        for (all, part) in samples.iter_mut().zip(block) {
            all.extend(part);
        }
    }

    let part = partition(m, workers)?;
    let stitched = run_parallel(&part, |range: Range<usize>| {
        range
            .map(|i| {
                let mut mismatches = 0;
                let mut axes: [Vec<f64>; 3] = Default::default();
                for (axis, values) in axes.iter_mut().enumerate() {
                    let rows: Vec<&[f64]> = (0..k)
                        .map(|pos| {
                            let e = pos * m + i;
                            &samples[axis][e * cols..(e + 1) * cols]
                        })
                        .collect();
                    let s = stitch(&rows)?;
                    mismatches += s.junction_mismatches;
                    *values = s.values;
                }
                let points = (0..axes[0].len())
                    .map(|j| Point3::new(axes[0][j], axes[1][j], axes[2][j]))
                    .collect();
                Ok((
                    Polyline {
                        trajectory_id: curves[i][0].spec.trajectory_id,
                        points,
                    },
                    mismatches,
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut mismatches = 0;
    let polylines = stitched
        .into_iter()
        .flatten()
        .map(|(p, n)| {
            mismatches += n;
            p
        })
        .collect();
    Ok((polylines, mismatches))
}

/// Build followed by evaluation.
pub fn run_pipeline(set: &TrajectorySet, config: &PipelineConfig) -> Result<PipelineOutput> {
    let build_ops = OpCounter::new();
    let eval_ops = OpCounter::new();
    let curves = build_set(set, &config.build, config.workers, &build_ops)?;
    let (polylines, junction_mismatches) = evaluate(&curves, config.ticks, config.workers, &eval_ops)?;
    Ok(PipelineOutput {
        curves,
        polylines,
        build_ops: build_ops.get(),
        eval_ops: eval_ops.get(),
        junction_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::GroupingMode;
    use crate::model::validate_set;

    fn set(m: usize, s: usize) -> TrajectorySet {
        validate_set((0..m).map(|i| {
            let pts = (0..s)
                .map(|j| {
                    let t = j as f64 * 0.2 + i as f64 * 0.01;
                    Point3::new(t.cos(), t.sin(), 0.05 * j as f64)
                })
                .collect();
            (i as u64, pts)
        }))
        .unwrap()
    }

    #[test]
    fn polyline_lengths() {
        let cfg = PipelineConfig {
            ticks: 10,
            ..Default::default()
        };
        let out = run_pipeline(&set(1, 4), &cfg).unwrap();
        assert_eq!(out.polylines.len(), 1);
        assert_eq!(out.polylines[0].points.len(), 31);
        assert_eq!(out.junction_mismatches, 0);
        assert_eq!(out.eval_ops, 3 * 3 * 11 * 4);
    }

    #[test]
    fn polylines_hit_the_data_points() {
        let data = set(3, 13);
        let out = run_pipeline(&data, &PipelineConfig { ticks: 8, workers: 2, ..Default::default() }).unwrap();
        for (tr, poly) in data.iter().zip(&out.polylines) {
            assert_eq!(poly.trajectory_id, tr.id);
            assert_eq!(poly.points.len(), 12 * 8 + 1);
            // group boundaries with alpha + beta = 1
            for g in 0..=4 {
                let err = (poly.points[g * 3 * 8] - tr.points[3 * g]).max_abs();
                assert!(err < 1e-12, "group {g}: {err}");
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let data = set(37, 16);
        let base = PipelineConfig {
            build: BuildConfig {
                grouping: GroupingMode::Disjoint,
                ..Default::default()
            },
            ticks: 13,
            workers: 1,
        };
        let reference = run_pipeline(&data, &base).unwrap();
        for workers in [2, 3, 4, 8, 64] {
            let out = run_pipeline(&data, &PipelineConfig { workers, ..base }).unwrap();
            assert_eq!(out, reference, "P = {workers}");
        }
    }

    #[test]
    fn incompatible_grouping_is_reported() {
        let err = run_pipeline(&set(2, 8), &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::IncompatibleLength { len: 8, .. }));
    }
}
