//! Batched evaluation of cubics on a uniform tick grid.
//!
//! Sampling a cubic at `t_j = j / V` is the dot product of `(a, b, c, d)` with
//! `(t_j^3, t_j^2, t_j, 1)`. Stacking coefficient rows into a matrix `C` and
//! tick powers into a 4x(V+1) power matrix `W` turns evaluation of a whole
//! batch into the product `E = C W`. `W` only depends on `V` and is cached.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use log::warn;

use crate::builder::SegmentCurve;
use crate::{CubicCoeffs, Error, OpCounter, Result};

/// Junction values closer than this (relative to `1 + |value|`) count as equal.
pub const JUNCTION_TOLERANCE: f64 = 1e-9;

/// Tick powers; column `j` is `((j/V)^3, (j/V)^2, j/V, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    ticks: usize,
    // column-major: four consecutive entries per tick
    columns: Vec<[f64; 4]>,
}

impl PowerMatrix {
    /// Builds the matrix for `v` intervals (`v + 1` ticks) without caching.
    pub fn new(v: usize) -> Result<Self> {
        if v == 0 {
            return Err(Error::InvalidParameter("tick count V must be at least 1".into()));
        }
        let columns = (0..=v)
            .map(|j| {
                let t = j as f64 / v as f64;
                let t2 = t * t;
                [t2 * t, t2, t, 1.0]
            })
            .collect();
        Ok(Self { ticks: v, columns })
    }

    /// V, the number of intervals.
    pub fn intervals(&self) -> usize {
        self.ticks
    }

    /// V + 1.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> [f64; 4] {
        self.columns[j]
    }

    pub fn columns(&self) -> &[[f64; 4]] {
        &self.columns
    }

    /// Row `r` (0 = cubes, 3 = ones).
    pub fn row(&self, r: usize) -> impl Iterator<Item = f64> + '_ {
        self.columns.iter().map(move |c| c[r])
    }
}

/// Memo of power matrices keyed by `V`; at most one construction per key.
#[derive(Debug, Default)]
pub struct PowerMatrixCache {
    entries: Mutex<HashMap<usize, Arc<PowerMatrix>>>,
    builds: Mutex<HashMap<usize, u64>>,
    total_builds: AtomicU64,
}

impl PowerMatrixCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: usize) -> Result<Arc<PowerMatrix>> {
        let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(w) = entries.get(&v) {
            return Ok(Arc::clone(w));
        }
        let w = Arc::new(PowerMatrix::new(v)?);
        entries.insert(v, Arc::clone(&w));
        *self
            .builds
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(v)
            .or_default() += 1;
        self.total_builds.fetch_add(1, Ordering::Relaxed);
        Ok(w)
    }

    /// How many times the matrix for `v` has been constructed.
    pub fn constructions(&self, v: usize) -> u64 {
        self.builds
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&v)
            .copied()
            .unwrap_or(0)
    }

    pub fn total_constructions(&self) -> u64 {
        self.total_builds.load(Ordering::Relaxed)
    }
}

/// Process-wide cache used by [`power_matrix`].
pub fn global_cache() -> &'static PowerMatrixCache {
    static CACHE: OnceLock<PowerMatrixCache> = OnceLock::new();
    CACHE.get_or_init(PowerMatrixCache::new)
}

/// Cached power matrix for `v` intervals.
pub fn power_matrix(v: usize) -> Result<Arc<PowerMatrix>> {
    global_cache().get(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One segment position across many trajectories.
    Eulerian,
    /// All segments of one trajectory.
    Lagrangian,
}

/// Scalar coefficient rows `(a, b, c, d)` of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    pub layout: Layout,
    rows: Vec<[f64; 4]>,
}

impl CoeffMatrix {
    pub fn new(layout: Layout, rows: Vec<[f64; 4]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: 1,
                actual: 0,
            });
        }
        Ok(Self { layout, rows })
    }

    /// Blended curve at `position` of every trajectory, one axis.
    pub fn eulerian(curves: &[Vec<SegmentCurve>], position: usize, axis: usize) -> Result<Self> {
        let rows = curves
            .iter()
            .map(|segs| {
                segs.get(position)
                    .map(|c| c.v.axis(axis))
                    .ok_or(Error::ShapeMismatch {
                        expected: position + 1,
                        actual: segs.len(),
                    })
            })
            .collect::<Result<_>>()?;
        Self::new(Layout::Eulerian, rows)
    }

    /// Every blended curve of one trajectory, one axis.
    pub fn lagrangian(segments: &[SegmentCurve], axis: usize) -> Result<Self> {
        Self::new(
            Layout::Lagrangian,
            segments.iter().map(|c| c.v.axis(axis)).collect(),
        )
    }

    pub fn rows(&self) -> &[[f64; 4]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Row-major `rows x (V+1)` sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SampleGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }
}

/// `a t^3 + b t^2 + c t + d` summed in that order.
#[inline]
pub fn dot_row(row: &[f64; 4], w: &[f64; 4]) -> f64 {
    row[0] * w[0] + row[1] * w[1] + row[2] * w[2] + row[3] * w[3]
}

/// Evaluates rows of scalar coefficients against a power matrix.
pub fn eval_rows(rows: &[[f64; 4]], w: &PowerMatrix, ops: &OpCounter) -> SampleGrid {
    let cols = w.len();
    let mut values = Vec::with_capacity(rows.len() * cols);
    for row in rows {
        values.extend(w.columns().iter().map(|col| dot_row(row, col)));
    }
    ops.add((rows.len() * cols * 4) as u64);
    SampleGrid {
        rows: rows.len(),
        cols,
        values,
    }
}

/// `E = C W`.
pub fn eval_batch(c: &CoeffMatrix, w: &PowerMatrix, ops: &OpCounter) -> SampleGrid {
    eval_rows(c.rows(), w, ops)
}

/// Coefficients of `q(t) = p(offset + scale * t)`.
pub fn reparameterize_cubic(p: &CubicCoeffs, offset: f64, scale: f64) -> CubicCoeffs {
    let (o, h) = (offset, scale);
    let h2 = h * h;
    CubicCoeffs {
        a: p.a * (h2 * h),
        b: p.a * (3.0 * o * h2) + p.b * h2,
        c: p.a * (3.0 * o * o * h) + p.b * (2.0 * o * h) + p.c * h,
        d: p.a * (o * o * o) + p.b * (o * o) + p.c * o + p.d,
    }
}

/// Polyline values of one axis of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Stitched {
    pub values: Vec<f64>,
    /// Junctions where consecutive segments disagreed beyond tolerance.
    pub junction_mismatches: usize,
}

/// Concatenates per-segment samples, dropping each duplicated junction value.
///
/// `K` segments of `V + 1` samples give `K V + 1` values.
pub fn stitch<R: AsRef<[f64]>>(segments: &[R]) -> Result<Stitched> {
    let Some(first) = segments.first() else {
        return Err(Error::ShapeMismatch {
            expected: 1,
            actual: 0,
        });
    };
    let cols = first.as_ref().len();
    if cols < 2 {
        return Err(Error::InconsistentTicks {
            expected: 2,
            actual: cols,
        });
    }
    let mut values = Vec::with_capacity(segments.len() * (cols - 1) + 1);
    let mut junction_mismatches = 0;
    values.extend_from_slice(first.as_ref());
    for seg in &segments[1..] {
        let seg = seg.as_ref();
        if seg.len() != cols {
            return Err(Error::InconsistentTicks {
                expected: cols,
                actual: seg.len(),
            });
        }
        let last = *values.last().expect("non-empty");
        if (seg[0] - last).abs() > JUNCTION_TOLERANCE * (1.0 + last.abs()) {
            junction_mismatches += 1;
        }
        values.extend_from_slice(&seg[1..]);
    }
    if junction_mismatches > 0 {
        warn!("{junction_mismatches} segment junction(s) disagree beyond {JUNCTION_TOLERANCE:e}");
    }
    Ok(Stitched {
        values,
        junction_mismatches,
    })
}
