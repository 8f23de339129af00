//! Fork-join execution over contiguous, balanced chunks.
//!
//! Building is split over trajectories, evaluation over segments in eulerian
//! order (segment position major, trajectory minor). Every chunk is a pure
//! function of its index range and results are merged in chunk order, so the
//! output does not depend on the worker count.
//!
//! With the `parallel` feature chunks run on a rayon pool of exactly `P`
//! threads; without it they run one after another on the calling thread.

mod bench;
mod pipeline;

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

pub use bench::{
    available_cores, bench_strong, bench_strong_on, bench_weak, synthetic_set, JobSpec, ScalingMode, ScalingReport, ScalingRow,
    WEAK_FLATNESS_LIMIT,
};
pub use pipeline::{build_set, evaluate, run_pipeline, PipelineConfig, PipelineOutput, Polyline};

use crate::{Error, Result};

/// Balanced contiguous split of `0..total` over `workers` chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    requested: usize,
    chunks: Vec<Range<usize>>,
}

impl Partition {
    pub fn chunks(&self) -> &[Range<usize>] {
        &self.chunks
    }

    /// Effective worker count, `min(P, total)`.
    pub fn workers(&self) -> usize {
        self.chunks.len()
    }

    pub fn requested_workers(&self) -> usize {
        self.requested
    }

    pub fn was_clamped(&self) -> bool {
        self.requested != self.chunks.len()
    }

    pub fn total(&self) -> usize {
        self.chunks.last().map_or(0, |r| r.end)
    }
}

/// Splits `0..total` into `min(workers, total)` ranges whose sizes differ by at
/// most one; the first `total % P` ranges get the extra element.
pub fn partition(total: usize, workers: usize) -> Result<Partition> {
    if total == 0 || workers == 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot partition {total} items over {workers} workers"
        )));
    }
    let p = workers.min(total);
    let (base, extra) = (total / p, total % p);
    let mut chunks = Vec::with_capacity(p);
    let mut start = 0;
    for i in 0..p {
        let len = base + usize::from(i < extra);
        chunks.push(start..start + len);
        start += len;
    }
    Ok(Partition {
        requested: workers,
        chunks,
    })
}

/// Runs `work` on every chunk and returns the results in chunk order.
///
/// On failure the lowest-indexed error is returned and chunks that have not
/// started yet are skipped.
pub fn run_parallel<T, F>(part: &Partition, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<usize>) -> Result<T> + Sync + Send,
{
    let cancelled = AtomicBool::new(false);
    let task = |r: &Range<usize>| -> Option<Result<T>> {
        if cancelled.load(Ordering::Relaxed) {
            return None;
        }
        let out = work(r.clone());
        if out.is_err() {
            cancelled.store(true, Ordering::Relaxed);
        }
        Some(out)
    };
    let results = execute(part, &task);
    let mut merged = Vec::with_capacity(results.len());
    let mut skipped = false;
    for r in results {
        match r {
            Some(Ok(v)) => merged.push(v),
            Some(Err(e)) => return Err(e),
            None => skipped = true,
        }
    }
    debug_assert!(!skipped, "chunks are only skipped after an error");
    Ok(merged)
}

#[cfg(feature = "parallel")]
fn execute<T, F>(part: &Partition, task: &F) -> Vec<Option<Result<T>>>
where
    T: Send,
    F: Fn(&Range<usize>) -> Option<Result<T>> + Sync,
{
    use rayon::prelude::*;

    if part.workers() == 1 {
        return part.chunks().iter().map(task).collect();
    }
    pool(part.workers()).install(|| part.chunks().par_iter().map(task).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(part: &Partition, task: &F) -> Vec<Option<Result<T>>>
where
    F: Fn(&Range<usize>) -> Option<Result<T>>,
{
    part.chunks().iter().map(task).collect()
}

/// One pool per distinct worker count, kept for the process lifetime.
#[cfg(feature = "parallel")]
fn pool(workers: usize) -> std::sync::Arc<rayon::ThreadPool> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};

    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    Arc::clone(pools.entry(workers).or_insert_with(|| {
        Arc::new(
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("trajfit-{i}"))
                .build()
                .expect("failed to start worker pool"),
        )
    }))
}
