use std::time::Instant;

use crate::builder::BuildConfig;
use crate::model::validate_set;
use crate::sparse::median;
use crate::{Error, Point3, Result, TrajectorySet};

use super::pipeline::{run_pipeline, PipelineConfig, PipelineOutput};

/// Efficiency above this is flagged as implausible.
const MAX_EFFICIENCY: f64 = 1.5;
/// Weak scaling counts as flat when max/min wall time stays below this.
pub const WEAK_FLATNESS_LIMIT: f64 = 1.5;

/// Size of a synthetic benchmark problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobSpec {
    /// M.
    pub trajectories: usize,
    /// S.
    pub points: usize,
    /// V.
    pub ticks: usize,
    pub build: BuildConfig,
    /// Timed repetitions after one warmup run; at least 3.
    pub reps: usize,
}

impl Default for JobSpec {
    fn default() -> Self {
        Self {
            trajectories: 2000,
            points: 13,
            ticks: 200,
            build: BuildConfig::default(),
            reps: 3,
        }
    }
}

impl JobSpec {
    /// Deterministic swirling paths, distinct per trajectory.
    pub fn dataset(&self) -> Result<TrajectorySet> {
        synthetic_set(self.trajectories, self.points)
    }

    pub fn segments_per_trajectory(&self) -> Result<usize> {
        self.build.grouping.segment_count(self.points)
    }
}

/// `m` helical trajectories of `s` points with per-trajectory radius, pitch
/// and phase.
pub fn synthetic_set(m: usize, s: usize) -> Result<TrajectorySet> {
    validate_set((0..m).map(|i| {
        let fi = i as f64;
        let radius = 0.5 + 0.5 * ((fi * 0.618_033_988_7).fract());
        let phase = fi * 2.399_963_229_7;
        let pitch = 0.02 + 0.01 * ((fi * 0.414_213_562_4).fract());
        let points = (0..s)
            .map(|j| {
                let t = j as f64 * 0.35;
                let wobble = 0.05 * (3.0 * t + phase).sin();
                Point3::new(
                    (radius + wobble) * (t + phase).cos(),
                    (radius + wobble) * (t + phase).sin(),
                    pitch * j as f64,
                )
            })
            .collect();
        (i as u64, points)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// Fixed problem, growing worker count.
    Strong,
    /// Problem grows with the worker count.
    Weak,
}

impl ScalingMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingMode::Strong => "strong",
            ScalingMode::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    /// Requested worker count.
    pub workers: usize,
    pub trajectories: usize,
    pub segments: usize,
    pub ticks: usize,
    /// Median over the timed repetitions.
    pub wall_time_s: f64,
    /// Strong: `t(1) / t(P)`. Weak (scaled): `P t(1) / t(P)`.
    pub speedup: f64,
    /// `speedup / P`.
    pub efficiency: f64,
    /// More workers than available cores.
    pub oversubscribed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub mode: ScalingMode,
    pub rows: Vec<ScalingRow>,
    /// Outputs of every run were bitwise equal to the single-worker run
    /// (strong scaling only; weak runs differ in size).
    pub deterministic: bool,
}

impl ScalingReport {
    /// Largest over smallest wall time.
    pub fn time_ratio(&self) -> f64 {
        let times = self.rows.iter().map(|r| r.wall_time_s);
        let max = times.clone().fold(f64::MIN, f64::max);
        let min = times.fold(f64::MAX, f64::min);
        max / min
    }

    /// Weak-scaling flatness: `time_ratio() <= 1.5`.
    pub fn is_flat(&self) -> bool {
        self.time_ratio() <= WEAK_FLATNESS_LIMIT
    }

    pub fn speedup_at(&self, workers: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.workers == workers).map(|r| r.speedup)
    }

    /// Efficiencies lie in `(0, 1.5]`.
    pub fn efficiencies_plausible(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.efficiency > 0.0 && r.efficiency <= MAX_EFFICIENCY)
    }
}

/// Logical cores visible to the process.
pub fn available_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn check_workers(list: &[usize]) -> Result<()> {
    if list.first() != Some(&1) || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "worker list must start at 1 and increase strictly".into(),
        ));
    }
    Ok(())
}

fn time_runs(set: &TrajectorySet, cfg: &PipelineConfig, reps: usize) -> Result<(f64, PipelineOutput)> {
    let mut out = run_pipeline(set, cfg)?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(3) {
        let start = Instant::now();
        out = run_pipeline(set, cfg)?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(&mut times), out))
}

fn warn_oversubscribed(workers: usize, cores: usize) -> bool {
    let over = workers > cores;
    if over {
        log::warn!("{workers} workers exceed the {cores} available cores");
    }
    over
}

/// Runs the full pipeline on a fixed problem for each worker count.
pub fn bench_strong(job: &JobSpec, workers: &[usize]) -> Result<ScalingReport> {
    bench_strong_on(&job.dataset()?, job, workers)
}

/// [`bench_strong`] on a given dataset; `job.trajectories` and `job.points`
/// are ignored.
pub fn bench_strong_on(set: &TrajectorySet, job: &JobSpec, workers: &[usize]) -> Result<ScalingReport> {
    check_workers(workers)?;
    let segments = set.len() * job.build.grouping.segment_count(set.points_per_trajectory())?;
    let cores = available_cores();
    let mut rows = Vec::with_capacity(workers.len());
    let mut reference: Option<PipelineOutput> = None;
    let mut deterministic = true;
    let mut base_time = 0.0;
    for &p in workers {
        let cfg = PipelineConfig {
            build: job.build,
            ticks: job.ticks,
            workers: p,
        };
        let (time, out) = time_runs(set, &cfg, job.reps)?;
        match &reference {
            None => {
                base_time = time;
                reference = Some(out);
            }
            Some(r) => deterministic &= *r == out,
        }
        let speedup = base_time / time;
        rows.push(ScalingRow {
            workers: p,
            trajectories: set.len(),
            segments,
            ticks: job.ticks,
            wall_time_s: time,
            speedup,
            efficiency: speedup / p as f64,
            oversubscribed: warn_oversubscribed(p, cores),
        });
    }
    Ok(ScalingReport {
        mode: ScalingMode::Strong,
        rows,
        deterministic,
    })
}

/// Runs the pipeline with `per_worker_segments * P` segments for each `P`.
///
/// The trajectory count is rounded up so every worker gets at least the
/// requested load; `job.trajectories` is ignored.
pub fn bench_weak(job: &JobSpec, workers: &[usize], per_worker_segments: usize) -> Result<ScalingReport> {
    check_workers(workers)?;
    if per_worker_segments == 0 {
        return Err(Error::InvalidParameter("per-worker load must be positive".into()));
    }
    let per_traj = job.segments_per_trajectory()?;
    let cores = available_cores();
    let mut rows = Vec::with_capacity(workers.len());
    let mut base_time = 0.0;
    for &p in workers {
        let m = (per_worker_segments * p).div_ceil(per_traj);
        let set = synthetic_set(m, job.points)?;
        let cfg = PipelineConfig {
            build: job.build,
            ticks: job.ticks,
            workers: p,
        };
        let (time, _) = time_runs(&set, &cfg, job.reps)?;
        if p == 1 {
            base_time = time;
        }
        let speedup = p as f64 * base_time / time;
        rows.push(ScalingRow {
            workers: p,
            trajectories: m,
            segments: m * per_traj,
            ticks: job.ticks,
            wall_time_s: time,
            speedup,
            efficiency: speedup / p as f64,
            oversubscribed: warn_oversubscribed(p, cores),
        });
    }
    Ok(ScalingReport {
        mode: ScalingMode::Weak,
        rows,
        deterministic: true,
    })
}
