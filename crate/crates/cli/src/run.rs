use std::fmt;
use std::path::Path;

use trajfit::builder::GroupingMode;
use trajfit::io;
use trajfit::parallel::{self, bench_strong, bench_strong_on, bench_weak, JobSpec, PipelineConfig, ScalingMode, ScalingReport};
use trajfit::sparse::{assemble_global, bench_sparse};
use trajfit::{builder::ConstructionMatrix, Error, OpCounter, TrajectorySet};

use crate::{RunCommand, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidParameter(_) => 2,
                Error::Empty
                | Error::NonUniformLength { .. }
                | Error::TooShort { .. }
                | Error::NonFinite { .. }
                | Error::Parse { .. }
                | Error::Gap { .. } => 3,
                Error::IncompatibleLength { .. } => 4,
                Error::Io(_) | Error::Csv(_) => 5,
                Error::AllocationLimit { .. } => 6,
                _ => 7,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => f.write_str(msg),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input(config: &RunConfig) -> Result<TrajectorySet> {
    let (path, format) = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    Ok(io::read_trajectories(path, *format)?)
}

fn output(config: &RunConfig) -> Result<&Path> {
    config
        .output
        .as_deref()
        .ok_or_else(|| CliError::Config("--output is required".into()))
}

fn pipeline_config(config: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        build: config.build,
        ticks: config.ticks,
        workers: config.workers,
    }
}

pub fn run(config: &RunConfig) -> Result<()> {
    match &config.command {
        RunCommand::Smooth => {
            let set = input(config)?;
            let curves = parallel::build_set(&set, &config.build, config.workers, &OpCounter::new())?;
            io::write_coefficients(output(config)?, &curves)?;
        }
        RunCommand::Eval => {
            let set = input(config)?;
            let out = parallel::run_pipeline(&set, &pipeline_config(config))?;
            let path = output(config)?;
            let format = config
                .output_format
                .unwrap_or_else(|| io::sample_format_for(path));
            io::write_samples(path, &out.polylines, format)?;
        }
        RunCommand::Info => info(config)?,
        RunCommand::BenchScaling {
            mode,
            workers,
            trajectories,
            points,
            load,
            reps,
        } => {
            let path = output(config)?;
            let report = match mode {
                ScalingMode::Strong => {
                    let job = JobSpec {
                        trajectories: *trajectories,
                        points: points.unwrap_or(13),
                        ticks: config.ticks,
                        build: config.build,
                        reps: *reps,
                    };
                    if config.input.is_some() {
                        bench_strong_on(&input(config)?, &job, workers)?
                    } else {
                        bench_strong(&job, workers)?
                    }
                }
                ScalingMode::Weak => {
                    let job = JobSpec {
                        points: points.unwrap_or(4),
                        ticks: config.ticks,
                        build: config.build,
                        reps: *reps,
                        ..Default::default()
                    };
                    bench_weak(&job, workers, *load)?
                }
            };
            print_report(&report);
            io::write_report(path, &report)?;
        }
        RunCommand::BenchSparse { sizes, methods, reps } => {
            let path = output(config)?;
            let rows = bench_sparse(sizes, methods, *reps, config.dense_cap)?;
            println!("{:>8} {:>8} {:>14} {:>14}", "M", "method", "wall_time_s", "flops");
            for r in &rows {
                println!("{:>8} {:>8} {:>14.3e} {:>14}", r.m, r.method.name(), r.wall_time_s, r.flops);
            }
            io::write_sparse_report(path, &rows)?;
        }
    }
    Ok(())
}

fn print_report(report: &ScalingReport) {
    println!(
        "{:>4} {:>8} {:>10} {:>6} {:>12} {:>8} {:>10}",
        "P", "M", "segments", "V", "wall_time_s", "speedup", "efficiency"
    );
    for r in &report.rows {
        println!(
            "{:>4} {:>8} {:>10} {:>6} {:>12.4e} {:>8.3} {:>10.3}{}",
            r.workers,
            r.trajectories,
            r.segments,
            r.ticks,
            r.wall_time_s,
            r.speedup,
            r.efficiency,
            if r.oversubscribed { "  (oversubscribed)" } else { "" }
        );
    }
    match report.mode {
        ScalingMode::Strong => println!("deterministic across P: {}", report.deterministic),
        ScalingMode::Weak => println!(
            "max/min wall time: {:.3} (flat: {})",
            report.time_ratio(),
            report.is_flat()
        ),
    }
}

fn info(config: &RunConfig) -> Result<()> {
    let set = input(config)?;
    let m = set.len();
    let s = set.points_per_trajectory();
    let grouping: GroupingMode = config.build.grouping;
    let groups = grouping.group_count(s)?;
    let segments = grouping.segment_count(s)?;
    let g = assemble_global(ConstructionMatrix::STANDARD, m)?;
    let v = config.ticks as u64;
    println!("trajectories (M): {m}");
    println!("points per trajectory (S): {s}");
    println!("grouping: {grouping}");
    println!("groups per trajectory (N): {groups}");
    println!("segments per trajectory: {segments}");
    println!("global matrix: {} x {}", g.shape().0, g.shape().1);
    println!("global matrix density: {}", g.density());
    println!("global matrix density bound (1/M): {}", g.density_bound());
    println!("predicted build operations (M*N): {}", m as u64 * groups as u64);
    println!(
        "predicted eval dot products (segments*M*(V+1)): {}",
        segments as u64 * m as u64 * (v + 1)
    );
    Ok(())
}
