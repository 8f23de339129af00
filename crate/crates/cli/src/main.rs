use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trajfit::builder::{BlendParams, BuildConfig, GroupingMode, SeedMode};
use trajfit::io::{DatasetFormat, SampleFormat};
use trajfit::parallel::{available_cores, ScalingMode};
use trajfit::sparse::{SparseMethod, DEFAULT_DENSE_CAP};

mod run;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid flags or configuration
  3  unreadable or invalid input dataset
  4  dataset length incompatible with the grouping
  5  I/O failure while writing output
  6  dense expansion refused by --dense-cap
  7  other runtime failure";

/// Smooth CFD particle trajectories into blended cubic curves and sample them.
#[derive(Debug, Parser)]
#[command(name = "trajfit", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Args)]
struct Opts {
    /// Input dataset.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Dataset format; inferred from the extension when omitted (.bin/.trj = binary).
    #[arg(long, global = true, value_enum)]
    input_format: Option<InputFormat>,
    /// Output file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Sample format for `eval`; inferred from the extension when omitted (.vtk = vtk).
    #[arg(long, global = true, value_enum)]
    output_format: Option<OutputFormat>,
    /// Bezier weight of the blend, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.5)]
    alpha: f64,
    /// Spline weight of the blend, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, global = true, value_enum, default_value_t = Seed::Chained)]
    seed_mode: Seed,
    #[arg(long, global = true, value_enum, default_value_t = Grouping::Overlap)]
    grouping: Grouping,
    /// Intervals per segment (V); each segment is sampled at V + 1 ticks.
    #[arg(long, global = true, default_value_t = 100)]
    ticks: usize,
    /// Worker count (P); defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Largest M for which a dense global matrix may be allocated.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-segment blended coefficients (trajectory_id,segment_index,axis,a,b,c,d).
    Smooth,
    /// Write stitched samples as CSV or VTK polylines.
    Eval,
    /// Strong or weak scaling report of the build + eval pipeline.
    BenchScaling(ScalingArgs),
    /// Timing of the global-matrix product for block, CSR and dense storage.
    BenchSparse(SparseArgs),
    /// Print dataset dimensions, matrix density and predicted operation counts.
    Info,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long, value_enum, default_value_t = Mode::Strong)]
    mode: Mode,
    /// Worker counts to run, ascending from 1.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    workers_list: Vec<usize>,
    /// Synthetic trajectory count for strong scaling (ignored with --input).
    #[arg(long, default_value_t = 2000)]
    trajectories: usize,
    /// Synthetic points per trajectory (defaults: 13 strong, 4 weak).
    #[arg(long)]
    points: Option<usize>,
    /// Segments per worker for weak scaling.
    #[arg(long, default_value_t = 1050)]
    load: usize,
    /// Timed repetitions per worker count (at least 3).
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

#[derive(Debug, Args)]
struct SparseArgs {
    /// Block counts M.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "block,dense")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Seed {
    Chained,
    BezierStart,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Grouping {
    Overlap,
    Disjoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Block,
    Csr,
    Dense,
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<(PathBuf, DatasetFormat)>,
    pub output: Option<PathBuf>,
    pub output_format: Option<SampleFormat>,
    pub build: BuildConfig,
    pub ticks: usize,
    pub workers: usize,
    pub dense_cap: usize,
    pub command: RunCommand,
}

#[derive(Debug, Clone)]
pub enum RunCommand {
    Smooth,
    Eval,
    BenchScaling {
        mode: ScalingMode,
        workers: Vec<usize>,
        trajectories: usize,
        points: Option<usize>,
        load: usize,
        reps: usize,
    },
    BenchSparse {
        sizes: Vec<usize>,
        methods: Vec<SparseMethod>,
        reps: usize,
    },
    Info,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, String> {
        let o = self.opts;
        let blend = BlendParams::new(o.alpha, o.beta).map_err(|e| e.to_string())?;
        if o.ticks == 0 {
            return Err("--ticks must be at least 1".into());
        }
        let workers = o.workers.unwrap_or_else(available_cores);
        if workers == 0 {
            return Err("--workers must be at least 1".into());
        }
        let input = o.input.map(|path| {
            let format = match o.input_format {
                Some(InputFormat::Csv) => DatasetFormat::Csv,
                Some(InputFormat::Binary) => DatasetFormat::Binary,
                None => trajfit::io::dataset_format_for(&path),
            };
            (path, format)
        });
        let command = match self.command {
            Command::Smooth => RunCommand::Smooth,
            Command::Eval => RunCommand::Eval,
            Command::Info => RunCommand::Info,
            Command::BenchScaling(a) => RunCommand::BenchScaling {
                mode: match a.mode {
                    Mode::Strong => ScalingMode::Strong,
                    Mode::Weak => ScalingMode::Weak,
                },
                workers: a.workers_list,
                trajectories: a.trajectories,
                points: a.points,
                load: a.load,
                reps: a.reps.max(3),
            },
            Command::BenchSparse(a) => RunCommand::BenchSparse {
                sizes: a.sizes,
                methods: a
                    .methods
                    .into_iter()
                    .map(|m| match m {
                        Method::Block => SparseMethod::Block,
                        Method::Csr => SparseMethod::Csr,
                        Method::Dense => SparseMethod::Dense,
                    })
                    .collect(),
                reps: a.reps,
            },
        };
        Ok(RunConfig {
            input,
            output: o.output,
            output_format: o.output_format.map(|f| match f {
                OutputFormat::Csv => SampleFormat::Csv,
                OutputFormat::Vtk => SampleFormat::VtkPolyline,
            }),
            build: BuildConfig {
                grouping: match o.grouping {
                    Grouping::Overlap => GroupingMode::Overlap,
                    Grouping::Disjoint => GroupingMode::Disjoint,
                },
                seed_mode: match o.seed_mode {
                    Seed::Chained => SeedMode::Chained,
                    Seed::BezierStart => SeedMode::BezierStart,
                },
                blend,
            },
            ticks: o.ticks,
            workers,
            dense_cap: o.dense_cap,
            command,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = match Cli::parse().into_config() {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
