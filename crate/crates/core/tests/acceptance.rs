//! Acceptance criteria, run in sequence inside one test so that the timing
//! criteria do not compete with other tests for cores. Each criterion prints
//! one `[PASS]` / `[FAIL]` line; the test fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajfit::bezier::BezierCubic;
use trajfit::builder::{
    build_trajectory, segment_coeffs, BlendParams, BuildConfig, ConstructionMatrix, GroupingMode, SeedMode,
};
use trajfit::evaluator::{eval_batch, global_cache, CoeffMatrix, PowerMatrix};
use trajfit::io::{self, check_vtk, DatasetFormat, SampleFormat};
use trajfit::model::validate_set;
use trajfit::parallel::{
    available_cores, bench_strong, bench_weak, build_set, evaluate, run_pipeline, synthetic_set, JobSpec,
    PipelineConfig,
};
use trajfit::sparse::{
    assemble_global, bench_sparse, matvec_block, matvec_dense, SparseMethod, StackedVector, DEFAULT_DENSE_CAP,
};
use trajfit::{OpCounter, Point3, TrajectorySet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_point(r: &mut ChaCha8Rng) -> Point3 {
    Point3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Random walks with unit-scale steps.
fn random_set(r: &mut ChaCha8Rng, m: usize, s: usize) -> TrajectorySet {
    validate_set((0..m).map(|i| {
        let mut p = unit_point(r);
        let pts = (0..s)
            .map(|_| {
                let cur = p;
                p = p + unit_point(r) * 0.3;
                cur
            })
            .collect();
        (i as u64, pts)
    }))
    .unwrap()
}

/// Independent Bernstein-form evaluation.
fn bernstein(p: &[Point3; 4], s: f64) -> Point3 {
    let binom = [1.0, 3.0, 3.0, 1.0];
    (0..4).fold(Point3::ZERO, |acc, i| {
        acc + p[i] * (binom[i] * s.powi(i as i32) * (1.0 - s).powi(3 - i as i32))
    })
}

fn ac1_density() -> Outcome {
    let start = Instant::now();
    let g = assemble_global(ConstructionMatrix::STANDARD, 1000).unwrap();
    ensure!(g.density() <= 0.001, "density {} > 0.001 at M=1000", g.density());
    ensure!(g.density_bound() == 0.001, "bound {}", g.density_bound());
    let mut r = rng(1);
    for _ in 0..1000 {
        let m = r.gen_range(2..=5000);
        let g = assemble_global(ConstructionMatrix::STANDARD, m).unwrap();
        ensure!(g.density() <= 1.0 / m as f64, "density {} > 1/{m}", g.density());
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("density(M=1000) = {:.5} <= 0.001; 1000 random M within 1/M", g.density()))
}

fn ac2_construction() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut inputs = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let (s, e, m, q) = (unit_point(&mut r), unit_point(&mut r), unit_point(&mut r), unit_point(&mut r));
        let u = segment_coeffs(s, e, m, q);
        for err in [
            (u.eval(0.0) - s).max_abs(),
            (u.eval(1.0) - e).max_abs(),
            (u.derivative(0.0) - m).max_abs(),
            (u.second_derivative(0.0) - q).max_abs(),
        ] {
            worst = worst.max(err);
        }
        inputs.push((s, e, m, q, u));
    }
    ensure!(worst <= 1e-10, "condition residual {worst:e}");

    let m = 1000;
    let g = assemble_global(ConstructionMatrix::STANDARD, m).unwrap();
    let dense = g.to_dense(DEFAULT_DENSE_CAP).unwrap();
    let ops = OpCounter::new();
    let mut dense_err = 0.0f64;
    for axis in 0..3 {
        let s = StackedVector::from_inputs(inputs[..m].iter().map(|(s, e, mm, q, _)| [e[axis], s[axis], mm[axis], q[axis]]));
        let block = matvec_block(&g, &s, &ops).unwrap();
        let full = matvec_dense(&dense, &s, &ops).unwrap();
        for (i, (.., u)) in inputs[..m].iter().enumerate() {
            ensure!(block[4 * i..4 * i + 4] == u.axis(axis), "block {i} axis {axis} differs from segment_coeffs");
        }
        for (a, b) in block.iter().zip(&full) {
            dense_err = dense_err.max((a - b).abs());
        }
    }
    ensure!(dense_err <= 1e-13, "block vs dense {dense_err:e}");
    Ok(format!("max residual {worst:.1e}; block == segment_coeffs; block vs dense {dense_err:.1e}"))
}

fn ac3_continuity() -> Outcome {
    let mut r = rng(3);
    let set = random_set(&mut r, 100, 13);
    let mut slope = 0.0f64;
    let mut curvature = 0.0f64;
    let mut knot = 0.0f64;
    let mut boundary = 0.0f64;
    for blend in [BlendParams::default(), BlendParams::new(0.3, 0.7).unwrap()] {
        let cfg = BuildConfig {
            grouping: GroupingMode::Overlap,
            seed_mode: SeedMode::Chained,
            blend,
        };
        for tr in &set {
            let segs = build_trajectory(tr, &cfg, &OpCounter::new()).unwrap();
            for w in segs.windows(2) {
                // knots interior to a group
                if w[0].spec.group_index == w[1].spec.group_index {
                    slope = slope.max((w[0].u.derivative(1.0) - w[1].u.derivative(0.0)).max_abs());
                    curvature = curvature.max((w[0].u.second_derivative(1.0) - w[1].u.second_derivative(0.0)).max_abs());
                }
            }
            for c in &segs {
                let (ps, pe) = (tr.points[c.spec.start_point_index], tr.points[c.spec.end_point_index]);
                knot = knot.max((c.u.eval(0.0) - ps).max_abs() / (1.0 + ps.max_abs()));
                knot = knot.max((c.u.eval(1.0) - pe).max_abs() / (1.0 + pe.max_abs()));
            }
            for g in 0..4 {
                let (first, last) = (&segs[3 * g], &segs[3 * g + 2]);
                let (p0, p3) = (tr.points[3 * g], tr.points[3 * g + 3]);
                boundary = boundary.max((first.v.eval(0.0) - p0).max_abs() / (1.0 + p0.max_abs()));
                boundary = boundary.max((last.v.eval(1.0) - p3).max_abs() / (1.0 + p3.max_abs()));
            }
        }
    }
    ensure!(slope <= 1e-9, "slope mismatch {slope:e}");
    ensure!(curvature <= 1e-9, "curvature mismatch {curvature:e}");
    ensure!(knot <= 1e-12, "knot interpolation {knot:e}");
    ensure!(boundary <= 1e-12, "group boundary {boundary:e}");
    Ok(format!(
        "slope {slope:.1e}, curvature {curvature:.1e}, knots {knot:.1e}, group boundaries {boundary:.1e}"
    ))
}

fn ac4_bezier_oracle() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = [unit_point(&mut r), unit_point(&mut r), unit_point(&mut r), unit_point(&mut r)];
        let bz = BezierCubic::from_points(&p).unwrap();
        for i in 0..1000 {
            let s = i as f64 / 999.0;
            worst = worst.max((bz.eval(s).unwrap() - bernstein(&p, s)).max_abs());
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    Ok(format!("1000 polygons x 1000 samples, max deviation {worst:.1e}"))
}

fn ac5_line_reproduction() -> Outcome {
    let dir = Point3::new(0.6, -0.3, 0.74);
    let origin = Point3::new(-0.2, 0.5, 0.1);
    let line = |n: usize| {
        validate_set([(0, (0..n).map(|i| origin + dir * (i as f64 / (n - 1) as f64)).collect())]).unwrap()
    };
    let mut worst = 0.0f64;
    for (grouping, n) in [(GroupingMode::Overlap, 13), (GroupingMode::Disjoint, 12)] {
        for seed_mode in [SeedMode::BezierStart, SeedMode::Chained] {
            let cfg = PipelineConfig {
                build: BuildConfig {
                    grouping,
                    seed_mode,
                    ..Default::default()
                },
                ticks: 50,
                workers: 1,
            };
            let out = run_pipeline(&line(n), &cfg).unwrap();
            for p in &out.polylines[0].points {
                let rel = *p - origin;
                let along = rel.dot(dir) / dir.dot(dir);
                worst = worst.max((rel - dir * along).norm());
            }
        }
    }
    ensure!(worst <= 1e-10, "distance from line {worst:e}");
    Ok(format!("both seed modes and groupings, max distance from line {worst:.1e}"))
}

fn ac6_evaluation() -> Outcome {
    let mut r = rng(6);
    let set = random_set(&mut r, 50, 13);
    let curves = build_set(&set, &BuildConfig::default(), 1, &OpCounter::new()).unwrap();
    let w = PowerMatrix::new(64).unwrap();
    let ops = OpCounter::new();
    for axis in 0..3 {
        let lagrangian: Vec<_> = curves
            .iter()
            .map(|segs| eval_batch(&CoeffMatrix::lagrangian(segs, axis).unwrap(), &w, &ops))
            .collect();
        for pos in 0..curves[0].len() {
            let eulerian = eval_batch(&CoeffMatrix::eulerian(&curves, pos, axis).unwrap(), &w, &ops);
            for (i, lag) in lagrangian.iter().enumerate() {
                let (e, l) = (eulerian.row(i), lag.row(pos));
                ensure!(
                    e.iter().zip(l).all(|(a, b)| a.to_bits() == b.to_bits()),
                    "eulerian/lagrangian differ at trajectory {i}, position {pos}, axis {axis}"
                );
            }
        }
    }

    let mut horner = 0.0f64;
    for _ in 0..2000 {
        let row: [f64; 4] = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let grid = eval_batch(&CoeffMatrix::new(trajfit::evaluator::Layout::Eulerian, vec![row]).unwrap(), &w, &ops);
        for (j, v) in grid.row(0).iter().enumerate() {
            let t = j as f64 / 64.0;
            horner = horner.max((v - (((row[0] * t + row[1]) * t + row[2]) * t + row[3])).abs());
        }
    }
    ensure!(horner <= 1e-12, "batch vs Horner {horner:e}");

    let v = 4099;
    let before = global_cache().constructions(v);
    ensure!(before == 0, "V={v} already cached");
    for _ in 0..2 {
        evaluate(&curves, v, 2, &OpCounter::new()).unwrap();
    }
    let builds = global_cache().constructions(v);
    ensure!(builds == 1, "power matrix built {builds} times for V={v}");
    Ok(format!("eulerian == lagrangian bitwise; Horner {horner:.1e}; one power-matrix build for two runs"))
}

fn ac7_counters() -> Outcome {
    let mut r = rng(7);
    let cfg = BuildConfig::default();
    let count_build = |set: &TrajectorySet| {
        let ops = OpCounter::new();
        build_set(set, &cfg, 2, &ops).unwrap();
        ops.get()
    };
    let small = random_set(&mut r, 300, 13);
    let doubled = validate_set(
        small
            .iter()
            .chain(small.iter())
            .enumerate()
            .map(|(i, t)| (i as u64, t.points.clone())),
    )
    .unwrap();
    let build_ratio = count_build(&doubled) as f64 / count_build(&small) as f64;
    ensure!((build_ratio - 2.0).abs() <= 0.02, "build ratio {build_ratio}");

    let curves = build_set(&small, &cfg, 1, &OpCounter::new()).unwrap();
    let count_eval = |v: usize| {
        let ops = OpCounter::new();
        evaluate(&curves, v, 2, &ops).unwrap();
        ops.get()
    };
    let (c100, c200) = (count_eval(100), count_eval(200));
    let segments = (curves.len() * curves[0].len()) as u64;
    ensure!(c100 == 3 * 4 * segments * 101, "eval count {c100} not 12 x segments x (V+1)");
    let eval_ratio = c200 as f64 / c100 as f64;
    ensure!((eval_ratio - 2.0).abs() <= 0.1, "eval ratio {eval_ratio}");
    Ok(format!("build x{build_ratio:.4} when M doubles; eval x{eval_ratio:.4} when V doubles"))
}

fn ac8_sparse_vs_dense() -> Outcome {
    let start = Instant::now();
    let rows = bench_sparse(&[1000], &[SparseMethod::Block, SparseMethod::Dense], 5, DEFAULT_DENSE_CAP).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("sparse.csv");
    io::write_sparse_report(&report, &rows).unwrap();
    let lines = std::fs::read_to_string(&report).unwrap().lines().count();
    ensure!(lines == 3, "report has {lines} lines");
    let (block, dense) = (rows[0].wall_time_s, rows[1].wall_time_s);
    let ratio = dense / block;
    ensure!(ratio >= 10.0, "dense/block time ratio {ratio:.1}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("M=1000: block {block:.2e}s, dense {dense:.2e}s, ratio {ratio:.0}x"))
}

fn ac9_strong_scaling() -> Outcome {
    let start = Instant::now();
    let job = JobSpec {
        trajectories: 2000,
        points: 13,
        ticks: 200,
        ..Default::default()
    };
    let report = bench_strong(&job, &[1, 2, 4]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    io::write_report(dir.path().join("strong.csv"), &report).unwrap();
    ensure!(report.deterministic, "outputs differ across P");
    let speedup = report.speedup_at(4).unwrap();
    let cores = available_cores();
    ensure!(
        speedup >= 2.0,
        "speedup at P=4 is {speedup:.2} < 2.0 ({cores} core(s) available; criterion assumes >= 4 idle cores)"
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!("speedup at P=4: {speedup:.2}; outputs bitwise equal for P in {{1,2,4}}"))
}

fn ac10_weak_scaling() -> Outcome {
    let job = JobSpec {
        points: 4,
        ticks: 200,
        reps: 5,
        ..Default::default()
    };
    let report = bench_weak(&job, &[1, 2, 4], 1050).unwrap();
    let dir = tempfile::tempdir().unwrap();
    io::write_report(dir.path().join("weak.csv"), &report).unwrap();
    let ratio = report.time_ratio();
    let cores = available_cores();
    ensure!(
        report.is_flat(),
        "max/min wall time {ratio:.2} > 1.5 ({cores} core(s) available; criterion assumes >= 4 idle cores)"
    );
    Ok(format!("max/min wall time {ratio:.2} for 1050 segments per worker"))
}

fn ac11_round_trip_and_export() -> Outcome {
    let mut r = rng(11);
    let dir = tempfile::tempdir().unwrap();
    let set = validate_set((0..20).map(|i| {
        let pts = (0..10)
            .map(|_| {
                let e = r.gen_range(-300..300);
                Point3::new(r.gen::<f64>() * 10f64.powi(e), -r.gen::<f64>(), r.gen_range(-1e6..1e6))
            })
            .collect();
        (i, pts)
    }))
    .unwrap();
    for (name, format) in [("set.csv", DatasetFormat::Csv), ("set.bin", DatasetFormat::Binary)] {
        let path = dir.path().join(name);
        io::write_trajectories(&path, &set, format).unwrap();
        let back = io::read_trajectories(&path, format).unwrap();
        for (a, b) in set.iter().zip(&back) {
            ensure!(a.id == b.id, "{name}: id changed");
            for (p, q) in a.points.iter().zip(&b.points) {
                ensure!(
                    p.to_array().iter().zip(q.to_array()).all(|(x, y)| x.to_bits() == y.to_bits()),
                    "{name}: coordinate bits changed"
                );
            }
        }
    }

    let data = synthetic_set(100, 13).unwrap();
    let out = run_pipeline(&data, &PipelineConfig { ticks: 20, workers: 2, ..Default::default() }).unwrap();
    let vtk = dir.path().join("lines.vtk");
    io::write_samples(&vtk, &out.polylines, SampleFormat::VtkPolyline).unwrap();
    let file = std::io::BufReader::new(std::fs::File::open(&vtk).unwrap());
    let summary = check_vtk(file).map_err(|e| format!("VTK check: {e}"))?;
    ensure!(summary.lines.len() == 100, "{} polylines", summary.lines.len());
    ensure!(summary.points == 100 * (12 * 20 + 1), "{} points", summary.points);
    Ok(format!("CSV and binary bit-exact; VTK {} points / {} polylines valid", summary.points, summary.lines.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("AC-1 density of the global matrix", ac1_density),
        ("AC-2 construction matrix and global product", ac2_construction),
        ("AC-3 chained continuity and interpolation", ac3_continuity),
        ("AC-4 Bezier power basis vs Bernstein", ac4_bezier_oracle),
        ("AC-5 line reproduction", ac5_line_reproduction),
        ("AC-6 evaluation equivalences and cache", ac6_evaluation),
        ("AC-7 complexity counters", ac7_counters),
        ("AC-8 sparse vs dense product", ac8_sparse_vs_dense),
        ("AC-9 strong scaling and determinism", ac9_strong_scaling),
        ("AC-10 weak scaling", ac10_weak_scaling),
        ("AC-11 round trip and VTK export", ac11_round_trip_and_export),
    ];
    println!();
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                println!("[FAIL] {name}: {detail} ({secs:.2}s)");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
