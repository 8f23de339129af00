//! Dataset, sample, coefficient and report files.
//!
//! Datasets come as CSV (`trajectory_id,point_index,x,y,z`) or as a binary
//! blob: `TRJ1`, `u32` M, `u32` S, then `M * S` little-endian `f64` triples
//! in trajectory-major order. Binary files carry no ids; trajectories read
//! from them are numbered `0..M`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builder::SegmentCurve;
use crate::model::validate_set;
use crate::parallel::{Polyline, ScalingReport};
use crate::sparse::SparseBenchRow;
use crate::{Error, Point3, Result, TrajectorySet};

pub const BINARY_MAGIC: &[u8; 4] = b"TRJ1";

const DATASET_HEADER: [&str; 5] = ["trajectory_id", "point_index", "x", "y", "z"];
const SAMPLES_HEADER: [&str; 5] = ["trajectory_id", "sample_index", "x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    /// Legacy ASCII VTK polydata, one polyline per trajectory.
    VtkPolyline,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    trajectory_id: u64,
    point_index: usize,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    trajectory_id: u64,
    sample_index: usize,
    x: f64,
    y: f64,
    z: f64,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.kind() {
        csv::ErrorKind::Io(_) => Error::Csv(err),
        _ => parse_error(path, line, err.to_string()),
    }
}

fn check_header(path: &Path, reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_error(
            path,
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

pub fn read_trajectories(path: impl AsRef<Path>, format: DatasetFormat) -> Result<TrajectorySet> {
    let path = path.as_ref();
    match format {
        DatasetFormat::Csv => read_csv_dataset(path, File::open(path)?),
        DatasetFormat::Binary => read_binary_dataset(path, BufReader::new(File::open(path)?)),
    }
}

/// Parses CSV rows grouped by trajectory with dense, ascending point indices.
pub fn read_csv_dataset(path: &Path, input: impl Read) -> Result<TrajectorySet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(path, &mut reader, &DATASET_HEADER)?;
    let mut raw: Vec<(u64, Vec<Point3>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row: PointRow = record
            .deserialize(None)
            .map_err(|e| parse_error(path, line, e.to_string()))?;
        let starts_new = raw.last().is_none_or(|(id, _)| *id != row.trajectory_id);
        if starts_new {
            if raw.iter().any(|(id, _)| *id == row.trajectory_id) {
                return Err(parse_error(
                    path,
                    line,
                    format!("rows of trajectory {} are not contiguous", row.trajectory_id),
                ));
            }
            raw.push((row.trajectory_id, Vec::new()));
        }
        let (id, points) = raw.last_mut().expect("pushed above");
        let expected = points.len();
        if row.point_index > expected {
            return Err(Error::Gap {
                path: path.to_path_buf(),
                id: *id,
                missing: expected,
            });
        }
        if row.point_index < expected {
            return Err(parse_error(
                path,
                line,
                format!("point index {} repeated or out of order", row.point_index),
            ));
        }
        points.push(Point3::new(row.x, row.y, row.z));
    }
    validate_set(raw)
}

/// Parses the `TRJ1` binary layout; trailing bytes are an error.
pub fn read_binary_dataset(path: &Path, mut input: impl Read) -> Result<TrajectorySet> {
    let mut magic = [0u8; 4];
    read_exact(path, &mut input, &mut magic, "magic")?;
    if &magic != BINARY_MAGIC {
        return Err(parse_error(path, 0, "bad magic, expected TRJ1"));
    }
    let mut word = [0u8; 4];
    read_exact(path, &mut input, &mut word, "trajectory count")?;
    let m = u32::from_le_bytes(word) as usize;
    read_exact(path, &mut input, &mut word, "point count")?;
    let s = u32::from_le_bytes(word) as usize;
    let mut raw = Vec::with_capacity(m);
    let mut buf = [0u8; 24];
    for id in 0..m {
        let mut points = Vec::with_capacity(s);
        for _ in 0..s {
            read_exact(path, &mut input, &mut buf, "coordinates")?;
            let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().expect("8 bytes"));
            points.push(Point3::new(f(0), f(1), f(2)));
        }
        raw.push((id as u64, points));
    }
    if input.read(&mut [0u8; 1])? != 0 {
        return Err(parse_error(path, 0, "trailing bytes after coordinates"));
    }
    validate_set(raw)
}

fn read_exact(path: &Path, input: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => parse_error(path, 0, format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

pub fn write_trajectories(path: impl AsRef<Path>, set: &TrajectorySet, format: DatasetFormat) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        DatasetFormat::Csv => write_csv_dataset(out, set),
        DatasetFormat::Binary => write_binary_dataset(out, set),
    }
}

pub fn write_csv_dataset(out: impl Write, set: &TrajectorySet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for tr in set {
        for (i, p) in tr.points.iter().enumerate() {
            w.serialize(PointRow {
                trajectory_id: tr.id,
                point_index: i,
                x: p.x,
                y: p.y,
                z: p.z,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary_dataset(mut out: impl Write, set: &TrajectorySet) -> Result<()> {
    let count = |n: usize, what: &str| {
        u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("{what} {n} does not fit in u32")))
    };
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&count(set.len(), "trajectory count")?.to_le_bytes())?;
    out.write_all(&count(set.points_per_trajectory(), "point count")?.to_le_bytes())?;
    for p in set.iter().flat_map(|t| &t.points) {
        for v in p.to_array() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples(path: impl AsRef<Path>, polylines: &[Polyline], format: SampleFormat) -> Result<()> {
    if polylines.is_empty() {
        return Err(Error::InvalidParameter("no polylines to write".into()));
    }
    let out = BufWriter::new(File::create(path)?);
    match format {
        SampleFormat::Csv => write_samples_csv(out, polylines),
        SampleFormat::VtkPolyline => write_vtk(out, polylines),
    }
}

pub fn write_samples_csv(out: impl Write, polylines: &[Polyline]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for line in polylines {
        for (i, p) in line.points.iter().enumerate() {
            w.serialize(SampleRow {
                trajectory_id: line.trajectory_id,
                sample_index: i,
                x: p.x,
                y: p.y,
                z: p.z,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back a sample CSV written by [`write_samples`].
pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<Vec<Polyline>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_reader(File::open(path)?);
    check_header(path, &mut reader, &SAMPLES_HEADER)?;
    let mut lines: Vec<Polyline> = Vec::new();
    for row in reader.deserialize::<SampleRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        match lines.last_mut() {
            Some(l) if l.trajectory_id == row.trajectory_id => {}
            _ => lines.push(Polyline {
                trajectory_id: row.trajectory_id,
                points: Vec::new(),
            }),
        }
        let line = lines.last_mut().expect("pushed above");
        if row.sample_index != line.points.len() {
            return Err(Error::Gap {
                path: path.to_path_buf(),
                id: row.trajectory_id,
                missing: line.points.len(),
            });
        }
        line.points.push(Point3::new(row.x, row.y, row.z));
    }
    Ok(lines)
}

pub fn write_vtk(mut out: impl Write, polylines: &[Polyline]) -> Result<()> {
    let total: usize = polylines.iter().map(|l| l.points.len()).sum();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "trajfit polylines")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {total} double")?;
    for p in polylines.iter().flat_map(|l| &l.points) {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    writeln!(out, "LINES {} {}", polylines.len(), total + polylines.len())?;
    let mut next = 0;
    for l in polylines {
        write!(out, "{}", l.points.len())?;
        for i in next..next + l.points.len() {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
        next += l.points.len();
    }
    out.flush()?;
    Ok(())
}

/// Counts found by [`check_vtk`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VtkSummary {
    pub points: usize,
    /// Length of every polyline, in file order.
    pub lines: Vec<usize>,
}

/// Line-oriented structural check of a legacy ASCII polydata file: header
/// lines, declared vs. emitted point count, declared LINES size and index
/// bounds.
pub fn check_vtk(input: impl BufRead) -> std::result::Result<VtkSummary, String> {
    let mut lines = input.lines().map(|l| l.map_err(|e| e.to_string()));
    let mut next = || lines.next().unwrap_or_else(|| Err("unexpected end of file".into()));
    if next()? != "# vtk DataFile Version 3.0" {
        return Err("missing version line".into());
    }
    next()?;
    if next()?.trim() != "ASCII" {
        return Err("not ASCII".into());
    }
    if next()?.trim() != "DATASET POLYDATA" {
        return Err("not POLYDATA".into());
    }
    let header = next()?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let declared: usize = match fields.as_slice() {
        ["POINTS", n, _] => n.parse().map_err(|_| format!("bad POINTS count {n}"))?,
        _ => return Err(format!("expected POINTS header, got `{header}`")),
    };
    let mut coords = 0usize;
    let lines_header = loop {
        let l = next()?;
        if l.starts_with("LINES") {
            break l;
        }
        for tok in l.split_whitespace() {
            tok.parse::<f64>().map_err(|_| format!("bad coordinate `{tok}`"))?;
            coords += 1;
        }
    };
    if coords != 3 * declared {
        return Err(format!("{declared} points declared, {coords} coordinates emitted"));
    }
    let fields: Vec<usize> = lines_header
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse().map_err(|_| format!("bad LINES header `{lines_header}`")))
        .collect::<std::result::Result<_, _>>()?;
    let [n_lines, size] = fields[..] else {
        return Err(format!("bad LINES header `{lines_header}`"));
    };
    let mut lens = Vec::with_capacity(n_lines);
    let mut seen = 0;
    for _ in 0..n_lines {
        let l = next()?;
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad index `{t}`")))
            .collect::<std::result::Result<_, _>>()?;
        let (&len, idx) = nums.split_first().ok_or("empty LINES entry")?;
        if idx.len() != len {
            return Err(format!("polyline declares {len} indices, has {}", idx.len()));
        }
        if let Some(bad) = idx.iter().find(|&&i| i >= declared) {
            return Err(format!("index {bad} out of range for {declared} points"));
        }
        seen += nums.len();
        lens.push(len);
    }
    if seen != size {
        return Err(format!("LINES size {size} declared, {seen} emitted"));
    }
    Ok(VtkSummary {
        points: declared,
        lines: lens,
    })
}

/// Writes the blended coefficients of every segment, one row per axis:
/// `trajectory_id,segment_index,axis,a,b,c,d`.
pub fn write_coefficients(path: impl AsRef<Path>, curves: &[Vec<SegmentCurve>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["trajectory_id", "segment_index", "axis", "a", "b", "c", "d"])?;
    for segs in curves {
        for (k, seg) in segs.iter().enumerate() {
            for (axis, name) in ["x", "y", "z"].into_iter().enumerate() {
                let [a, b, c, d] = seg.v.axis(axis);
                w.serialize((seg.spec.trajectory_id, k, name, a, b, c, d))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(path: impl AsRef<Path>, report: &ScalingReport) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("empty scaling report".into()));
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["mode", "P", "M", "segments", "V", "wall_time_s", "speedup", "efficiency"])?;
    for r in &report.rows {
        w.serialize((
            report.mode.name(),
            r.workers,
            r.trajectories,
            r.segments,
            r.ticks,
            r.wall_time_s,
            r.speedup,
            r.efficiency,
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sparse_report(path: impl AsRef<Path>, rows: &[SparseBenchRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty sparse benchmark report".into()));
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["M", "method", "wall_time_s", "flops"])?;
    for r in rows {
        w.serialize((r.m, r.method.name(), r.wall_time_s, r.flops))?;
    }
    w.flush()?;
    Ok(())
}

/// Guesses the dataset format from the file extension (`.bin`/`.trj` for
/// binary, CSV otherwise).
pub fn dataset_format_for(path: &Path) -> DatasetFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin" | "trj") => DatasetFormat::Binary,
        _ => DatasetFormat::Csv,
    }
}

/// Guesses the sample format from the file extension (`.vtk` for VTK).
pub fn sample_format_for(path: &Path) -> SampleFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("vtk") => SampleFormat::VtkPolyline,
        _ => SampleFormat::Csv,
    }
}
