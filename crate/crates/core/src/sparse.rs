//! Block-diagonal global matrix `G = diag(T, ..., T)` and its products.
//!
//! `G` maps the stacked inputs `(P_end, P_start, m, q, 1)` of `M` segments to
//! their stacked coefficients in one product. Since every block is the same
//! construction matrix, `G` is stored as `(block, count)`; CSR and dense
//! expansions exist for comparison runs.

use std::time::Instant;

use crate::builder::ConstructionMatrix;
use crate::{Error, OpCounter, Result};

const BLOCK_ROWS: usize = 4;
const BLOCK_COLS: usize = 5;

/// Default cap on `M` for dense expansion (memory grows as `20 M^2`).
pub const DEFAULT_DENSE_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMatrix {
    block: ConstructionMatrix,
    count: usize,
}

/// Places `m` copies of `t` on the block diagonal.
pub fn assemble_global(t: ConstructionMatrix, m: usize) -> Result<GlobalMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("global matrix needs at least one block".into()));
    }
    Ok(GlobalMatrix { block: t, count: m })
}

impl GlobalMatrix {
    pub fn block(&self) -> &ConstructionMatrix {
        &self.block
    }

    pub fn block_count(&self) -> usize {
        self.count
    }

    /// `(4M, 5M)`.
    pub fn shape(&self) -> (usize, usize) {
        (BLOCK_ROWS * self.count, BLOCK_COLS * self.count)
    }

    pub fn nonzeros(&self) -> usize {
        self.block.nonzeros() * self.count
    }

    /// Entry `(i, j)` of the logical matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (bi, bj) = (i / BLOCK_ROWS, j / BLOCK_COLS);
        if bi != bj {
            return 0.0;
        }
        self.block.rows()[i % BLOCK_ROWS][j % BLOCK_COLS]
    }

    /// Nonzero entries over all `20 M^2` entries.
    pub fn density(&self) -> f64 {
        let (r, c) = self.shape();
        self.nonzeros() as f64 / (r as f64 * c as f64)
    }

    /// `1/M`: the density reached when every block entry is nonzero.
    pub fn density_bound(&self) -> f64 {
        1.0 / self.count as f64
    }

    /// Row-major dense copy, refused above `cap` blocks.
    pub fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        if self.count > cap {
            return Err(Error::AllocationLimit {
                blocks: self.count,
                cap,
            });
        }
        let (rows, cols) = self.shape();
        let mut data = vec![0.0; rows * cols];
        for b in 0..self.count {
            for (i, row) in self.block.rows().iter().enumerate() {
                let start = (b * BLOCK_ROWS + i) * cols + b * BLOCK_COLS;
                data[start..start + BLOCK_COLS].copy_from_slice(row);
            }
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// General compressed-sparse-row copy holding only the nonzeros.
    pub fn to_csr(&self) -> CsrMatrix {
        let (rows, cols) = self.shape();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(self.nonzeros());
        let mut data = Vec::with_capacity(self.nonzeros());
        indptr.push(0);
        for b in 0..self.count {
            for row in self.block.rows() {
                for (j, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        indices.push(b * BLOCK_COLS + j);
                        data.push(v);
                    }
                }
                indptr.push(indices.len());
            }
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            data,
        }
    }
}

/// Free-function form of [`GlobalMatrix::density`].
pub fn density(g: &GlobalMatrix) -> f64 {
    g.density()
}

/// One axis of the stacked input vector, five entries per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedVector {
    values: Vec<f64>,
}

impl StackedVector {
    /// Stacks `(P_end, P_start, m, q)` quadruples, appending the constant 1.
    pub fn from_inputs<I>(inputs: I) -> Self
    where
        I: IntoIterator<Item = [f64; 4]>,
    {
        let values = inputs
            .into_iter()
            .flat_map(|[e, s, m, q]| [e, s, m, q, 1.0])
            .collect();
        Self { values }
    }

    /// Wraps raw values, checking length and the constant entries.
    pub fn from_raw(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(BLOCK_COLS) {
            return Err(Error::ShapeMismatch {
                expected: values.len().next_multiple_of(BLOCK_COLS),
                actual: values.len(),
            });
        }
        if let Some(i) = values.chunks_exact(BLOCK_COLS).position(|c| c[4] != 1.0) {
            return Err(Error::InvalidParameter(format!(
                "stacked entry {} must be 1",
                BLOCK_COLS * i + 4
            )));
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, actual })
    }
}

/// `c = G s` using the block structure: one 4x5 product per block.
pub fn matvec_block(g: &GlobalMatrix, s: &StackedVector, ops: &OpCounter) -> Result<Vec<f64>> {
    check_len(g.shape().1, s.len())?;
    let mut out = vec![0.0; g.shape().0];
    matvec_block_into(g.block(), s.as_slice(), &mut out);
    ops.add((BLOCK_ROWS * BLOCK_COLS * g.count) as u64);
    Ok(out)
}

/// Block product over matching slices; `out.len() / 4 == s.len() / 5`.
pub(crate) fn matvec_block_into(t: &ConstructionMatrix, s: &[f64], out: &mut [f64]) {
    for (x, y) in s.chunks_exact(BLOCK_COLS).zip(out.chunks_exact_mut(BLOCK_ROWS)) {
        let x: &[f64; 5] = x.try_into().expect("chunk of five");
        y.copy_from_slice(&t.apply(x));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Plain dense product over all `20 M^2` entries.
pub fn matvec_dense(g: &DenseMatrix, s: &StackedVector, ops: &OpCounter) -> Result<Vec<f64>> {
    check_len(g.cols, s.len())?;
    let x = s.as_slice();
    let out = g
        .data
        .chunks_exact(g.cols)
        .map(|row| row.iter().zip(x).fold(0.0, |acc, (a, b)| acc + a * b))
        .collect();
    ops.add((g.rows * g.cols) as u64);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }
}

pub fn matvec_csr(g: &CsrMatrix, s: &StackedVector, ops: &OpCounter) -> Result<Vec<f64>> {
    check_len(g.cols, s.len())?;
    let x = s.as_slice();
    let out = g
        .indptr
        .windows(2)
        .map(|w| {
            (w[0]..w[1]).fold(0.0, |acc, k| acc + g.data[k] * x[g.indices[k]])
        })
        .collect();
    ops.add(g.nnz() as u64);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SparseMethod {
    /// Implicit block storage.
    Block,
    /// General CSR storage.
    Csr,
    /// Full dense storage.
    Dense,
}

impl SparseMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SparseMethod::Block => "block",
            SparseMethod::Csr => "csr",
            SparseMethod::Dense => "dense",
        }
    }
}

/// One timing of `G s` for a given `M` and storage scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBenchRow {
    pub m: usize,
    pub method: SparseMethod,
    pub wall_time_s: f64,
    /// Multiply-adds of a single product.
    pub flops: u64,
}

/// Times `G s` for every `(M, method)` pair; median of `reps` after a warmup.
///
/// Only the product is timed, not the expansion of `G` into CSR or dense form.
pub fn bench_sparse(
    ms: &[usize],
    methods: &[SparseMethod],
    reps: usize,
    dense_cap: usize,
) -> Result<Vec<SparseBenchRow>> {
    let reps = reps.max(1);
    let mut rows = Vec::with_capacity(ms.len() * methods.len());
    for &m in ms {
        let g = assemble_global(ConstructionMatrix::STANDARD, m)?;
        let s = StackedVector::from_inputs((0..m).map(|i| {
            let x = i as f64 / m as f64;
            [x + 0.5, x, 1.0 - x, 0.25 * x]
        }));
        for &method in methods {
            let ops = OpCounter::new();
            let mut times = Vec::with_capacity(reps);
            match method {
                SparseMethod::Block => {
                    time_product(&mut times, reps, || matvec_block(&g, &s, &ops))?;
                }
                SparseMethod::Csr => {
                    let csr = g.to_csr();
                    time_product(&mut times, reps, || matvec_csr(&csr, &s, &ops))?;
                }
                SparseMethod::Dense => {
                    let dense = g.to_dense(dense_cap)?;
                    time_product(&mut times, reps, || matvec_dense(&dense, &s, &ops))?;
                }
            }
            rows.push(SparseBenchRow {
                m,
                method,
                wall_time_s: median(&mut times),
                flops: ops.get() / (reps as u64 + 1),
            });
        }
    }
    Ok(rows)
}

fn time_product(
    times: &mut Vec<f64>,
    reps: usize,
    mut f: impl FnMut() -> Result<Vec<f64>>,
) -> Result<()> {
    std::hint::black_box(f()?);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(f()?);
        times.push(start.elapsed().as_secs_f64());
    }
    Ok(())
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
