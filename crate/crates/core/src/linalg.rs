//! Dense vectors and matrices over `F_q`.
//!
//! Entries are stored as canonical `u32` representatives next to a single
//! [`FieldSpec`], which keeps every entry of a container in the same field by
//! construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::stream::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ragged block layout: {0}")]
    RaggedLayout(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn check_field(a: FieldSpec, b: FieldSpec) -> Result<(), LinalgError> {
    if a != b {
        return Err(FieldError::SpecMismatch { left: a.modulus(), right: b.modulus() }.into());
    }
    Ok(())
}

/// A column vector over `F_q`. Serializes as a JSON array of integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    spec: FieldSpec,
    entries: Vec<u32>,
}

impl FieldVector {
    pub fn zeros(spec: FieldSpec, len: usize) -> Self {
        Self { spec, entries: vec![0; len] }
    }

    /// Reduces each value mod `q`.
    pub fn from_values(spec: FieldSpec, values: &[u64]) -> Self {
        let entries = values.iter().map(|&v| spec.element(v).value()).collect();
        Self { spec, entries }
    }

    /// Rejects values that are not canonical representatives.
    pub fn from_canonical(spec: FieldSpec, values: &[u64]) -> Result<Self, FieldError> {
        let entries = values
            .iter()
            .map(|&v| spec.canonical(v).map(FieldElement::value))
            .collect::<Result<_, _>>()?;
        Ok(Self { spec, entries })
    }

    pub fn from_elements(spec: FieldSpec, elements: &[FieldElement]) -> Result<Self, FieldError> {
        let mut entries = Vec::with_capacity(elements.len());
        for e in elements {
            if e.spec() != spec {
                return Err(FieldError::SpecMismatch { left: spec.modulus(), right: e.spec().modulus() });
            }
            entries.push(e.value());
        }
        Ok(Self { spec, entries })
    }

    pub(crate) fn from_raw(spec: FieldSpec, entries: Vec<u32>) -> Self {
        debug_assert!(entries.iter().all(|&v| v < spec.modulus()));
        Self { spec, entries }
    }

    pub fn sample(spec: FieldSpec, len: usize, stream: &mut RandomStream) -> Self {
        let entries = (0..len).map(|_| spec.sample_raw(stream)).collect();
        Self { spec, entries }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> FieldElement {
        self.spec.element(self.entries[i] as u64)
    }

    pub fn values(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_field(self.spec, other.spec)?;
        if self.len() != other.len() {
            return Err(LinalgError::Dimension(format!("vector lengths {} and {}", self.len(), other.len())));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.spec.add_raw(a, b)).collect();
        Ok(Self { spec: self.spec, entries })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<(), LinalgError> {
        check_field(self.spec, other.spec)?;
        if self.len() != other.len() {
            return Err(LinalgError::Dimension(format!("vector lengths {} and {}", self.len(), other.len())));
        }
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = self.spec.add_raw(*a, b);
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        Self { spec: self.spec, entries: self.entries.iter().map(|&a| self.spec.neg_raw(a)).collect() }
    }

    /// Contiguous sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self { spec: self.spec, entries: self.entries[start..start + len].to_vec() }
    }

    pub fn concat<'a>(spec: FieldSpec, parts: impl IntoIterator<Item = &'a FieldVector>) -> Self {
        let mut entries = Vec::new();
        for p in parts {
            debug_assert_eq!(p.spec, spec);
            entries.extend_from_slice(&p.entries);
        }
        Self { spec, entries }
    }

    /// Copy padded with zeros to `len` (no-op if already that long).
    pub fn padded(&self, len: usize) -> Result<Self, LinalgError> {
        if self.len() > len {
            return Err(LinalgError::Dimension(format!("vector of length {} exceeds {}", self.len(), len)));
        }
        let mut entries = self.entries.clone();
        entries.resize(len, 0);
        Ok(Self { spec: self.spec, entries })
    }
}

impl Serialize for FieldVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

/// A dense row-major matrix over `F_q`.
///
/// JSON form: `{"rows": r, "cols": c, "q": q, "entries": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct FieldMatrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    q: u64,
    entries: Vec<Vec<u64>>,
}

impl From<FieldMatrix> for MatrixRepr {
    fn from(m: FieldMatrix) -> Self {
        let entries = (0..m.rows).map(|r| m.row(r).iter().map(|&v| v as u64).collect()).collect();
        MatrixRepr { rows: m.rows, cols: m.cols, q: m.spec.modulus() as u64, entries }
    }
}

impl TryFrom<MatrixRepr> for FieldMatrix {
    type Error = LinalgError;

    fn try_from(repr: MatrixRepr) -> Result<Self, Self::Error> {
        let spec = FieldSpec::new(repr.q)?;
        if repr.entries.len() != repr.rows {
            return Err(LinalgError::Dimension(format!("declared {} rows, found {}", repr.rows, repr.entries.len())));
        }
        let mut entries = Vec::with_capacity(repr.rows * repr.cols);
        for (i, row) in repr.entries.iter().enumerate() {
            if row.len() != repr.cols {
                return Err(LinalgError::Dimension(format!("row {i} has {} entries, expected {}", row.len(), repr.cols)));
            }
            for &v in row {
                entries.push(spec.canonical(v)?.value());
            }
        }
        Ok(FieldMatrix { spec, rows: repr.rows, cols: repr.cols, entries })
    }
}

impl FieldMatrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        Self { spec, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Builds from signed integer rows, reducing every entry mod `q`.
    pub fn from_rows(spec: FieldSpec, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::Dimension(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            entries.extend(row.iter().map(|&v| spec.element_signed(v).value()));
        }
        Ok(Self { spec, rows: rows.len(), cols, entries })
    }

    pub fn sample(spec: FieldSpec, rows: usize, cols: usize, stream: &mut RandomStream) -> Self {
        let entries = (0..rows * cols).map(|_| spec.sample_raw(stream)).collect();
        Self { spec, rows, cols, entries }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.spec.element(self.entries[r * self.cols + c] as u64)
    }

    pub fn set(&mut self, r: usize, c: usize, value: FieldElement) -> Result<(), LinalgError> {
        check_field(self.spec, value.spec())?;
        self.entries[r * self.cols + c] = value.value();
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.spec, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.entries[r * self.cols + c];
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        Self {
            spec: self.spec,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&a| self.spec.neg_raw(a)).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_field(self.spec, other.spec)?;
        if self.shape() != other.shape() {
            return Err(LinalgError::Dimension(format!("{:?} + {:?}", self.shape(), other.shape())));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.spec.add_raw(a, b)).collect();
        Ok(Self { spec: self.spec, rows: self.rows, cols: self.cols, entries })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        check_field(self.spec, other.spec)?;
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!("{:?} * {:?}", self.shape(), other.shape())));
        }
        let q = self.spec.modulus() as u64;
        let mut out = Self::zeros(self.spec, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.entries[r * self.cols + k] as u64 * other.entries[k * other.cols + c] as u64) % q;
                }
                out.entries[r * other.cols + c] = acc as u32;
            }
        }
        Ok(out)
    }

    /// Exact product `M v`.
    pub fn mat_vec(&self, v: &FieldVector) -> Result<FieldVector, LinalgError> {
        check_field(self.spec, v.spec())?;
        if self.cols != v.len() {
            return Err(LinalgError::Dimension(format!("{}x{} matrix times length-{} vector", self.rows, self.cols, v.len())));
        }
        let q = self.spec.modulus() as u64;
        let entries = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v.values())
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % q) as u32
            })
            .collect();
        Ok(FieldVector::from_raw(self.spec, entries))
    }

    /// Rank by Gauss-Jordan elimination on a copy.
    ///
    /// Pivots are taken column by column (left to right), using the first row at or
    /// below the current pivot row whose entry is nonzero.
    pub fn rank(&self) -> usize {
        let (rows, cols) = (self.rows, self.cols);
        let spec = self.spec;
        let q = spec.modulus() as u64;
        let mut m = self.entries.clone();
        let mut pivot_row = 0;
        for c in 0..cols {
            if pivot_row == rows {
                break;
            }
            let Some(p) = (pivot_row..rows).find(|&r| m[r * cols + c] != 0) else {
                continue;
            };
            if p != pivot_row {
                for k in 0..cols {
                    m.swap(p * cols + k, pivot_row * cols + k);
                }
            }
            let inv = spec.inv_raw(m[pivot_row * cols + c]).expect("pivot is nonzero") as u64;
            for k in c..cols {
                let idx = pivot_row * cols + k;
                m[idx] = (m[idx] as u64 * inv % q) as u32;
            }
            for r in 0..rows {
                if r == pivot_row {
                    continue;
                }
                let factor = m[r * cols + c];
                if factor == 0 {
                    continue;
                }
                let minus = q - factor as u64;
                for k in c..cols {
                    let pv = m[pivot_row * cols + k] as u64;
                    if pv != 0 {
                        let idx = r * cols + k;
                        m[idx] = ((m[idx] as u64 + minus * pv) % q) as u32;
                    }
                }
            }
            pivot_row += 1;
        }
        pivot_row
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        check_field(self.spec, other.spec)?;
        if self.cols != other.cols {
            return Err(LinalgError::Dimension(format!("vstack of {} and {} columns", self.cols, other.cols)));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(Self { spec: self.spec, rows: self.rows + other.rows, cols: self.cols, entries })
    }
}

/// Assembles a block matrix from a grid of optional blocks.
///
/// `row_heights[i]` and `col_widths[j]` declare the block grid; every present block
/// at `(i, j)` must be exactly `row_heights[i] x col_widths[j]`, and absent blocks
/// are zero.
pub fn stack_blocks(
    spec: FieldSpec,
    row_heights: &[usize],
    col_widths: &[usize],
    grid: &[Vec<Option<&FieldMatrix>>],
) -> Result<FieldMatrix, LinalgError> {
    if grid.len() != row_heights.len() {
        return Err(LinalgError::RaggedLayout(format!("{} block rows declared, {} given", row_heights.len(), grid.len())));
    }
    let rows: usize = row_heights.iter().sum();
    let cols: usize = col_widths.iter().sum();
    let mut out = FieldMatrix::zeros(spec, rows, cols);
    let mut r0 = 0;
    for (i, grid_row) in grid.iter().enumerate() {
        if grid_row.len() != col_widths.len() {
            return Err(LinalgError::RaggedLayout(format!(
                "block row {i} has {} cells, expected {}",
                grid_row.len(),
                col_widths.len()
            )));
        }
        let mut c0 = 0;
        for (j, cell) in grid_row.iter().enumerate() {
            if let Some(block) = cell {
                check_field(spec, block.spec)?;
                if block.shape() != (row_heights[i], col_widths[j]) {
                    return Err(LinalgError::RaggedLayout(format!(
                        "block ({i},{j}) is {:?}, expected {:?}",
                        block.shape(),
                        (row_heights[i], col_widths[j])
                    )));
                }
                for r in 0..block.rows {
                    let dst = (r0 + r) * cols + c0;
                    out.entries[dst..dst + block.cols].copy_from_slice(block.row(r));
                }
            }
            c0 += col_widths[j];
        }
        r0 += row_heights[i];
    }
    Ok(out)
}
