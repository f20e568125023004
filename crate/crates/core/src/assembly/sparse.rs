//! Compressed sparse row matrices assembled from triplets.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("triplet ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    OutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
}

/// Sparse matrix in CSR form. Column indices are sorted and unique within
/// each row, so equal inputs always produce identical storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Builds a matrix from (row, col, value) triplets, summing duplicates in
    /// input order.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let mut count = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::OutOfBounds { row: r, col: c, nrows, ncols });
            }
            count[r + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..nrows {
            let row = &mut bucket[count[r]..count[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = row[i].1;
                i += 1;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    /// Assembles a block matrix; `None` marks a zero block. Every block row
    /// must have a consistent height and every block column a consistent width.
    pub fn from_blocks(blocks: &[Vec<Option<&SparseOperator>>]) -> Result<Self, SparseError> {
        let brows = blocks.len();
        let bcols = blocks.first().map_or(0, Vec::len);
        let mut heights = vec![None; brows];
        let mut widths = vec![None; bcols];
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != bcols {
                return Err(SparseError::Shape("ragged block rows".into()));
            }
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    for (slot, v) in [(&mut heights[bi], b.nrows), (&mut widths[bj], b.ncols)] {
                        match slot {
                            Some(x) if *x != v => {
                                return Err(SparseError::Shape(format!("block ({bi}, {bj}) has inconsistent size")))
                            }
                            _ => *slot = Some(v),
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .enumerate()
            .map(|(i, h)| h.ok_or_else(|| SparseError::Shape(format!("block row {i} is empty"))))
            .collect::<Result<_, _>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .enumerate()
            .map(|(j, w)| w.ok_or_else(|| SparseError::Shape(format!("block column {j} is empty"))))
            .collect::<Result<_, _>>()?;
        let col_off: Vec<usize> = std::iter::once(0)
            .chain(widths.iter().scan(0, |s, &w| {
                *s += w;
                Some(*s)
            }))
            .collect();
        let nrows: usize = heights.iter().sum();
        let ncols = col_off[bcols];
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (bi, row) in blocks.iter().enumerate() {
            for r in 0..heights[bi] {
                for (bj, blk) in row.iter().enumerate() {
                    if let Some(b) = blk {
                        for p in b.row_ptr[r]..b.row_ptr[r + 1] {
                            col_idx.push(b.col_idx[p] + col_off[bj]);
                            values.push(b.values[p]);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `r` as (column, value) pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mat-vec dimension mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// A + s B over the union of both sparsity patterns.
    pub fn add_scaled(&self, s: f64, other: &SparseOperator) -> Result<Self, SparseError> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(SparseError::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        row_ptr.push(0);
        for r in 0..self.nrows {
            let (mut a, ae) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut b, be) = (other.row_ptr[r], other.row_ptr[r + 1]);
            while a < ae || b < be {
                let ca = if a < ae { self.col_idx[a] } else { usize::MAX };
                let cb = if b < be { other.col_idx[b] } else { usize::MAX };
                if ca < cb {
                    col_idx.push(ca);
                    values.push(self.values[a]);
                    a += 1;
                } else if cb < ca {
                    col_idx.push(cb);
                    values.push(s * other.values[b]);
                    b += 1;
                } else {
                    col_idx.push(ca);
                    values.push(self.values[a] + s * other.values[b]);
                    a += 1;
                    b += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }

    pub fn add(&self, other: &SparseOperator) -> Result<Self, SparseError> {
        self.add_scaled(1.0, other)
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<Self, SparseError> {
        self.add_scaled(-1.0, other)
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                trip.push((c, r, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &trip).expect("transposed indices are in range")
    }

    /// Triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// Largest absolute entry of A - B.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        self.sub(other)
            .map(|d| d.values.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            .unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Copy in faer's compressed-column format.
    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        let trip: Vec<_> = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .expect("CSR entries are unique and in range")
    }
}
