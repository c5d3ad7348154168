//! Compressed sparse column storage for the constraint operator.

/// Column-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped; rows within each column come out sorted.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                vals.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            vals,
        };
        m.prune_zeros();
        m
    }

    fn prune_zeros(&mut self) {
        if self.vals.iter().all(|v| *v != 0.0) {
            return;
        }
        let mut col_ptr = vec![0usize; self.ncols + 1];
        let mut row_idx = Vec::with_capacity(self.row_idx.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if self.vals[k] != 0.0 {
                    row_idx.push(self.row_idx[k]);
                    vals.push(self.vals[k]);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        self.col_ptr = col_ptr;
        self.row_idx = row_idx;
        self.vals = vals;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.vals[k]))
        })
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], self.vals[k]))
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.vals[k] * xc;
            }
        }
    }

    /// `y = Aᵀ x`
    pub fn mul_t_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for c in 0..self.ncols {
            let mut acc = 0.0;
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.vals[k] * x[self.row_idx[k]];
            }
            y[c] = acc;
        }
    }

    /// Scales rows by `d` and columns by `e` in place: `A <- diag(d) A diag(e)`.
    pub fn scale(&mut self, d: &[f64], e: &[f64]) {
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                self.vals[k] *= d[self.row_idx[k]] * e[c];
            }
        }
    }

    pub fn col_inf_norms(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|c| {
                self.column(c)
                    .map(|(_, v)| v.abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn row_inf_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.nrows];
        for (r, _, v) in self.triplets() {
            out[r] = out[r].max(v.abs());
        }
        out
    }

    /// Row-compressed view: for each row, the `(col, value)` entries.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for (r, c, v) in self.triplets() {
            rows[r].push((c, v));
        }
        rows
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }
}
