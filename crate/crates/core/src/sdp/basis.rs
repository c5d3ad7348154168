//! Real block-diagonal coordinates for superinstrument elements.
//!
//! Averaging over independent diagonal phases on every slot (conjugated on the
//! input, direct on the output) fixes each oracle and commutes with the
//! trace-and-replace maps, so the optimal `W^{[i]}` may be taken invariant.
//! Invariant matrices are block diagonal in the computational basis, one block
//! per assignment of a charge to each slot: neutral when `a_k = b_k`, else the
//! pair `(a_k, b_k)`. Complex conjugation is also a symmetry, so blocks are real.

use crate::error::{Error, Result};
use crate::linalg::{ChoiObject, SpaceLabel, C64};
use crate::process::{ProcessScenario, TermList};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use smq_conic::cone::min_eigenvalue;
use smq_conic::{smat, svec_index, svec_len, SparseMatrix};
use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Phase-twirl block structure.
    #[default]
    Twirl,
    /// A single dense real block.
    Full,
}

/// Largest matrix side accepted with [`Reduction::Full`].
pub const FULL_DIM_LIMIT: usize = 81;

#[derive(Debug, Clone)]
pub struct BlockBasis {
    labels: Vec<SpaceLabel>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    locate: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    entries: Vec<(usize, usize)>,
}

impl BlockBasis {
    pub fn new(scenario: &ProcessScenario, reduction: Reduction) -> Result<Self> {
        let labels = scenario.labels();
        let dims: Vec<usize> = labels.iter().map(|s| s.dim).collect();
        let dim: usize = dims.iter().product();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let blocks: Vec<Vec<usize>> = match reduction {
            Reduction::Full => {
                if dim > FULL_DIM_LIMIT {
                    return Err(Error::SizeCap(format!(
                        "dense parameterization of a {dim}-dimensional matrix (limit {FULL_DIM_LIMIT})"
                    )));
                }
                vec![(0..dim).collect()]
            }
            Reduction::Twirl => {
                let mut by_charge: BTreeMap<Vec<Option<(usize, usize)>>, Vec<usize>> = BTreeMap::new();
                for u in 0..dim {
                    let key = (1..=scenario.slots)
                        .map(|k| {
                            let (pi, po) = (2 * k - 1, 2 * k);
                            let a = u / strides[pi] % dims[pi];
                            let b = u / strides[po] % dims[po];
                            (a != b).then_some((a, b))
                        })
                        .collect();
                    by_charge.entry(key).or_default().push(u);
                }
                // larger blocks first keeps the PSD cones together
                let mut v: Vec<Vec<usize>> = by_charge.into_values().collect();
                v.sort_by(|a, b| b.len().cmp(&a.len()));
                v
            }
        };
        let mut locate = vec![(0, 0); dim];
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut entries = Vec::new();
        for (bi, blk) in blocks.iter().enumerate() {
            offsets.push(entries.len());
            for (p, &u) in blk.iter().enumerate() {
                locate[u] = (bi, p);
                for &v in &blk[p..] {
                    entries.push((u, v));
                }
            }
        }
        Ok(Self {
            labels,
            dims,
            strides,
            blocks,
            locate,
            offsets,
            entries,
        })
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    /// Side of the full matrix.
    pub fn dim(&self) -> usize {
        self.locate.len()
    }

    /// Number of real coordinates.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    /// Full-matrix position `(u, v)`, `u` earlier in its block, of coordinate `c`.
    pub fn entry(&self, c: usize) -> (usize, usize) {
        self.entries[c]
    }

    pub fn is_diagonal(&self, c: usize) -> bool {
        let (u, v) = self.entries[c];
        u == v
    }

    pub fn coord(&self, u: usize, v: usize) -> Option<usize> {
        let (bu, pu) = self.locate[u];
        let (bv, pv) = self.locate[v];
        (bu == bv).then(|| self.offsets[bu] + svec_index(self.blocks[bu].len(), pu, pv))
    }

    pub fn identity(&self) -> Vec<f64> {
        (0..self.len())
            .map(|c| if self.is_diagonal(c) { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn trace(&self, v: &[f64]) -> f64 {
        (0..self.len()).filter(|&c| self.is_diagonal(c)).map(|c| v[c]).sum()
    }

    pub fn block_matrix(&self, v: &[f64], b: usize) -> DMatrix<f64> {
        let d = self.blocks[b].len();
        smat(&v[self.offsets[b]..self.offsets[b] + svec_len(d)], d)
    }

    pub fn min_eigenvalue(&self, v: &[f64]) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let d = blk.len();
                min_eigenvalue(&v[self.offsets[b]..self.offsets[b] + svec_len(d)], d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_choi(&self, v: &[f64]) -> Result<ChoiObject> {
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for (c, &(u, w)) in self.entries.iter().enumerate() {
            if u == w {
                data[u * d + u] = C64::new(v[c], 0.0);
            } else {
                let x = C64::new(v[c] / SQRT_2, 0.0);
                data[u * d + w] = x;
                data[w * d + u] = x;
            }
        }
        ChoiObject::matrix(self.labels.clone(), data)
    }

    /// Coordinates of the real symmetric part of `w`, which must be in the
    /// canonical space order. Entries outside the blocks are discarded.
    pub fn from_choi(&self, w: &ChoiObject) -> Result<Vec<f64>> {
        if w.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "matrix dims {:?}, basis dims {:?}",
                w.dims(),
                self.dims
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|&(u, v)| {
                if u == v {
                    w.get(u, u).re
                } else {
                    SQRT_2 * 0.5 * (w.get(u, v).re + w.get(v, u).re)
                }
            })
            .collect())
    }

    /// Sparse coordinates of `|ψ⟩⟨ψ|` for a real vector `ψ` given by its
    /// nonzero entries; all of them must share a block.
    pub fn rank_one(&self, psi: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        for (i, &(u, a)) in psi.iter().enumerate() {
            for &(v, b) in &psi[i..] {
                let c = self
                    .coord(u, v)
                    .ok_or_else(|| Error::Invalid("vector is not supported on a single block".into()))?;
                let s = if u == v { 1.0 } else { SQRT_2 };
                out.push((c, s * a * b));
            }
        }
        out.sort_by_key(|e| e.0);
        Ok(out)
    }

    /// Matrix of `Σ c_S R_S` in these coordinates; mask bits index the
    /// scenario spaces.
    pub fn replace_operator(&self, terms: &TermList) -> Result<SparseMatrix> {
        struct Term {
            coeff: f64,
            spaces: Vec<usize>,
            offs: Vec<usize>,
        }
        let prepared: Vec<Term> = terms
            .iter()
            .map(|(mask, coeff)| {
                let spaces: Vec<usize> = (0..self.dims.len()).filter(|i| mask >> i & 1 == 1).collect();
                let mut offs = vec![0usize];
                for &s in &spaces {
                    offs = offs
                        .iter()
                        .flat_map(|&o| (0..self.dims[s]).map(move |y| o + y * self.strides[s]))
                        .collect();
                }
                Term {
                    coeff: coeff as f64 / offs.len() as f64,
                    spaces,
                    offs,
                }
            })
            .collect();
        let mut trip = Vec::new();
        let mut col: BTreeMap<usize, f64> = BTreeMap::new();
        for (c, &(u, v)) in self.entries.iter().enumerate() {
            col.clear();
            'terms: for t in &prepared {
                let (mut bu, mut bv) = (u, v);
                for &s in &t.spaces {
                    let du = u / self.strides[s] % self.dims[s];
                    let dv = v / self.strides[s] % self.dims[s];
                    if du != dv {
                        continue 'terms;
                    }
                    bu -= du * self.strides[s];
                    bv -= dv * self.strides[s];
                }
                for &o in &t.offs {
                    let target = self.coord(bu + o, bv + o).ok_or_else(|| {
                        Error::Invalid("trace-and-replace leaves the block structure".into())
                    })?;
                    *col.entry(target).or_insert(0.0) += t.coeff;
                }
            }
            for (&r, &val) in &col {
                if val.abs() > 1e-14 {
                    trip.push((r, c, val));
                }
            }
        }
        Ok(SparseMatrix::from_triplets(self.len(), self.len(), &trip))
    }
}
