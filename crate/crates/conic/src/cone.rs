//! Cone descriptors and Euclidean projections.
//!
//! Slack rows are laid out as: zero cone, nonnegative orthant, then one block
//! per PSD cone. A PSD block of side `d` occupies `d(d+1)/2` rows holding the
//! upper triangle in row-major order, off-diagonal entries scaled by `√2` so
//! that the Euclidean inner product on rows equals the trace inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::SQRT_2;

/// Cone product `{0}^zero × R_+^nonneg × S_+^{d_1} × ...`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConeSpec {
    pub zero: usize,
    pub nonneg: usize,
    pub psd: Vec<usize>,
}

pub fn svec_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Row offset of entry `(i, j)` (either order) within an svec block of side `d`.
pub fn svec_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i contribute d, d-1, ..., d-i+1 entries
    i * d - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Unpacks an svec block into a dense symmetric matrix.
pub fn smat(v: &[f64], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Packs the upper triangle of a symmetric matrix.
pub fn svec(m: &DMatrix<f64>, out: &mut [f64]) {
    let d = m.nrows();
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            out[k] = if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)]) * SQRT_2
            };
            k += 1;
        }
    }
}

/// Projects an svec block onto the PSD cone in place; returns the smallest
/// eigenvalue before projection.
pub fn project_psd(v: &mut [f64], d: usize) -> f64 {
    if d == 1 {
        let m = v[0];
        v[0] = m.max(0.0);
        return m;
    }
    let m = smat(v, d);
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return min;
    }
    let mut acc = DMatrix::<f64>::zeros(d, d);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let u = eig.eigenvectors.column(k);
            acc.ger(lam, &u, &u, 1.0);
        }
    }
    svec(&acc, v);
    min
}

/// Smallest eigenvalue of an svec block.
pub fn min_eigenvalue(v: &[f64], d: usize) -> f64 {
    if d == 1 {
        return v[0];
    }
    SymmetricEigen::new(smat(v, d))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl ConeSpec {
    pub fn total_rows(&self) -> usize {
        self.zero + self.nonneg + self.psd.iter().map(|&d| svec_len(d)).sum::<usize>()
    }

    /// Row ranges `(start, side)` of the PSD blocks.
    pub fn psd_blocks(&self) -> Vec<(usize, usize)> {
        let mut start = self.zero + self.nonneg;
        self.psd
            .iter()
            .map(|&d| {
                let s = start;
                start += svec_len(d);
                (s, d)
            })
            .collect()
    }

    /// Euclidean projection onto `K`.
    pub fn project(&self, v: &mut [f64]) {
        v[..self.zero].iter_mut().for_each(|x| *x = 0.0);
        v[self.zero..self.zero + self.nonneg]
            .iter_mut()
            .for_each(|x| *x = x.max(0.0));
        for (start, d) in self.psd_blocks() {
            project_psd(&mut v[start..start + svec_len(d)], d);
        }
    }

    /// Euclidean projection onto the dual cone `K*` (free on the zero rows).
    pub fn project_dual(&self, v: &mut [f64]) {
        v[self.zero..self.zero + self.nonneg]
            .iter_mut()
            .for_each(|x| *x = x.max(0.0));
        for (start, d) in self.psd_blocks() {
            project_psd(&mut v[start..start + svec_len(d)], d);
        }
    }

    /// Distance (∞-norm) from `v` to `K`.
    pub fn dist(&self, v: &[f64]) -> f64 {
        let mut p = v.to_vec();
        self.project(&mut p);
        p.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Distance (∞-norm) from `v` to `K*`.
    pub fn dist_dual(&self, v: &[f64]) -> f64 {
        let mut p = v.to_vec();
        self.project_dual(&mut p);
        p.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Groups of rows that must share one scaling factor to keep the cone
    /// invariant under diagonal row scaling.
    pub(crate) fn scaling_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups: Vec<std::ops::Range<usize>> =
            (0..self.zero + self.nonneg).map(|r| r..r + 1).collect();
        for (start, d) in self.psd_blocks() {
            groups.push(start..start + svec_len(d));
        }
        groups
    }
}
