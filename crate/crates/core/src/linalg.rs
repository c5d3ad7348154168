//! Labeled tensor-space linear algebra.
//!
//! A [`ChoiObject`] is a dense complex matrix or vector whose basis is the
//! tensor product of its named spaces, the first space being the most
//! significant digit of the linear index. Operations match spaces by name.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub name: String,
    pub dim: usize,
}

impl SpaceLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiKind {
    Matrix,
    Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiObject {
    kind: ChoiKind,
    spaces: Vec<SpaceLabel>,
    data: Vec<C64>,
}

/// Mixed-radix digits of `idx` for the given dims (most significant first).
pub fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// For a permutation `perm` (new position `p` holds old space `perm[p]`),
/// returns `map[new_index] = old_index`.
fn permutation_map(old_dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = perm.iter().map(|&p| old_dims[p]).collect();
    let total: usize = old_dims.iter().product();
    let mut nd = vec![0; perm.len()];
    let mut od = vec![0; perm.len()];
    (0..total)
        .map(|i| {
            digits(i, &new_dims, &mut nd);
            for (p, &o) in perm.iter().enumerate() {
                od[o] = nd[p];
            }
            compose(&od, old_dims)
        })
        .collect()
}

/// Splits each full index into (kept, traced) sub-indices for a factor mask.
pub(crate) struct Split {
    pub kept_dim: usize,
    pub traced_dim: usize,
    /// `embed[k * traced_dim + t]` is the full index.
    pub embed: Vec<usize>,
}

impl Split {
    pub fn new(dims: &[usize], traced: &[bool]) -> Self {
        let kept_dims: Vec<usize> = dims.iter().zip(traced).filter(|(_, &t)| !t).map(|(d, _)| *d).collect();
        let tr_dims: Vec<usize> = dims.iter().zip(traced).filter(|(_, &t)| t).map(|(d, _)| *d).collect();
        let kept_dim: usize = kept_dims.iter().product();
        let traced_dim: usize = tr_dims.iter().product();
        let total: usize = dims.iter().product();
        let mut embed = vec![0; total];
        let mut dg = vec![0; dims.len()];
        for i in 0..total {
            digits(i, dims, &mut dg);
            let (mut k, mut t) = (0, 0);
            for (j, &d) in dg.iter().enumerate() {
                if traced[j] {
                    t = t * dims[j] + d;
                } else {
                    k = k * dims[j] + d;
                }
            }
            embed[k * traced_dim + t] = i;
        }
        Self {
            kept_dim,
            traced_dim,
            embed,
        }
    }
}

fn check_unique(spaces: &[SpaceLabel]) -> Result<()> {
    for (i, s) in spaces.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::DimensionMismatch(format!("space '{}' has dimension 0", s.name)));
        }
        if spaces[..i].iter().any(|t| t.name == s.name) {
            return Err(Error::SpaceCollision(s.name.clone()));
        }
    }
    Ok(())
}

impl ChoiObject {
    pub fn matrix(spaces: Vec<SpaceLabel>, data: Vec<C64>) -> Result<Self> {
        check_unique(&spaces)?;
        let d: usize = spaces.iter().map(|s| s.dim).product();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch(format!("{} entries for a {d}x{d} matrix", data.len())));
        }
        Ok(Self {
            kind: ChoiKind::Matrix,
            spaces,
            data,
        })
    }

    pub fn vector(spaces: Vec<SpaceLabel>, data: Vec<C64>) -> Result<Self> {
        check_unique(&spaces)?;
        let d: usize = spaces.iter().map(|s| s.dim).product();
        if data.len() != d {
            return Err(Error::DimensionMismatch(format!("{} entries for a vector of length {d}", data.len())));
        }
        Ok(Self {
            kind: ChoiKind::Vector,
            spaces,
            data,
        })
    }

    pub fn zeros(spaces: Vec<SpaceLabel>) -> Result<Self> {
        let d: usize = spaces.iter().map(|s| s.dim).product();
        Self::matrix(spaces, vec![C64::new(0.0, 0.0); d * d])
    }

    pub fn identity(spaces: Vec<SpaceLabel>) -> Result<Self> {
        let mut m = Self::zeros(spaces)?;
        let d = m.dim();
        for i in 0..d {
            m.data[i * d + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// The scalar `v` as a matrix on no spaces.
    pub fn scalar(v: C64) -> Self {
        Self {
            kind: ChoiKind::Matrix,
            spaces: vec![],
            data: vec![v],
        }
    }

    pub fn from_dmatrix(spaces: Vec<SpaceLabel>, m: &DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * m.ncols());
        for r in 0..d {
            for c in 0..m.ncols() {
                data.push(m[(r, c)]);
            }
        }
        Self::matrix(spaces, data)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        match self.kind {
            ChoiKind::Matrix => {
                let d = self.dim();
                DMatrix::from_row_slice(d, d, &self.data)
            }
            ChoiKind::Vector => DMatrix::from_column_slice(self.data.len(), 1, &self.data),
        }
    }

    pub fn kind(&self) -> ChoiKind {
        self.kind
    }

    pub fn spaces(&self) -> &[SpaceLabel] {
        &self.spaces
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim).product()
    }

    pub fn space_names(&self) -> Vec<&str> {
        self.spaces.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.spaces
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSpace(name.to_string()))
    }

    pub fn has_space(&self, name: &str) -> bool {
        self.spaces.iter().any(|s| s.name == name)
    }

    /// Entry `(r, c)` of a matrix.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    fn require_matrix(&self) -> Result<()> {
        match self.kind {
            ChoiKind::Matrix => Ok(()),
            ChoiKind::Vector => Err(Error::Invalid("operation needs a matrix".into())),
        }
    }

    /// Reorders spaces to the given name order.
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.spaces.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation lists {} spaces, object has {}",
                order.len(),
                self.spaces.len()
            )));
        }
        let perm: Vec<usize> = order.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let map = permutation_map(&self.dims(), &perm);
        let spaces: Vec<SpaceLabel> = perm.iter().map(|&p| self.spaces[p].clone()).collect();
        let data = match self.kind {
            ChoiKind::Vector => map.iter().map(|&o| self.data[o]).collect(),
            ChoiKind::Matrix => {
                let d = self.dim();
                let mut out = Vec::with_capacity(d * d);
                for &r in &map {
                    for &c in &map {
                        out.push(self.data[r * d + c]);
                    }
                }
                out
            }
        };
        Ok(Self {
            kind: self.kind,
            spaces,
            data,
        })
    }

    /// Renames a space, keeping its position.
    pub fn relabeled(&self, renames: &[(&str, &str)]) -> Result<Self> {
        let mut out = self.clone();
        for (from, to) in renames {
            let p = self.position(from)?;
            out.spaces[p].name = to.to_string();
        }
        check_unique(&out.spaces)?;
        Ok(out)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind {
            return Err(Error::Invalid("tensor of a matrix with a vector".into()));
        }
        let mut spaces = self.spaces.clone();
        spaces.extend(other.spaces.iter().cloned());
        check_unique(&spaces)?;
        let data = match self.kind {
            ChoiKind::Vector => {
                let mut v = Vec::with_capacity(self.data.len() * other.data.len());
                for a in &self.data {
                    for b in &other.data {
                        v.push(a * b);
                    }
                }
                v
            }
            ChoiKind::Matrix => {
                let (da, db) = (self.dim(), other.dim());
                let d = da * db;
                let mut v = vec![C64::new(0.0, 0.0); d * d];
                for r1 in 0..da {
                    for c1 in 0..da {
                        let a = self.data[r1 * da + c1];
                        if a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for r2 in 0..db {
                            let row = (r1 * db + r2) * d + c1 * db;
                            for c2 in 0..db {
                                v[row + c2] = a * other.data[r2 * db + c2];
                            }
                        }
                    }
                }
                v
            }
        };
        Ok(Self {
            kind: self.kind,
            spaces,
            data,
        })
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn partial_trace(&self, over: &[&str]) -> Result<Self> {
        self.require_matrix()?;
        let mut traced = vec![false; self.spaces.len()];
        for n in over {
            traced[self.position(n)?] = true;
        }
        let split = Split::new(&self.dims(), &traced);
        let d = self.dim();
        let (kd, td) = (split.kept_dim, split.traced_dim);
        let mut out = vec![C64::new(0.0, 0.0); kd * kd];
        for k1 in 0..kd {
            for k2 in 0..kd {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..td {
                    acc += self.data[split.embed[k1 * td + t] * d + split.embed[k2 * td + t]];
                }
                out[k1 * kd + k2] = acc;
            }
        }
        let spaces = self
            .spaces
            .iter()
            .zip(&traced)
            .filter(|(_, &t)| !t)
            .map(|(s, _)| s.clone())
            .collect();
        Ok(Self {
            kind: ChoiKind::Matrix,
            spaces,
            data: out,
        })
    }

    /// `(1^X / d_X) ⊗ Tr_X a`, re-embedded in the original space order.
    pub fn trace_and_replace(&self, x: &str) -> Result<Self> {
        self.trace_and_replace_many(&[x])
    }

    pub fn trace_and_replace_many(&self, xs: &[&str]) -> Result<Self> {
        self.require_matrix()?;
        let mut traced = vec![false; self.spaces.len()];
        for n in xs {
            traced[self.position(n)?] = true;
        }
        let split = Split::new(&self.dims(), &traced);
        let d = self.dim();
        let (kd, td) = (split.kept_dim, split.traced_dim);
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        let inv = 1.0 / td as f64;
        for k1 in 0..kd {
            for k2 in 0..kd {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..td {
                    acc += self.data[split.embed[k1 * td + t] * d + split.embed[k2 * td + t]];
                }
                acc *= inv;
                for t in 0..td {
                    out[split.embed[k1 * td + t] * d + split.embed[k2 * td + t]] = acc;
                }
            }
        }
        Ok(Self {
            kind: ChoiKind::Matrix,
            spaces: self.spaces.clone(),
            data: out,
        })
    }

    /// `a − trace_and_replace(a, x)`.
    pub fn one_minus(&self, x: &str) -> Result<Self> {
        let r = self.trace_and_replace(x)?;
        Ok(self.sub(&r))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            kind: self.kind,
            spaces: self.spaces.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise sum; operands must share the same space order.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.spaces, other.spaces, "add needs identical space order");
        Self {
            kind: self.kind,
            spaces: self.spaces.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.spaces, other.spaces, "sub needs identical space order");
        Self {
            kind: self.kind,
            spaces: self.spaces.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `other` permuted into this object's space order.
    pub fn aligned(&self, other: &Self) -> Result<Self> {
        other.permuted(&self.space_names())
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        Self {
            kind: self.kind,
            spaces: self.spaces.clone(),
            data,
        }
    }

    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                e = e.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        e
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.kind == ChoiKind::Matrix && self.hermiticity_error() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance after aligning `other` to this space order.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let o = self.aligned(other)?;
        Ok(self.sub(&o).frobenius_norm())
    }

    /// Hilbert–Schmidt inner product `Tr(A† B)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        let o = self.aligned(other)?;
        Ok(self.data.iter().zip(&o.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|v⟩⟨v|` for a vector.
    pub fn outer(&self) -> Result<Self> {
        if self.kind != ChoiKind::Vector {
            return Err(Error::Invalid("outer product needs a vector".into()));
        }
        let d = self.data.len();
        let mut data = Vec::with_capacity(d * d);
        for a in &self.data {
            for b in &self.data {
                data.push(a * b.conj());
            }
        }
        Ok(Self {
            kind: ChoiKind::Matrix,
            spaces: self.spaces.clone(),
            data,
        })
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = self.hermitian_part().to_dmatrix();
        nalgebra::SymmetricEigen::new(h).eigenvalues.min()
    }
}

/// Link product `a * b`, contracting spaces shared by name.
///
/// Output spaces are `a`'s unshared spaces followed by `b`'s.
pub fn link_product(a: &ChoiObject, b: &ChoiObject) -> Result<ChoiObject> {
    if a.kind != b.kind {
        return Err(Error::Invalid("link product of a matrix with a vector".into()));
    }
    let shared: Vec<&str> = a
        .space_names()
        .into_iter()
        .filter(|n| b.has_space(n))
        .collect();
    for n in &shared {
        let (da, db) = (a.spaces[a.position(n)?].dim, b.spaces[b.position(n)?].dim);
        if da != db {
            return Err(Error::DimensionMismatch(format!("shared space '{n}' has dims {da} and {db}")));
        }
    }
    let x: Vec<&str> = a.space_names().into_iter().filter(|n| !shared.contains(n)).collect();
    let z: Vec<&str> = b.space_names().into_iter().filter(|n| !shared.contains(n)).collect();
    let ap = a.permuted(&[x.clone(), shared.clone()].concat())?;
    let bp = b.permuted(&[shared.clone(), z.clone()].concat())?;
    let dx: usize = x.iter().map(|n| a.spaces[a.position(n).unwrap()].dim).product();
    let dy: usize = shared.iter().map(|n| a.spaces[a.position(n).unwrap()].dim).product();
    let dz: usize = z.iter().map(|n| b.spaces[b.position(n).unwrap()].dim).product();
    let mut spaces: Vec<SpaceLabel> = x.iter().map(|n| a.spaces[a.position(n).unwrap()].clone()).collect();
    spaces.extend(z.iter().map(|n| b.spaces[b.position(n).unwrap()].clone()));

    match a.kind {
        ChoiKind::Vector => {
            // (x, z) = Σ_y a(x, y) b(y, z)
            let am = DMatrix::from_row_slice(dx, dy, &ap.data);
            let bm = DMatrix::from_row_slice(dy, dz, &bp.data);
            let p = am * bm;
            let mut data = Vec::with_capacity(dx * dz);
            for r in 0..dx {
                for c in 0..dz {
                    data.push(p[(r, c)]);
                }
            }
            ChoiObject::vector(spaces, data)
        }
        ChoiKind::Matrix => {
            // (x,z),(x',z') = Σ_{y,y'} a[(x,y'),(x',y)] b[(y',z),(y,z')]
            let da = dx * dy;
            let db = dy * dz;
            let mut am = DMatrix::<C64>::zeros(dx * dx, dy * dy);
            for xi in 0..dx {
                for xj in 0..dx {
                    for y1 in 0..dy {
                        for y in 0..dy {
                            am[(xi * dx + xj, y1 * dy + y)] = ap.data[(xi * dy + y1) * da + xj * dy + y];
                        }
                    }
                }
            }
            let mut bm = DMatrix::<C64>::zeros(dy * dy, dz * dz);
            for y1 in 0..dy {
                for y in 0..dy {
                    for zi in 0..dz {
                        for zj in 0..dz {
                            bm[(y1 * dy + y, zi * dz + zj)] = bp.data[(y1 * dz + zi) * db + y * dz + zj];
                        }
                    }
                }
            }
            let p = am * bm;
            let d = dx * dz;
            let mut data = vec![C64::new(0.0, 0.0); d * d];
            for xi in 0..dx {
                for xj in 0..dx {
                    for zi in 0..dz {
                        for zj in 0..dz {
                            data[(xi * dz + zi) * d + xj * dz + zj] = p[(xi * dx + xj, zi * dz + zj)];
                        }
                    }
                }
            }
            ChoiObject::matrix(spaces, data)
        }
    }
}

/// `|U⟩⟩ = Σ_i |i⟩ ⊗ U|i⟩` on spaces `[in, out...]`.
pub fn choi_of_isometry(iso: &DMatrix<C64>, in_space: SpaceLabel, out_spaces: Vec<SpaceLabel>) -> Result<ChoiObject> {
    let dout: usize = out_spaces.iter().map(|s| s.dim).product();
    if iso.nrows() != dout || iso.ncols() != in_space.dim {
        return Err(Error::DimensionMismatch(format!(
            "isometry is {}x{}, spaces need {dout}x{}",
            iso.nrows(),
            iso.ncols(),
            in_space.dim
        )));
    }
    let dev = isometry_deviation(iso);
    if dev > HERMITIAN_TOL {
        return Err(Error::NonIsometry(dev));
    }
    choi_vector_unchecked(iso, in_space, out_spaces)
}

/// Choi vector of any linear map; no isometry check.
pub fn choi_vector_unchecked(m: &DMatrix<C64>, in_space: SpaceLabel, out_spaces: Vec<SpaceLabel>) -> Result<ChoiObject> {
    let (dout, din) = (m.nrows(), m.ncols());
    let mut data = Vec::with_capacity(din * dout);
    for i in 0..din {
        for o in 0..dout {
            data.push(m[(o, i)]);
        }
    }
    let mut spaces = vec![in_space];
    spaces.extend(out_spaces);
    ChoiObject::vector(spaces, data)
}

/// `‖V†V − 1‖_max`.
pub fn isometry_deviation(v: &DMatrix<C64>) -> f64 {
    let g = v.adjoint() * v;
    let mut e: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let t = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            e = e.max((g[(r, c)] - t).norm());
        }
    }
    e
}

/// `Tr_X[(ρ^T ⊗ 1) M]` with `X` the listed input spaces (in `state`'s tensor order).
pub fn apply_channel(choi: &ChoiObject, inputs: &[&str], state: &DMatrix<C64>) -> Result<ChoiObject> {
    choi.require_matrix()?;
    let din: usize = inputs
        .iter()
        .map(|n| choi.position(n).map(|p| choi.spaces[p].dim))
        .product::<Result<usize>>()?;
    if state.nrows() != din || state.ncols() != din {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, channel input has dimension {din}",
            state.nrows(),
            state.ncols()
        )));
    }
    let in_spaces: Vec<SpaceLabel> = inputs
        .iter()
        .map(|n| choi.spaces[choi.position(n).unwrap()].clone())
        .collect();
    // Tr_X[(ρ^T ⊗ 1) M] is exactly the link product ρ * M.
    let rho = ChoiObject::from_dmatrix(in_spaces, state)?;
    link_product(&rho, choi)
}

impl ChoiObject {
    /// Full transpose of a matrix.
    pub fn transposed(&self) -> Self {
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c];
            }
        }
        Self {
            kind: self.kind,
            spaces: self.spaces.clone(),
            data,
        }
    }

    /// Channel Choi matrix `|U⟩⟩⟨⟨U|` of a linear map.
    pub fn choi_matrix_of(m: &DMatrix<C64>, in_space: SpaceLabel, out_spaces: Vec<SpaceLabel>) -> Result<Self> {
        choi_vector_unchecked(m, in_space, out_spaces)?.outer()
    }
}

#[derive(Serialize, Deserialize)]
struct ChoiDump {
    spaces: Vec<SpaceLabel>,
    kind: ChoiKind,
    data: Vec<[f64; 2]>,
}

impl ChoiObject {
    /// `{spaces:[{name,dim}...], kind, data:[[re,im]...]}`
    pub fn to_json(&self) -> String {
        let dump = ChoiDump {
            spaces: self.spaces.clone(),
            kind: self.kind,
            data: self.data.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_string(&dump).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dump: ChoiDump = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
        let data = dump.data.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        match dump.kind {
            ChoiKind::Matrix => Self::matrix(dump.spaces, data),
            ChoiKind::Vector => Self::vector(dump.spaces, data),
        }
    }
}

/// Choi vector of a map from the tensor product of `ins` to that of `outs`,
/// spaces ordered `[ins..., outs...]`. No isometry check.
pub fn choi_vector_multi(m: &DMatrix<C64>, ins: Vec<SpaceLabel>, outs: Vec<SpaceLabel>) -> Result<ChoiObject> {
    let din: usize = ins.iter().map(|s| s.dim).product();
    let dout: usize = outs.iter().map(|s| s.dim).product();
    if m.nrows() != dout || m.ncols() != din {
        return Err(Error::DimensionMismatch(format!(
            "map is {}x{}, spaces need {dout}x{din}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut data = Vec::with_capacity(din * dout);
    for i in 0..din {
        for o in 0..dout {
            data.push(m[(o, i)]);
        }
    }
    let mut spaces = ins;
    spaces.extend(outs);
    ChoiObject::vector(spaces, data)
}

impl ChoiObject {
    /// `Tr_over |v⟩⟨v|` without forming the full outer product.
    pub fn outer_traced(&self, over: &[&str]) -> Result<Self> {
        if self.kind != ChoiKind::Vector {
            return Err(Error::Invalid("outer product needs a vector".into()));
        }
        let mut traced = vec![false; self.spaces.len()];
        for n in over {
            traced[self.position(n)?] = true;
        }
        let split = Split::new(&self.dims(), &traced);
        let (kd, td) = (split.kept_dim, split.traced_dim);
        let m = DMatrix::from_fn(kd, td, |k, t| self.data[split.embed[k * td + t]]);
        let g = &m * m.adjoint();
        let spaces = self
            .spaces
            .iter()
            .zip(&traced)
            .filter(|(_, &t)| !t)
            .map(|(s, _)| s.clone())
            .collect();
        Self::from_dmatrix(spaces, &g)
    }
}
