//! Exact positive semidefiniteness by pivoted LDLᵀ over the rationals.
//!
//! Matrices are first split into the connected components of their sparsity
//! graph. Complex components are checked through the real symmetric embedding
//! `[[A, −B], [B, A]]` of `A + iB`.

use super::rational::{q, Entry, RationalMatrix, Q};
use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PsdVerdict {
    pub psd: bool,
    /// On failure, `z` (index, re, im) with `z† M z < 0`.
    pub witness: Option<Vec<(usize, Q, Q)>>,
}

/// Connected components of the union of the sparsity patterns, singletons
/// included.
pub fn components(mats: &[&RationalMatrix]) -> Vec<Vec<usize>> {
    let dim = mats.first().map_or(0, |m| m.dim());
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in mats {
        for (r, c, _) in m.entries() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Dense restriction of `m` to `comp`, as complex rationals.
pub fn restrict(m: &RationalMatrix, comp: &[usize]) -> Vec<Vec<Entry>> {
    let pos: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut out = vec![vec![(Q::zero(), Q::zero()); comp.len()]; comp.len()];
    for (r, c, e) in m.entries() {
        if let (Some(&a), Some(&b)) = (pos.get(&r), pos.get(&c)) {
            out[a][b] = e.clone();
        }
    }
    out
}

fn is_real(block: &[Vec<Entry>]) -> bool {
    block.iter().flatten().all(|e| e.1.is_zero())
}

/// Real symmetric matrix to factor, and whether it is the complex embedding.
fn real_form(block: Vec<Vec<Entry>>) -> (Vec<Vec<Q>>, bool) {
    let k = block.len();
    if is_real(&block) {
        return (block.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect(), false);
    }
    let mut out = vec![vec![Q::zero(); 2 * k]; 2 * k];
    for i in 0..k {
        for j in 0..k {
            let (a, b) = &block[i][j];
            out[i][j] = a.clone();
            out[i + k][j + k] = a.clone();
            out[i][j + k] = -b;
            out[i + k][j] = b.clone();
        }
    }
    (out, true)
}

/// Solves `A w = rhs` for a positive definite rational `A`.
fn solve_exact(mut a: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Vec<Q> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero()).expect("nonsingular");
        a.swap(k, p);
        rhs.swap(k, p);
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &a[k][k];
            for c in k..n {
                let t = &f * &a[k][c];
                a[r][c] -= t;
            }
            let t = &f * &rhs[k];
            rhs[r] -= t;
        }
    }
    let mut x = vec![Q::zero(); n];
    for k in (0..n).rev() {
        let mut s = rhs[k].clone();
        for c in k + 1..n {
            s -= &a[k][c] * &x[c];
        }
        x[k] = s / &a[k][k];
    }
    x
}

/// Verdict for a dense real symmetric matrix, with a real witness.
fn ldl_verdict(m: &[Vec<Q>]) -> Result<(), Vec<Q>> {
    let n = m.len();
    let mut s: Vec<Vec<Q>> = m.to_vec();
    let mut alive: Vec<bool> = vec![true; n];
    let mut pivots: Vec<usize> = Vec::new();
    loop {
        let rest: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        if rest.is_empty() {
            return Ok(());
        }
        if let Some(&i) = rest.iter().find(|&&i| s[i][i].is_negative()) {
            return Err(lift(m, &pivots, &[(i, Q::from_integer(1.into()))]));
        }
        // prefer the pivot with the smallest bit size to limit growth
        let pivot = rest
            .iter()
            .copied()
            .filter(|&i| s[i][i].is_positive())
            .min_by_key(|&i| s[i][i].numer().bits() + s[i][i].denom().bits());
        let Some(p) = pivot else {
            for &i in &rest {
                for &j in &rest {
                    if i != j && !s[i][j].is_zero() {
                        // zero diagonal with a nonzero coupling
                        let t = if s[i][j].is_positive() { q(-1, 1) } else { q(1, 1) };
                        return Err(lift(m, &pivots, &[(i, q(1, 1)), (j, t)]));
                    }
                }
            }
            return Ok(());
        };
        alive[p] = false;
        pivots.push(p);
        let others: Vec<usize> = rest.into_iter().filter(|&i| i != p).collect();
        let inv = Q::from_integer(1.into()) / &s[p][p];
        let col: Vec<Q> = others.iter().map(|&i| s[i][p].clone()).collect();
        for (a, &i) in others.iter().enumerate() {
            if col[a].is_zero() {
                continue;
            }
            let fi = &col[a] * &inv;
            for (b, &j) in others.iter().enumerate() {
                if col[b].is_zero() {
                    continue;
                }
                let t = &fi * &col[b];
                s[i][j] -= t;
            }
        }
    }
}

/// Extends `z` on the remaining indices to a full vector `v` with
/// `vᵀ M v = zᵀ S z`, `S` the Schur complement after eliminating `pivots`.
fn lift(m: &[Vec<Q>], pivots: &[usize], z: &[(usize, Q)]) -> Vec<Q> {
    let n = m.len();
    let mut v = vec![Q::zero(); n];
    for (i, x) in z {
        v[*i] = x.clone();
    }
    if !pivots.is_empty() {
        let a: Vec<Vec<Q>> = pivots
            .iter()
            .map(|&i| pivots.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        let rhs: Vec<Q> = pivots
            .iter()
            .map(|&i| {
                -z.iter()
                    .fold(Q::zero(), |acc, (j, x)| acc + &m[i][*j] * x)
            })
            .collect();
        for (k, w) in solve_exact(a, rhs).into_iter().enumerate() {
            v[pivots[k]] = w;
        }
    }
    v
}

/// Exact verdict on a Hermitian rational matrix.
pub fn exact_psd_check(m: &RationalMatrix) -> PsdVerdict {
    for comp in components(&[m]) {
        if let Err(w) = check_component(m, &comp) {
            return PsdVerdict {
                psd: false,
                witness: Some(w),
            };
        }
    }
    PsdVerdict {
        psd: true,
        witness: None,
    }
}

pub(crate) fn check_component(m: &RationalMatrix, comp: &[usize]) -> Result<(), Vec<(usize, Q, Q)>> {
    if comp.len() == 1 {
        let (re, _) = m.get(comp[0], comp[0]);
        return if re.is_negative() {
            Err(vec![(comp[0], q(1, 1), Q::zero())])
        } else {
            Ok(())
        };
    }
    let (real, embedded) = real_form(restrict(m, comp));
    ldl_verdict(&real).map_err(|v| {
        let k = comp.len();
        (0..k)
            .map(|a| {
                let im = if embedded { v[a + k].clone() } else { Q::zero() };
                (comp[a], v[a].clone(), im)
            })
            .filter(|(_, re, im)| !re.is_zero() || !im.is_zero())
            .collect()
    })
}

/// `z† M z` for a sparse complex vector, real part.
pub fn quadratic_form(m: &RationalMatrix, z: &[(usize, Q, Q)]) -> Q {
    let mut acc = Q::zero();
    for (i, zr, zi) in z {
        for (j, wr, wi) in z {
            let (mr, mi) = m.get(*i, *j);
            // conj(z_i) M_ij z_j
            let ar = zr * &mr + zi * &mi;
            let ai = zr * &mi - zi * &mr;
            acc += &ar * wr - &ai * wi;
        }
    }
    acc
}

/// Float copy of a component in its real form, for guiding searches.
pub fn float_component(m: &RationalMatrix, comp: &[usize]) -> DMatrix<f64> {
    let (real, _) = real_form(restrict(m, comp));
    let n = real.len();
    DMatrix::from_fn(n, n, |i, j| super::rational::to_f64(&real[i][j]))
}

pub fn float_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Affine family `Σ_k t_k M_k` restricted to the joint components of its
/// terms, with float copies for searching and exact checks for verdicts.
pub struct Pencil<'a> {
    terms: Vec<&'a RationalMatrix>,
    comps: Vec<Vec<usize>>,
    floats: Vec<Vec<DMatrix<f64>>>,
}

impl<'a> Pencil<'a> {
    /// The identity is implicit and always available as the last term.
    pub fn new(terms: Vec<&'a RationalMatrix>) -> Self {
        let comps = components(&terms);
        let floats = comps
            .iter()
            .map(|c| terms.iter().map(|m| float_component(m, c)).collect())
            .collect();
        Self { terms, comps, floats }
    }

    /// Smallest eigenvalue of `Σ t_k M_k + s·1` in floating point.
    pub fn min_eig(&self, t: &[f64], s: f64) -> f64 {
        self.floats
            .iter()
            .map(|fl| {
                let n = fl[0].nrows();
                let mut acc = DMatrix::<f64>::identity(n, n) * s;
                for (m, &tk) in fl.iter().zip(t) {
                    if tk != 0.0 {
                        acc += m * tk;
                    }
                }
                float_min_eigenvalue(&acc)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn combine(&self, t: &[Q], s: &Q) -> RationalMatrix {
        let mut acc = RationalMatrix::zeros(self.terms[0].labels().to_vec()).add_identity(s);
        for (m, tk) in self.terms.iter().zip(t) {
            if !tk.is_zero() {
                acc = acc.add(&m.scale(tk)).expect("same spaces");
            }
        }
        acc
    }

    /// Exact verdict for `Σ t_k M_k + s·1`.
    pub fn is_psd(&self, t: &[Q], s: &Q) -> bool {
        let m = self.combine(t, s);
        self.comps.iter().all(|c| check_component(&m, c).is_ok())
    }
}
