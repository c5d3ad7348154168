use crate::error::{Error, Result};
use crate::linalg::{ChoiObject, SpaceLabel, C64};
use crate::process::TermList;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Closest fraction to `x` with denominator at most `max_den`, by continued
/// fraction expansion of the exact binary value.
pub fn rationalize(x: f64, max_den: u64) -> Result<Q> {
    let exact = Q::from_float(x).ok_or_else(|| Error::Invalid(format!("cannot rationalize {x}")))?;
    Ok(limit_denominator(&exact, &BigInt::from(max_den.max(1))))
}

/// How floats become fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// `round(x·M)/M`, except that values within `1e-9` of a fraction with
    /// denominator at most 1000 snap to it. A shared denominator keeps exact
    /// eliminations small.
    #[default]
    Grid,
    /// Best approximation with denominator at most `M`.
    ContinuedFraction,
}

const SNAP_DENOMINATOR: u64 = 1000;
const SNAP_TOLERANCE: f64 = 1e-9;

pub fn round_to(x: f64, max_den: u64, rounding: Rounding) -> Result<Q> {
    match rounding {
        Rounding::ContinuedFraction => rationalize(x, max_den),
        Rounding::Grid => {
            if x.is_finite() {
                let small = rationalize(x, SNAP_DENOMINATOR)?;
                if (to_f64(&small) - x).abs() <= SNAP_TOLERANCE {
                    return Ok(small);
                }
            }
            let m = max_den.max(1);
            let k = (x * m as f64).round();
            if !k.is_finite() || k.abs() > 9.0e15 {
                return Err(Error::Invalid(format!("cannot round {x} to a grid of 1/{m}")));
            }
            Ok(Q::new(BigInt::from(k as i64), BigInt::from(m)))
        }
    }
}

pub fn limit_denominator(v: &Q, max_den: &BigInt) -> Q {
    if v.denom() <= max_den {
        return v.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (v.numer().clone(), v.denom().clone());
    while !d.is_zero() {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
    }
    let k = (max_den - &q0) / &q1;
    let lower = Q::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let upper = Q::new(p1, q1);
    if (&upper - v).abs() <= (&lower - v).abs() {
        upper
    } else {
        lower
    }
}

/// Smallest multiple of `2^-bits` that is at least `x`.
pub fn dyadic_ceil(x: f64, bits: u32) -> Q {
    let scale = 2f64.powi(bits as i32);
    let k = (x * scale).ceil();
    Q::new(BigInt::from(k as i64), BigInt::from(2).pow(bits))
}

pub fn format_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::Invalid(format!("malformed rational '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Complex rational `(re, im)`.
pub type Entry = (Q, Q);

/// Sparse complex matrix with exact rational entries on labelled spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    labels: Vec<SpaceLabel>,
    dim: usize,
    entries: BTreeMap<(usize, usize), Entry>,
}

impl RationalMatrix {
    pub fn zeros(labels: Vec<SpaceLabel>) -> Self {
        let dim = labels.iter().map(|s| s.dim).product();
        Self {
            labels,
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(labels: Vec<SpaceLabel>) -> Self {
        let mut m = Self::zeros(labels);
        for i in 0..m.dim {
            m.entries.insert((i, i), (Q::one(), Q::zero()));
        }
        m
    }

    /// Entrywise rationalization of a matrix.
    pub fn from_choi(w: &ChoiObject, max_den: u64, rounding: Rounding) -> Result<Self> {
        let mut m = Self::zeros(w.spaces().to_vec());
        let d = m.dim;
        for (k, z) in w.data().iter().enumerate() {
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let e = (round_to(z.re, max_den, rounding)?, round_to(z.im, max_den, rounding)?);
            m.set(k / d, k % d, e);
        }
        Ok(m)
    }

    pub fn to_choi(&self) -> Result<ChoiObject> {
        let d = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for (&(r, c), (re, im)) in &self.entries {
            data[r * d + c] = C64::new(to_f64(re), to_f64(im));
        }
        ChoiObject::matrix(self.labels.clone(), data)
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Entry)> {
        self.entries.iter().map(|(&(r, c), e)| (r, c, e))
    }

    pub fn get(&self, r: usize, c: usize) -> Entry {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(|| (Q::zero(), Q::zero()))
    }

    /// Stores `e`, dropping it when zero.
    pub fn set(&mut self, r: usize, c: usize, e: Entry) {
        if e.0.is_zero() && e.1.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), e);
        }
    }

    fn accumulate(&mut self, r: usize, c: usize, re: &Q, im: &Q) {
        let slot = self.entries.entry((r, c)).or_insert_with(|| (Q::zero(), Q::zero()));
        slot.0 += re;
        slot.1 += im;
        if slot.0.is_zero() && slot.1.is_zero() {
            self.entries.remove(&(r, c));
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch("rational matrices on different spaces".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&(r, c), (re, im)) in &other.entries {
            out.accumulate(r, c, re, im);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zeros(self.labels.clone());
        if s.is_zero() {
            return out;
        }
        for (&k, (re, im)) in &self.entries {
            out.entries.insert(k, (re * s, im * s));
        }
        out
    }

    /// `(1 − μ) self + μ 1`.
    pub fn mix_identity(&self, mu: &Q) -> Self {
        let mut out = self.scale(&(Q::one() - mu));
        for i in 0..self.dim {
            out.accumulate(i, i, mu, &Q::zero());
        }
        out
    }

    pub fn add_identity(&self, t: &Q) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.accumulate(i, i, t, &Q::zero());
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.labels.clone());
        for (&(r, c), (re, im)) in &self.entries {
            out.entries.insert((c, r), (re.clone(), -im));
        }
        out
    }

    pub fn hermitian_part(&self) -> Self {
        let half = q(1, 2);
        self.add(&self.adjoint()).expect("same spaces").scale(&half)
    }

    pub fn is_hermitian(&self) -> bool {
        self.entries.iter().all(|(&(r, c), (re, im))| {
            let (tr, ti) = self.get(c, r);
            &tr == re && ti == -im
        })
    }

    /// Real part of the trace.
    pub fn trace(&self) -> Q {
        (0..self.dim)
            .filter_map(|i| self.entries.get(&(i, i)).map(|e| e.0.clone()))
            .fold(Q::zero(), |a, b| a + b)
    }

    /// Real part of `Tr[self · other]`.
    pub fn trace_product(&self, other: &Self) -> Result<Q> {
        self.check_same(other)?;
        let mut acc = Q::zero();
        for (&(r, c), (re, im)) in &self.entries {
            if let Some((ore, oim)) = other.entries.get(&(c, r)) {
                acc += re * ore - im * oim;
            }
        }
        Ok(acc)
    }

    /// Largest entry difference, in floating point, for diagnostics.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<(usize, usize)> = self.entries.keys().copied().collect();
        keys.extend(other.entries.keys().copied());
        keys.into_iter()
            .map(|(r, c)| {
                let (a, b) = (self.get(r, c), other.get(r, c));
                to_f64(&(&a.0 - &b.0)).abs().max(to_f64(&(&a.1 - &b.1)).abs())
            })
            .fold(0.0, f64::max)
    }

    fn strides(&self) -> Vec<usize> {
        let dims: Vec<usize> = self.labels.iter().map(|s| s.dim).collect();
        let mut s = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * dims[k + 1];
        }
        s
    }

    /// `R_S(X) = 1_S / d_S ⊗ Tr_S X` for the spaces at the given positions.
    pub fn trace_and_replace(&self, positions: &[usize]) -> Self {
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.labels[p].dim).collect();
        let d_s: usize = dims.iter().product();
        let mut groups: HashMap<(usize, usize), Entry> = HashMap::new();
        for (&(u, v), (re, im)) in &self.entries {
            let (mut bu, mut bv) = (u, v);
            let mut same = true;
            for &p in positions {
                let du = u / strides[p] % self.labels[p].dim;
                let dv = v / strides[p] % self.labels[p].dim;
                if du != dv {
                    same = false;
                    break;
                }
                bu -= du * strides[p];
                bv -= dv * strides[p];
            }
            if !same {
                continue;
            }
            let g = groups.entry((bu, bv)).or_insert_with(|| (Q::zero(), Q::zero()));
            g.0 += re;
            g.1 += im;
        }
        let mut offs = vec![0usize];
        for &p in positions {
            let st = strides[p];
            offs = offs
                .iter()
                .flat_map(|&o| (0..self.labels[p].dim).map(move |y| o + y * st))
                .collect();
        }
        let inv = q(1, d_s as i64);
        let mut out = Self::zeros(self.labels.clone());
        for ((bu, bv), (re, im)) in groups {
            if re.is_zero() && im.is_zero() {
                continue;
            }
            let e = (re * &inv, im * &inv);
            for &o in &offs {
                out.entries.insert((bu + o, bv + o), e.clone());
            }
        }
        out
    }

    /// `Σ c_S R_S(X)`, mask bits indexing the spaces of this matrix.
    pub fn apply_terms(&self, terms: &TermList) -> Self {
        let mut out = Self::zeros(self.labels.clone());
        for (mask, c) in terms.iter() {
            let positions: Vec<usize> = (0..self.labels.len()).filter(|i| mask >> i & 1 == 1).collect();
            let r = if positions.is_empty() {
                self.clone()
            } else {
                self.trace_and_replace(&positions)
            };
            let cq = Q::from_integer(BigInt::from(c));
            for (&(u, v), (re, im)) in &r.entries {
                out.accumulate(u, v, &(re * &cq), &(im * &cq));
            }
        }
        out
    }
}
