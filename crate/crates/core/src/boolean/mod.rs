//! Boolean functions on up to six bits.
//!
//! Inputs `x = (x1, ..., xn)` index the truth table with `x1` as the most
//! significant bit, and the id is the table read as a big-endian integer:
//! table position 0 is the highest bit of the id.

mod degree;
mod npn;
mod oracle;
mod poly;

pub use degree::{approx_degree, approx_error, degree};
pub use npn::{apply_npn, npn_canonical, npn_classes, NpnTransform};
pub use oracle::{phase_oracle_choi, phase_oracle_vector};
pub use poly::{multilinear_interpolate, MultilinearPoly};

use crate::error::{Error, Result};

pub const MAX_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<bool>,
}

impl BooleanFunction {
    pub fn from_table(n: usize, table: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_BITS {
            return Err(Error::Invalid(format!("bit count {n} outside 1..={MAX_BITS}")));
        }
        if table.len() != 1 << n {
            return Err(Error::Invalid(format!("table of length {} for n = {n}", table.len())));
        }
        Ok(Self { n, table })
    }

    pub fn from_id(n: usize, id: u64) -> Result<Self> {
        if n == 0 || n > MAX_BITS {
            return Err(Error::Invalid(format!("bit count {n} outside 1..={MAX_BITS}")));
        }
        let len = 1usize << n;
        if len < 64 && id >> len != 0 {
            return Err(Error::Invalid(format!("id {id} is not below 2^{len}")));
        }
        let table = (0..len).map(|p| (id >> (len - 1 - p)) & 1 == 1).collect();
        Ok(Self { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let table = (0..1usize << n).map(|p| f(&input_bits(n, p))).collect();
        Self::from_table(n, table)
    }

    pub fn constant(n: usize, v: bool) -> Result<Self> {
        Self::from_fn(n, |_| v)
    }

    pub fn and(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x.iter().all(|&b| b))
    }

    pub fn or(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x.iter().any(|&b| b))
    }

    pub fn parity(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x.iter().filter(|&&b| b).count() % 2 == 1)
    }

    /// The dictator `x_i` (1-based).
    pub fn variable(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::Invalid(format!("variable x{i} out of range for n = {n}")));
        }
        Self::from_fn(n, |x| x[i - 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn id(&self) -> u64 {
        self.table.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.table[input_index(x)]
    }

    pub fn eval_index(&self, p: usize) -> bool {
        self.table[p]
    }

    /// Table positions where `f = v`.
    pub fn preimage(&self, v: bool) -> Vec<usize> {
        (0..self.table.len()).filter(|&p| self.table[p] == v).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&b| b == self.table[0])
    }
}

/// Bits of table position `p`, `x1` first.
pub fn input_bits(n: usize, p: usize) -> Vec<bool> {
    (0..n).map(|i| (p >> (n - 1 - i)) & 1 == 1).collect()
}

pub fn input_index(x: &[bool]) -> usize {
    x.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}
