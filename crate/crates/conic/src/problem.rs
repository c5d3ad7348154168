use crate::cone::{svec_len, ConeSpec};
use crate::error::{ConicError, Result};
use crate::sparse::SparseMatrix;

/// Shape of a named slice of the variable vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarShape {
    Scalar,
    Vector(usize),
    /// Symmetric matrix of side `d` stored as an svec.
    Sym(usize),
}

impl VarShape {
    pub fn len(&self) -> usize {
        match *self {
            VarShape::Scalar => 1,
            VarShape::Vector(k) => k,
            VarShape::Sym(d) => svec_len(d),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBlock {
    pub name: String,
    pub offset: usize,
    pub shape: VarShape,
}

/// `min cᵀx + offset  s.t.  Ax + s = b,  s ∈ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub cones: ConeSpec,
    pub objective_offset: f64,
    pub vars: Vec<VarBlock>,
}

impl ConicProblem {
    pub fn new(c: Vec<f64>, a: SparseMatrix, b: Vec<f64>, cones: ConeSpec) -> Result<Self> {
        let p = Self {
            c,
            a,
            b,
            cones,
            objective_offset: 0.0,
            vars: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.ncols() != self.c.len() {
            return Err(ConicError::DimensionMismatch(format!(
                "A has {} columns but c has length {}",
                self.a.ncols(),
                self.c.len()
            )));
        }
        if self.a.nrows() != self.b.len() {
            return Err(ConicError::DimensionMismatch(format!(
                "A has {} rows but b has length {}",
                self.a.nrows(),
                self.b.len()
            )));
        }
        if let Some(k) = self.cones.psd.iter().position(|&d| d == 0) {
            return Err(ConicError::InvalidCone(format!("psd block {k} has side 0")));
        }
        let rows = self.cones.total_rows();
        if rows != self.b.len() {
            return Err(ConicError::InvalidCone(format!(
                "cones cover {rows} rows but the problem has {}",
                self.b.len()
            )));
        }
        for v in &self.vars {
            if v.offset + v.shape.len() > self.c.len() {
                return Err(ConicError::DimensionMismatch(format!(
                    "variable block '{}' overruns the variable vector",
                    v.name
                )));
            }
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite())
            || self.a.triplets().any(|(_, _, v)| !v.is_finite())
        {
            return Err(ConicError::NumericalBreakdown("non-finite problem data".into()));
        }
        Ok(())
    }

    pub fn var(&self, name: &str) -> Option<&VarBlock> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.objective_offset
    }
}
