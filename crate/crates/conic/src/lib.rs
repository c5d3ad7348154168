//! First-order conic solver for problems over products of the zero cone, the
//! nonnegative orthant and PSD cones, with a plain-text interchange format.

pub mod cone;
pub mod cpi;
pub mod error;
pub mod problem;
pub mod solver;
pub mod sparse;

pub use cone::{smat, svec, svec_index, svec_len, ConeSpec};
pub use cpi::{export_problem, import_problem};
pub use error::{ConicError, Result};
pub use problem::{ConicProblem, VarBlock, VarShape};
pub use solver::{solve, solve_warm, ConicSolution, Residuals, Settings, Status};
pub use sparse::SparseMatrix;
