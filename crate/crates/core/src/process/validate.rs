use super::{qc_feasibility, ProcessClass, ProcessMatrix, SubspaceProjector};
use crate::error::Result;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub class: ProcessClass,
    pub valid: bool,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    /// `‖W − Π_L(W)‖_F` (FO and Gen only).
    pub subspace_residual: Option<f64>,
    /// Smallest uniform PSD shift making the QC conditions feasible.
    pub qc_violation: Option<f64>,
    /// Names of the failed checks or linear conditions.
    pub violated: Vec<String>,
}

pub fn is_valid_process(pm: &ProcessMatrix, class: ProcessClass, tol: f64) -> Result<ValidityReport> {
    let w = &pm.w;
    let sc = pm.scenario;
    let herm = w.hermiticity_error();
    let min_eig = w.min_eigenvalue();
    let trace_error = (w.trace().re - sc.d_out() as f64).abs();
    let mut violated = Vec::new();
    if herm > tol {
        violated.push("hermiticity".to_string());
    }
    if min_eig < -tol {
        violated.push("positivity".to_string());
    }
    if trace_error > tol {
        violated.push("trace".to_string());
    }
    let (mut subspace_residual, mut qc_violation) = (None, None);
    match class {
        ProcessClass::Fo | ProcessClass::Gen => {
            let proj = SubspaceProjector::new(sc, class)?;
            let p = proj.project(w)?;
            subspace_residual = Some(p.distance(w)?);
            for (name, r) in proj.condition_residuals(w)? {
                if r > tol {
                    violated.push(name);
                }
            }
        }
        ProcessClass::Qc => {
            let feas = qc_feasibility(pm)?;
            if feas.violation > tol.max(1e-6) {
                violated.push("QC decomposition".to_string());
            }
            qc_violation = Some(feas.violation);
        }
    }
    Ok(ValidityReport {
        class,
        valid: violated.is_empty(),
        min_eigenvalue: min_eig,
        trace_error,
        hermiticity_error: herm,
        subspace_residual,
        qc_violation,
        violated,
    })
}
