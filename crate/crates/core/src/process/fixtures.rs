//! Reference supermaps used by tests and demos.

use super::{build_fo_comb, ProcessMatrix, ProcessScenario, QcImplementation};
use crate::error::Result;
use crate::linalg::{choi_vector_multi, ChoiObject, SpaceLabel, C64};
use crate::spaces::{ancilla, slot_in, slot_out, ANCILLA_F, FUTURE, PAST};
use nalgebra::{DMatrix, DVector};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn identity(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

/// `V ⊗ |j⟩` with the control/ancilla index least significant.
fn tag(v: &DMatrix<C64>, j: usize, dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(v.nrows() * dim, v.ncols());
    for r in 0..v.nrows() {
        for col in 0..v.ncols() {
            out[(r * dim + j, col)] = v[(r, col)];
        }
    }
    out
}

/// Quantum switch on `d`-dimensional targets with a `|+⟩` control.
///
/// `P` carries the target, `F` is target ⊗ control: control `0` for the
/// order `(1, 2)`, `1` for `(2, 1)`.
pub fn quantum_switch(d: usize) -> Result<QcImplementation> {
    switch_like(d, [0.5f64.sqrt(), 0.5f64.sqrt()], true)
}

/// Switch whose control ends up in `α_F`: a classical mixture of orders.
pub fn decohered_switch(d: usize) -> Result<QcImplementation> {
    switch_like(d, [0.5f64.sqrt(), 0.5f64.sqrt()], false)
}

/// Definite order `(1, 2)` if `first == 1`, else `(2, 1)`, with the same
/// spaces as [`decohered_switch`].
pub fn single_order(d: usize, first: usize) -> Result<QcImplementation> {
    let amps = if first == 1 { [1.0, 0.0] } else { [0.0, 1.0] };
    switch_like(d, amps, false)
}

fn switch_like(d: usize, amps: [f64; 2], coherent: bool) -> Result<QcImplementation> {
    let d_f = if coherent { 2 * d } else { d };
    let a_f = if coherent { 1 } else { 2 };
    let sc = ProcessScenario::new(2, d, d, d_f)?;
    let mut imp = QcImplementation::new(sc, vec![1, 1], a_f)?;
    for (k, a) in [(1, amps[0]), (2, amps[1])] {
        if a != 0.0 {
            imp.set_first(k, identity(d) * c(a))?;
        }
    }
    imp.set_middle(&[], 1, 2, identity(d))?;
    imp.set_middle(&[], 2, 1, identity(d))?;
    // the last operation of order (1,2) happens in slot 2
    imp.set_last(2, tag(&identity(d), 0, 2))?;
    imp.set_last(1, tag(&identity(d), 1, 2))?;
    Ok(imp)
}

/// `|w⟩ = |ψ1⟩^{A1_I} |ψ2⟩^{A2_I} |1⟩⟩^{A1_O F1} |1⟩⟩^{A2_O F2}`, implemented
/// with slot 1 first (`swap = false`) or slot 2 first (`swap = true`).
pub fn parallel_example(psi1: &DVector<C64>, psi2: &DVector<C64>, swap: bool) -> Result<QcImplementation> {
    let d = psi1.len();
    let sc = ProcessScenario::new(2, d, 1, d * d)?;
    let mut imp = QcImplementation::new(sc, vec![1, d], 2)?;
    let (a, b, psi_a, psi_b) = if swap { (2, 1, psi2, psi1) } else { (1, 2, psi1, psi2) };
    imp.set_first(a, DMatrix::from_column_slice(d, 1, psi_a.as_slice()))?;
    // A_a^O → A_b^I ⊗ α_2: |j⟩ ↦ |ψ_b⟩|j⟩
    let mut mid = DMatrix::zeros(d * d, d);
    for j in 0..d {
        for i in 0..d {
            mid[(i * d + j, j)] = psi_b[i];
        }
    }
    imp.set_middle(&[], a, b, mid)?;
    // the unused branch still has to be isometric
    imp.set_middle(&[], b, a, DMatrix::from_fn(d * d, d, |r, col| if r == col * d { c(1.0) } else { c(0.0) }))?;
    // A_b^O ⊗ α_2 → F1 F2 ⊗ α_F: |j⟩|i⟩ ↦ |i⟩_{F_a}|j⟩_{F_b}
    let mut fin = DMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let (f1, f2) = if a == 1 { (i, j) } else { (j, i) };
            fin[(f1 * d + f2, j * d + i)] = c(1.0);
        }
    }
    imp.set_last(b, tag(&fin, 0, 2))?;
    imp.set_last(a, tag(&fin, 1, 2))?;
    Ok(imp)
}

/// Target process vector of [`parallel_example`] on `[P, A1_I, A1_O, A2_I, A2_O, F]`.
pub fn parallel_example_vector(psi1: &DVector<C64>, psi2: &DVector<C64>, swap_outputs: bool) -> Result<ChoiObject> {
    let d = psi1.len();
    let sc = ProcessScenario::new(2, d, 1, d * d)?;
    let mut data = Vec::with_capacity(d.pow(4) * d * d);
    for i1 in 0..d {
        for o1 in 0..d {
            for i2 in 0..d {
                for o2 in 0..d {
                    for f1 in 0..d {
                        for f2 in 0..d {
                            let wire = if swap_outputs { o1 == f2 && o2 == f1 } else { o1 == f1 && o2 == f2 };
                            let (p1, p2) = if swap_outputs { (psi2, psi1) } else { (psi1, psi2) };
                            data.push(if wire { p1[i1] * p2[i2] } else { c(0.0) });
                        }
                    }
                }
            }
        }
    }
    ChoiObject::vector(sc.labels(), data)
}

fn tooth(m: &DMatrix<C64>, ins: Vec<SpaceLabel>, outs: Vec<SpaceLabel>, trace_f: bool) -> Result<ChoiObject> {
    let v = choi_vector_multi(m, ins, outs)?;
    if trace_f {
        v.outer_traced(&[ANCILLA_F])
    } else {
        v.outer()
    }
}

/// Teeth that wire `P → A1 → A2 → ... → F` with identities.
pub fn sequential_identity_comb(slots: usize, d: usize) -> Result<ProcessMatrix> {
    let sc = ProcessScenario::new(slots, d, d, d)?;
    let l = |n: String| SpaceLabel::new(n, d);
    let mut teeth = vec![tooth(&identity(d), vec![l(PAST.into())], vec![l(slot_in(1))], false)?];
    for t in 2..=slots {
        teeth.push(tooth(&identity(d), vec![l(slot_out(t - 1))], vec![l(slot_in(t))], false)?);
    }
    teeth.push(tooth(&identity(d), vec![l(slot_out(slots))], vec![l(FUTURE.into())], false)?);
    build_fo_comb(&teeth, sc)
}

/// One query computing `x1` exactly (`n = 1`).
pub fn deutsch_comb() -> Result<ProcessMatrix> {
    let sc = ProcessScenario::query(1, 1)?;
    let h = 0.5f64.sqrt();
    let plus = DMatrix::from_column_slice(2, 1, &[c(h), c(h)]);
    let had = DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
    let teeth = vec![
        tooth(&plus, vec![SpaceLabel::new(PAST, 1)], vec![SpaceLabel::new(slot_in(1), 2)], false)?,
        tooth(
            &had,
            vec![SpaceLabel::new(slot_out(1), 2)],
            vec![SpaceLabel::new(FUTURE, 2), SpaceLabel::new(ANCILLA_F, 1)],
            true,
        )?,
    ];
    build_fo_comb(&teeth, sc)
}

/// Two queries computing `x1 ⊕ x2 ⊕ x3` exactly.
pub fn parity3_comb() -> Result<ProcessMatrix> {
    let sc = ProcessScenario::query(3, 2)?;
    let h = 0.5f64.sqrt();
    let first = DMatrix::from_column_slice(4, 1, &[c(0.0), c(h), c(h), c(0.0)]);
    // |±⟩ on {1,2} ↦ α = 0/1, |0⟩ ↦ 2, |3⟩ ↦ 3
    let w = DMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.0), c(h), c(h), c(0.0),
            c(0.0), c(h), c(-h), c(0.0),
            c(1.0), c(0.0), c(0.0), c(0.0),
            c(0.0), c(0.0), c(0.0), c(1.0),
        ],
    );
    let phi = [c(h), c(0.0), c(0.0), c(h)];
    let mid = DMatrix::from_fn(16, 4, |r, a| phi[r / 4] * w[(r % 4, a)]);
    // |±⟩ on {0,3} ↦ 0/1, |1⟩ ↦ 2, |2⟩ ↦ 3
    let rot = DMatrix::from_row_slice(
        4,
        4,
        &[
            c(h), c(0.0), c(0.0), c(h),
            c(h), c(0.0), c(0.0), c(-h),
            c(0.0), c(1.0), c(0.0), c(0.0),
            c(0.0), c(0.0), c(1.0), c(0.0),
        ],
    );
    let mut last = DMatrix::zeros(2 * 16, 16);
    for a in 0..4 {
        for beta in 0..4 {
            for a2 in 0..4 {
                let bit = ((a2 == 1) as usize) ^ ((beta == 1) as usize);
                last[(bit * 16 + a2 * 4 + beta, a * 4 + beta)] += rot[(a2, a)];
            }
        }
    }
    let teeth = vec![
        tooth(
            &first,
            vec![SpaceLabel::new(PAST, 1)],
            vec![SpaceLabel::new(slot_in(1), 4), SpaceLabel::new(ancilla(1), 1)],
            false,
        )?,
        tooth(
            &mid,
            vec![SpaceLabel::new(slot_out(1), 4), SpaceLabel::new(ancilla(1), 1)],
            vec![SpaceLabel::new(slot_in(2), 4), SpaceLabel::new(ancilla(2), 4)],
            false,
        )?,
        tooth(
            &last,
            vec![SpaceLabel::new(slot_out(2), 4), SpaceLabel::new(ancilla(2), 4)],
            vec![SpaceLabel::new(FUTURE, 2), SpaceLabel::new(ANCILLA_F, 16)],
            true,
        )?,
    ];
    build_fo_comb(&teeth, sc)
}
