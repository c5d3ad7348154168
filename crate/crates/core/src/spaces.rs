//! Names of the spaces in a T-slot scenario.

use crate::linalg::SpaceLabel;

pub const PAST: &str = "P";
pub const FUTURE: &str = "F";

pub fn slot_in(k: usize) -> String {
    format!("A{k}_I")
}

pub fn slot_out(k: usize) -> String {
    format!("A{k}_O")
}

pub fn ancilla(t: usize) -> String {
    format!("alpha_{t}")
}

pub const ANCILLA_F: &str = "alpha_F";

/// `[A1_I, A1_O, ..., AT_I, AT_O]` with every slot of dimension `d`.
pub fn slot_labels(slots: usize, d: usize) -> Vec<SpaceLabel> {
    (1..=slots)
        .flat_map(|k| [SpaceLabel::new(slot_in(k), d), SpaceLabel::new(slot_out(k), d)])
        .collect()
}
