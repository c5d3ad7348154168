use super::BooleanFunction;
use crate::error::Result;
use crate::linalg::{ChoiObject, C64};
use crate::spaces::slot_labels;

fn signs(x: &[bool]) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(x.iter().map(|&b| if b { -1.0 } else { 1.0 }))
        .collect()
}

/// `|O_x⟩⟩^{⊗T}` on `[A1_I, A1_O, ..., AT_I, AT_O]`, each of dimension `n + 1`.
pub fn phase_oracle_vector(x: &[bool], slots: usize) -> Result<ChoiObject> {
    let s = signs(x);
    let d = s.len();
    let mut single = vec![C64::new(0.0, 0.0); d * d];
    for (i, si) in s.iter().enumerate() {
        single[i * d + i] = C64::new(*si, 0.0);
    }
    let mut data = vec![C64::new(1.0, 0.0)];
    for _ in 0..slots {
        data = data
            .iter()
            .flat_map(|a| single.iter().map(move |b| a * b))
            .collect();
    }
    ChoiObject::vector(slot_labels(slots, d), data)
}

/// `|O_x⟩⟩⟨⟨O_x|^{⊗T}`.
pub fn phase_oracle_choi(x: &[bool], slots: usize) -> Result<ChoiObject> {
    phase_oracle_vector(x, slots)?.outer()
}

impl BooleanFunction {
    /// Oracle Choi matrices for every input, grouped by the value of `f`.
    pub fn oracle_choi_groups(&self, slots: usize) -> Result<[Vec<ChoiObject>; 2]> {
        let mut out = [Vec::new(), Vec::new()];
        for p in 0..1usize << self.n() {
            let x = super::input_bits(self.n(), p);
            out[self.eval_index(p) as usize].push(phase_oracle_choi(&x, slots)?);
        }
        Ok(out)
    }
}
