//! Process matrices of fixed-order, quantum-controlled and general supermaps.

mod comb;
pub mod fixtures;
mod projector;
mod qc;
mod qc_sdp;
mod validate;

pub use comb::{build_fo_comb, random_fo_comb};
pub use projector::{Condition, SubspaceProjector, TermList};
pub use qc::{random_isometry, random_unitary, QcImplementation};
pub use qc_sdp::{qc_feasibility, QcFeasibility};
pub use validate::{is_valid_process, ValidityReport};

use crate::boolean::{phase_oracle_choi, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::{link_product, ChoiObject, SpaceLabel};
use crate::spaces::{slot_in, slot_out, FUTURE, PAST};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessClass {
    #[serde(rename = "FO")]
    Fo,
    #[serde(rename = "QC")]
    Qc,
    #[serde(rename = "Gen")]
    Gen,
}

impl fmt::Display for ProcessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fo => "FO",
            Self::Qc => "QC",
            Self::Gen => "Gen",
        })
    }
}

impl FromStr for ProcessClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fo" => Ok(Self::Fo),
            "qc" => Ok(Self::Qc),
            "gen" => Ok(Self::Gen),
            _ => Err(Error::Invalid(format!("unknown class '{s}' (expected FO, QC or Gen)"))),
        }
    }
}

/// Slot count and dimensions. Every slot has `d_k^I = d_k^O = slot_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessScenario {
    pub slots: usize,
    pub slot_dim: usize,
    pub d_p: usize,
    pub d_f: usize,
}

impl ProcessScenario {
    pub fn new(slots: usize, slot_dim: usize, d_p: usize, d_f: usize) -> Result<Self> {
        if slots == 0 || slot_dim == 0 || d_p == 0 || d_f == 0 {
            return Err(Error::Invalid("scenario dimensions and slot count must be positive".into()));
        }
        if slots > 8 {
            return Err(Error::SizeCap(format!("{slots} slots")));
        }
        Ok(Self {
            slots,
            slot_dim,
            d_p,
            d_f,
        })
    }

    /// Query scenario for `n`-bit oracles: trivial `P`, qubit `F`.
    pub fn query(n: usize, slots: usize) -> Result<Self> {
        Self::new(slots, n + 1, 1, 2)
    }

    /// Same scenario with `F` contracted away.
    pub fn contracted(&self) -> Self {
        Self { d_f: 1, ..*self }
    }

    /// `[P, A1_I, A1_O, ..., AT_I, AT_O, F]`.
    pub fn labels(&self) -> Vec<SpaceLabel> {
        let mut v = vec![SpaceLabel::new(PAST, self.d_p)];
        for k in 1..=self.slots {
            v.push(SpaceLabel::new(slot_in(k), self.slot_dim));
            v.push(SpaceLabel::new(slot_out(k), self.slot_dim));
        }
        v.push(SpaceLabel::new(FUTURE, self.d_f));
        v
    }

    pub fn names(&self) -> Vec<String> {
        self.labels().into_iter().map(|s| s.name).collect()
    }

    /// `d^O = d_P Π d_k^O`.
    pub fn d_out(&self) -> usize {
        self.d_p * self.slot_dim.pow(self.slots as u32)
    }

    /// `d^I = d_F Π d_k^I`.
    pub fn d_in(&self) -> usize {
        self.d_f * self.slot_dim.pow(self.slots as u32)
    }

    pub fn dim(&self) -> usize {
        self.d_out() * self.d_in()
    }

    /// `(d^O / D) 1`, the white-noise process.
    pub fn white_noise(&self) -> Result<ChoiObject> {
        let id = ChoiObject::identity(self.labels())?;
        Ok(id.scale((self.d_out() as f64 / self.dim() as f64).into()))
    }
}

#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    pub scenario: ProcessScenario,
    pub w: ChoiObject,
    pub class: ProcessClass,
}

impl ProcessMatrix {
    /// Puts `w` in the canonical space order of the scenario.
    pub fn new(scenario: ProcessScenario, w: &ChoiObject, class: ProcessClass) -> Result<Self> {
        let names = scenario.names();
        let order: Vec<&str> = names.iter().map(String::as_str).collect();
        let w = w.permuted(&order)?;
        if w.dims() != scenario.labels().iter().map(|s| s.dim).collect::<Vec<_>>() {
            return Err(Error::DimensionMismatch(format!("process dims {:?} do not match the scenario", w.dims())));
        }
        Ok(Self { scenario, w, class })
    }

    /// Action on input channels given as Choi matrices over the slot spaces.
    pub fn act(&self, inputs: &ChoiObject) -> Result<ChoiObject> {
        link_product(inputs, &self.w)
    }

    /// Outcome distribution `p(i | x) = Tr[(O_x^{⊗T} ⊗ Π_i) W]`.
    pub fn outcome_probabilities(&self, x: &[bool]) -> Result<Vec<f64>> {
        if self.scenario.slot_dim != x.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "slot dimension {} does not fit {}-bit oracles",
                self.scenario.slot_dim,
                x.len()
            )));
        }
        let o = phase_oracle_choi(x, self.scenario.slots)?;
        let out = link_product(&o, &self.w)?.partial_trace(&[PAST])?;
        Ok((0..self.scenario.d_f).map(|i| out.get(i, i).re).collect())
    }

    /// Success probability `p(f(x) | x)`.
    pub fn evaluate(&self, f: &BooleanFunction, x: &[bool]) -> Result<f64> {
        if self.scenario.d_f != 2 || f.n() != x.len() {
            return Err(Error::DimensionMismatch("evaluation needs a qubit output and matching n".into()));
        }
        Ok(self.outcome_probabilities(x)?[f.eval(x) as usize])
    }
}
