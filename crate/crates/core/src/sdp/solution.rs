use crate::boolean::{input_bits, phase_oracle_choi, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::{link_product, ChoiObject, SpaceLabel, C64};
use crate::process::{ProcessClass, ProcessMatrix, ProcessScenario, SubspaceProjector};
use crate::spaces::FUTURE;
use serde::{Deserialize, Serialize};

/// Outcome-resolved process `{W^{[0]}, W^{[1]}}` with the output qubit
/// contracted, so each element lives on `P A^{IO}_T`.
#[derive(Debug, Clone)]
pub struct Superinstrument {
    /// The contracted scenario (`d_F = 1`).
    pub scenario: ProcessScenario,
    pub w: [ChoiObject; 2],
}

impl Superinstrument {
    pub fn new(scenario: ProcessScenario, w0: ChoiObject, w1: ChoiObject) -> Result<Self> {
        let scenario = scenario.contracted();
        let names = scenario.names();
        let order: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(Self {
            scenario,
            w: [w0.permuted(&order)?, w1.permuted(&order)?],
        })
    }

    /// `Tr[W^{[i]} O_x^{⊗T}]`.
    pub fn outcome_probability(&self, i: usize, x: &[bool]) -> Result<f64> {
        let o = phase_oracle_choi(x, self.scenario.slots)?;
        Ok(link_product(&o, &self.w[i])?.trace().re)
    }

    /// `p(f(x) | x)`.
    pub fn evaluate(&self, f: &BooleanFunction, x: &[bool]) -> Result<f64> {
        self.outcome_probability(f.eval(x) as usize, x)
    }

    /// `1 − min_x p(f(x) | x)`.
    pub fn worst_case_error(&self, f: &BooleanFunction) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in 0..1usize << f.n() {
            worst = worst.max(1.0 - self.evaluate(f, &input_bits(f.n(), p))?);
        }
        Ok(worst)
    }

    pub fn sum(&self) -> ChoiObject {
        self.w[0].add(&self.w[1])
    }

    /// The process `Σ_i W^{[i]} ⊗ |i⟩⟨i|_F` with a qubit output.
    pub fn to_process(&self, class: ProcessClass) -> Result<ProcessMatrix> {
        let f = SpaceLabel::new(FUTURE, 2);
        let mut acc: Option<ChoiObject> = None;
        for (i, wi) in self.w.iter().enumerate() {
            let mut proj = vec![C64::new(0.0, 0.0); 4];
            proj[i * 2 + i] = C64::new(1.0, 0.0);
            let pi = ChoiObject::matrix(vec![f.clone()], proj)?;
            let reduced = wi.partial_trace(&[FUTURE])?;
            let t = reduced.tensor(&pi)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
        }
        let sc = ProcessScenario::new(self.scenario.slots, self.scenario.slot_dim, self.scenario.d_p, 2)?;
        ProcessMatrix::new(sc, &acc.expect("two outcomes"), class)
    }

    /// Largest violation of the superinstrument constraints for `class`:
    /// negativity, subspace residual and trace error.
    pub fn constraint_violation(&self, class: ProcessClass) -> Result<f64> {
        let proj = SubspaceProjector::new(self.scenario, class)?;
        let s = self.sum();
        let residual = s.sub(&proj.project(&s)?).frobenius_norm();
        let trace = (s.trace().re - self.scenario.d_out() as f64).abs();
        let neg = self.w.iter().map(|w| (-w.min_eigenvalue()).max(0.0)).fold(0.0, f64::max);
        Ok(residual.max(trace).max(neg))
    }
}

/// Feasible point of the dual program: weights on the oracle constraints and
/// an element of the dual cone dominating each weighted oracle sum.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub scenario: ProcessScenario,
    /// `(table position, λ)` for the inputs with `f = i`.
    pub lambdas: [Vec<(usize, f64)>; 2],
    pub wbar_star: ChoiObject,
}

impl DualSolution {
    pub fn lambda_sum(&self) -> f64 {
        self.lambdas.iter().flatten().map(|(_, l)| l).sum()
    }

    /// `Σλ − Tr(W̄*)/d^I`.
    pub fn lower_bound(&self) -> f64 {
        self.lambda_sum() - self.wbar_star.trace().re / self.scenario.d_in() as f64
    }

    /// Largest violation of the dual constraints: negative weights, excess
    /// weight, distance from the dual cone and the two domination conditions.
    pub fn constraint_violation(&self, n: usize, class: ProcessClass) -> Result<f64> {
        let proj = SubspaceProjector::new(self.scenario, class)?;
        let cone = self.wbar_star.sub(&proj.project_dual_cone(&self.wbar_star)?).frobenius_norm();
        let mut worst = cone.max(self.lambda_sum() - 1.0);
        for group in &self.lambdas {
            let mut m = self.wbar_star.clone();
            for &(p, l) in group {
                worst = worst.max(-l);
                let o = phase_oracle_choi(&input_bits(n, p), self.scenario.slots)?;
                let o = expand_to(&o, &self.wbar_star)?;
                m = m.sub(&o.scale(C64::new(l, 0.0)));
            }
            worst = worst.max(-m.min_eigenvalue());
        }
        Ok(worst.max(0.0))
    }
}

/// Embeds an operator on the slot spaces into the spaces of `like`, which may
/// carry extra dimension-1 factors.
pub(crate) fn expand_to(o: &ChoiObject, like: &ChoiObject) -> Result<ChoiObject> {
    let mut out = o.clone();
    for s in like.spaces() {
        if !out.has_space(&s.name) {
            if s.dim != 1 {
                return Err(Error::DimensionMismatch(format!("space {} is not trivial", s.name)));
            }
            out = out.tensor(&ChoiObject::identity(vec![s.clone()])?)?;
        }
    }
    out.permuted(&like.space_names())
}

/// One solved instance, as written by the command-line tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub id: u64,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub class: ProcessClass,
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub gap: f64,
    pub iters: usize,
    pub wall_time: f64,
    pub status: String,
}
