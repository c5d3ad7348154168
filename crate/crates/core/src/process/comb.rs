use super::{random_isometry, ProcessClass, ProcessMatrix, ProcessScenario};
use crate::error::{Error, Result};
use crate::linalg::{choi_vector_multi, link_product, ChoiObject, SpaceLabel};
use crate::spaces::{ancilla, slot_in, slot_out, ANCILLA_F, FUTURE, PAST};
use rand::Rng;

const TP_TOL: f64 = 1e-10;

/// Input spaces of the `t`-th comb tooth (1-based), as named in `choi`.
fn tooth_inputs(choi: &ChoiObject, t: usize) -> Vec<String> {
    let candidates = if t == 1 {
        vec![PAST.to_string()]
    } else {
        vec![slot_out(t - 1), ancilla(t - 1)]
    };
    candidates.into_iter().filter(|n| choi.has_space(n)).collect()
}

/// `W = V_{T+1} * ... * V_1` from the Choi matrices of the teeth.
///
/// Tooth `t` maps `A_{t-1}^O α_{t-1}` (or `P` for `t = 1`) to `A_t^I α_t`
/// (or `F` for `t = T + 1`); ancillas are named `alpha_t`.
pub fn build_fo_comb(channels: &[ChoiObject], scenario: ProcessScenario) -> Result<ProcessMatrix> {
    if channels.len() != scenario.slots + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} channels for {} slots",
            channels.len(),
            scenario.slots
        )));
    }
    for (i, v) in channels.iter().enumerate() {
        let ins = tooth_inputs(v, i + 1);
        let outs: Vec<&str> = v
            .space_names()
            .into_iter()
            .filter(|n| !ins.iter().any(|m| m == n))
            .collect();
        let reduced = v.partial_trace(&outs)?;
        let id = ChoiObject::identity(reduced.spaces().to_vec())?;
        let dev = reduced.distance(&id)?;
        if dev > TP_TOL {
            return Err(Error::NonTracePreserving(dev));
        }
    }
    let mut w = channels[0].clone();
    for v in &channels[1..] {
        w = link_product(&w, v)?;
    }
    for (name, dim) in [(PAST, scenario.d_p), (FUTURE, scenario.d_f)] {
        if !w.has_space(name) && dim == 1 {
            w = w.tensor(&ChoiObject::identity(vec![SpaceLabel::new(name, 1)])?)?;
        }
    }
    ProcessMatrix::new(scenario, &w, ProcessClass::Fo)
}

/// Random isometric teeth with ancilla dims `a_1..a_T`; returns the teeth and
/// the comb.
pub fn random_fo_comb<R: Rng + ?Sized>(
    scenario: ProcessScenario,
    ancillas: &[usize],
    rng: &mut R,
) -> Result<(Vec<ChoiObject>, ProcessMatrix)> {
    let t_max = scenario.slots;
    if ancillas.len() != t_max {
        return Err(Error::DimensionMismatch(format!("{} ancilla dims for {t_max} slots", ancillas.len())));
    }
    let d = scenario.slot_dim;
    let mut teeth = Vec::with_capacity(t_max + 1);
    for t in 1..=t_max + 1 {
        let ins = if t == 1 {
            vec![SpaceLabel::new(PAST, scenario.d_p)]
        } else {
            vec![SpaceLabel::new(slot_out(t - 1), d), SpaceLabel::new(ancilla(t - 1), ancillas[t - 2])]
        };
        let din: usize = ins.iter().map(|s| s.dim).product();
        let outs = if t <= t_max {
            vec![SpaceLabel::new(slot_in(t), d), SpaceLabel::new(ancilla(t), ancillas[t - 1])]
        } else {
            let af = din.div_ceil(scenario.d_f);
            vec![SpaceLabel::new(FUTURE, scenario.d_f), SpaceLabel::new(ANCILLA_F, af)]
        };
        let dout: usize = outs.iter().map(|s| s.dim).product();
        if dout < din {
            return Err(Error::Invalid(format!("tooth {t} maps dimension {din} into {dout}")));
        }
        let v = random_isometry(dout, din, rng);
        let vec = choi_vector_multi(&v, ins, outs)?;
        teeth.push(if t <= t_max {
            vec.outer()?
        } else {
            vec.outer_traced(&[ANCILLA_F])?
        });
    }
    let comb = build_fo_comb(&teeth, scenario)?;
    Ok((teeth, comb))
}
