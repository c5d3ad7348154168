use super::{ProcessClass, ProcessScenario};
use crate::error::{Error, Result};
use crate::linalg::{ChoiObject, C64};
use crate::spaces::{slot_in, slot_out, FUTURE, PAST};
use std::collections::BTreeMap;

/// Integer combination `Σ c_S R_S` of trace-and-replace maps, keyed by the
/// bit mask of `S` over the scenario's space list.
///
/// The maps commute and `R_A R_B = R_{A∪B}`, so such combinations are closed
/// under products.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermList(pub BTreeMap<u32, i64>);

impl TermList {
    pub fn identity() -> Self {
        Self(BTreeMap::from([(0, 1)]))
    }

    pub fn replace(mask: u32) -> Self {
        Self(BTreeMap::from([(mask, 1)]))
    }

    /// `1 − R_S`.
    pub fn one_minus(mask: u32) -> Self {
        Self::identity().sub(&Self::replace(mask))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            *out.entry(*m).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        Self(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&Self(other.0.iter().map(|(m, c)| (*m, -c)).collect()))
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                *out.entry(ma | mb).or_insert(0) += ca * cb;
            }
        }
        out.retain(|_, c| *c != 0);
        Self(out)
    }

    /// Drops factors acting on dimension-1 spaces, where `R` is the identity.
    pub fn restricted(&self, nontrivial: u32) -> Self {
        let mut out = BTreeMap::new();
        for (m, c) in &self.0 {
            *out.entry(m & nontrivial).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        Self(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.0.iter().map(|(m, c)| (*m, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// A defining linear condition `Q(W) = 0` with `Q` a projector.
#[derive(Debug, Clone)]
pub struct Condition {
    pub name: String,
    pub terms: TermList,
}

/// Orthogonal projector onto the linear span of a class's process matrices.
#[derive(Debug, Clone)]
pub struct SubspaceProjector {
    pub scenario: ProcessScenario,
    pub class: ProcessClass,
    names: Vec<String>,
    conditions: Vec<Condition>,
    terms: TermList,
}

impl SubspaceProjector {
    pub fn new(scenario: ProcessScenario, class: ProcessClass) -> Result<Self> {
        let names = scenario.names();
        let bit = |n: &str| 1u32 << names.iter().position(|x| x == n).expect("scenario space");
        let t = scenario.slots;
        let a_o = |k: usize| bit(&slot_out(k));
        let a_io = |k: usize| bit(&slot_in(k)) | bit(&slot_out(k));
        let f = bit(FUTURE);
        let all_a: u32 = (1..=t).map(a_io).fold(0, |a, b| a | b);
        let nontrivial: u32 = scenario
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.dim > 1)
            .map(|(i, _)| 1u32 << i)
            .fold(0, |a, b| a | b);

        let mut raw: Vec<(String, TermList)> = Vec::new();
        match class {
            ProcessClass::Gen => {
                for kmask in 1u32..(1 << t) {
                    let mut q = TermList::identity();
                    let mut rest = f;
                    let mut label = Vec::new();
                    for k in 1..=t {
                        if kmask >> (k - 1) & 1 == 1 {
                            q = q.compose(&TermList::one_minus(a_o(k)));
                            label.push(k.to_string());
                        } else {
                            rest |= a_io(k);
                        }
                    }
                    raw.push((format!("Gen K={{{}}}", label.join(",")), q.compose(&TermList::replace(rest))));
                }
            }
            ProcessClass::Fo => {
                raw.push((
                    format!("FO t={t}"),
                    TermList::one_minus(a_o(t)).compose(&TermList::replace(f)),
                ));
                for s in (1..t).rev() {
                    let later: u32 = (s + 1..=t).map(a_io).fold(f, |a, b| a | b);
                    raw.push((
                        format!("FO t={s}"),
                        TermList::one_minus(a_o(s)).compose(&TermList::replace(later)),
                    ));
                }
            }
            ProcessClass::Qc => {
                return Err(Error::Invalid(
                    "the QC set is not a linear subspace; use qc_feasibility".into(),
                ))
            }
        }
        raw.push((
            "normalization P".into(),
            TermList::one_minus(bit(PAST)).compose(&TermList::replace(all_a | f)),
        ));

        let conditions: Vec<Condition> = raw
            .into_iter()
            .map(|(name, q)| Condition {
                name,
                terms: q.restricted(nontrivial),
            })
            .filter(|c| !c.terms.is_zero())
            .collect();
        let terms = conditions
            .iter()
            .fold(TermList::identity(), |acc, c| acc.compose(&TermList::identity().sub(&c.terms)))
            .restricted(nontrivial);
        Ok(Self {
            scenario,
            class,
            names,
            conditions,
            terms,
        })
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn terms(&self) -> &TermList {
        &self.terms
    }

    pub fn space_names(&self) -> &[String] {
        &self.names
    }

    pub fn mask_names(&self, mask: u32) -> Vec<&str> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, n)| n.as_str())
            .collect()
    }

    fn canonical(&self, w: &ChoiObject) -> Result<ChoiObject> {
        let order: Vec<&str> = self.names.iter().map(String::as_str).collect();
        w.permuted(&order)
    }

    pub fn apply_terms(&self, terms: &TermList, w: &ChoiObject) -> Result<ChoiObject> {
        let w = self.canonical(w)?;
        let mut out = ChoiObject::zeros(w.spaces().to_vec())?;
        for (mask, c) in terms.iter() {
            let r = if mask == 0 {
                w.clone()
            } else {
                w.trace_and_replace_many(&self.mask_names(mask))?
            };
            out = out.add(&r.scale(C64::new(c as f64, 0.0)));
        }
        Ok(out)
    }

    /// `Π_L(W)`, in the scenario's canonical space order.
    pub fn project(&self, w: &ChoiObject) -> Result<ChoiObject> {
        self.apply_terms(&self.terms, w)
    }

    /// `X − Π_L(X) + Tr(X)/D · 1`.
    pub fn project_dual_cone(&self, x: &ChoiObject) -> Result<ChoiObject> {
        let x = self.canonical(x)?;
        let p = self.project(&x)?;
        let d = x.dim() as f64;
        let id = ChoiObject::identity(x.spaces().to_vec())?;
        Ok(x.sub(&p).add(&id.scale(x.trace() / d)))
    }

    /// `‖Q_j(W)‖_F` for every condition.
    pub fn condition_residuals(&self, w: &ChoiObject) -> Result<Vec<(String, f64)>> {
        self.conditions
            .iter()
            .map(|c| Ok((c.name.clone(), self.apply_terms(&c.terms, w)?.frobenius_norm())))
            .collect()
    }
}
