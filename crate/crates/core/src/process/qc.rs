use super::{ProcessClass, ProcessMatrix, ProcessScenario};
use crate::error::{Error, Result};
use crate::linalg::{choi_vector_multi, isometry_deviation, link_product, ChoiObject, SpaceLabel, C64, HERMITIAN_TOL};
use crate::spaces::{ancilla, slot_in, slot_out, ANCILLA_F, FUTURE, PAST};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

/// Haar-random `rows × cols` isometry (`rows >= cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = DMatrix::from_fn(rows, rows, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let mut q = q;
    for j in 0..rows {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= ph;
        }
    }
    q.columns(0, cols).into_owned()
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    random_isometry(d, d, rng)
}

fn mask_of(ks: &[usize]) -> u32 {
    ks.iter().map(|k| 1u32 << (k - 1)).fold(0, |a, b| a | b)
}

fn members(mask: u32, slots: usize) -> Vec<usize> {
    (1..=slots).filter(|k| mask >> (k - 1) & 1 == 1).collect()
}

/// Internal operations of a quantum-controlled supermap.
///
/// Components are `V_{∅,∅}^{→k}: P → A_k^I α_1`,
/// `V_{K,k}^{→k'}: A_k^O α_t → A_{k'}^I α_{t+1}` with `|K| = t − 1`, and
/// `V_{T∖k,k}^{→F}: A_k^O α_T → F α_F`. Missing components are zero.
#[derive(Debug, Clone)]
pub struct QcImplementation {
    pub scenario: ProcessScenario,
    /// `a_1..a_T`.
    pub ancillas: Vec<usize>,
    pub ancilla_f: usize,
    first: BTreeMap<usize, DMatrix<C64>>,
    middle: BTreeMap<(u32, usize, usize), DMatrix<C64>>,
    last: BTreeMap<usize, DMatrix<C64>>,
}

impl QcImplementation {
    pub fn new(scenario: ProcessScenario, ancillas: Vec<usize>, ancilla_f: usize) -> Result<Self> {
        if ancillas.len() != scenario.slots || ancillas.contains(&0) || ancilla_f == 0 {
            return Err(Error::Invalid("one positive ancilla dimension per time step is required".into()));
        }
        Ok(Self {
            scenario,
            ancillas,
            ancilla_f,
            first: BTreeMap::new(),
            middle: BTreeMap::new(),
            last: BTreeMap::new(),
        })
    }

    /// Smallest ancilla dims for which every merged operator can be isometric.
    pub fn minimal_ancillas(scenario: ProcessScenario) -> (Vec<usize>, usize) {
        let (t_max, d) = (scenario.slots, scenario.slot_dim);
        let mut a = vec![scenario.d_p.div_ceil(t_max * d).max(1)];
        for t in 1..t_max {
            let prev = a[t - 1];
            a.push((t * prev).div_ceil(t_max - t).max(1));
        }
        let af = (t_max * d * a[t_max - 1]).div_ceil(scenario.d_f);
        (a, af)
    }

    fn check_shape(m: &DMatrix<C64>, rows: usize, cols: usize) -> Result<()> {
        if m.nrows() != rows || m.ncols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "component is {}x{}, expected {rows}x{cols}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    fn check_slot(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.scenario.slots {
            return Err(Error::Invalid(format!("slot {k} out of range")));
        }
        Ok(())
    }

    /// `V_{∅,∅}^{→k}`.
    pub fn set_first(&mut self, k: usize, m: DMatrix<C64>) -> Result<()> {
        self.check_slot(k)?;
        Self::check_shape(&m, self.scenario.slot_dim * self.ancillas[0], self.scenario.d_p)?;
        self.first.insert(k, m);
        Ok(())
    }

    /// `V_{K,k}^{→next}`.
    pub fn set_middle(&mut self, done: &[usize], k: usize, next: usize, m: DMatrix<C64>) -> Result<()> {
        let t = done.len() + 1;
        for &j in done.iter().chain([&k, &next]) {
            self.check_slot(j)?;
        }
        let mask = mask_of(done);
        if t >= self.scenario.slots || mask >> (k - 1) & 1 == 1 || mask >> (next - 1) & 1 == 1 || k == next {
            return Err(Error::Invalid(format!("invalid control state ({done:?}, {k}) -> {next}")));
        }
        let d = self.scenario.slot_dim;
        Self::check_shape(&m, d * self.ancillas[t], d * self.ancillas[t - 1])?;
        self.middle.insert((mask, k, next), m);
        Ok(())
    }

    /// `V_{T∖k,k}^{→F}`.
    pub fn set_last(&mut self, k: usize, m: DMatrix<C64>) -> Result<()> {
        self.check_slot(k)?;
        let sc = self.scenario;
        Self::check_shape(&m, sc.d_f * self.ancilla_f, sc.slot_dim * self.ancillas[sc.slots - 1])?;
        self.last.insert(k, m);
        Ok(())
    }

    /// Merged operators `Ṽ` restricted to each control set `K_t`, keyed by
    /// `(t, mask of K_t)`.
    pub fn merged_operators(&self) -> Vec<((usize, u32), DMatrix<C64>)> {
        let sc = self.scenario;
        let (t_max, d) = (sc.slots, sc.slot_dim);
        let mut out = Vec::new();
        let h = d * self.ancillas[0];
        let mut m0 = DMatrix::zeros(t_max * h, sc.d_p);
        for (&k, v) in &self.first {
            m0.view_mut(((k - 1) * h, 0), (h, sc.d_p)).copy_from(v);
        }
        out.push(((0, 0), m0));
        for t in 1..t_max {
            let (w, h) = (d * self.ancillas[t - 1], d * self.ancillas[t]);
            for mask in (1u32..1 << t_max).filter(|m| m.count_ones() as usize == t) {
                let ins = members(mask, t_max);
                let outs: Vec<usize> = (1..=t_max).filter(|k| !ins.contains(k)).collect();
                let mut m = DMatrix::zeros(outs.len() * h, ins.len() * w);
                for (c, &k) in ins.iter().enumerate() {
                    for (r, &next) in outs.iter().enumerate() {
                        if let Some(v) = self.middle.get(&(mask & !(1 << (k - 1)), k, next)) {
                            m.view_mut((r * h, c * w), (h, w)).copy_from(v);
                        }
                    }
                }
                out.push(((t, mask), m));
            }
        }
        let w = d * self.ancillas[t_max - 1];
        let mut ml = DMatrix::zeros(sc.d_f * self.ancilla_f, t_max * w);
        for (&k, v) in &self.last {
            ml.view_mut((0, (k - 1) * w), (v.nrows(), w)).copy_from(v);
        }
        out.push(((t_max, (1 << t_max) - 1), ml));
        out
    }

    pub fn isometry_deviation(&self) -> f64 {
        self.merged_operators()
            .iter()
            .map(|(_, m)| isometry_deviation(m))
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let dev = self.isometry_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NonIsometry(dev));
        }
        Ok(())
    }

    /// Random implementation with Haar-random merged operators.
    pub fn random<R: Rng + ?Sized>(scenario: ProcessScenario, rng: &mut R) -> Result<Self> {
        let (a, af) = Self::minimal_ancillas(scenario);
        let mut imp = Self::new(scenario, a, af)?;
        let (t_max, d) = (scenario.slots, scenario.slot_dim);
        let h = d * imp.ancillas[0];
        let v = random_isometry(t_max * h, scenario.d_p, rng);
        for k in 1..=t_max {
            imp.set_first(k, v.rows((k - 1) * h, h).into_owned())?;
        }
        for t in 1..t_max {
            let (w, h) = (d * imp.ancillas[t - 1], d * imp.ancillas[t]);
            for mask in (1u32..1 << t_max).filter(|m| m.count_ones() as usize == t) {
                let ins = members(mask, t_max);
                let outs: Vec<usize> = (1..=t_max).filter(|k| !ins.contains(k)).collect();
                let v = random_isometry(outs.len() * h, ins.len() * w, rng);
                for (c, &k) in ins.iter().enumerate() {
                    let done = members(mask & !(1 << (k - 1)), t_max);
                    for (r, &next) in outs.iter().enumerate() {
                        imp.set_middle(&done, k, next, v.view((r * h, c * w), (h, w)).into_owned())?;
                    }
                }
            }
        }
        let w = d * imp.ancillas[t_max - 1];
        let v = random_isometry(scenario.d_f * af, t_max * w, rng);
        for k in 1..=t_max {
            imp.set_last(k, v.columns((k - 1) * w, w).into_owned())?;
        }
        Ok(imp)
    }

    fn canonical_names(&self) -> Vec<String> {
        let mut names = self.scenario.names();
        names.push(ANCILLA_F.to_string());
        names
    }

    /// `|w_{(k_1..k_T, F)}⟩` on `[P, A1_I, A1_O, ..., F, alpha_F]`, or `None`
    /// when a component along the order is zero.
    pub fn order_vector(&self, order: &[usize]) -> Result<Option<ChoiObject>> {
        let sc = self.scenario;
        let (t_max, d) = (sc.slots, sc.slot_dim);
        if order.len() != t_max || mask_of(order).count_ones() as usize != t_max {
            return Err(Error::Invalid(format!("{order:?} is not an order of {t_max} slots")));
        }
        let lbl = |n: String, dim: usize| SpaceLabel::new(n, dim);
        let Some(v1) = self.first.get(&order[0]) else {
            return Ok(None);
        };
        let mut w = choi_vector_multi(
            v1,
            vec![lbl(PAST.into(), sc.d_p)],
            vec![lbl(slot_in(order[0]), d), lbl(ancilla(1), self.ancillas[0])],
        )?;
        for t in 1..t_max {
            let key = (mask_of(&order[..t - 1]), order[t - 1], order[t]);
            let Some(v) = self.middle.get(&key) else {
                return Ok(None);
            };
            let c = choi_vector_multi(
                v,
                vec![lbl(slot_out(order[t - 1]), d), lbl(ancilla(t), self.ancillas[t - 1])],
                vec![lbl(slot_in(order[t]), d), lbl(ancilla(t + 1), self.ancillas[t])],
            )?;
            w = link_product(&w, &c)?;
        }
        let Some(vl) = self.last.get(&order[t_max - 1]) else {
            return Ok(None);
        };
        let c = choi_vector_multi(
            vl,
            vec![lbl(slot_out(order[t_max - 1]), d), lbl(ancilla(t_max), self.ancillas[t_max - 1])],
            vec![lbl(FUTURE.into(), sc.d_f), lbl(ANCILLA_F.into(), self.ancilla_f)],
        )?;
        w = link_product(&w, &c)?;
        let names = self.canonical_names();
        let order_names: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(Some(w.permuted(&order_names)?))
    }

    fn orders(&self) -> Vec<Vec<usize>> {
        fn rec(t_max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == t_max {
                out.push(prefix.clone());
                return;
            }
            for k in 1..=t_max {
                if !prefix.contains(&k) {
                    prefix.push(k);
                    rec(t_max, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(self.scenario.slots, &mut Vec::new(), &mut out);
        out
    }

    fn summed(&self, relabel: bool) -> Result<ChoiObject> {
        let names = self.canonical_names();
        let mut labels = self.scenario.labels();
        labels.push(SpaceLabel::new(ANCILLA_F, self.ancilla_f));
        let zero_len: usize = labels.iter().map(|s| s.dim).product();
        let mut acc = ChoiObject::vector(labels, vec![C64::new(0.0, 0.0); zero_len])?;
        for order in self.orders() {
            let Some(mut w) = self.order_vector(&order)? else {
                continue;
            };
            if relabel {
                // A_{k_t} becomes A_t; go through temporary names to avoid clashes
                let tmp: Vec<(String, String)> = order
                    .iter()
                    .flat_map(|&k| {
                        [(slot_in(k), format!("tmp{k}_I")), (slot_out(k), format!("tmp{k}_O"))]
                    })
                    .collect();
                let r: Vec<(&str, &str)> = tmp.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                w = w.relabeled(&r)?;
                let back: Vec<(String, String)> = order
                    .iter()
                    .enumerate()
                    .flat_map(|(t, &k)| {
                        [
                            (format!("tmp{k}_I"), slot_in(t + 1)),
                            (format!("tmp{k}_O"), slot_out(t + 1)),
                        ]
                    })
                    .collect();
                let r: Vec<(&str, &str)> = back.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                w = w.relabeled(&r)?;
                let order_names: Vec<&str> = names.iter().map(String::as_str).collect();
                w = w.permuted(&order_names)?;
            }
            acc = acc.add(&w);
        }
        Ok(acc)
    }

    /// `|w_{(T,F)}⟩ = Σ_orders |w_{(k_1..k_T,F)}⟩`.
    pub fn process_vector(&self) -> Result<ChoiObject> {
        self.summed(false)
    }

    /// The same sum with each order's slots relabeled to `1..T`.
    pub fn fo_process_vector(&self) -> Result<ChoiObject> {
        self.summed(true)
    }

    /// `W = Tr_{α_F} |w⟩⟨w|`.
    pub fn process(&self) -> Result<ProcessMatrix> {
        self.validate()?;
        let w = self.process_vector()?.outer_traced(&[ANCILLA_F])?;
        ProcessMatrix::new(self.scenario, &w, ProcessClass::Qc)
    }

    /// Fixed-order image with the same action on repeated unitaries.
    pub fn to_fo(&self) -> Result<ProcessMatrix> {
        self.validate()?;
        let w = self.fo_process_vector()?.outer_traced(&[ANCILLA_F])?;
        ProcessMatrix::new(self.scenario, &w, ProcessClass::Fo)
    }

    pub fn act_on(&self, w: &ChoiObject, unitaries: &[DMatrix<C64>]) -> Result<ChoiObject> {
        let sc = self.scenario;
        if unitaries.len() != sc.slots {
            return Err(Error::DimensionMismatch(format!("{} unitaries for {} slots", unitaries.len(), sc.slots)));
        }
        let mut u = ChoiObject::vector(vec![], vec![C64::new(1.0, 0.0)])?;
        for (k, m) in unitaries.iter().enumerate() {
            let c = choi_vector_multi(
                m,
                vec![SpaceLabel::new(slot_in(k + 1), sc.slot_dim)],
                vec![SpaceLabel::new(slot_out(k + 1), sc.slot_dim)],
            )?;
            u = u.tensor(&c)?;
        }
        let s = link_product(&u, w)?;
        s.outer_traced(&[ANCILLA_F])
    }

    /// `S(U_1, ..., U_T)` as a Choi matrix on `[P, F]`, computed from vectors.
    pub fn action_qc(&self, unitaries: &[DMatrix<C64>]) -> Result<ChoiObject> {
        self.act_on(&self.process_vector()?, unitaries)
    }

    pub fn action_fo(&self, unitaries: &[DMatrix<C64>]) -> Result<ChoiObject> {
        self.act_on(&self.fo_process_vector()?, unitaries)
    }
}
