//! Output probabilities of query supermaps as polynomials in the oracle bits.

use crate::boolean::{approx_degree, degree, BooleanFunction, MultilinearPoly};
use crate::error::{Error, Result};
use crate::linalg::{ChoiObject, SpaceLabel, C64};
use crate::process::ProcessMatrix;
use crate::sdp::Superinstrument;
use crate::spaces::{slot_labels, FUTURE};

/// Largest Choi side length handled symbolically.
pub const SYMBOLIC_SIZE_CAP: usize = 4096;

/// `|O_x⟩⟩⟨⟨O_x|^{⊗T}` with polynomial entries; only the nonzero ones are kept.
#[derive(Debug, Clone)]
pub struct OraclePolynomialChoi {
    pub n: usize,
    pub slots: usize,
    labels: Vec<SpaceLabel>,
    entries: Vec<(usize, usize, MultilinearPoly)>,
}

/// `1 − 2x_i`, or `1` for the untouched basis state.
fn sign_poly(n: usize, i: usize) -> MultilinearPoly {
    let mut p = MultilinearPoly::constant(n, 1.0);
    if i > 0 {
        p.add_term(1 << (i - 1), -2.0);
    }
    p
}

pub fn symbolic_oracle_choi(n: usize, slots: usize) -> Result<OraclePolynomialChoi> {
    let d = n + 1;
    let side = d.checked_pow(2 * slots as u32).unwrap_or(usize::MAX);
    if side > SYMBOLIC_SIZE_CAP {
        return Err(Error::SizeCap(format!("symbolic oracle of side {side} exceeds {SYMBOLIC_SIZE_CAP}")));
    }
    // the vector: α_z(x) on the diagonal support, built one slot at a time
    let mut vec: Vec<(usize, MultilinearPoly)> = vec![(0, MultilinearPoly::constant(n, 1.0))];
    for _ in 0..slots {
        vec = vec
            .iter()
            .flat_map(|(idx, a)| (0..d).map(move |i| (idx * d * d + i * d + i, a.mul(&sign_poly(n, i)))))
            .collect();
    }
    let entries = vec
        .iter()
        .flat_map(|(r, a)| vec.iter().map(move |(c, b)| (*r, *c, a.mul(b))))
        .collect();
    Ok(OraclePolynomialChoi {
        n,
        slots,
        labels: slot_labels(slots, d),
        entries,
    })
}

impl OraclePolynomialChoi {
    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn entries(&self) -> &[(usize, usize, MultilinearPoly)] {
        &self.entries
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|e| e.2.degree(0.0)).max().unwrap_or(0)
    }

    /// The numeric Choi matrix at `x`.
    pub fn specialize(&self, x: &[bool]) -> Result<ChoiObject> {
        let mut m = ChoiObject::zeros(self.labels.clone())?;
        let dim = m.dim();
        let data = m.data_mut();
        for (r, c, p) in &self.entries {
            data[r * dim + c] = C64::new(p.eval(x), 0.0);
        }
        Ok(m)
    }

    /// `Tr[(O_x^{⊗T} * W)]` as a polynomial, `W` on the slot spaces plus
    /// trivial ones.
    fn contract(&self, w: &ChoiObject) -> Result<MultilinearPoly> {
        let names: Vec<&str> = self.labels.iter().map(|s| s.name.as_str()).collect();
        let mut w = w.clone();
        for s in w.spaces().to_vec() {
            if !names.contains(&s.name.as_str()) {
                if s.dim != 1 {
                    return Err(Error::DimensionMismatch(format!("space {} is not a slot space", s.name)));
                }
                w = w.partial_trace(&[s.name.as_str()])?;
            }
        }
        let w = w.permuted(&names)?;
        if w.dims() != self.labels.iter().map(|s| s.dim).collect::<Vec<_>>() {
            return Err(Error::DimensionMismatch("process slots do not match the oracle".into()));
        }
        let mut g = MultilinearPoly::zero(self.n);
        for (r, c, p) in &self.entries {
            // the link product pairs O[r, c] with W[r, c]
            let v = w.get(*r, *c).re;
            if v != 0.0 {
                g = g.add(&p.scale(v));
            }
        }
        Ok(g)
    }
}

/// `g(x) = Tr[O_x^{⊗T} * W^{[1]}]`, the probability of outcome 1.
pub fn extract_polynomial(si: &Superinstrument) -> Result<MultilinearPoly> {
    let n = si.scenario.slot_dim - 1;
    symbolic_oracle_choi(n, si.scenario.slots)?.contract(&si.w[1])
}

/// `g(x) = Tr[(O_x^{⊗T} * W) |1⟩⟨1|_F]` for a process with trivial `P` and a
/// qubit `F`.
pub fn extract_polynomial_process(pm: &ProcessMatrix) -> Result<MultilinearPoly> {
    let sc = pm.scenario;
    if sc.d_p != 1 || sc.d_f != 2 {
        return Err(Error::Invalid("expected a trivial past and a qubit future".into()));
    }
    let mut proj = vec![C64::new(0.0, 0.0); 4];
    proj[3] = C64::new(1.0, 0.0);
    let pi = ChoiObject::matrix(vec![SpaceLabel::new(FUTURE, 2)], proj)?;
    // Tr_F[W (1 ⊗ Π1)] keeps the F = 1 block
    let w1 = crate::linalg::link_product(&pi, &pm.w)?;
    symbolic_oracle_choi(sc.slot_dim - 1, sc.slots)?.contract(&w1)
}

/// `(⌈deg(f)/2⌉, ⌈deg̃(f)/2⌉)`: query lower bounds for exact and bounded-error
/// computation by general supermaps.
pub fn polynomial_lower_bound(f: &BooleanFunction) -> Result<(usize, usize)> {
    if f.n() > 6 {
        return Err(Error::SizeCap(format!("degree bounds limited to n <= 6, got {}", f.n())));
    }
    let d = degree(f);
    let a = approx_degree(f, 1.0 / 3.0)?;
    Ok((d.div_ceil(2), a.div_ceil(2)))
}
