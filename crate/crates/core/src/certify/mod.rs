//! Exact-rational bounds on the minimum query error.
//!
//! Floating-point solutions of the primal and dual programs are rationalised
//! and then repaired in exact arithmetic until every constraint holds, so the
//! resulting values are rigorous bounds.

mod format;
mod psd;
mod rational;

pub use format::{parse_certificate, verify_certificate, write_certificate, VerifiedBound};
pub use psd::{components, exact_psd_check, quadratic_form, Pencil, PsdVerdict};
pub use rational::{dyadic_ceil, format_q, limit_denominator, parse_q, q, rationalize, round_to, to_f64, RationalMatrix, Rounding, Q};

use crate::boolean::{input_bits, phase_oracle_choi, BooleanFunction};
use crate::error::{Error, Result};
use crate::process::{ProcessClass, ProcessScenario, SubspaceProjector};
use crate::sdp::{DualSolution, Superinstrument};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Upper => "upper",
            Self::Lower => "lower",
        })
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Self::Upper),
            "lower" => Ok(Self::Lower),
            _ => Err(Error::Invalid(format!("unknown bound kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyConfig {
    /// Largest denominator used when rationalising floats.
    pub max_denominator: u64,
    pub rounding: Rounding,
    /// Dyadic resolution `2^-bits` of the μ and η searches.
    pub search_bits: u32,
    /// Exact bisection steps after the first verified value.
    pub bisection_steps: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            max_denominator: 1_000_000,
            rounding: Rounding::Grid,
            search_bits: 40,
            bisection_steps: 12,
        }
    }
}

/// An exact feasible point and the bound it implies.
#[derive(Debug, Clone)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub class: ProcessClass,
    pub n: usize,
    pub slots: usize,
    pub id: u64,
    pub value: Q,
    /// Upper: empty. Lower: `(i, table position, λ)`.
    pub lambdas: Vec<(usize, usize, Q)>,
    /// Upper: `W0`, `W1`. Lower: `S`.
    pub matrices: Vec<(String, RationalMatrix)>,
    pub transcript: Vec<String>,
}

impl BoundCertificate {
    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

/// Exact `O_x^{⊗T}` on the spaces of `like`.
pub fn oracle_rational(x: &[bool], slots: usize, like: &RationalMatrix) -> Result<RationalMatrix> {
    let mut o = phase_oracle_choi(x, slots)?;
    for s in like.labels() {
        if !o.has_space(&s.name) {
            o = o.tensor(&crate::linalg::ChoiObject::identity(vec![s.clone()])?)?;
        }
    }
    let names: Vec<&str> = like.labels().iter().map(|s| s.name.as_str()).collect();
    RationalMatrix::from_choi(&o.permuted(&names)?, 1, Rounding::Grid)
}

/// `Π_L(M)` in exact arithmetic; `M` must be on the scenario spaces in order.
pub fn exact_project_subspace(m: &RationalMatrix, class: ProcessClass, scenario: &ProcessScenario) -> Result<RationalMatrix> {
    let proj = SubspaceProjector::new(*scenario, class)?;
    check_labels(m, scenario)?;
    Ok(m.apply_terms(proj.terms()))
}

/// `M − Π_L(M) + Tr(M)/D · 1`.
pub fn exact_project_dual_cone(m: &RationalMatrix, class: ProcessClass, scenario: &ProcessScenario) -> Result<RationalMatrix> {
    let p = exact_project_subspace(m, class, scenario)?;
    let t = m.trace() / Q::from_integer((m.dim() as i64).into());
    m.sub(&p)?.add(&RationalMatrix::zeros(m.labels().to_vec()).add_identity(&t))
}

fn check_labels(m: &RationalMatrix, scenario: &ProcessScenario) -> Result<()> {
    if m.labels() != scenario.labels().as_slice() {
        return Err(Error::DimensionMismatch(
            "matrix spaces differ from the scenario's canonical order".into(),
        ));
    }
    Ok(())
}

fn qf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Smallest verified dyadic `t ∈ [lo, 1]` with `ok(t)`, starting from a float
/// guess and refining by exact bisection.
fn dyadic_search(guess: f64, lo: f64, cfg: &CertifyConfig, ok: impl Fn(&Q) -> bool) -> Option<Q> {
    let one = Q::one();
    let mut hi = None;
    let mut margin = 1e-12;
    for _ in 0..12 {
        let t = dyadic_ceil((qf(guess) + margin).clamp(0.0, 1.0), cfg.search_bits);
        let t = if t > one { one.clone() } else { t };
        if ok(&t) {
            hi = Some(t);
            break;
        }
        margin *= 100.0;
    }
    let mut hi = match hi {
        Some(h) => h,
        None => {
            if ok(&one) {
                one.clone()
            } else {
                return None;
            }
        }
    };
    let mut lo = dyadic_ceil(lo.clamp(0.0, 1.0), cfg.search_bits);
    if lo >= hi {
        return Some(hi);
    }
    let min_width = Q::new(1.into(), num_bigint::BigInt::from(2).pow(cfg.search_bits));
    for _ in 0..cfg.bisection_steps {
        if &hi - &lo <= min_width {
            break;
        }
        let mid = (&lo + &hi) / Q::from_integer(2.into());
        let mid = dyadic_ceil(to_f64(&mid), cfg.search_bits);
        if mid >= hi || mid <= lo {
            break;
        }
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Upper bound from a primal superinstrument.
pub fn certify_upper(
    f: &BooleanFunction,
    slots: usize,
    class: ProcessClass,
    primal: &Superinstrument,
    cfg: &CertifyConfig,
) -> Result<BoundCertificate> {
    let scenario = ProcessScenario::query(f.n(), slots)?.contracted();
    let mut transcript = Vec::new();
    let frac = [
        RationalMatrix::from_choi(&primal.w[0], cfg.max_denominator, cfg.rounding)?,
        RationalMatrix::from_choi(&primal.w[1], cfg.max_denominator, cfg.rounding)?,
    ];
    transcript.push(format!(
        "rationalised W0, W1 ({:?}, M = {}; {} and {} nonzero entries)",
        cfg.rounding,
        cfg.max_denominator,
        frac[0].nnz(),
        frac[1].nnz()
    ));
    let herm = [frac[0].hermitian_part(), frac[1].hermitian_part()];
    let sum = herm[0].add(&herm[1])?;
    let proj = exact_project_subspace(&sum, class, &scenario)?;
    let corr = proj.sub(&sum)?;
    let half = q(1, 2);
    let valid = [herm[0].add(&corr.scale(&half))?, herm[1].add(&corr.scale(&half))?];
    transcript.push(format!("projected the sum onto the {class} subspace; correction split evenly"));

    let pencils = [Pencil::new(vec![&valid[0]]), Pencil::new(vec![&valid[1]])];
    let lam = pencils.iter().map(|p| p.min_eig(&[1.0], 0.0)).fold(f64::INFINITY, f64::min);
    let guess = if lam >= 0.0 { 0.0 } else { -lam / (1.0 - lam) };
    let ok = |mu: &Q| pencils.iter().all(|p| p.is_psd(&[Q::one() - mu], mu));
    let mu = if ok(&Q::zero()) {
        Q::zero()
    } else {
        dyadic_search(guess, guess * (1.0 - 1e-3), cfg, ok)
            .ok_or_else(|| Error::CertificationFailed("no identity mixing makes W PSD".into()))?
    };
    transcript.push(format!("identity mixing mu = {}", format_q(&mu)));
    let pos = [valid[0].mix_identity(&mu), valid[1].mix_identity(&mu)];
    let total = pos[0].trace() + pos[1].trace();
    if !total.is_positive() {
        return Err(Error::CertificationFailed("superinstrument has no trace".into()));
    }
    let scale = Q::from_integer((scenario.d_out() as i64).into()) / total;
    let fin = [pos[0].scale(&scale), pos[1].scale(&scale)];
    transcript.push(format!("renormalised by {}", format_q(&scale)));

    let value = upper_value(f, slots, &fin)?;
    transcript.push(format!("epsilon <= {} ~ {:.8}", format_q(&value), to_f64(&value)));
    Ok(BoundCertificate {
        kind: BoundKind::Upper,
        class,
        n: f.n(),
        slots,
        id: f.id(),
        value,
        lambdas: Vec::new(),
        matrices: vec![("W0".into(), fin[0].clone()), ("W1".into(), fin[1].clone())],
        transcript,
    })
}

/// `1 − min_i min_{f(x)=i} Tr[W_i O_x]`.
pub(crate) fn upper_value(f: &BooleanFunction, slots: usize, w: &[RationalMatrix; 2]) -> Result<Q> {
    let mut worst: Option<Q> = None;
    for p in 0..1usize << f.n() {
        let x = input_bits(f.n(), p);
        let o = oracle_rational(&x, slots, &w[0])?;
        let v = w[f.eval_index(p) as usize].trace_product(&o)?;
        worst = Some(match worst {
            Some(w) if w <= v => w,
            _ => v,
        });
    }
    Ok(Q::one() - worst.unwrap_or_else(Q::one))
}

/// Lower bound from a dual solution.
pub fn certify_lower(
    f: &BooleanFunction,
    slots: usize,
    class: ProcessClass,
    dual: &DualSolution,
    cfg: &CertifyConfig,
) -> Result<BoundCertificate> {
    let scenario = ProcessScenario::query(f.n(), slots)?.contracted();
    let mut transcript = Vec::new();

    let mut lambdas: Vec<(usize, usize, Q)> = Vec::new();
    for (i, group) in dual.lambdas.iter().enumerate() {
        for &(p, l) in group {
            if f.eval_index(p) as usize != i {
                return Err(Error::Invalid(format!("weight for input {p} is in the wrong group")));
            }
            lambdas.push((i, p, round_to(l.max(0.0), cfg.max_denominator, cfg.rounding)?));
        }
    }
    let delta = Q::one() - lambdas.iter().fold(Q::zero(), |a, l| a + &l.2);
    if delta.is_negative() {
        // the count N and the threshold −δ/N determine each other; iterate
        let mut n = lambdas.len();
        loop {
            if n == 0 {
                return Err(Error::CertificationFailed("weights cannot be renormalised".into()));
            }
            let thr = -&delta / Q::from_integer((n as i64).into());
            let m = lambdas.iter().filter(|l| l.2 >= thr).count();
            if m == n {
                break;
            }
            n = m;
        }
        let shift = &delta / Q::from_integer((n as i64).into());
        let thr = -&shift;
        for l in lambdas.iter_mut() {
            if l.2 >= thr {
                l.2 += &shift;
            }
        }
        transcript.push(format!("weights exceeded 1 by {}; reduced {n} of them", format_q(&-delta)));
    }
    let lsum = lambdas.iter().fold(Q::zero(), |a, l| a + &l.2);
    transcript.push(format!("sum of weights = {}", format_q(&lsum)));

    let s_frac = RationalMatrix::from_choi(&dual.wbar_star, cfg.max_denominator, cfg.rounding)?;
    let s_valid = exact_project_dual_cone(&s_frac.hermitian_part(), class, &scenario)?;
    transcript.push("rationalised, Hermitised and projected S onto the dual cone".into());

    let mut o = [
        RationalMatrix::zeros(s_valid.labels().to_vec()),
        RationalMatrix::zeros(s_valid.labels().to_vec()),
    ];
    for (i, p, l) in &lambdas {
        if l.is_zero() {
            continue;
        }
        let ox = oracle_rational(&input_bits(f.n(), *p), slots, &s_valid)?;
        o[*i] = o[*i].add(&ox.scale(l))?;
    }
    let pencil = Pencil::new(vec![&s_valid, &o[0], &o[1]]);
    let d_in = Q::from_integer((scenario.d_in() as i64).into());
    let dim = s_valid.dim() as f64;
    let tr_s = to_f64(&s_valid.trace());
    let tr_o = [to_f64(&o[0].trace()), to_f64(&o[1].trace())];
    let lsum_f = to_f64(&lsum);

    // float model of steps 6 and 7 for a given mixing weight
    let eta_f = |mu: f64, i: usize| -> f64 {
        let coeffs = |eta: f64| {
            let mut t = vec![1.0 - mu, 0.0, 0.0];
            t[1 + i] = eta - 1.0;
            t
        };
        if pencil.min_eig(&coeffs(0.0), mu) >= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if pencil.min_eig(&coeffs(mid), mu) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let bound_f = |mu: f64| -> f64 {
        let e = [eta_f(mu, 0), eta_f(mu, 1)];
        lsum_f - ((1.0 - mu) * tr_s + mu * dim + e[0] * tr_o[0] + e[1] * tr_o[1]) / scenario.d_in() as f64
    };
    let lam = pencil.min_eig(&[1.0, 0.0, 0.0], 0.0);
    let mu_min = if lam >= 0.0 { 0.0 } else { -lam / (1.0 - lam) };
    let mut candidates = vec![mu_min];
    let mut step = 1e-10;
    while step < 1e-1 {
        candidates.push(mu_min + step);
        step *= 4.0;
    }
    let mu_best = candidates
        .iter()
        .copied()
        .max_by(|a, b| bound_f(*a).total_cmp(&bound_f(*b)))
        .unwrap_or(mu_min);
    transcript.push(format!("float search: minimal mu ~ {mu_min:.3e}, chosen mu ~ {mu_best:.3e}"));

    let pos_ok = |mu: &Q| pencil.is_psd(&[Q::one() - mu, Q::zero(), Q::zero()], mu);
    let mut best: Option<(Q, [Q; 2], Q)> = None;
    for guess in [mu_best, mu_min] {
        let mu = if guess == 0.0 && pos_ok(&Q::zero()) {
            Q::zero()
        } else {
            match dyadic_search(guess, guess * (1.0 - 1e-3), cfg, pos_ok) {
                Some(m) => m,
                None => continue,
            }
        };
        let mu_f = to_f64(&mu);
        let mut etas = [Q::zero(), Q::zero()];
        for i in 0..2 {
            let ok = |eta: &Q| {
                let mut t = vec![Q::one() - &mu, Q::zero(), Q::zero()];
                t[1 + i] = eta - Q::one();
                pencil.is_psd(&t, &mu)
            };
            if ok(&Q::zero()) {
                continue;
            }
            let g = eta_f(mu_f, i);
            etas[i] = dyadic_search(g, g * (1.0 - 1e-3), cfg, ok)
                .ok_or_else(|| Error::CertificationFailed("no eta restores domination".into()))?;
        }
        let tr_final = (Q::one() - &mu) * s_valid.trace()
            + &mu * Q::from_integer((s_valid.dim() as i64).into())
            + &etas[0] * o[0].trace()
            + &etas[1] * o[1].trace();
        let value = &lsum - tr_final / &d_in;
        if best.as_ref().is_none_or(|b| value > b.2) {
            best = Some((mu, etas, value));
        }
    }
    let (mu, etas, value) =
        best.ok_or_else(|| Error::CertificationFailed("no identity mixing makes S PSD".into()))?;
    transcript.push(format!(
        "mu = {}, eta0 = {}, eta1 = {}",
        format_q(&mu),
        format_q(&etas[0]),
        format_q(&etas[1])
    ));
    let s_final = s_valid
        .mix_identity(&mu)
        .add(&o[0].scale(&etas[0]))?
        .add(&o[1].scale(&etas[1]))?;
    transcript.push(format!("epsilon >= {} ~ {:.8}", format_q(&value), to_f64(&value)));
    Ok(BoundCertificate {
        kind: BoundKind::Lower,
        class,
        n: f.n(),
        slots,
        id: f.id(),
        value,
        lambdas,
        matrices: vec![("S".into(), s_final)],
        transcript,
    })
}
