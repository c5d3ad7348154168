//! Plain-text certificate files and their independent verification.
//!
//! ```text
//! smq-certificate 1
//! kind upper
//! class Gen
//! n 4
//! T 2
//! id 5865
//! value 1234/56789
//! lambda 0 5 1/16          (lower bounds only)
//! matrix W0 625 1350
//! 0 0 1/25 0
//! ...
//! end
//! ```
//!
//! Lines starting with `#` are comments; the transcript is written that way.

use super::psd::{exact_psd_check, quadratic_form};
use super::rational::{format_q, parse_q, to_f64, RationalMatrix, Q};
use super::{exact_project_dual_cone, oracle_rational, upper_value, BoundCertificate, BoundKind};
use crate::boolean::{input_bits, BooleanFunction};
use crate::error::{Error, Result};
use crate::process::{ProcessClass, ProcessScenario, SubspaceProjector};
use num_traits::{One, Signed, Zero};
use std::fmt::Write as _;

const MAGIC: &str = "smq-certificate 1";

pub fn write_certificate(c: &BoundCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    for line in &c.transcript {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "kind {}", c.kind);
    let _ = writeln!(s, "class {}", c.class);
    let _ = writeln!(s, "n {}", c.n);
    let _ = writeln!(s, "T {}", c.slots);
    let _ = writeln!(s, "id {}", c.id);
    let _ = writeln!(s, "value {}", format_q(&c.value));
    for (i, p, l) in &c.lambdas {
        let _ = writeln!(s, "lambda {i} {p} {}", format_q(l));
    }
    for (name, m) in &c.matrices {
        let _ = writeln!(s, "matrix {name} {} {}", m.dim(), m.nnz());
        for (r, col, (re, im)) in m.entries() {
            let _ = writeln!(s, "{r} {col} {} {}", format_q(re), format_q(im));
        }
    }
    let _ = writeln!(s, "end");
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("certificate line {line}: {msg}"))
}

pub fn parse_certificate(text: &str) -> Result<BoundCertificate> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "missing header")),
    }
    let (mut kind, mut class, mut n, mut slots, mut id, mut value) = (None, None, None, None, None, None);
    let mut transcript = Vec::new();
    let mut lambdas = Vec::new();
    let mut matrices = Vec::new();
    let mut ended = false;
    while let Some((k, line)) = lines.next() {
        if let Some(c) = line.strip_prefix('#') {
            transcript.push(c.trim().to_string());
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(k, format!("bad integer '{s}'")));
        match parts.as_slice() {
            ["kind", v] => kind = Some(v.parse::<BoundKind>()?),
            ["class", v] => class = Some(v.parse::<ProcessClass>()?),
            ["n", v] => n = Some(num(v)?),
            ["T", v] => slots = Some(num(v)?),
            ["id", v] => id = Some(v.parse::<u64>().map_err(|_| bad(k, "bad id"))?),
            ["value", v] => value = Some(parse_q(v)?),
            ["lambda", i, p, l] => lambdas.push((num(i)?, num(p)?, parse_q(l)?)),
            ["matrix", name, dim, nnz] => {
                let (n, t) = match (n, slots) {
                    (Some(n), Some(t)) => (n, t),
                    _ => return Err(bad(k, "matrix before n and T")),
                };
                let labels = ProcessScenario::query(n, t)?.contracted().labels();
                let mut m = RationalMatrix::zeros(labels);
                if m.dim() != num(dim)? {
                    return Err(bad(k, format!("matrix dimension {dim} does not fit n and T")));
                }
                for _ in 0..num(nnz)? {
                    let (k, line) = lines.next().ok_or_else(|| bad(k, "truncated matrix"))?;
                    let e: Vec<&str> = line.split_whitespace().collect();
                    let [r, c, re, im] = e.as_slice() else {
                        return Err(bad(k, "expected 'row col re im'"));
                    };
                    let (r, c) = (num(r)?, num(c)?);
                    if r >= m.dim() || c >= m.dim() {
                        return Err(bad(k, "entry out of range"));
                    }
                    m.set(r, c, (parse_q(re)?, parse_q(im)?));
                }
                matrices.push((name.to_string(), m));
            }
            ["end"] => {
                ended = true;
                break;
            }
            _ => return Err(bad(k, format!("unrecognised line '{line}'"))),
        }
    }
    if !ended {
        return Err(Error::Invalid("certificate has no 'end' line".into()));
    }
    let missing = |f: &str| Error::Invalid(format!("certificate lacks '{f}'"));
    Ok(BoundCertificate {
        kind: kind.ok_or_else(|| missing("kind"))?,
        class: class.ok_or_else(|| missing("class"))?,
        n: n.ok_or_else(|| missing("n"))?,
        slots: slots.ok_or_else(|| missing("T"))?,
        id: id.ok_or_else(|| missing("id"))?,
        value: value.ok_or_else(|| missing("value"))?,
        lambdas,
        matrices,
        transcript,
    })
}

/// Outcome of a successful verification.
#[derive(Debug, Clone)]
pub struct VerifiedBound {
    pub kind: BoundKind,
    pub class: ProcessClass,
    pub id: u64,
    /// The bound recomputed from the certificate data.
    pub value: Q,
    pub checks: Vec<String>,
}

impl VerifiedBound {
    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::CertificationFailed(msg.into())
}

fn matrix<'a>(c: &'a BoundCertificate, name: &str) -> Result<&'a RationalMatrix> {
    c.matrices
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, m)| m)
        .ok_or_else(|| fail(format!("matrix {name} is missing")))
}

fn check_psd(m: &RationalMatrix, name: &str) -> Result<()> {
    if !m.is_hermitian() {
        return Err(fail(format!("{name} is not Hermitian")));
    }
    let v = exact_psd_check(m);
    if let Some(z) = v.witness {
        let val = quadratic_form(m, &z);
        return Err(fail(format!(
            "{name} is not positive semidefinite (witness gives {} ~ {:.3e})",
            format_q(&val),
            to_f64(&val)
        )));
    }
    Ok(())
}

/// Rechecks every constraint in exact arithmetic, recomputes the bound and
/// reports the first violated condition.
pub fn verify_certificate(c: &BoundCertificate) -> Result<VerifiedBound> {
    if c.class == ProcessClass::Qc {
        return Err(fail("QC certificates are not supported"));
    }
    let f = BooleanFunction::from_id(c.n, c.id)?;
    let scenario = ProcessScenario::query(c.n, c.slots)?.contracted();
    for (name, m) in &c.matrices {
        if m.labels() != scenario.labels().as_slice() {
            return Err(fail(format!("matrix {name} is not on the query spaces")));
        }
    }
    let mut checks = Vec::new();
    let value = match c.kind {
        BoundKind::Upper => {
            let w = [matrix(c, "W0")?.clone(), matrix(c, "W1")?.clone()];
            for (i, wi) in w.iter().enumerate() {
                check_psd(wi, &format!("W{i}"))?;
                checks.push(format!("W{i} is positive semidefinite"));
            }
            let sum = w[0].add(&w[1])?;
            let proj = SubspaceProjector::new(scenario, c.class)?;
            for cond in proj.conditions() {
                let r = sum.apply_terms(&cond.terms);
                if r.nnz() != 0 {
                    return Err(fail(format!("W0 + W1 violates condition {}", cond.name)));
                }
                checks.push(format!("condition {} holds", cond.name));
            }
            let d_out = Q::from_integer((scenario.d_out() as i64).into());
            if sum.trace() != d_out {
                return Err(fail(format!(
                    "Tr(W0 + W1) = {}, expected {}",
                    format_q(&sum.trace()),
                    scenario.d_out()
                )));
            }
            checks.push(format!("trace equals {}", scenario.d_out()));
            let v = upper_value(&f, c.slots, &w)?;
            if c.value < v {
                return Err(fail(format!(
                    "claimed upper bound {} is below the attained error {}",
                    format_q(&c.value),
                    format_q(&v)
                )));
            }
            v
        }
        BoundKind::Lower => {
            let s = matrix(c, "S")?;
            let mut sum = Q::zero();
            for (i, p, l) in &c.lambdas {
                if *p >= 1 << c.n || *i > 1 {
                    return Err(fail(format!("weight index ({i}, {p}) out of range")));
                }
                if f.eval_index(*p) as usize != *i {
                    return Err(fail(format!("input {p} is not in the preimage of {i}")));
                }
                if l.is_negative() {
                    return Err(fail(format!("weight on input {p} is negative")));
                }
                sum += l;
            }
            if sum > Q::one() {
                return Err(fail(format!("weights sum to {} > 1", format_q(&sum))));
            }
            checks.push(format!("weights are nonnegative with sum {}", format_q(&sum)));
            if !s.is_hermitian() {
                return Err(fail("S is not Hermitian"));
            }
            if exact_project_dual_cone(s, c.class, &scenario)? != *s {
                return Err(fail(format!("S is not in the {} dual cone", c.class)));
            }
            checks.push(format!("S lies in the {} dual cone", c.class));
            for i in 0..2 {
                let mut y = s.clone();
                for (g, p, l) in &c.lambdas {
                    if *g == i && !l.is_zero() {
                        y = y.sub(&oracle_rational(&input_bits(c.n, *p), c.slots, s)?.scale(l))?;
                    }
                }
                check_psd(&y, &format!("S - sum of weighted oracles for outcome {i}"))?;
                checks.push(format!("S dominates the weighted oracles for outcome {i}"));
            }
            let d_in = Q::from_integer((scenario.d_in() as i64).into());
            let v = sum - s.trace() / d_in;
            if c.value > v {
                return Err(fail(format!(
                    "claimed lower bound {} exceeds the certified value {}",
                    format_q(&c.value),
                    format_q(&v)
                )));
            }
            v
        }
    };
    Ok(VerifiedBound {
        kind: c.kind,
        class: c.class,
        id: c.id,
        value,
        checks,
    })
}
