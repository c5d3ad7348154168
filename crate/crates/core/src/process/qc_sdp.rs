//! Feasibility of the QC decomposition `W ↦ {W_(K,k)}` as a conic program.
//!
//! Each Hermitian unknown `W = A + iB` enters through the real embedding
//! `[[A, −B], [B, A]] + t·1 ⪰ 0`; the program minimises the shift `t`.

use super::ProcessMatrix;
use crate::error::Result;
use crate::linalg::{compose, digits, ChoiObject};
use crate::spaces::{slot_in, slot_out, FUTURE};
use smq_conic::{solve, svec_index, svec_len, ConeSpec, ConicProblem, Settings, SparseMatrix, Status};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct QcFeasibility {
    /// `max(0, t*)`, infinite when the linear conditions are inconsistent.
    pub violation: f64,
    pub shift: f64,
    pub status: Status,
}

struct Unknown {
    names: Vec<String>,
    dims: Vec<usize>,
    m: usize,
    offset: usize,
}

struct Equation {
    names: Vec<String>,
    dims: Vec<usize>,
    e: usize,
    row: usize,
}

fn strict_index(m: usize, i: usize, j: usize) -> usize {
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

enum Op {
    Trace(usize),
    Extend(usize, usize),
}

/// Image of `E_ij` under a partial trace or an identity extension, as matrix
/// positions of the equation space.
fn map_entry(u: &Unknown, op: &Op, i: usize, j: usize, out_dims: &[usize], buf: &mut Vec<(usize, usize)>) {
    buf.clear();
    let n = u.dims.len();
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    digits(i, &u.dims, &mut di);
    digits(j, &u.dims, &mut dj);
    match *op {
        Op::Trace(p) => {
            if di[p] != dj[p] {
                return;
            }
            di.remove(p);
            dj.remove(p);
            buf.push((compose(&di, out_dims), compose(&dj, out_dims)));
        }
        Op::Extend(p, dim) => {
            for y in 0..dim {
                di.insert(p, y);
                dj.insert(p, y);
                buf.push((compose(&di, out_dims), compose(&dj, out_dims)));
                di.remove(p);
                dj.remove(p);
            }
        }
    }
}

pub fn qc_feasibility(pm: &ProcessMatrix) -> Result<QcFeasibility> {
    let sc = pm.scenario;
    let t_max = sc.slots;
    let order = sc.names();
    let dim_of = |n: &str| sc.labels().into_iter().find(|s| s.name == n).map(|s| s.dim).unwrap();
    let canon = |mut v: Vec<String>| {
        v.sort_by_key(|n| order.iter().position(|o| o == n).unwrap());
        v
    };
    let base = |mask: u32| -> Vec<String> {
        let mut v = vec![order[0].clone()];
        for k in 1..=t_max {
            if mask >> (k - 1) & 1 == 1 {
                v.push(slot_in(k));
                v.push(slot_out(k));
            }
        }
        canon(v)
    };

    let mut unknowns: BTreeMap<(u32, usize), Unknown> = BTreeMap::new();
    let mut nvar = 0;
    for mask in 0u32..(1 << t_max) - 1 {
        for k in (1..=t_max).filter(|k| mask >> (k - 1) & 1 == 0) {
            let mut names = base(mask);
            names.push(slot_in(k));
            let names = canon(names);
            let dims: Vec<usize> = names.iter().map(|n| dim_of(n)).collect();
            let m: usize = dims.iter().product();
            unknowns.insert((mask, k), Unknown { names, dims, m, offset: nvar });
            nvar += m * m;
        }
    }
    let t_var = nvar;
    nvar += 1;

    let mut equations: BTreeMap<u32, Equation> = BTreeMap::new();
    let mut nrows = 0;
    for mask in 0u32..(1 << t_max) {
        let names = base(mask);
        let dims: Vec<usize> = names.iter().map(|n| dim_of(n)).collect();
        let e: usize = dims.iter().product();
        equations.insert(mask, Equation { names, dims, e, row: nrows });
        nrows += e * e;
    }

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = vec![0.0; nrows];
    let eq_rows = |eq: &Equation, r: usize, c: usize| {
        let re = eq.row + svec_index(eq.e, r, c);
        let im = if r < c { Some(eq.row + svec_len(eq.e) + strict_index(eq.e, r, c)) } else { None };
        (re, im)
    };

    let p0 = &equations[&0];
    for r in 0..p0.e {
        b[p0.row + svec_index(p0.e, r, r)] = 1.0;
    }
    let full = (1u32 << t_max) - 1;
    let eqt = &equations[&full];
    let names_t: Vec<&str> = eqt.names.iter().map(String::as_str).collect();
    let trf: ChoiObject = pm.w.partial_trace(&[FUTURE])?.permuted(&names_t)?;
    for r in 0..eqt.e {
        for c in r..eqt.e {
            let v = trf.get(r, c);
            let (re, im) = eq_rows(eqt, r, c);
            b[re] = -v.re;
            if let Some(im) = im {
                b[im] = -v.im;
            }
        }
    }

    let mut buf = Vec::new();
    for (&(mask, k), u) in &unknowns {
        let targets = [
            (mask, Op::Trace(u.names.iter().position(|n| *n == slot_in(k)).unwrap()), 1.0),
            (mask | 1 << (k - 1), {
                let eq = &equations[&(mask | 1 << (k - 1))];
                let p = eq.names.iter().position(|n| *n == slot_out(k)).unwrap();
                Op::Extend(p, sc.slot_dim)
            }, -1.0),
        ];
        for (eq_mask, op, sign) in &targets {
            let eq = &equations[eq_mask];
            for i in 0..u.m {
                for j in i..u.m {
                    // E_ij + E_ji carries A_ij; i(E_ij − E_ji) carries B_ij
                    let a_col = u.offset + svec_index(u.m, i, j);
                    let b_col = if i < j { Some(u.offset + svec_len(u.m) + strict_index(u.m, i, j)) } else { None };
                    for (pi, pj, w) in [(i, j, 1.0), (j, i, -1.0)] {
                        if i == j && w < 0.0 {
                            continue;
                        }
                        map_entry(u, op, pi, pj, &eq.dims, &mut buf);
                        for &(r, c) in &buf {
                            if r > c {
                                continue;
                            }
                            let (re, im) = eq_rows(eq, r, c);
                            // A part: real coefficient 1 at (pi,pj)
                            trip.push((re, a_col, *sign));
                            if let (Some(bc), Some(im)) = (b_col, im) {
                                trip.push((im, bc, sign * w));
                            }
                        }
                    }
                }
            }
        }
    }

    // t >= -1
    let nonneg_row = nrows;
    trip.push((nonneg_row, t_var, -1.0));
    b.push(1.0);
    let mut row = nrows + 1;
    let mut psd = Vec::new();
    for u in unknowns.values() {
        let (m, s) = (u.m, 2 * u.m);
        let sq = std::f64::consts::SQRT_2;
        for p in 0..s {
            for q in p..s {
                let r = row + svec_index(s, p, q);
                let scale = if p == q { 1.0 } else { sq };
                let (pi, qi) = (p % m, q % m);
                match (p < m, q < m) {
                    (true, true) | (false, false) => {
                        trip.push((r, u.offset + svec_index(m, pi, qi), -scale));
                    }
                    _ => {
                        // upper-right block holds −B; (p < m, q >= m) always here
                        if pi != qi {
                            let (lo, hi) = (pi.min(qi), pi.max(qi));
                            let sgn = if pi < qi { -1.0 } else { 1.0 };
                            trip.push((r, u.offset + svec_len(m) + strict_index(m, lo, hi), -scale * sgn));
                        }
                    }
                }
                if p == q {
                    trip.push((r, t_var, -1.0));
                }
            }
        }
        b.extend(std::iter::repeat_n(0.0, svec_len(s)));
        row += svec_len(s);
        psd.push(s);
    }

    let a = SparseMatrix::from_triplets(row, nvar, &trip);
    let mut c = vec![0.0; nvar];
    c[t_var] = 1.0;
    let cones = ConeSpec { zero: nrows, nonneg: 1, psd };
    let prob = ConicProblem::new(c, a, b, cones)?;
    let settings = Settings { tol: 1e-9, ..Settings::default() };
    let sol = solve(&prob, &settings)?;
    let shift = sol.x[t_var];
    let violation = match sol.status {
        Status::PrimalInfeasible => f64::INFINITY,
        _ if sol.residuals.primal > 1e-6 => f64::INFINITY,
        _ => shift.max(0.0),
    };
    Ok(QcFeasibility { violation, shift, status: sol.status })
}
