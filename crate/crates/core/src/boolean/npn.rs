use super::BooleanFunction;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `g(x) = out ⊕ f(y)` with `y[perm[i]] = x[i] ⊕ neg_i`, where bit `i` of
/// `input_neg` is `neg_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NpnTransform {
    pub perm: Vec<usize>,
    pub input_neg: u32,
    pub output_neg: bool,
}

impl NpnTransform {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            input_neg: 0,
            output_neg: false,
        }
    }

    fn position_map(&self) -> Vec<usize> {
        let n = self.perm.len();
        (0..1usize << n)
            .map(|p| {
                let mut q = 0usize;
                for i in 0..n {
                    let xi = (p >> (n - 1 - i)) & 1;
                    let yi = xi ^ ((self.input_neg >> i) & 1) as usize;
                    q |= yi << (n - 1 - self.perm[i]);
                }
                q
            })
            .collect()
    }
}

pub fn apply_npn(f: &BooleanFunction, t: &NpnTransform) -> Result<BooleanFunction> {
    let n = f.n();
    let mut seen = vec![false; n];
    if t.perm.len() != n || t.perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(Error::Invalid(format!("{:?} is not a permutation of 0..{n}", t.perm)));
    }
    let map = t.position_map();
    let table = map.iter().map(|&q| t.output_neg ^ f.eval_index(q)).collect();
    BooleanFunction::from_table(n, table)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                rec(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All input transforms (permutation and negation) with their position maps.
fn input_transforms(n: usize) -> Vec<(NpnTransform, Vec<usize>)> {
    let mut out = Vec::new();
    for perm in permutations(n) {
        for neg in 0..1u32 << n {
            let t = NpnTransform {
                perm: perm.clone(),
                input_neg: neg,
                output_neg: false,
            };
            let map = t.position_map();
            out.push((t, map));
        }
    }
    out
}

fn id_under(table: &[bool], map: &[usize], out: bool) -> u64 {
    map.iter().fold(0u64, |acc, &q| (acc << 1) | (out ^ table[q]) as u64)
}

/// Minimal id over the NPN orbit, with a transform reaching it.
pub fn npn_canonical(f: &BooleanFunction) -> (BooleanFunction, NpnTransform) {
    let mut best: Option<(u64, NpnTransform)> = None;
    for (t, map) in input_transforms(f.n()) {
        for out in [false, true] {
            let id = id_under(f.table(), &map, out);
            if best.as_ref().is_none_or(|(b, _)| id < *b) {
                let mut t = t.clone();
                t.output_neg = out;
                best = Some((id, t));
            }
        }
    }
    let (id, t) = best.expect("at least the identity transform");
    (BooleanFunction::from_id(f.n(), id).expect("id of an n-bit table"), t)
}

/// Canonical representatives of all NPN classes, ascending. Limited to n <= 4.
pub fn npn_classes(n: usize) -> Result<Vec<u64>> {
    if n == 0 || n > 4 {
        return Err(Error::Invalid(format!("class enumeration supports 1 <= n <= 4, got {n}")));
    }
    let total = 1usize << (1 << n);
    let transforms = input_transforms(n);
    let mut seen = vec![false; total];
    let mut reps = Vec::new();
    for id in 0..total as u64 {
        if seen[id as usize] {
            continue;
        }
        let f = BooleanFunction::from_id(n, id)?;
        let mut min = id;
        for (_, map) in &transforms {
            for out in [false, true] {
                let g = id_under(f.table(), map, out);
                seen[g as usize] = true;
                min = min.min(g);
            }
        }
        reps.push(min);
    }
    reps.sort_unstable();
    Ok(reps)
}
