use super::BooleanFunction;
use std::collections::BTreeMap;
use std::fmt;

/// Real multilinear polynomial. Monomial masks use bit `i − 1` for `x_i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultilinearPoly {
    pub n: usize,
    pub coeffs: BTreeMap<u32, f64>,
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(0, c);
        p
    }

    pub fn add_term(&mut self, mask: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.coeffs.entry(mask).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: &[bool]) -> f64 {
        let xm: u32 = x
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| 1u32 << i)
            .sum();
        self.coeffs
            .iter()
            .filter(|(&m, _)| m & xm == m)
            .map(|(_, c)| c)
            .sum()
    }

    /// Largest monomial size with `|c_S| > tol`.
    pub fn degree(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(m, _)| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn truncated(&self, tol: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Product with multilinear reduction `x_i² = x_i`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n.max(other.n));
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &other.coeffs {
                out.add_term(ma | mb, ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.n = self.n.max(other.n);
        for (m, c) in &other.coeffs {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.coeffs {
            out.add_term(*m, c * s);
        }
        out
    }

    /// `max_x |p(x) − q(x)|` over the Boolean cube.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let n = self.n.max(other.n);
        (0..1usize << n)
            .map(|p| {
                let x = super::input_bits(n, p);
                (self.eval(&x) - other.eval(&x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn monomial_order(a: &u32, b: &u32) -> std::cmp::Ordering {
    a.count_ones()
        .cmp(&b.count_ones())
        .then_with(|| a.reverse_bits().cmp(&b.reverse_bits()).reverse())
}

fn fmt_coeff(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

/// Canonical text: monomials by degree, then lexicographically by variables.
impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(&u32, &f64)> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| monomial_order(a.0, b.0));
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&m, &c)) in terms.iter().enumerate() {
            let mono: String = (0..32)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| format!("x{}", i + 1))
                .collect();
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mono.is_empty() {
                write!(f, "{}", fmt_coeff(mag))?;
            } else if mag == 1.0 {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}{mono}", fmt_coeff(mag))?;
            }
        }
        Ok(())
    }
}

/// Möbius transform of the table: `c_S = Σ_{R⊆S} (−1)^{|S|−|R|} f(1_R)`.
pub fn multilinear_interpolate(f: &BooleanFunction) -> MultilinearPoly {
    let n = f.n();
    let mut v: Vec<i64> = (0..1u32 << n)
        .map(|mask| {
            // position of the input 1_mask, x1 being the most significant bit
            let p: usize = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| 1usize << (n - 1 - i)).sum();
            f.eval_index(p) as i64
        })
        .collect();
    for i in 0..n {
        let bit = 1usize << i;
        for m in 0..v.len() {
            if m & bit != 0 {
                v[m] -= v[m ^ bit];
            }
        }
    }
    let mut p = MultilinearPoly::zero(n);
    for (m, c) in v.into_iter().enumerate() {
        p.add_term(m as u32, c as f64);
    }
    p
}
