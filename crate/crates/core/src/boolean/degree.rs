use super::{input_bits, multilinear_interpolate, BooleanFunction, MultilinearPoly};
use crate::error::{Error, Result};
use smq_conic::{solve, ConeSpec, ConicProblem, Settings, SparseMatrix, Status};

/// Exact degree of the multilinear representation.
pub fn degree(f: &BooleanFunction) -> usize {
    multilinear_interpolate(f).degree(0.0)
}

fn monomials_up_to(n: usize, d: usize) -> Vec<u32> {
    (0..1u32 << n).filter(|m| m.count_ones() as usize <= d).collect()
}

/// Best uniform approximation error of `f` by polynomials of degree `<= d`,
/// together with an optimal polynomial.
pub fn approx_error(f: &BooleanFunction, d: usize) -> Result<(f64, MultilinearPoly)> {
    let n = f.n();
    let monos = monomials_up_to(n, d);
    let nv = monos.len() + 1;
    let t = monos.len();
    let mut trip = Vec::new();
    let mut b = Vec::new();
    for p in 0..1usize << n {
        let x = input_bits(n, p);
        let xm: u32 = (0..n).filter(|&i| x[i]).map(|i| 1u32 << i).sum();
        let fx = f.eval_index(p) as u8 as f64;
        let r = b.len();
        for (j, &m) in monos.iter().enumerate() {
            if m & xm == m {
                trip.push((r, j, 1.0));
                trip.push((r + 1, j, -1.0));
            }
        }
        trip.push((r, t, -1.0));
        trip.push((r + 1, t, -1.0));
        b.push(fx);
        b.push(-fx);
    }
    let rows = b.len();
    let a = SparseMatrix::from_triplets(rows, nv, &trip);
    let mut c = vec![0.0; nv];
    c[t] = 1.0;
    let cones = ConeSpec {
        zero: 0,
        nonneg: rows,
        psd: vec![],
    };
    let prob = ConicProblem::new(c, a, b, cones)?;
    let settings = Settings {
        tol: 1e-10,
        ..Settings::default()
    };
    let sol = solve(&prob, &settings)?;
    if !matches!(sol.status, Status::Optimal | Status::Inaccurate) {
        return Err(Error::SolverFailure {
            status: sol.status,
            residuals: sol.residuals,
        });
    }
    let mut poly = MultilinearPoly::zero(n);
    for (j, &m) in monos.iter().enumerate() {
        poly.add_term(m, sol.x[j]);
    }
    // the achieved error of the returned polynomial, not the LP value
    let exact = MultilinearPoly {
        n,
        coeffs: multilinear_interpolate(f).coeffs,
    };
    Ok((poly.max_deviation(&exact), poly))
}

/// Smallest `d` with approximation error at most `eps` (default 1/3).
pub fn approx_degree(f: &BooleanFunction, eps: f64) -> Result<usize> {
    const SLACK: f64 = 1e-7;
    let (mut lo, mut hi) = (0usize, degree(f));
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (err, _) = approx_error(f, mid)?;
        if err <= eps + SLACK {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_needs_full_degree() {
        let f = BooleanFunction::parity(4).unwrap();
        assert_eq!(degree(&f), 4);
        assert_eq!(approx_degree(&f, 1.0 / 3.0).unwrap(), 4);
        let (e, _) = approx_error(&f, 3).unwrap();
        assert!((e - 0.5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn constant_has_degree_zero() {
        let f = BooleanFunction::constant(3, true).unwrap();
        assert_eq!(degree(&f), 0);
        assert_eq!(approx_degree(&f, 1.0 / 3.0).unwrap(), 0);
    }
}
