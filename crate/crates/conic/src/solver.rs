//! ADMM for `min cᵀx s.t. Ax + s = b, s ∈ K`.
//!
//! The iteration is the OSQP splitting with `P = 0` and the box replaced by
//! the translated cone `C = b − K`. The dual returned is the multiplier of the
//! conic constraint, which solves `max −bᵀy s.t. Aᵀy + c = 0, y ∈ K*`.

use crate::cone::ConeSpec;
use crate::error::{ConicError, Result};
use crate::problem::ConicProblem;
use crate::sparse::SparseMatrix;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Absolute and relative tolerance on primal, dual and gap residuals.
    pub tol: f64,
    pub max_iters: usize,
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Ruiz equilibration passes; 0 disables scaling.
    pub scaling_iters: usize,
    pub adaptive_rho: bool,
    pub adaptive_rho_interval: usize,
    pub check_interval: usize,
    pub eps_infeasible: f64,
    /// Seconds; ignored on targets without a clock.
    pub time_limit: Option<f64>,
    /// Above this many variables the KKT system is solved by conjugate gradients.
    pub dense_limit: usize,
    pub verbose: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 50_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            scaling_iters: 15,
            adaptive_rho: true,
            adaptive_rho_interval: 50,
            check_interval: 5,
            eps_infeasible: 1e-7,
            time_limit: None,
            dense_limit: 6000,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Stopped early; the best iterate is within 100× the tolerance.
    Inaccurate,
    MaxIters,
    PrimalInfeasible,
    DualInfeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Inaccurate => "inaccurate",
            Status::MaxIters => "max_iters",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Absolute residuals in the unscaled problem (∞-norms).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    /// Multiplier of the conic constraint, in `K*`.
    pub y: Vec<f64>,
    /// Slack `b − Ax` projected onto `K`.
    pub s: Vec<f64>,
    pub status: Status,
    pub residuals: Residuals,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub wall_time: f64,
    pub rho: f64,
}

pub fn solve(p: &ConicProblem, settings: &Settings) -> Result<ConicSolution> {
    solve_warm(p, settings, None, None)
}

struct Scaling {
    d: Vec<f64>,
    e: Vec<f64>,
    c_scale: f64,
}

fn clamp_norm(v: f64) -> f64 {
    if v < 1e-4 {
        1.0
    } else {
        v.min(1e4)
    }
}

fn equilibrate(a: &mut SparseMatrix, cones: &ConeSpec, c: &[f64], iters: usize) -> Scaling {
    let (m, n) = (a.nrows(), a.ncols());
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let groups = cones.scaling_groups();
    for _ in 0..iters {
        let cn = a.col_inf_norms();
        let rn = a.row_inf_norms();
        let de: Vec<f64> = cn.iter().map(|&v| 1.0 / clamp_norm(v).sqrt()).collect();
        let mut dd = vec![1.0; m];
        for g in &groups {
            let mx = rn[g.clone()].iter().copied().fold(0.0, f64::max);
            let s = 1.0 / clamp_norm(mx).sqrt();
            dd[g.clone()].iter_mut().for_each(|v| *v = s);
        }
        a.scale(&dd, &de);
        d.iter_mut().zip(&dd).for_each(|(a, b)| *a *= b);
        e.iter_mut().zip(&de).for_each(|(a, b)| *a *= b);
    }
    let cmax = c
        .iter()
        .zip(&e)
        .map(|(c, e)| (c * e).abs())
        .fold(0.0, f64::max);
    let c_scale = if iters == 0 { 1.0 } else { 1.0 / clamp_norm(cmax) };
    Scaling { d, e, c_scale }
}

enum Kkt {
    Dense {
        g: DMatrix<f64>,
        chol: Cholesky<f64, Dyn>,
    },
    Cg {
        gdiag: Vec<f64>,
        warm: Vec<f64>,
    },
}

struct Workspace<'a> {
    a: &'a SparseMatrix,
    r0: Vec<f64>,
    sigma: f64,
    rho: f64,
    kkt: Kkt,
}

impl<'a> Workspace<'a> {
    fn new(a: &'a SparseMatrix, cones: &ConeSpec, sigma: f64, rho: f64, dense_limit: usize) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        let mut r0 = vec![1.0; m];
        r0[..cones.zero].iter_mut().for_each(|v| *v = 1e3);
        let kkt = if n <= dense_limit {
            let mut g = DMatrix::<f64>::zeros(n, n);
            for (i, row) in a.rows().iter().enumerate() {
                let w = r0[i];
                for &(j, vj) in row {
                    for &(k, vk) in row {
                        if k >= j {
                            g[(j, k)] += w * vj * vk;
                        }
                    }
                }
            }
            for j in 0..n {
                for k in 0..j {
                    g[(j, k)] = g[(k, j)];
                }
            }
            let chol = factor(&g, sigma, rho)?;
            Kkt::Dense { g, chol }
        } else {
            let mut gdiag = vec![0.0; n];
            for (r, c, v) in a.triplets() {
                gdiag[c] += r0[r] * v * v;
            }
            Kkt::Cg {
                gdiag,
                warm: vec![0.0; n],
            }
        };
        Ok(Self {
            a,
            r0,
            sigma,
            rho,
            kkt,
        })
    }

    fn set_rho(&mut self, rho: f64) -> Result<()> {
        self.rho = rho;
        if let Kkt::Dense { g, chol } = &mut self.kkt {
            *chol = factor(g, self.sigma, rho)?;
        }
        Ok(())
    }

    fn r(&self, i: usize) -> f64 {
        self.rho * self.r0[i]
    }

    fn solve(&mut self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        match &mut self.kkt {
            Kkt::Dense { chol, .. } => {
                let mut v = DVector::from_column_slice(rhs);
                chol.solve_mut(&mut v);
                out.copy_from_slice(v.as_slice());
                Ok(())
            }
            Kkt::Cg { gdiag, warm } => {
                let (sigma, rho) = (self.sigma, self.rho);
                let a = self.a;
                let r0 = &self.r0;
                let apply = |v: &[f64], out: &mut [f64]| {
                    let mut t = vec![0.0; a.nrows()];
                    a.mul_vec(v, &mut t);
                    t.iter_mut().zip(r0).for_each(|(t, r)| *t *= rho * r);
                    a.mul_t_vec(&t, out);
                    out.iter_mut().zip(v).for_each(|(o, v)| *o += sigma * v);
                };
                let precond: Vec<f64> = gdiag.iter().map(|g| 1.0 / (sigma + rho * g)).collect();
                pcg(apply, &precond, rhs, warm)?;
                out.copy_from_slice(warm);
                Ok(())
            }
        }
    }
}

fn factor(g: &DMatrix<f64>, sigma: f64, rho: f64) -> Result<Cholesky<f64, Dyn>> {
    let mut k = g * rho;
    for i in 0..k.nrows() {
        k[(i, i)] += sigma;
    }
    Cholesky::new(k).ok_or_else(|| ConicError::NumericalBreakdown("KKT factorization failed".into()))
}

fn pcg(apply: impl Fn(&[f64], &mut [f64]), precond: &[f64], b: &[f64], x: &mut [f64]) -> Result<()> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(());
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(precond).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..(10 * n).max(100) {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-12 * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(ConicError::NumericalBreakdown("conjugate gradient lost definiteness".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * precond[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

#[cfg(not(target_arch = "wasm32"))]
struct Clock(std::time::Instant);
#[cfg(not(target_arch = "wasm32"))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
#[cfg(target_arch = "wasm32")]
struct Clock;
#[cfg(target_arch = "wasm32")]
impl Clock {
    fn start() -> Self {
        Clock
    }
    fn elapsed(&self) -> f64 {
        0.0
    }
}

struct Eval {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    res: Residuals,
    /// Largest residual relative to its tolerance; ≤ 1 means converged.
    merit: f64,
    pobj: f64,
    dobj: f64,
    prim_ratio: f64,
    dual_ratio: f64,
}

/// Solves with optional warm start given in unscaled coordinates.
pub fn solve_warm(
    p: &ConicProblem,
    settings: &Settings,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<ConicSolution> {
    p.validate()?;
    let clock = Clock::start();
    let (m, n) = (p.num_rows(), p.num_vars());
    let cones = &p.cones;

    let mut a_hat = p.a.clone();
    let sc = equilibrate(&mut a_hat, cones, &p.c, settings.scaling_iters);
    let b_hat: Vec<f64> = p.b.iter().zip(&sc.d).map(|(b, d)| b * d).collect();
    let c_hat: Vec<f64> = p
        .c
        .iter()
        .zip(&sc.e)
        .map(|(c, e)| c * e * sc.c_scale)
        .collect();

    let mut ws = Workspace::new(&a_hat, cones, settings.sigma, settings.rho, settings.dense_limit)?;

    let project_c = |v: &mut [f64]| {
        // Π_C(v) = b − Π_K(b − v)
        let mut w: Vec<f64> = b_hat.iter().zip(v.iter()).map(|(b, v)| b - v).collect();
        cones.project(&mut w);
        for i in 0..v.len() {
            v[i] = b_hat[i] - w[i];
        }
    };

    let mut x = match x0 {
        Some(x0) => x0.iter().zip(&sc.e).map(|(x, e)| x / e).collect(),
        None => vec![0.0; n],
    };
    let mut z = vec![0.0; m];
    a_hat.mul_vec(&x, &mut z);
    project_c(&mut z);
    let mut y = match y0 {
        Some(y0) => y0
            .iter()
            .zip(&sc.d)
            .map(|(y, d)| y * sc.c_scale / d)
            .collect(),
        None => vec![0.0; m],
    };

    let unscale = |x: &[f64], z: &[f64], y: &[f64]| -> Eval {
        let xu: Vec<f64> = x.iter().zip(&sc.e).map(|(x, e)| x * e).collect();
        let zu: Vec<f64> = z.iter().zip(&sc.d).map(|(z, d)| z / d).collect();
        let yu: Vec<f64> = y
            .iter()
            .zip(&sc.d)
            .map(|(y, d)| y * d / sc.c_scale)
            .collect();
        let mut ax = vec![0.0; m];
        p.a.mul_vec(&xu, &mut ax);
        let mut aty = vec![0.0; n];
        p.a.mul_t_vec(&yu, &mut aty);
        let rp = ax.iter().zip(&zu).map(|(a, z)| (a - z).abs()).fold(0.0, f64::max);
        let rd = aty.iter().zip(&p.c).map(|(a, c)| (a + c).abs()).fold(0.0, f64::max);
        let cx = dot(&p.c, &xu);
        let by = dot(&p.b, &yu);
        let gap = (cx + by).abs();
        let tol = settings.tol;
        let pn = inf_norm(&ax).max(inf_norm(&zu));
        let dn = inf_norm(&aty).max(inf_norm(&p.c));
        let gn = cx.abs().max(by.abs());
        let prim_ratio = rp / (tol + tol * pn);
        let dual_ratio = rd / (tol + tol * dn);
        let gap_ratio = gap / (tol + tol * gn);
        let s: Vec<f64> = p.b.iter().zip(&zu).map(|(b, z)| b - z).collect();
        Eval {
            x: xu,
            y: yu,
            s,
            res: Residuals {
                primal: rp,
                dual: rd,
                gap,
            },
            merit: prim_ratio.max(dual_ratio).max(gap_ratio),
            pobj: cx + p.objective_offset,
            dobj: -by + p.objective_offset,
            prim_ratio: rp / pn.max(1e-12),
            dual_ratio: rd / dn.max(1e-12),
        }
    };

    let alpha = settings.alpha;
    let mut rhs = vec![0.0; n];
    let mut xt = vec![0.0; n];
    let mut zt = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    let mut x_prev = x.clone();
    let mut y_prev = y.clone();
    let mut best: Option<Eval> = None;
    let mut status = Status::MaxIters;
    let mut iters = 0;

    for k in 1..=settings.max_iters {
        iters = k;
        x_prev.copy_from_slice(&x);
        y_prev.copy_from_slice(&y);

        for i in 0..m {
            tmp[i] = ws.r(i) * z[i] - y[i];
        }
        a_hat.mul_t_vec(&tmp, &mut rhs);
        for j in 0..n {
            rhs[j] += settings.sigma * x[j] - c_hat[j];
        }
        ws.solve(&rhs, &mut xt)?;
        a_hat.mul_vec(&xt, &mut zt);
        for j in 0..n {
            x[j] = alpha * xt[j] + (1.0 - alpha) * x[j];
        }
        // tmp <- relaxed z, zt <- z⁺
        for i in 0..m {
            tmp[i] = alpha * zt[i] + (1.0 - alpha) * z[i];
            zt[i] = tmp[i] + y[i] / ws.r(i);
        }
        project_c(&mut zt);
        for i in 0..m {
            y[i] += ws.r(i) * (tmp[i] - zt[i]);
        }
        z.copy_from_slice(&zt);

        let last = k == settings.max_iters;
        if k % settings.check_interval.max(1) != 0 && !last {
            continue;
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(ConicError::NumericalBreakdown(format!("non-finite iterate at iteration {k}")));
        }
        let ev = unscale(&x, &z, &y);
        if settings.verbose && k % (settings.check_interval * 20).max(1) == 0 {
            eprintln!(
                "iter {k:6}  pobj {:+.8e}  dobj {:+.8e}  rp {:.2e}  rd {:.2e}  gap {:.2e}  rho {:.2e}",
                ev.pobj, ev.dobj, ev.res.primal, ev.res.dual, ev.res.gap, ws.rho
            );
        }
        let converged = ev.merit <= 1.0;
        let (pr, dr) = (ev.prim_ratio, ev.dual_ratio);
        if best.as_ref().map_or(true, |b| ev.merit < b.merit) {
            best = Some(ev);
        }
        if converged {
            status = Status::Optimal;
            break;
        }

        if let Some(st) = infeasibility(p, &sc, &x, &x_prev, &y, &y_prev, settings.eps_infeasible) {
            status = st;
            break;
        }

        if let Some(limit) = settings.time_limit {
            if clock.elapsed() > limit {
                break;
            }
        }

        if settings.adaptive_rho && k % settings.adaptive_rho_interval.max(1) == 0 && dr > 0.0 {
            let new_rho = (ws.rho * (pr / dr).sqrt()).clamp(1e-6, 1e6);
            if new_rho > 5.0 * ws.rho || new_rho < 0.2 * ws.rho {
                ws.set_rho(new_rho)?;
            }
        }
    }

    let best = best.expect("at least one residual evaluation");
    if status == Status::MaxIters && best.merit <= 100.0 {
        status = Status::Inaccurate;
    }
    let (x, y, s, res, pobj, dobj) = match status {
        Status::PrimalInfeasible | Status::DualInfeasible => {
            let ev = unscale(&x, &z, &y);
            (ev.x, ev.y, ev.s, ev.res, ev.pobj, ev.dobj)
        }
        _ => (best.x, best.y, best.s, best.res, best.pobj, best.dobj),
    };
    let mut s = s;
    cones.project(&mut s);
    Ok(ConicSolution {
        x,
        y,
        s,
        status,
        residuals: res,
        primal_objective: pobj,
        dual_objective: dobj,
        iterations: iters,
        wall_time: clock.elapsed(),
        rho: ws.rho,
    })
}

fn infeasibility(
    p: &ConicProblem,
    sc: &Scaling,
    x: &[f64],
    x_prev: &[f64],
    y: &[f64],
    y_prev: &[f64],
    eps: f64,
) -> Option<Status> {
    let (m, n) = (p.num_rows(), p.num_vars());
    let dy: Vec<f64> = (0..m)
        .map(|i| (y[i] - y_prev[i]) * sc.d[i] / sc.c_scale)
        .collect();
    let dyn_ = inf_norm(&dy);
    if dyn_ > 1e-10 {
        let mut atdy = vec![0.0; n];
        p.a.mul_t_vec(&dy, &mut atdy);
        if inf_norm(&atdy) <= eps * dyn_
            && dot(&p.b, &dy) < -eps * dyn_
            && p.cones.dist_dual(&dy) <= eps * dyn_
        {
            return Some(Status::PrimalInfeasible);
        }
    }
    let dx: Vec<f64> = (0..n).map(|j| (x[j] - x_prev[j]) * sc.e[j]).collect();
    let dxn = inf_norm(&dx);
    if dxn > 1e-10 {
        let mut adx = vec![0.0; m];
        p.a.mul_vec(&dx, &mut adx);
        adx.iter_mut().for_each(|v| *v = -*v);
        if dot(&p.c, &dx) < -eps * dxn && p.cones.dist(&adx) <= eps * dxn {
            return Some(Status::DualInfeasible);
        }
    }
    None
}
