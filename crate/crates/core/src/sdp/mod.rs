//! Minimum-error programs for computing a Boolean function with `T` queries.
//!
//! The primal minimises `ε` over superinstruments `{W^{[0]}, W^{[1]}}` with
//! `Tr[W^{[i]} O_x^{⊗T}] ≥ 1 − ε` for `f(x) = i`, `W^{[i]} ⪰ 0`,
//! `W^{[0]} + W^{[1]}` in the class subspace and of trace `d^O`. The dual
//! maximises `Σλ − Tr(W̄*)/d^I` over `λ ≥ 0`, `Σλ ≤ 1` and `W̄*` in the dual
//! cone with `W̄* ⪰ Σ_{f(x)=i} λ_x O_x^{⊗T}` for both `i`.

mod basis;
mod solution;

pub use basis::{BlockBasis, Reduction, FULL_DIM_LIMIT};
pub use solution::{DualSolution, SolveRecord, Superinstrument};

use crate::boolean::{input_bits, BooleanFunction};
use crate::error::{Error, Result};
use crate::process::{ProcessClass, ProcessScenario, SubspaceProjector};
use smq_conic::{
    solve_warm, svec_len, ConeSpec, ConicProblem, ConicSolution, Residuals, Settings, SparseMatrix, Status, VarBlock,
    VarShape,
};

/// Default cap on the side of each `W^{[i]}`.
pub const DEFAULT_SIZE_CAP: usize = 700;

#[derive(Debug, Clone)]
pub struct SdpConfig {
    pub reduction: Reduction,
    pub size_cap: usize,
    pub settings: Settings,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            reduction: Reduction::Twirl,
            size_cap: DEFAULT_SIZE_CAP,
            settings: Settings::default(),
        }
    }
}

/// Data shared by the primal and dual programs of one instance.
#[derive(Debug, Clone)]
pub struct QuerySdp {
    pub f: BooleanFunction,
    pub slots: usize,
    pub class: ProcessClass,
    /// Query scenario with the output contracted.
    pub scenario: ProcessScenario,
    pub basis: BlockBasis,
    pi_l: SparseMatrix,
    comp: SparseMatrix,
    oracles: [Vec<(usize, Vec<(usize, f64)>)>; 2],
}

/// Row positions of the primal, needed to read off dual variables.
struct PrimalLayout {
    subspace_rows: Vec<usize>,
    trace_row: usize,
    oracle_rows: [Vec<usize>; 2],
}

fn negate(v: &[(usize, f64)]) -> impl Iterator<Item = (usize, f64)> + '_ {
    v.iter().map(|&(c, x)| (c, -x))
}

impl QuerySdp {
    pub fn new(f: &BooleanFunction, slots: usize, class: ProcessClass, cfg: &SdpConfig) -> Result<Self> {
        if class == ProcessClass::Qc {
            return Err(Error::Invalid(
                "no query program for QC; on repeated oracles it coincides with FO".into(),
            ));
        }
        let scenario = ProcessScenario::query(f.n(), slots)?.contracted();
        let side = scenario.dim();
        if side > cfg.size_cap {
            return Err(Error::SizeCap(format!(
                "W has side {side}, above the cap of {}",
                cfg.size_cap
            )));
        }
        let basis = BlockBasis::new(&scenario, cfg.reduction)?;
        let proj = SubspaceProjector::new(scenario, class)?;
        let pi_l = basis.replace_operator(proj.terms())?;
        let len = basis.len();
        let mut comp_trip: Vec<(usize, usize, f64)> = (0..len).map(|c| (c, c, 1.0)).collect();
        comp_trip.extend(pi_l.triplets().map(|(r, c, v)| (r, c, -v)));
        let comp = SparseMatrix::from_triplets(len, len, &prune(comp_trip));

        let d = f.n() + 1;
        let mut strides = vec![1usize; 2 * slots];
        for k in (0..2 * slots - 1).rev() {
            strides[k] = strides[k + 1] * d;
        }
        let mut oracles: [Vec<(usize, Vec<(usize, f64)>)>; 2] = [Vec::new(), Vec::new()];
        for p in 0..1usize << f.n() {
            let x = input_bits(f.n(), p);
            let mut psi = Vec::with_capacity(d.pow(slots as u32));
            for z in 0..d.pow(slots as u32) {
                let (mut idx, mut sign, mut rest) = (0, 1.0, z);
                for k in (0..slots).rev() {
                    let zk = rest % d;
                    rest /= d;
                    idx += zk * (strides[2 * k] + strides[2 * k + 1]);
                    if zk > 0 && x[zk - 1] {
                        sign = -sign;
                    }
                }
                psi.push((idx, sign));
            }
            psi.sort_by_key(|e| e.0);
            oracles[f.eval_index(p) as usize].push((p, basis.rank_one(&psi)?));
        }
        Ok(Self {
            f: f.clone(),
            slots,
            class,
            scenario,
            basis,
            pi_l,
            comp,
            oracles,
        })
    }

    pub fn d_out(&self) -> f64 {
        self.scenario.d_out() as f64
    }

    pub fn d_in(&self) -> f64 {
        self.scenario.d_in() as f64
    }

    /// Side of each full matrix.
    pub fn side(&self) -> usize {
        self.scenario.dim()
    }

    /// `Π_L` in block coordinates.
    pub fn subspace_projector(&self) -> &SparseMatrix {
        &self.pi_l
    }

    /// Oracle coordinates grouped by the value of `f`, with table positions.
    pub fn oracles(&self) -> &[Vec<(usize, Vec<(usize, f64)>)>; 2] {
        &self.oracles
    }

    fn psd_layout(&self) -> (Vec<usize>, Vec<usize>) {
        let mut scalars = Vec::new();
        let mut psd = Vec::new();
        for (b, blk) in self.basis.blocks().iter().enumerate() {
            if blk.len() == 1 {
                scalars.push(self.basis.block_offset(b));
            } else {
                psd.push(b);
            }
        }
        (scalars, psd)
    }

    fn primal_with_layout(&self) -> Result<(ConicProblem, PrimalLayout)> {
        let len = self.basis.len();
        let nv = 1 + 2 * len;
        let w_off = [1, 1 + len];
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        let mut b = Vec::new();
        let mut row = 0;

        let mut subspace_rows = Vec::new();
        for (r, entries) in self.comp_rows().into_iter().enumerate() {
            if entries.is_empty() {
                continue;
            }
            for &(c, v) in &entries {
                trip.push((row, w_off[0] + c, v));
                trip.push((row, w_off[1] + c, v));
            }
            b.push(0.0);
            subspace_rows.push(r);
            row += 1;
        }
        let trace_row = row;
        for c in (0..len).filter(|&c| self.basis.is_diagonal(c)) {
            trip.push((row, w_off[0] + c, 1.0));
            trip.push((row, w_off[1] + c, 1.0));
        }
        b.push(self.d_out());
        row += 1;
        let zero = row;

        trip.push((row, 0, -1.0));
        b.push(0.0);
        row += 1;
        let mut oracle_rows = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for (_, o) in &self.oracles[i] {
                trip.push((row, 0, -1.0));
                trip.extend(negate(o).map(|(c, v)| (row, w_off[i] + c, v)));
                b.push(-1.0);
                oracle_rows[i].push(row);
                row += 1;
            }
        }
        let (scalars, psd) = self.psd_layout();
        for off in w_off {
            for &c in &scalars {
                trip.push((row, off + c, -1.0));
                b.push(0.0);
                row += 1;
            }
        }
        let nonneg = row - zero;
        let mut cones = Vec::new();
        for off in w_off {
            for &blk in &psd {
                let d = self.basis.blocks()[blk].len();
                let start = self.basis.block_offset(blk);
                for k in 0..svec_len(d) {
                    trip.push((row, off + start + k, -1.0));
                    b.push(0.0);
                    row += 1;
                }
                cones.push(d);
            }
        }
        let mut c = vec![0.0; nv];
        c[0] = 1.0;
        let a = SparseMatrix::from_triplets(row, nv, &trip);
        let mut p = ConicProblem::new(
            c,
            a,
            b,
            ConeSpec {
                zero,
                nonneg,
                psd: cones,
            },
        )?;
        p.vars = vec![
            VarBlock {
                name: "eps".into(),
                offset: 0,
                shape: VarShape::Scalar,
            },
            VarBlock {
                name: "W0".into(),
                offset: w_off[0],
                shape: VarShape::Vector(len),
            },
            VarBlock {
                name: "W1".into(),
                offset: w_off[1],
                shape: VarShape::Vector(len),
            },
        ];
        Ok((
            p,
            PrimalLayout {
                subspace_rows,
                trace_row,
                oracle_rows,
            },
        ))
    }

    /// Rows of `1 − Π_L`.
    fn comp_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.basis.len()];
        for (r, c, v) in self.comp.triplets() {
            rows[r].push((c, v));
        }
        rows
    }

    /// Variables `(ε, W^{[0]}, W^{[1]})`; the optimum is `ε_T^C(f)`.
    pub fn primal(&self) -> Result<ConicProblem> {
        Ok(self.primal_with_layout()?.0)
    }

    /// Variables `(λ^{[0]}, λ^{[1]}, W̄*)`, cone membership written as
    /// `Π_cone(W̄*) = W̄*`. The problem minimises `Tr(W̄*)/d^I − Σλ`, so its
    /// optimum is `−ε_T^C(f)`.
    pub fn dual(&self) -> Result<ConicProblem> {
        let len = self.basis.len();
        let nl = [self.oracles[0].len(), self.oracles[1].len()];
        let s_off = nl[0] + nl[1];
        let l_off = [0, nl[0]];
        let nv = s_off + len;
        let side = self.side() as f64;
        let diag: Vec<usize> = (0..len).filter(|&c| self.basis.is_diagonal(c)).collect();
        let mut trip = Vec::new();
        let mut b = Vec::new();
        let mut row = 0;

        let mut pi_rows = vec![Vec::new(); len];
        for (r, c, v) in self.pi_l.triplets() {
            pi_rows[r].push((c, v));
        }
        for (r, entries) in pi_rows.into_iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = entries.into_iter().map(|(c, v)| (c, -v)).collect();
            if self.basis.is_diagonal(r) {
                entries.extend(diag.iter().map(|&c| (c, 1.0 / side)));
            }
            let entries = prune(entries.into_iter().map(|(c, v)| (0, c, v)).collect());
            if entries.is_empty() {
                continue;
            }
            trip.extend(entries.into_iter().map(|(_, c, v)| (row, s_off + c, v)));
            b.push(0.0);
            row += 1;
        }
        let zero = row;

        for k in 0..s_off {
            trip.push((row, k, -1.0));
            b.push(0.0);
            row += 1;
        }
        for k in 0..s_off {
            trip.push((row, k, 1.0));
        }
        b.push(1.0);
        row += 1;

        // Y_i = W̄* − Σ λ O_x, as nonnegative scalars and PSD blocks
        let mut y_coeffs: [Vec<Vec<(usize, f64)>>; 2] = [vec![Vec::new(); len], vec![Vec::new(); len]];
        for i in 0..2 {
            for (j, (_, o)) in self.oracles[i].iter().enumerate() {
                for &(c, v) in o {
                    y_coeffs[i][c].push((l_off[i] + j, v));
                }
            }
        }
        let (scalars, psd) = self.psd_layout();
        let push_y = |i: usize, c: usize, row: usize, trip: &mut Vec<(usize, usize, f64)>| {
            trip.push((row, s_off + c, -1.0));
            trip.extend(y_coeffs[i][c].iter().map(|&(k, v)| (row, k, v)));
        };
        for i in 0..2 {
            for &c in &scalars {
                push_y(i, c, row, &mut trip);
                b.push(0.0);
                row += 1;
            }
        }
        let nonneg = row - zero;
        let mut cones = Vec::new();
        for i in 0..2 {
            for &blk in &psd {
                let d = self.basis.blocks()[blk].len();
                let start = self.basis.block_offset(blk);
                for k in 0..svec_len(d) {
                    push_y(i, start + k, row, &mut trip);
                    b.push(0.0);
                    row += 1;
                }
                cones.push(d);
            }
        }
        let mut c = vec![-1.0; nv];
        for k in s_off..nv {
            c[k] = 0.0;
        }
        for &d in &diag {
            c[s_off + d] = 1.0 / self.d_in();
        }
        let a = SparseMatrix::from_triplets(row, nv, &trip);
        let mut p = ConicProblem::new(
            c,
            a,
            b,
            ConeSpec {
                zero,
                nonneg,
                psd: cones,
            },
        )?;
        p.vars = vec![
            VarBlock {
                name: "lambda0".into(),
                offset: 0,
                shape: VarShape::Vector(nl[0]),
            },
            VarBlock {
                name: "lambda1".into(),
                offset: l_off[1],
                shape: VarShape::Vector(nl[1]),
            },
            VarBlock {
                name: "Wbar_star".into(),
                offset: s_off,
                shape: VarShape::Vector(len),
            },
        ];
        Ok(p)
    }

    fn mul(m: &SparseMatrix, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m.nrows()];
        m.mul_vec(v, &mut out);
        out
    }

    fn oracle_value(o: &[(usize, f64)], w: &[f64]) -> f64 {
        o.iter().map(|&(c, v)| v * w[c]).sum()
    }

    /// Makes `(W^{[0]}, W^{[1]})` exactly feasible up to rounding: the sum is
    /// projected onto the subspace with its trace fixed, the correction split
    /// evenly, and both parts mixed with white noise just enough to be PSD.
    /// Returns the repaired pair and its worst-case error.
    pub fn repair_primal(&self, w0: &[f64], w1: &[f64]) -> ([Vec<f64>; 2], f64) {
        let len = self.basis.len();
        let sum: Vec<f64> = w0.iter().zip(w1).map(|(a, b)| a + b).collect();
        let mut target = Self::mul(&self.pi_l, &sum);
        let shift = (self.d_out() - self.basis.trace(&target)) / self.side() as f64;
        let id = self.basis.identity();
        target.iter_mut().zip(&id).for_each(|(t, i)| *t += shift * i);
        let mut w = [w0.to_vec(), w1.to_vec()];
        for wi in &mut w {
            for c in 0..len {
                wi[c] += 0.5 * (target[c] - sum[c]);
            }
        }
        let noise = self.d_out() / (2.0 * self.side() as f64);
        let lam = w.iter().map(|wi| self.basis.min_eigenvalue(wi)).fold(f64::INFINITY, f64::min);
        if lam < 0.0 {
            let mu = (-lam / (noise - lam) * (1.0 + 1e-12)).min(1.0);
            for wi in &mut w {
                for c in 0..len {
                    wi[c] = (1.0 - mu) * wi[c] + mu * noise * id[c];
                }
            }
        }
        let mut worst_p = f64::INFINITY;
        for i in 0..2 {
            for (_, o) in &self.oracles[i] {
                worst_p = worst_p.min(Self::oracle_value(o, &w[i]));
            }
        }
        let eps = (1.0 - worst_p).max(0.0);
        (w, eps)
    }

    /// Makes `(λ, W̄*)` dual feasible: weights clamped and normalised, `W̄*`
    /// projected onto the dual cone and shifted by the identity until it
    /// dominates both weighted oracle sums. Returns the repaired pair and the
    /// lower bound it certifies.
    pub fn repair_dual(&self, lambdas: &[Vec<f64>; 2], s: &[f64]) -> ([Vec<f64>; 2], Vec<f64>, f64) {
        let mut l = [
            lambdas[0].iter().map(|v| v.max(0.0)).collect::<Vec<_>>(),
            lambdas[1].iter().map(|v| v.max(0.0)).collect::<Vec<_>>(),
        ];
        let total: f64 = l.iter().flatten().sum();
        if total > 1.0 {
            l.iter_mut().flatten().for_each(|v| *v /= total);
        }
        let id = self.basis.identity();
        // Π_cone(S) = S − Π_L(S) + Tr(S)/D · 1
        let t = self.basis.trace(s) / self.side() as f64;
        let mut s = Self::mul(&self.comp, s);
        s.iter_mut().zip(&id).for_each(|(x, i)| *x += t * i);
        let mut need: f64 = 0.0;
        for i in 0..2 {
            let mut m = s.clone();
            for (j, (_, o)) in self.oracles[i].iter().enumerate() {
                for &(c, v) in o {
                    m[c] -= l[i][j] * v;
                }
            }
            need = need.max(-self.basis.min_eigenvalue(&m));
        }
        let shift = need.max(0.0) * (1.0 + 1e-12);
        s.iter_mut().zip(&id).for_each(|(x, i)| *x += shift * i);
        let bound = l.iter().flatten().sum::<f64>() - self.basis.trace(&s) / self.d_in();
        (l, s, bound)
    }

    fn superinstrument(&self, w: &[Vec<f64>; 2]) -> Result<Superinstrument> {
        Superinstrument::new(self.scenario, self.basis.to_choi(&w[0])?, self.basis.to_choi(&w[1])?)
    }

    fn dual_solution(&self, l: &[Vec<f64>; 2], s: &[f64]) -> Result<DualSolution> {
        let lambdas = [0, 1].map(|i| {
            self.oracles[i]
                .iter()
                .zip(&l[i])
                .map(|((p, _), v)| (*p, *v))
                .collect::<Vec<_>>()
        });
        Ok(DualSolution {
            scenario: self.scenario,
            lambdas,
            wbar_star: self.basis.to_choi(s)?,
        })
    }

    /// Solves the primal and reads both bounds off the repaired iterates.
    pub fn solve(&self, settings: &Settings, warm: Option<&ConicSolution>) -> Result<MinError> {
        let (p, layout) = self.primal_with_layout()?;
        let sol = solve_warm(
            &p,
            settings,
            warm.map(|w| w.x.as_slice()),
            warm.map(|w| w.y.as_slice()),
        )?;
        if matches!(sol.status, Status::PrimalInfeasible | Status::DualInfeasible) {
            return Err(Error::SolverFailure {
                status: sol.status,
                residuals: sol.residuals,
            });
        }
        let len = self.basis.len();
        let (w, eps_primal) = self.repair_primal(&sol.x[1..1 + len], &sol.x[1 + len..]);

        let lambdas = [0, 1].map(|i| layout.oracle_rows[i].iter().map(|&r| sol.y[r]).collect::<Vec<_>>());
        let mut ym = vec![0.0; len];
        for (k, &r) in layout.subspace_rows.iter().enumerate() {
            ym[r] = sol.y[k];
        }
        let mut s = vec![0.0; len];
        self.comp.mul_t_vec(&ym, &mut s);
        let y_tr = sol.y[layout.trace_row];
        s.iter_mut()
            .zip(self.basis.identity())
            .for_each(|(x, i)| *x += y_tr * i);
        let (l, s, eps_dual) = self.repair_dual(&lambdas, &s);

        Ok(MinError {
            eps_primal,
            eps_dual,
            gap: eps_primal - eps_dual,
            status: sol.status,
            residuals: sol.residuals,
            iterations: sol.iterations,
            wall_time: sol.wall_time,
            primal: self.superinstrument(&w)?,
            dual: self.dual_solution(&l, &s)?,
            block_primal: w,
            block_dual: (l, s),
            raw: sol,
        })
    }
}

fn prune(mut trip: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
    for (r, c, v) in trip {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2.abs() > 1e-14);
    out
}

/// Result of [`min_error`]. `eps_dual ≤ ε ≤ eps_primal` up to rounding.
#[derive(Debug, Clone)]
pub struct MinError {
    /// Worst-case error of the repaired primal iterate.
    pub eps_primal: f64,
    /// Lower bound certified by the repaired dual iterate.
    pub eps_dual: f64,
    pub gap: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub iterations: usize,
    pub wall_time: f64,
    pub primal: Superinstrument,
    pub dual: DualSolution,
    /// The repaired iterates in block coordinates.
    pub block_primal: [Vec<f64>; 2],
    pub block_dual: ([Vec<f64>; 2], Vec<f64>),
    pub raw: ConicSolution,
}

impl MinError {
    /// The reported value, which is the dual side.
    pub fn epsilon(&self) -> f64 {
        self.eps_dual
    }

    pub fn record(&self, f: &BooleanFunction, slots: usize, class: ProcessClass) -> SolveRecord {
        SolveRecord {
            id: f.id(),
            n: f.n(),
            t: slots,
            class,
            eps_primal: self.eps_primal,
            eps_dual: self.eps_dual,
            gap: self.gap,
            iters: self.iterations,
            wall_time: self.wall_time,
            status: self.status.to_string(),
        }
    }
}

pub fn build_primal(f: &BooleanFunction, slots: usize, class: ProcessClass) -> Result<ConicProblem> {
    QuerySdp::new(f, slots, class, &SdpConfig::default())?.primal()
}

pub fn build_dual(f: &BooleanFunction, slots: usize, class: ProcessClass) -> Result<ConicProblem> {
    QuerySdp::new(f, slots, class, &SdpConfig::default())?.dual()
}

pub fn min_error(f: &BooleanFunction, slots: usize, class: ProcessClass, cfg: &SdpConfig) -> Result<MinError> {
    QuerySdp::new(f, slots, class, cfg)?.solve(&cfg.settings, None)
}
