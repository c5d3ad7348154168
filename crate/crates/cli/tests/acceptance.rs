//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. The n = 4 solves dominate the runtime.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use smq_conic::cone::{svec_index, svec_len};
use smq_conic::{solve, ConeSpec, ConicProblem, Settings, SparseMatrix, Status};
use smq_core::boolean::{degree, input_bits, npn_canonical, npn_classes, BooleanFunction};
use smq_core::certify::{
    certify_lower, certify_upper, parse_certificate, verify_certificate, write_certificate, CertifyConfig,
};
use smq_core::linalg::{link_product, ChoiObject, SpaceLabel, C64};
use smq_core::polymethod::extract_polynomial;
use smq_core::process::fixtures::{deutsch_comb, parity3_comb, quantum_switch, sequential_identity_comb};
use smq_core::process::{random_fo_comb, ProcessClass, ProcessScenario, SubspaceProjector};
use smq_core::sdp::{min_error, MinError, SdpConfig};
use smq_cli::{verify_qc, QcCheckConfig};
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

const TABLE: &str = include_str!("../../core/tests/data/table_n4_t2.csv");
const SPOT_IDS: [u64; 6] = [0, 1, 15, 105, 5865, 6630];
const GAP_ID: u64 = 5865;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfg(tol: f64) -> SdpConfig {
    SdpConfig {
        settings: Settings {
            tol,
            max_iters: 50_000,
            ..Settings::default()
        },
        ..SdpConfig::default()
    }
}

fn table() -> BTreeMap<u64, (f64, f64)> {
    TABLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), (v[1].parse().unwrap(), v[2].parse().unwrap()))
        })
        .collect()
}

/// n = 4, T = 2 solves shared by several criteria. The certified instance
/// is solved tighter than the spot checks.
struct Solves {
    runs: BTreeMap<(u64, ProcessClass), MinError>,
}

impl Solves {
    fn run() -> Result<Self, String> {
        let mut runs = BTreeMap::new();
        for id in SPOT_IDS {
            let tol = if id == GAP_ID { 1e-6 } else { 1e-5 };
            let f = BooleanFunction::from_id(4, id).map_err(|e| e.to_string())?;
            for class in [ProcessClass::Fo, ProcessClass::Gen] {
                let start = Instant::now();
                let r = min_error(&f, 2, class, &cfg(tol)).map_err(|e| format!("id {id} {class}: {e}"))?;
                eprintln!(
                    "  solved id {id} {class}: [{:.6}, {:.6}] {} in {:.1}s",
                    r.eps_dual,
                    r.eps_primal,
                    r.status,
                    start.elapsed().as_secs_f64()
                );
                runs.insert((id, class), r);
            }
        }
        Ok(Self { runs })
    }

    fn get(&self, id: u64, class: ProcessClass) -> &MinError {
        &self.runs[&(id, class)]
    }
}

fn ac1(s: &Solves) -> Outcome {
    let t = table();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for id in SPOT_IDS {
        let (fo, gen) = t[&id];
        let e_fo = s.get(id, ProcessClass::Fo).epsilon().max(0.0);
        let e_gen = s.get(id, ProcessClass::Gen).epsilon().max(0.0);
        worst = worst.max((e_fo - fo).abs()).max((e_gen - gen).abs());
        parts.push(format!("{id}: FO {e_fo:.5}/{fo:.5} Gen {e_gen:.5}/{gen:.5}"));
    }
    check(worst <= 5e-3, format!("max deviation {worst:.2e}; {}", parts.join("; ")))
}

fn ac2(s: &Solves) -> Outcome {
    let gap = s.get(GAP_ID, ProcessClass::Fo).epsilon() - s.get(GAP_ID, ProcessClass::Gen).epsilon();
    check((gap - 0.00947).abs() <= 2e-3, format!("gap {gap:.5} (target 0.00947 +- 2e-3)"))
}

fn ac3(s: &Solves) -> Outcome {
    let f = BooleanFunction::from_id(4, GAP_ID).map_err(|e| e.to_string())?;
    let c = CertifyConfig::default();
    let upper = certify_upper(&f, 2, ProcessClass::Gen, &s.get(GAP_ID, ProcessClass::Gen).primal, &c)
        .map_err(|e| format!("Gen upper: {e}"))?;
    let lower = certify_lower(&f, 2, ProcessClass::Fo, &s.get(GAP_ID, ProcessClass::Fo).dual, &c)
        .map_err(|e| format!("FO lower: {e}"))?;
    // only what survives the text round trip counts
    let reverify = |cert| {
        let text = write_certificate(cert);
        verify_certificate(&parse_certificate(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    };
    let u = reverify(&upper)?;
    let l = reverify(&lower)?;
    let (uf, lf) = (u.value_f64(), l.value_f64());
    check(
        u.value < l.value && uf <= 0.040 && lf >= 0.044,
        format!("certified Gen upper {uf:.6} < FO lower {lf:.6}"),
    )
}

fn ac4() -> Outcome {
    let and_class = npn_canonical(&BooleanFunction::and(3).map_err(|e| e.to_string())?).0.id();
    let reps = npn_classes(3).map_err(|e| e.to_string())?;
    let c = cfg(1e-7);
    let mut worst_other: f64 = 0.0;
    let mut and_vals = None;
    for &id in &reps {
        let f = BooleanFunction::from_id(3, id).map_err(|e| e.to_string())?;
        let fo = min_error(&f, 2, ProcessClass::Fo, &c).map_err(|e| e.to_string())?.epsilon();
        if id == and_class {
            let gen = min_error(&f, 2, ProcessClass::Gen, &c).map_err(|e| e.to_string())?.epsilon();
            and_vals = Some((fo, gen));
        } else {
            worst_other = worst_other.max(fo);
        }
    }
    let (fo, gen) = and_vals.ok_or("AND class missing from the representatives")?;
    check(
        worst_other <= 1e-4 && fo >= 1e-3 && (gen - fo).abs() <= 1e-3,
        format!(
            "{} classes; max FO error outside AND {worst_other:.2e}; AND FO {fo:.5} Gen {gen:.5}",
            reps.len()
        ),
    )
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let r = verify_qc(&QcCheckConfig::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        r.max_deviation <= 1e-9 && r.switch_deviation <= 1e-9 && r.distinct_fraction_above >= 0.9 && secs < 300.0,
        format!(
            "{} trials x {} unitaries: max deviation {:.2e}, switch {:.2e}, distinct above 1e-2 in {:.0}% ({secs:.1}s)",
            r.trials,
            r.unitaries_per_trial,
            r.max_deviation,
            r.switch_deviation,
            100.0 * r.distinct_fraction_above
        ),
    )
}

fn ac6(s: &Solves) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut max_deg = 0;
    let mut count = 0;
    for (&(id, _), r) in &s.runs {
        let f = BooleanFunction::from_id(4, id).map_err(|e| e.to_string())?;
        let g = extract_polynomial(&r.primal).map_err(|e| e.to_string())?;
        max_deg = max_deg.max(g.degree(1e-9));
        for p in 0..1usize << f.n() {
            let x = input_bits(f.n(), p);
            let prob = r.primal.outcome_probability(1, &x).map_err(|e| e.to_string())?;
            worst = worst.max((g.eval(&x) - prob).abs());
        }
        count += 1;
    }
    // rows of the reference table with zero Gen error need degree within 2T
    let mut zero_rows = 0;
    let mut bad = Vec::new();
    for (id, (_, gen)) in table() {
        if gen <= 1e-4 {
            zero_rows += 1;
            if degree(&BooleanFunction::from_id(4, id).map_err(|e| e.to_string())?) > 4 {
                bad.push(id);
            }
        }
    }
    check(
        max_deg <= 4 && worst <= 1e-7 && bad.is_empty(),
        format!(
            "{count} superinstruments: max degree {max_deg}, max |g - p| {worst:.2e}; {zero_rows} zero-error rows, violations {bad:?}"
        ),
    )
}

fn random_hermitian(labels: Vec<SpaceLabel>, rng: &mut ChaCha8Rng) -> ChoiObject {
    let d: usize = labels.iter().map(|s| s.dim).product();
    let g = DMatrix::from_fn(d, d, |_, _| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    ChoiObject::from_dmatrix(labels, &g).unwrap().hermitian_part()
}

fn random_matrix(labels: Vec<SpaceLabel>, rng: &mut ChaCha8Rng) -> ChoiObject {
    let d: usize = labels.iter().map(|s| s.dim).product();
    let g = DMatrix::from_fn(d, d, |_, _| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    ChoiObject::from_dmatrix(labels, &g).unwrap()
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let shapes = [
        ProcessScenario::new(2, 2, 1, 2).map_err(|e| e.to_string())?,
        ProcessScenario::new(2, 2, 2, 2).map_err(|e| e.to_string())?,
        ProcessScenario::new(3, 2, 1, 2).map_err(|e| e.to_string())?,
    ];
    let (mut idem, mut adj): (f64, f64) = (0.0, 0.0);
    for class in [ProcessClass::Fo, ProcessClass::Gen] {
        for k in 0..100 {
            let sc = shapes[k % shapes.len()];
            let p = SubspaceProjector::new(sc, class).map_err(|e| e.to_string())?;
            let a = random_hermitian(sc.labels(), &mut rng);
            let b = random_hermitian(sc.labels(), &mut rng);
            let pa = p.project(&a).map_err(|e| e.to_string())?;
            idem = idem.max(pa.distance(&p.project(&pa).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?);
            let lhs = a.inner(&p.project(&b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let rhs = pa.inner(&b).map_err(|e| e.to_string())?;
            adj = adj.max((lhs - rhs).norm());
        }
    }

    let mut fixtures = vec![
        sequential_identity_comb(2, 2).map_err(|e| e.to_string())?,
        deutsch_comb().map_err(|e| e.to_string())?,
        parity3_comb().map_err(|e| e.to_string())?,
    ];
    let sc = ProcessScenario::query(2, 2).map_err(|e| e.to_string())?;
    fixtures.push(random_fo_comb(sc, &[2, 2], &mut rng).map_err(|e| e.to_string())?.1);
    let mut fo_fixed: f64 = 0.0;
    for pm in &fixtures {
        let p = SubspaceProjector::new(pm.scenario, ProcessClass::Fo).map_err(|e| e.to_string())?;
        fo_fixed = fo_fixed.max(p.project(&pm.w).map_err(|e| e.to_string())?.distance(&pm.w).map_err(|e| e.to_string())?);
    }

    let sw = quantum_switch(2).and_then(|i| i.process()).map_err(|e| e.to_string())?;
    let dist = |class| -> Result<f64, String> {
        let p = SubspaceProjector::new(sw.scenario, class).map_err(|e| e.to_string())?;
        p.project(&sw.w).and_then(|x| x.distance(&sw.w)).map_err(|e| e.to_string())
    };
    let (sw_gen, sw_fo) = (dist(ProcessClass::Gen)?, dist(ProcessClass::Fo)?);

    let l = |n: &str, d| SpaceLabel::new(n, d);
    let mut link: f64 = 0.0;
    for _ in 0..50 {
        let d: Vec<usize> = (0..4).map(|_| rng.random_range(1..=3)).collect();
        let a = random_matrix(vec![l("A", d[0]), l("S", d[1])], &mut rng);
        let b = random_matrix(vec![l("S", d[1]), l("T", d[2]), l("B", d[3])], &mut rng);
        let c = random_matrix(vec![l("T", d[2]), l("C", d[0])], &mut rng);
        let ab = link_product(&a, &b).map_err(|e| e.to_string())?;
        let ba = link_product(&b, &a).map_err(|e| e.to_string())?;
        link = link.max(ab.distance(&ba).map_err(|e| e.to_string())? / (1.0 + ab.frobenius_norm()));
        let left = link_product(&ab, &c).map_err(|e| e.to_string())?;
        let bc = link_product(&b, &c).map_err(|e| e.to_string())?;
        let right = link_product(&a, &bc).map_err(|e| e.to_string())?;
        link = link.max(left.distance(&right).map_err(|e| e.to_string())? / (1.0 + left.frobenius_norm()));
    }

    check(
        idem <= 1e-10 && adj <= 1e-10 && fo_fixed <= 1e-10 && sw_gen <= 1e-10 && sw_fo > 1e-3 && link <= 1e-12,
        format!(
            "idempotence {idem:.1e}, adjointness {adj:.1e}, FO fixtures {fo_fixed:.1e}, switch Gen {sw_gen:.1e} FO {sw_fo:.2}, link {link:.1e}"
        ),
    )
}

/// `min Σ ⟨C_k, X_k⟩` over PSD blocks with `Σ Tr X_k = 1`; the optimum is the
/// smallest eigenvalue over all `C_k`.
fn eigen_problem(cs: &[DMatrix<f64>]) -> (ConicProblem, f64) {
    let n: usize = cs.iter().map(|c| svec_len(c.nrows())).sum();
    let mut obj = vec![0.0; n];
    let mut trip = Vec::new();
    let mut off = 0;
    let mut best = f64::INFINITY;
    for c in cs {
        let d = c.nrows();
        for i in 0..d {
            for j in i..d {
                let k = off + svec_index(d, i, j);
                obj[k] = if i == j { c[(i, i)] } else { c[(i, j)] * std::f64::consts::SQRT_2 };
                if i == j {
                    trip.push((0, k, 1.0));
                }
            }
        }
        for k in 0..svec_len(d) {
            trip.push((1 + off + k, off + k, -1.0));
        }
        off += svec_len(d);
        best = best.min(SymmetricEigen::new(c.clone()).eigenvalues.min());
    }
    let mut b = vec![0.0; 1 + n];
    b[0] = 1.0;
    let a = SparseMatrix::from_triplets(1 + n, n, &trip);
    let cones = ConeSpec {
        zero: 1,
        nonneg: 0,
        psd: cs.iter().map(|c| c.nrows()).collect(),
    };
    (ConicProblem::new(obj, a, b, cones).unwrap(), best)
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let settings = Settings {
        tol: 1e-9,
        max_iters: 200_000,
        ..Settings::default()
    };
    let (mut worst, mut duality): (f64, f64) = (0.0, f64::NEG_INFINITY);
    let mut not_optimal = 0;
    for _ in 0..50 {
        let blocks = rng.random_range(1..=3);
        let cs: Vec<DMatrix<f64>> = (0..blocks)
            .map(|_| {
                let d = rng.random_range(1..=4);
                let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
                (&m + m.transpose()) * 0.5
            })
            .collect();
        let (p, opt) = eigen_problem(&cs);
        let sol = solve(&p, &settings).map_err(|e| e.to_string())?;
        not_optimal += (sol.status != Status::Optimal) as usize;
        worst = worst.max((sol.primal_objective - opt).abs());
        // an approximately feasible pair can break weak duality by at most
        // the residuals weighted by the iterates
        let l1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
        let allowance = sol.residuals.dual * l1(&sol.x) + sol.residuals.primal * l1(&sol.y);
        duality = duality.max(sol.dual_objective - sol.primal_objective - allowance);
    }
    // the query programs' repaired iterates must bracket the optimum
    let mut bracket = f64::NEG_INFINITY;
    for (n, id, t) in [(2, 8, 1), (3, 0x96, 1), (3, 0x80, 2), (3, 0xe8, 1)] {
        let f = BooleanFunction::from_id(n, id).map_err(|e| e.to_string())?;
        for class in [ProcessClass::Fo, ProcessClass::Gen] {
            let r = min_error(&f, t, class, &cfg(1e-7)).map_err(|e| e.to_string())?;
            bracket = bracket.max(r.eps_dual - r.eps_primal);
        }
    }
    check(
        not_optimal == 0 && worst <= 1e-6 && duality <= 1e-12 && bracket <= 1e-9,
        format!(
            "50 problems: max objective error {worst:.2e}, max weak-duality excess over residual allowance {duality:.1e}; query dual - primal {bracket:.1e}"
        ),
    )
}

fn run(lines: &mut Vec<(&'static str, bool, String)>, name: &'static str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    eprintln!("  {name} finished in {secs:.1}s");
    let line = format!("{name} {} {detail} [{secs:.1}s]", if pass { "PASS" } else { "FAIL" });
    lines.push((name, pass, line));
}

fn main() {
    let mut lines = Vec::new();
    run(&mut lines, "AC4", ac4);
    run(&mut lines, "AC5", ac5);
    run(&mut lines, "AC7", ac7);
    run(&mut lines, "AC8", ac8);
    eprintln!("solving the n = 4, T = 2 instances");
    match Solves::run() {
        Ok(s) => {
            run(&mut lines, "AC1", || ac1(&s));
            run(&mut lines, "AC2", || ac2(&s));
            run(&mut lines, "AC3", || ac3(&s));
            run(&mut lines, "AC6", || ac6(&s));
        }
        Err(e) => {
            for name in ["AC1", "AC2", "AC3", "AC6"] {
                lines.push((name, false, format!("{name} FAIL n = 4 solves did not complete: {e}")));
            }
        }
    }
    lines.sort_by_key(|l| l.0);
    for (_, _, line) in &lines {
        println!("{line}");
    }
    if lines.iter().any(|l| !l.1) {
        std::process::exit(1);
    }
}
