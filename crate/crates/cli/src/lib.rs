//! Commands behind the `smq` binary. Each writes JSON lines to the given sink
//! and returns its results, so the same code drives the binary and the tests.

pub mod config;
mod qc_check;

pub use config::{FileConfig, Overrides, RunConfig, Selector};
pub use qc_check::{verify_qc, QcCheckConfig, QcReport};

use serde::{Deserialize, Serialize};
use serde_json::json;
use smq_conic::{export_problem, Settings, Status};
use smq_core::boolean::{approx_degree, degree, multilinear_interpolate, npn_classes, BooleanFunction};
use smq_core::certify::{
    certify_lower, certify_upper, format_q, parse_certificate, verify_certificate, write_certificate, BoundCertificate,
    BoundKind, CertifyConfig,
};
use smq_core::polymethod::polynomial_lower_bound;
use smq_core::process::ProcessClass;
use smq_core::sdp::{min_error, MinError, QuerySdp, SdpConfig, SolveRecord};
use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] smq_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver stopped with status {0}")]
    NotOptimal(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Core(smq_core::Error::Invalid(_)) => "usage",
            Self::Core(smq_core::Error::SizeCap(_)) => "size_cap",
            Self::Core(_) => "computation",
            Self::Io(_) => "io",
            Self::NotOptimal(_) => "not_optimal",
            Self::Verification(_) => "verification",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "not_optimal" => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn emit(out: &mut dyn Write, v: &impl Serialize) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string(v).map_err(|e| CliError::Usage(e.to_string()))?)?;
    Ok(())
}

/// `x` rounded half-to-even at `decimals` places, as printed in tables.
///
/// Formatting works on the exact binary value, so ties only occur for values
/// that are exactly representable.
pub fn round_half_even(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn sdp_config(cfg: &RunConfig) -> SdpConfig {
    SdpConfig {
        settings: Settings {
            tol: cfg.tol,
            max_iters: cfg.max_iters,
            ..Settings::default()
        },
        ..SdpConfig::default()
    }
}

fn function(cfg: &RunConfig, id: u64) -> CliResult<BooleanFunction> {
    BooleanFunction::from_id(cfg.n, id).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn solve_one(cfg: &RunConfig, id: u64, class: ProcessClass) -> CliResult<MinError> {
    let f = function(cfg, id)?;
    Ok(min_error(&f, cfg.t, class, &sdp_config(cfg))?)
}

/// Writes the primal (or dual) program in the `.cpi` format.
pub fn cmd_dump_problem(cfg: &RunConfig, id: u64, class: ProcessClass, dual: bool, path: &Path) -> CliResult<()> {
    let f = function(cfg, id)?;
    let sdp = QuerySdp::new(&f, cfg.t, class, &sdp_config(cfg))?;
    let p = if dual { sdp.dual()? } else { sdp.primal()? };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, export_problem(&p))?;
    Ok(())
}

pub fn cmd_solve(
    cfg: &RunConfig,
    id: u64,
    class: ProcessClass,
    dump: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<SolveRecord> {
    if let Some(path) = dump {
        cmd_dump_problem(cfg, id, class, false, path)?;
    }
    let f = function(cfg, id)?;
    let r = solve_one(cfg, id, class)?;
    let rec = r.record(&f, cfg.t, class);
    emit(out, &rec)?;
    if r.status != Status::Optimal {
        return Err(CliError::NotOptimal(rec.status));
    }
    Ok(rec)
}

/// One line of the checkpoint file for a failed solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FailedRow {
    id: u64,
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    class: ProcessClass,
    status: String,
    error: String,
}

/// Table row with one error column per class.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub id: u64,
    pub eps: BTreeMap<ProcessClass, f64>,
}

impl TableRow {
    pub fn gap(&self) -> Option<f64> {
        Some(self.eps.get(&ProcessClass::Fo)?.max(0.0) - self.eps.get(&ProcessClass::Gen)?.max(0.0))
    }
}

pub fn table_ids(cfg: &RunConfig, npn_only: bool) -> CliResult<Vec<u64>> {
    match cfg.select {
        Selector::Id(id) => Ok(vec![id]),
        Selector::Npn if npn_only => Ok(npn_classes(cfg.n)?),
        _ => {
            if cfg.n > 4 {
                return Err(CliError::Usage("full enumeration is limited to n <= 4".into()));
            }
            Ok((0..1u64 << (1u32 << cfg.n)).collect())
        }
    }
}

fn load_checkpoint(path: &Path, cfg: &RunConfig) -> CliResult<Vec<SolveRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut done = Vec::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        // failed rows do not parse as records and are retried
        if let Ok(r) = serde_json::from_str::<SolveRecord>(&line) {
            if r.n == cfg.n && r.t == cfg.t {
                done.push(r);
            }
        }
    }
    Ok(done)
}

/// Solves every selected function for every class, appending each result to
/// a checkpoint so an interrupted run resumes where it stopped. Writes
/// `table.csv` next to the checkpoint and returns the rows sorted by id.
pub fn cmd_table(cfg: &RunConfig, npn_only: bool, checkpoint: Option<&Path>, out: &mut dyn Write) -> CliResult<Vec<TableRow>> {
    let ids = table_ids(cfg, npn_only)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let ck: PathBuf = checkpoint
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out_dir.join(format!("records_n{}_T{}.jsonl", cfg.n, cfg.t)));
    let mut records = load_checkpoint(&ck, cfg)?;
    let done: HashSet<(u64, ProcessClass)> = records.iter().map(|r| (r.id, r.class)).collect();
    let jobs: Vec<(u64, ProcessClass)> = ids
        .iter()
        .flat_map(|&id| cfg.classes.iter().map(move |&c| (id, c)))
        .filter(|j| !done.contains(j))
        .collect();

    let writer = Mutex::new(OpenOptions::new().create(true).append(true).open(&ck)?);
    let fresh = Mutex::new(Vec::new());
    let run = |&(id, class): &(u64, ProcessClass)| -> CliResult<()> {
        let line = match solve_one(cfg, id, class) {
            Ok(r) => {
                let f = function(cfg, id)?;
                let rec = r.record(&f, cfg.t, class);
                let line = serde_json::to_string(&rec).map_err(|e| CliError::Usage(e.to_string()))?;
                fresh.lock().expect("poisoned").push(rec);
                line
            }
            Err(e) => serde_json::to_string(&FailedRow {
                id,
                n: cfg.n,
                t: cfg.t,
                class,
                status: "failed".into(),
                error: e.to_string(),
            })
            .map_err(|e| CliError::Usage(e.to_string()))?,
        };
        let mut w = writer.lock().expect("poisoned");
        writeln!(w, "{line}")?;
        w.flush()?;
        Ok(())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().try_for_each(run)
    })?;
    records.extend(fresh.into_inner().expect("poisoned"));

    let wanted: HashSet<u64> = ids.iter().copied().collect();
    let mut rows: BTreeMap<u64, TableRow> = BTreeMap::new();
    for r in &records {
        if wanted.contains(&r.id) && cfg.classes.contains(&r.class) {
            rows.entry(r.id)
                .or_insert_with(|| TableRow { id: r.id, eps: BTreeMap::new() })
                .eps
                .insert(r.class, r.eps_dual);
        }
    }
    let mut records: Vec<&SolveRecord> = records.iter().filter(|r| wanted.contains(&r.id)).collect();
    records.sort_by_key(|r| (r.id, r.class));
    for r in records {
        emit(out, r)?;
    }
    let rows: Vec<TableRow> = rows.into_values().collect();
    fs::write(cfg.out_dir.join(format!("table_n{}_T{}.csv", cfg.n, cfg.t)), table_csv(&cfg.classes, &rows))?;
    Ok(rows)
}

/// CSV with one column per class and a gap column when both FO and Gen are
/// present; values rounded half-to-even at five decimals. The error is never
/// negative, so dual values below zero print as zero.
pub fn table_csv(classes: &[ProcessClass], rows: &[TableRow]) -> String {
    let mut classes = classes.to_vec();
    classes.sort();
    classes.dedup();
    let with_gap = classes.contains(&ProcessClass::Fo) && classes.contains(&ProcessClass::Gen);
    let mut s = String::from("id");
    for c in &classes {
        s.push_str(&format!(",eps_{}", c.to_string().to_lowercase()));
    }
    if with_gap {
        s.push_str(",gap");
    }
    s.push('\n');
    for r in rows {
        s.push_str(&r.id.to_string());
        for c in &classes {
            s.push(',');
            match r.eps.get(c) {
                Some(v) => s.push_str(&round_half_even(v.max(0.0), 5)),
                None => s.push_str("NA"),
            }
        }
        if with_gap {
            s.push(',');
            match r.gap() {
                Some(g) => s.push_str(&round_half_even(g, 5)),
                None => s.push_str("NA"),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
    Both,
}

impl std::str::FromStr for Side {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "upper" => Ok(Self::Upper),
            "lower" => Ok(Self::Lower),
            "both" => Ok(Self::Both),
            _ => Err(CliError::Usage(format!("side must be upper, lower or both, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifiedBound {
    pub class: ProcessClass,
    pub certificate: BoundCertificate,
    pub file: PathBuf,
}

/// Solves, certifies and independently re-verifies the requested bounds,
/// writing one certificate file per bound. With both classes and sides the
/// last line states whether the certified values separate them.
pub fn cmd_certify(cfg: &RunConfig, id: u64, side: Side, out: &mut dyn Write) -> CliResult<Vec<CertifiedBound>> {
    let f = function(cfg, id)?;
    let ccfg = CertifyConfig {
        max_denominator: cfg.max_denominator,
        ..CertifyConfig::default()
    };
    fs::create_dir_all(&cfg.out_dir)?;
    let mut bounds = Vec::new();
    for &class in &cfg.classes {
        let r = solve_one(cfg, id, class)?;
        let mut certs = Vec::new();
        if side != Side::Lower {
            certs.push(certify_upper(&f, cfg.t, class, &r.primal, &ccfg)?);
        }
        if side != Side::Upper {
            certs.push(certify_lower(&f, cfg.t, class, &r.dual, &ccfg)?);
        }
        for c in certs {
            let file = cfg
                .out_dir
                .join(format!("cert_n{}_T{}_{}_{}_{}.txt", cfg.n, cfg.t, id, class, c.kind));
            let text = write_certificate(&c);
            fs::write(&file, &text)?;
            // verify what was written, from the text alone
            let v = verify_certificate(&parse_certificate(&text)?)
                .map_err(|e| CliError::Verification(format!("fresh certificate failed: {e}")))?;
            emit(
                out,
                &json!({
                    "id": id, "n": cfg.n, "T": cfg.t, "class": class, "side": c.kind,
                    "value": v.value_f64(), "exact": format_q(&v.value),
                    "float_primal": r.eps_primal, "float_dual": r.eps_dual,
                    "file": file.display().to_string(), "verified": true,
                }),
            )?;
            bounds.push(CertifiedBound {
                class,
                certificate: c,
                file,
            });
        }
    }
    let find = |class, kind| {
        bounds
            .iter()
            .find(|b| b.class == class && b.certificate.kind == kind)
            .map(|b| b.certificate.value_f64())
    };
    if let (Some(gu), Some(fl)) = (find(ProcessClass::Gen, BoundKind::Upper), find(ProcessClass::Fo, BoundKind::Lower)) {
        let separated = bounds
            .iter()
            .find(|b| b.class == ProcessClass::Gen && b.certificate.kind == BoundKind::Upper)
            .zip(bounds.iter().find(|b| b.class == ProcessClass::Fo && b.certificate.kind == BoundKind::Lower))
            .is_some_and(|(g, f)| g.certificate.value < f.certificate.value);
        let mut chain = format!("{gu:.4} < {fl:.4}");
        if let (Some(gl), Some(fu)) = (find(ProcessClass::Gen, BoundKind::Lower), find(ProcessClass::Fo, BoundKind::Upper)) {
            chain = format!("{gl:.4} <= eps_Gen <= {gu:.4} < {fl:.4} <= eps_FO <= {fu:.4}");
        }
        emit(
            out,
            &json!({
                "id": id,
                "separated": separated,
                "verdict": if separated { "Gen upper < FO lower" } else { "no certified separation" },
                "chain": chain,
            }),
        )?;
    }
    Ok(bounds)
}

pub fn cmd_verify_certificate(path: &Path, out: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(path)?;
    let cert = parse_certificate(&text)?;
    match verify_certificate(&cert) {
        Ok(v) => emit(
            out,
            &json!({
                "valid": true, "kind": v.kind, "class": v.class, "id": v.id,
                "value": v.value_f64(), "exact": format_q(&v.value), "checks": v.checks,
            }),
        ),
        Err(e) => Err(CliError::Verification(e.to_string())),
    }
}

pub fn cmd_degree(n: usize, id: u64, out: &mut dyn Write) -> CliResult<()> {
    let f = BooleanFunction::from_id(n, id).map_err(|e| CliError::Usage(e.to_string()))?;
    let (exact_lb, approx_lb) = polynomial_lower_bound(&f)?;
    emit(
        out,
        &json!({
            "id": id, "n": n,
            "degree": degree(&f),
            "approx_degree": approx_degree(&f, 1.0 / 3.0)?,
            "exact_query_lower_bound": exact_lb,
            "bounded_error_query_lower_bound": approx_lb,
            "polynomial": multilinear_interpolate(&f).to_string(),
        }),
    )
}

pub fn cmd_verify_qc(c: &QcCheckConfig, out: &mut dyn Write) -> CliResult<QcReport> {
    let r = verify_qc(c)?;
    emit(out, &r)?;
    Ok(r)
}
