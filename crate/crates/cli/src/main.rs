use clap::{Args, Parser, Subcommand};
use smq_cli::config::parse_classes;
use smq_cli::{
    cmd_certify, cmd_degree, cmd_dump_problem, cmd_solve, cmd_table, cmd_verify_certificate, cmd_verify_qc, CliError,
    CliResult, FileConfig, Overrides, QcCheckConfig, RunConfig, Side,
};
use smq_core::process::ProcessClass;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "smq", version, about = "Minimum query error of Boolean functions under quantum supermaps")]
struct Cli {
    /// TOML file with defaults for the run options.
    #[arg(long, global = true, env = "SMQ_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long, env = "SMQ_N")]
    n: Option<usize>,
    #[arg(long = "T", env = "SMQ_T")]
    t: Option<usize>,
    /// Solver tolerance.
    #[arg(long, env = "SMQ_TOL")]
    tol: Option<f64>,
    #[arg(long, env = "SMQ_MAX_ITERS")]
    max_iters: Option<usize>,
    /// Denominator bound for rationalisation.
    #[arg(long, env = "SMQ_MAX_DENOMINATOR")]
    max_denominator: Option<u64>,
    #[arg(long, env = "SMQ_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "SMQ_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            t: self.t,
            tol: self.tol,
            max_iters: self.max_iters,
            max_denominator: self.max_denominator,
            workers: self.workers,
            out_dir: self.out_dir.clone(),
            ..Overrides::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and print its record.
    Solve {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        class: String,
        /// Also write the primal program in the .cpi format.
        #[arg(long)]
        dump_problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a set of functions and write the table as CSV.
    Table {
        /// Comma-separated classes.
        #[arg(long, env = "SMQ_CLASSES")]
        classes: Option<String>,
        /// `npn`, `all` or a single id.
        #[arg(long, env = "SMQ_SELECT")]
        select: Option<String>,
        /// Restrict `npn` selection to class representatives.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        npn_only: bool,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Emit exact certificates for bounds on the minimum error.
    Certify {
        #[arg(long)]
        id: u64,
        #[arg(long, env = "SMQ_CLASSES")]
        classes: Option<String>,
        #[arg(long, default_value = "both")]
        side: String,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a certificate file in exact arithmetic.
    VerifyCertificate { file: PathBuf },
    /// Compare quantum-controlled supermaps with their fixed-order images.
    VerifyQc {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        unitaries: usize,
    },
    /// Degrees and polynomial-method query bounds of a function.
    Degree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        id: u64,
    },
    /// Write the primal or dual program of an instance in the .cpi format.
    DumpProblem {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        class: String,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(file: Option<&FileConfig>, over: Overrides) -> CliResult<RunConfig> {
    RunConfig::resolve(&over, file)
}

fn class(s: &str) -> CliResult<ProcessClass> {
    s.parse().map_err(|e: smq_core::Error| CliError::Usage(e.to_string()))
}

fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let file = cli.config.as_deref().map(FileConfig::load).transpose()?;
    let file = file.as_ref();
    match cli.cmd {
        Cmd::Solve {
            id,
            class: c,
            dump_problem,
            common,
        } => {
            let cfg = resolve(file, Overrides { select: Some(id.to_string()), ..common.overrides() })?;
            cmd_solve(&cfg, id, class(&c)?, dump_problem.as_deref(), out)?;
        }
        Cmd::Table {
            classes,
            select,
            npn_only,
            checkpoint,
            common,
        } => {
            let cfg = resolve(file, Overrides { classes, select, ..common.overrides() })?;
            cmd_table(&cfg, npn_only, checkpoint.as_deref(), out)?;
        }
        Cmd::Certify {
            id,
            classes,
            side,
            common,
        } => {
            if let Some(c) = &classes {
                parse_classes(c)?;
            }
            let cfg = resolve(file, Overrides { classes, select: Some(id.to_string()), ..common.overrides() })?;
            cmd_certify(&cfg, id, side.parse::<Side>()?, out)?;
        }
        Cmd::VerifyCertificate { file } => cmd_verify_certificate(&file, out)?,
        Cmd::VerifyQc { seed, trials, unitaries } => {
            cmd_verify_qc(
                &QcCheckConfig {
                    seed,
                    trials,
                    unitaries,
                    ..QcCheckConfig::default()
                },
                out,
            )?;
        }
        Cmd::Degree { n, id } => cmd_degree(n, id, out)?,
        Cmd::DumpProblem {
            id,
            class: c,
            dual,
            out: path,
            common,
        } => {
            let cfg = resolve(file, Overrides { select: Some(id.to_string()), ..common.overrides() })?;
            cmd_dump_problem(&cfg, id, class(&c)?, dual, &path)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = run(cli, &mut out) {
        let _ = writeln!(out, "{}", e.to_json());
        let _ = out.flush();
        std::process::exit(e.exit_code());
    }
}
