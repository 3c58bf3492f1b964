//! `vdc`: batch front-end.
//!
//! Exit codes: 0 success/pass, 1 mathematical failure (infeasible, refuted,
//! convergence FAIL), 2 usage or parse error, 3 internal numerical error.

mod jobs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use vdc_core::Error;

use jobs::{Outcome, Overrides};

#[derive(Parser)]
#[command(name = "vdc", version, about = "Van der Corput set laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a positive-definite certificate with small a_0.
    Certify(Io),
    /// Search for a spectral measure vanishing on V with an atom at 0.
    Witness(Io),
    /// Certificate and witness at the same grid, with the duality gap.
    Duality(Io),
    /// Transport a certificate along x ↦ kx.
    Transfer(Io),
    /// Certificate for the difference set A − A.
    Diffset(Io),
    /// Witness that a finite set is not a van der Corput set.
    RefuteFinite(Io),
    /// Synthesize a sequence from an atomic spectral model.
    Synth(Io),
    /// Check windowed correlations of a synthesized sequence.
    Verify(Io),
    /// Boundary sums and good-tile mass for a dyadic tiling.
    TilingAudit(Io),
    /// Averages of the counterexample sequence.
    Remark(Io),
    /// Re-validate an emitted certificate or witness document.
    Audit(Io),
}

#[derive(Args)]
struct Io {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<i64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::LpDegenerate { .. }
        | Error::LpUnbounded
        | Error::GridTooCoarse { .. }
        | Error::RefuterFailed
        | Error::DualityViolation { .. } => 3,
        _ => 2,
    }
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn write_document(path: &Path, doc: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("json");
    text.push('\n');
    std::fs::write(path, text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("VDC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Ignored if the pool is already initialized.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (name, io, handler): (&str, &Io, fn(&str, &Overrides) -> vdc_core::Result<Outcome>) = match &cli.command {
        Command::Certify(io) => ("certify", io, jobs::certify),
        Command::Witness(io) => ("witness", io, jobs::witness),
        Command::Duality(io) => ("duality", io, jobs::duality),
        Command::Transfer(io) => ("transfer", io, jobs::transfer),
        Command::Diffset(io) => ("diffset", io, jobs::diffset),
        Command::RefuteFinite(io) => ("refute-finite", io, jobs::refute_finite),
        Command::Synth(io) => ("synth", io, jobs::synth),
        Command::Verify(io) => ("verify", io, jobs::verify),
        Command::TilingAudit(io) => ("tiling-audit", io, jobs::tiling_audit),
        Command::Remark(io) => ("remark", io, jobs::remark),
        Command::Audit(io) => ("audit", io, jobs::audit),
    };
    let overrides = Overrides {
        grid: io.grid,
        tol: io.tol,
        seed: io.seed,
        horizon: io.horizon,
    };
    let generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let input = match std::fs::read_to_string(&io.input) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("vdc: cannot read {}: {e}", io.input.display());
            return ExitCode::from(2);
        }
    };
    let (doc, code) = match handler(&input, &overrides) {
        Ok(o) => {
            if let Some(csv) = &o.csv {
                if let Err(e) = std::fs::write(sidecar(&io.out), csv) {
                    eprintln!("vdc: cannot write sidecar: {e}");
                    return ExitCode::from(3);
                }
            }
            let doc = json!({
                "command": name,
                "status": o.status,
                "config": o.config,
                "overrides": serde_json::to_value(&overrides).expect("json"),
                "result": o.result,
                "generated_at": generated_at,
            });
            (doc, o.code as u8)
        }
        Err(e) => {
            eprintln!("vdc {name}: {e}");
            let doc = json!({
                "command": name,
                "status": "error",
                "overrides": serde_json::to_value(&overrides).expect("json"),
                "error": {"code": e.code(), "message": e.to_string()},
                "generated_at": generated_at,
            });
            (doc, exit_code(&e))
        }
    };
    if let Err(e) = write_document(&io.out, &doc) {
        eprintln!("vdc: cannot write {}: {e}", io.out.display());
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
