mod explain;
mod scenario;
mod sweep;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use shiftlab::Caps;

use crate::scenario::{parse_scenario, run_scenario, Report};

const EXIT_AUDIT: u8 = 1;
const EXIT_SCHEMA: u8 = 2;

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Audited finite-scale shift-space constructions")]
struct Cli {
    /// Scale every resource cap to this value.
    #[arg(long, global = true, env = "SHIFTLAB_CAP")]
    cap_override: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its audit report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock timings (the report is then not byte-stable).
        #[arg(long)]
        timings: bool,
    },
    /// Run a scenario template over a parameter grid.
    Sweep {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the witness behind one audit of a report.
    Explain {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        audit: String,
    },
}

fn write_json(path: &PathBuf, v: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(scenario: &PathBuf, out: &PathBuf, seed: Option<u64>, timings: bool, caps: Option<Caps>) -> Result<ExitCode> {
    let text = fs::read_to_string(scenario).with_context(|| format!("reading {}", scenario.display()))?;
    // A schema error still leaves a report behind, holding only the error.
    let schema_error = |e: scenario::SchemaError| -> Result<ExitCode> {
        eprintln!("{}: {e}", scenario.display());
        write_json(out, &serde_json::json!({ "status": "error", "error": e.0 }))?;
        Ok(ExitCode::from(EXIT_SCHEMA))
    };
    let mut sc = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => return schema_error(e),
    };
    if let Some(s) = seed {
        sc.seed = Some(s);
    }
    let start = Instant::now();
    let mut report: Report = match run_scenario(&sc, caps) {
        Ok(r) => r,
        Err(e) => return schema_error(e),
    };
    if timings {
        report.timings = Some(BTreeMap::from([("total_seconds".to_string(), start.elapsed().as_secs_f64())]));
    }
    write_json(out, &report)?;
    let failed = report.audits.iter().filter(|a| !a.passed()).count();
    eprintln!("{} audits, {failed} failed", report.audits.len());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_AUDIT) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let caps = cli.cap_override.map(Caps::uniform);
    let result = match cli.command {
        Command::Run { scenario, out, seed, timings } => run(&scenario, &out, seed, timings, caps),
        Command::Sweep { template, grid, out, jobs } => (|| {
            let template: serde_json::Value = serde_json::from_str(&fs::read_to_string(&template)?)
                .with_context(|| format!("template {}", template.display()))?;
            let grid: sweep::Grid = serde_json::from_str(&fs::read_to_string(&grid)?)
                .with_context(|| format!("grid {}", grid.display()))?;
            let table = sweep::sweep(&template, &grid, jobs, caps)?;
            write_json(&out, &table)?;
            eprintln!("{} rows", table.rows.len());
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Explain { report, audit } => (|| {
            let text = fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let r: Report = serde_json::from_str(&text).with_context(|| format!("report {}", report.display()))?;
            print!("{}", explain::explain(&r, &audit)?);
            Ok(ExitCode::SUCCESS)
        })(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_SCHEMA)
    })
}
