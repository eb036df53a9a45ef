//! Batch front end: reads a JSON study document, dispatches one
//! experiment, and writes a results CSV plus a diagnostics JSON sibling.
//!
//! Exit codes are a stable contract: 0 success, 1 runtime failure,
//! 2 configuration problem (unreadable or invalid config, bad arguments).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cirs_core::config::{PhaseDesign, RawConfig};
use cirs_core::experiment::{run_chamber, run_v2v_sweep, write_chamber_csv};
use cirs_core::geometry::build_cylindrical_layout;
use cirs_core::phase_design::{phase_cylindrical_mirror, phase_general, write_phase_csv};

#[derive(Parser)]
#[command(
    name = "cirs-sim",
    version,
    about = "Link-level simulator for conformal reflecting surfaces on vehicles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Study configuration JSON; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; a diagnostics JSON lands next to it.
    #[arg(long, global = true, default_value = "results.csv")]
    out: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo highway study over the configured density/fraction grid.
    V2v,
    /// Bench sweep comparing the patterned section against the bare one.
    Chamber,
    /// Per-element phase profile export.
    Phase,
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: cirs_core::Error) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: cirs_core::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool setup failed: {e}")))?;
    }
    let mut raw = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        raw.seed = Some(seed);
    }
    match cli.command {
        Command::V2v => cmd_v2v(&raw, &cli.out),
        Command::Chamber => cmd_chamber(&raw, &cli.out),
        Command::Phase => cmd_phase(&raw, &cli.out),
    }
}

fn load_config(path: Option<&Path>) -> Result<RawConfig, Failure> {
    match path {
        None => Ok(RawConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                Failure::Config(format!("cannot read config file {}: {e}", p.display()))
            })?;
            RawConfig::from_json(&text).map_err(config_err)
        }
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_diagnostics(out: &Path, diag: serde_json::Value) -> Result<PathBuf, Failure> {
    let path = out.with_extension("diag.json");
    let text = serde_json::to_string_pretty(&diag)
        .map_err(|e| Failure::Runtime(format!("cannot encode diagnostics: {e}")))?;
    write_output(&path, text.as_bytes())?;
    Ok(path)
}

fn cmd_v2v(raw: &RawConfig, out: &Path) -> Result<String, Failure> {
    let cfg = raw.sweep_config().map_err(config_err)?;
    let results = run_v2v_sweep(cfg.clone()).map_err(runtime_err)?;
    let mut buf = Vec::new();
    results.write_csv(&mut buf).map_err(runtime_err)?;
    write_output(out, &buf)?;
    let failed: usize = results.rows.iter().map(|r| r.failed_drops).sum();
    let skipped: usize = results.rows.iter().map(|r| r.skipped_near_field).sum();
    write_diagnostics(
        out,
        serde_json::json!({
            "subcommand": "v2v",
            "version": cirs_core::VERSION,
            "seed": cfg.global_seed,
            "config": cfg,
            "rows": results.rows.len(),
            "failed_drops": failed,
            "skipped_near_field_candidates": skipped,
        }),
    )?;
    Ok(format!("wrote {} result rows to {}", results.rows.len(), out.display()))
}

fn cmd_chamber(raw: &RawConfig, out: &Path) -> Result<String, Failure> {
    let cfg = raw.chamber_config().map_err(config_err)?;
    let run = run_chamber(&cfg).map_err(runtime_err)?;
    let mut buf = Vec::new();
    write_chamber_csv(&run, raw.seed(), &mut buf).map_err(runtime_err)?;
    write_output(out, &buf)?;
    write_diagnostics(
        out,
        serde_json::json!({
            "subcommand": "chamber",
            "version": cirs_core::VERSION,
            "seed": raw.seed(),
            "config": cfg,
            "focusing_gain_db": run.focusing_gain_db,
            "reference_width_deg": run.reference_width_rad.to_degrees(),
            "patterned_width_deg": run.patterned_width_rad.to_degrees(),
        }),
    )?;
    Ok(format!(
        "focusing gain {:.2} dB over {} sweep points -> {}",
        run.focusing_gain_db,
        run.sweep.reference.angles.len(),
        out.display()
    ))
}

fn cmd_phase(raw: &RawConfig, out: &Path) -> Result<String, Failure> {
    let (params, design) = raw.phase_export().map_err(config_err)?;
    let layout = build_cylindrical_layout(&params).map_err(config_err)?;
    let (profile, design_echo) = match design {
        PhaseDesign::Mirror { theta_bar } => (
            phase_cylindrical_mirror(&layout, theta_bar).map_err(config_err)?,
            serde_json::json!({ "mirror_theta_bar_rad": theta_bar }),
        ),
        PhaseDesign::General(angles) => (
            phase_general(&layout, &angles).map_err(config_err)?,
            serde_json::json!({
                "angles_rad": [angles.theta_in, angles.phi_in, angles.theta_out, angles.phi_out],
            }),
        ),
    };
    let mut buf = Vec::new();
    use std::io::Write as _;
    writeln!(&mut buf, "# cirs-sim {} seed={}", cirs_core::VERSION, raw.seed())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    write_phase_csv(&layout, &profile, &mut buf).map_err(runtime_err)?;
    write_output(out, &buf)?;
    write_diagnostics(
        out,
        serde_json::json!({
            "subcommand": "phase",
            "version": cirs_core::VERSION,
            "seed": raw.seed(),
            "config": params,
            "design": design_echo,
        }),
    )?;
    Ok(format!(
        "wrote {} x {} phase profile to {}",
        params.rows,
        params.cols,
        out.display()
    ))
}
