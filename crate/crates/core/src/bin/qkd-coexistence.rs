use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qkd_coexistence::calibration::{fit_restarts, reference_anchors, FitSpec, FittedParamsFile};
use qkd_coexistence::scenario::{
    emit_csv, emit_timeseries_csv, run_scenario, run_sweep, run_timeseries, write_csv, write_timeseries_csv,
    ScenarioConfig,
};
use qkd_coexistence::simulate::ce_report;
use qkd_coexistence::{CoexistenceResult, PowerDbm, Result};

/// Quantum key distribution over a fiber shared with a DWDM comb.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Defaults to the built-in 50 km, 60-channel setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (fitted-parameter TOML for `calibrate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Fitted-parameter file replacing the protocol, detector and Raman values.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured operating point.
    Simulate(Common),
    /// Evaluate the configured sweep.
    Sweep(Common),
    /// Emulate per-interval key rate and QBER.
    Timeseries(Common),
    /// Fit system parameters to the anchors.
    Calibrate(Common),
    /// Co-propagation efficiency of a measured point.
    Ce {
        #[arg(long, allow_hyphen_values = true)]
        skr_bps: f64,
        #[arg(long, allow_hyphen_values = true)]
        p_wdm_dbm: f64,
        #[arg(long)]
        length_km: f64,
    },
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(path) = &common.params {
        cfg.apply_fitted(&FittedParamsFile::load(path)?.params);
        cfg.validate()?;
    }
    Ok(cfg)
}

fn print_point(r: &CoexistenceResult) {
    println!("length          {} km", r.length_km);
    println!("comb            {} ch, {:.2} dBm", r.n_channels, r.p_wdm.0);
    println!(
        "link loss       {:.2} dB quantum, {:.2} dB classical",
        r.loss_quantum_db, r.loss_classical_db
    );
    println!("noise           {:.4e} photons/s", r.noise.photon_rate);
    println!("SKR             {:.1} kb/s", r.skr_bps / 1e3);
    println!("QBER            {:.3} %", r.qber * 100.0);
    println!("CE              {:.1} Mb/s·mW·km", r.ce);
    if r.flags.any() {
        println!("flags           {}", r.flags);
    }
}

fn csv_out(rows: &[CoexistenceResult], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => emit_csv(rows, path),
        None => write_csv(rows, std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let r = run_scenario(&load(&c)?)?;
            print_point(&r);
            if let Some(path) = &c.out {
                emit_csv(std::slice::from_ref(&r), path)?;
            }
        }
        Command::Sweep(c) => csv_out(&run_sweep(&load(&c)?)?, c.out.as_deref())?,
        Command::Timeseries(c) => {
            let samples = run_timeseries(&load(&c)?, c.seed)?;
            match &c.out {
                Some(path) => emit_timeseries_csv(&samples, path)?,
                None => write_timeseries_csv(&samples, std::io::stdout().lock())?,
            }
        }
        Command::Calibrate(c) => {
            let cfg = load(&c)?;
            let fit = cfg.fit.clone().unwrap_or_default();
            let anchors = if cfg.anchors.is_empty() {
                reference_anchors()
            } else {
                cfg.anchors.clone()
            };
            let mut spec = FitSpec::standard(cfg.system());
            spec.link = cfg.fiber_link()?;
            spec.tolerance = fit.tolerance;
            spec.max_evals = fit.max_evals;
            if !fit.free_params.is_empty() {
                spec.free = fit.free_params.clone();
            }
            let seeds = c.seed.map_or_else(|| fit.seeds.clone(), |s| vec![s]);
            let report = fit_restarts(&spec, &anchors, &seeds)?;
            print!("{}", report.table());
            if let Some(path) = &c.out {
                FittedParamsFile::from_report(&report).write(path)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Ce {
            skr_bps,
            p_wdm_dbm,
            length_km,
        } => print!("{}", ce_report(skr_bps, PowerDbm(p_wdm_dbm), length_km)?),
    }
    std::io::stdout().flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
