//! `amalgam`: runs the verification experiments and writes reports.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use amalgam_core::report::EstimateReport;
use anyhow::{Context, Result};
use clap::Parser;

use config::{Experiment, RunConfig, Settings};
use output::Timing;

#[derive(Debug, Parser)]
#[command(
    name = "amalgam",
    version,
    about = "Numerical checks of amalgam-space dispersive estimates"
)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// Output directory.
    #[arg(long, env = "AMALGAM_OUT", default_value = "amalgam-out")]
    out: PathBuf,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("usage error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cfg) {
        Ok(report) if report.all_pass() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn configure(cli: Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let cfg = RunConfig::resolve(cli.experiment, cli.settings, file, cli.out)?;
    if let Some(j) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring the thread pool")?;
    }
    output::ensure_dir(&cfg.out)?;
    Ok(cfg)
}

fn run(cfg: &RunConfig) -> Result<EstimateReport> {
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    let start = Instant::now();
    for exp in cfg.experiment.expand() {
        let t = Instant::now();
        let outcome = experiments::run(exp, cfg, &cfg.out)
            .with_context(|| format!("experiment {}", exp.name()))?;
        timing.push(Timing {
            experiment: exp.name().to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        output::write_rows(
            &cfg.out,
            exp.name(),
            &outcome.rows.iter().collect::<Vec<_>>(),
        )?;
        for table in &outcome.tables {
            output::write_table(&cfg.out, table)?;
        }
        let passed = outcome.rows.iter().filter(|r| r.pass).count();
        println!(
            "{}: {passed} of {} cases pass",
            exp.name(),
            outcome.rows.len()
        );
        for r in outcome.rows.iter().filter(|r| !r.pass) {
            println!(
                "  FAIL {} [{}]: measured {:.6e}, predicted {:.6e}, tolerance {:.1e}",
                r.case, r.inputs, r.measured, r.predicted, r.tolerance
            );
        }
        rows.extend(outcome.rows);
    }
    timing.push(Timing {
        experiment: "total".to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    let report = EstimateReport::new(cfg.seed, rows);
    output::write_report(&cfg.out, cfg, &report)?;
    output::write_timing(&cfg.out, &timing)?;
    println!(
        "{} of {} cases pass; report in {}",
        report.summary.passed,
        report.summary.total,
        cfg.out.join("report.json").display()
    );
    Ok(report)
}
