use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ising_cli::config::ExperimentConfig;
use ising_cli::fitcmd;
use ising_cli::report::read_csv;
use ising_cli::selftest::run_selftest;
use ising_cli::verify::{run_verify, VerifyProfile};

#[derive(Parser)]
#[command(
    name = "ising",
    about = "Ising engine: exact random-current identity checks and cluster Monte Carlo scaling experiments"
)]
struct Cli {
    /// Output directory for reports and CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for replica-parallel runs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the exact identity suite and write verify.json.
    Verify {
        /// quick | full | empty
        #[arg(long, default_value = "full")]
        profile: VerifyProfile,
    },
    /// Two-point and susceptibility scaling scan over the configured radii.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// quick: cut the schedule for a smoke run; full: as configured.
        #[arg(long, default_value = "full")]
        profile: RunProfile,
    },
    /// Paired tilt-vs-direct-field experiment.
    Tilt {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "full")]
        profile: RunProfile,
    },
    /// Power-law fit over scan results.
    Fit {
        /// results.csv files produced by scan runs.
        #[arg(long, required = true, num_args = 1..)]
        results: Vec<PathBuf>,
        #[arg(long)]
        observable: String,
        /// Drop points below this radius.
        #[arg(long)]
        min_n: Option<i64>,
    },
    /// Quick install sanity checks.
    Selftest,
}

/// Scales a configured schedule down for smoke runs.
#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum RunProfile {
    Quick,
    Full,
}

impl RunProfile {
    fn apply(self, cfg: &mut ExperimentConfig) {
        if self == RunProfile::Quick {
            cfg.schedule.n_samples = (cfg.schedule.n_samples / 4).max(50);
            if let Some(b) = cfg.schedule.burn_in.as_mut() {
                *b = (*b / 2).max(20);
            }
        }
    }
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Verify { profile } => {
            let report = run_verify(profile);
            std::fs::create_dir_all(&cli.out)?;
            std::fs::write(
                cli.out.join("verify.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            for c in &report.checks {
                let status = if c.skipped {
                    "SKIP"
                } else if c.pass {
                    "pass"
                } else {
                    "FAIL"
                };
                println!("{status} {:<22} {:>12.3e}  {}", c.check, c.metric, c.instance);
            }
            println!(
                "verify: {} pass, {} fail, {} skipped ({} profile)",
                report.n_pass, report.n_fail, report.n_skipped, report.profile
            );
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Cmd::Scan {
            config,
            seed,
            profile,
        } => {
            let mut cfg = load_config(&config, seed)?;
            profile.apply(&mut cfg);
            let record = ising_cli::run_scan(&cfg, cli.threads)?;
            record.write_to(&cli.out)?;
            println!(
                "scan {}: {} rows in {:.1}s -> {}",
                record.experiment_id,
                record.rows.len(),
                record.wall_clock_secs,
                cli.out.join("results.csv").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Tilt {
            config,
            seed,
            profile,
        } => {
            let mut cfg = load_config(&config, seed)?;
            profile.apply(&mut cfg);
            let (record, comparisons) = ising_cli::run_tilt(&cfg, cli.threads)?;
            record.write_to(&cli.out)?;
            std::fs::write(
                cli.out.join("tilt.json"),
                serde_json::to_string_pretty(&comparisons)?,
            )?;
            for c in &comparisons {
                println!(
                    "{}: tilt {:.5}+-{:.5} vs direct {:.5}+-{:.5} ({:.1} sigma, ESS {:.0}{})",
                    c.test_function,
                    c.mean_tilt,
                    c.mean_tilt_se,
                    c.mean_direct,
                    c.mean_direct_se,
                    c.mean_sigmas,
                    c.effective_samples,
                    if c.reliable { "" } else { ", UNRELIABLE" }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Fit {
            results,
            observable,
            min_n,
        } => {
            let mut rows = Vec::new();
            for path in &results {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                rows.extend(read_csv(&text)?);
            }
            let (report, curve) = fitcmd::run_fit(&rows, &observable, min_n)?;
            std::fs::create_dir_all(&cli.out)?;
            let mut buf = Vec::new();
            fitcmd::write_fit_csv(&mut buf, &curve)?;
            std::fs::write(cli.out.join("fit.csv"), buf)?;
            std::fs::write(
                cli.out.join("fit.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            println!(
                "{}: exponent {:.4} +- {:.4} (amplitude {:.4}, chi2/dof {:.2}, window sensitivity {:.4}, {} points)",
                report.observable,
                report.exponent,
                report.exponent_se,
                report.amplitude,
                report.goodness,
                report.window_sensitivity,
                report.n_points
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest => {
            let out = run_selftest()?;
            for (name, ok) in &out.lines {
                println!("{} {name}", if *ok { "pass" } else { "FAIL" });
            }
            Ok(if out.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
