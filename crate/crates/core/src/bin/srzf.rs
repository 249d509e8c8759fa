//! `srzf sumrate | prop2 | check` over a scenario file.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use srzf_core::config;
use srzf_core::harness::{self, ExperimentResult};
use srzf_core::{Scenario, Scheme};

#[derive(Parser)]
#[command(name = "srzf", version, about = "SRZF precoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average sum rate per scheme over a transmit-power grid.
    Sumrate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated scheme names.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "srzf,zf,rzf,wf,bd,sns_fixed"
        )]
        schemes: Vec<Scheme>,
        /// Comma-separated transmit powers in dBm.
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        pt_dbm: Vec<f64>,
    },
    /// Extra interference caused by one user's CSI error and its bound.
    Prop2 {
        #[command(flatten)]
        common: Common,
        /// Comma-separated error variances for the selected user.
        #[arg(long, value_delimiter = ',', default_value = "1e-4,1e-3,1e-2")]
        mu2: Vec<f64>,
        /// Selected user, 1-based.
        #[arg(long, default_value_t = 1)]
        user: usize,
    },
    /// Structural property checks; exits nonzero on any failure.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `n_trials` from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn scenario(&self) -> anyhow::Result<(Scenario, usize)> {
        let mut s = config::load_scenario(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        let trials = self.trials.unwrap_or(s.n_trials);
        if trials == 0 {
            bail!("--trials must be at least 1");
        }
        Ok((s, trials))
    }

    fn emit<R: serde::Serialize>(&self, r: &ExperimentResult<R>) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => {
                let f =
                    File::create(path).with_context(|| format!("creating {}", path.display()))?;
                r.write_csv(BufWriter::new(f))?;
            }
            None => r.write_csv(io::stdout().lock())?,
        }
        eprintln!(
            "{}: {} trials, seed {}, {:.2} s",
            r.tag,
            r.trials,
            r.seed,
            r.wall_clock.as_secs_f64()
        );
        Ok(())
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sumrate {
            common,
            schemes,
            pt_dbm,
        } => {
            let (s, trials) = common.scenario()?;
            let r = harness::run_sumrate_sweep(&s, &schemes, &pt_dbm, trials);
            common.emit(&r)?;
            Ok(true)
        }
        Command::Prop2 { common, mu2, user } => {
            let (s, trials) = common.scenario()?;
            if user == 0 || user > s.users {
                bail!("--user must be in 1..={}", s.users);
            }
            let (r, summaries) = harness::run_prop2_sweep(&s, user - 1, &mu2, trials)?;
            common.emit(&r)?;
            let violations: usize = summaries.iter().map(|x| x.violations).sum();
            if violations > 0 {
                eprintln!("bound violated in {violations} (trial, pair) cases");
            }
            Ok(violations == 0)
        }
        Command::Check { common } => {
            let (s, trials) = common.scenario()?;
            let report = harness::run_property_suite(&s, trials);
            let text = report.to_string();
            match &common.out {
                Some(path) => std::fs::write(path, &text)?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
