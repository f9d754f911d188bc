use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srm_core::srm_simulators::Method;
use srm_workbench::config::{load_config, Overrides, RunConfig, SampleFormat, Tolerances};
use srm_workbench::run;
use srm_workbench::{Result, WorkbenchError};

/// Third-order spectral representation simulation of non-Gaussian vector processes.
#[derive(Parser, Debug)]
#[command(name = "srm3", version)]
struct Cli {
    /// Run configuration (TOML). Without it the builtin wind example is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    realizations: Option<u32>,
    /// second, third-uv, third-mv or third-mv-fft.
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sample file format: bin or csv.
    #[arg(long, global = true)]
    format: Option<SampleFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate realizations and an ensemble moment report.
    Simulate,
    /// Check the single-record identities over one full period.
    Verify {
        /// Seeds per preset when no config is given.
        #[arg(long, default_value_t = 20)]
        seeds: u32,
    },
    /// Ensemble tables for the wind example.
    Tables,
    /// Time the FFT against the direct sum.
    Bench {
        /// Bins of the default wind benchmark.
        #[arg(long, default_value_t = 512)]
        bins: usize,
        /// Also time the FFT over a full period.
        #[arg(long)]
        full_period: bool,
    },
}

const DEFAULT_OUT: &str = "srm3-out";

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            realizations: self.realizations,
            method: self.method,
            out: self.out.clone(),
            format: self.format,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn config(&self) -> Result<Option<RunConfig>> {
        let Some(path) = &self.config else { return Ok(None) };
        let mut c = load_config(path)?;
        c.apply(&self.overrides())?;
        Ok(Some(c))
    }

    fn config_or_wind(&self) -> Result<RunConfig> {
        if let Some(c) = self.config()? {
            return Ok(c);
        }
        let mut c = RunConfig::wind_example(Method::ThirdOrderMultivariateFft, 1);
        c.output.dir = PathBuf::from(DEFAULT_OUT);
        c.apply(&self.overrides())?;
        Ok(c)
    }
}

/// Exit status 1 marks a failed verification; errors carry their own codes.
fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Simulate => {
            let config = cli.config_or_wind()?;
            let outcome = run::simulate(&config)?;
            print!("{}{}", outcome_header(&config), outcome.report.to_text());
            println!("wrote {} sample files to {}", outcome.sample_files.len(), config.output.dir.join("samples").display());
            Ok(true)
        }
        Command::Verify { seeds } => {
            let (outcome, out) = match cli.config()? {
                Some(config) => (run::verify_config(&config)?, config.output.dir.clone()),
                None => {
                    let checks = run::checks_from(&Tolerances::default());
                    (run::verify_presets(*seeds, cli.seed.unwrap_or(0), &checks)?, cli.out_dir())
                }
            };
            run::write_verify(&out, &outcome)?;
            print!("{}", outcome.to_text());
            Ok(outcome.pass())
        }
        Command::Tables => {
            let tol = cli.config()?.map(|c| c.tolerances).unwrap_or_default();
            let outcome = run::tables(cli.realizations.unwrap_or(200), cli.seed.unwrap_or(0), &tol)?;
            let text = outcome.to_text();
            run::write_report(&cli.out_dir(), "tables", &outcome, &text)?;
            print!("{text}");
            Ok(outcome.exact.pass() && outcome.baseline.pass())
        }
        Command::Bench { bins, full_period } => {
            let config = match cli.config()? {
                Some(c) => c,
                None => {
                    let mut c = run::bench_config(*bins)?;
                    c.apply(&cli.overrides())?;
                    c
                }
            };
            let outcome = run::bench(&config, *full_period)?;
            let text = outcome.to_text();
            run::write_report(&cli.out_dir(), "bench", &outcome, &text)?;
            print!("{text}");
            Ok(true)
        }
    }
}

fn outcome_header(config: &RunConfig) -> String {
    format!(
        "method {}, {} realizations, seed {}, output {}\n",
        config.method,
        config.realizations,
        config.seed,
        config.output.dir.display()
    )
}

fn report_error(err: &WorkbenchError, out: &Path) {
    let record = err.record();
    eprintln!("{record}");
    if std::fs::create_dir_all(out).is_ok() {
        let _ = std::fs::write(out.join("error.json"), serde_json::to_vec_pretty(&record).unwrap_or_default());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            report_error(&err, &cli.out_dir());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
