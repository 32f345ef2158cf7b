use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::batteries::BATTERIES;
use crate::config::{Backend, ExperimentConfig, KappaSpec};
use crate::{run_to_disk, CliError, Task};

#[derive(Debug, Parser)]
#[command(name = "maglab", version, about = "Verification batteries for magnetic flows on closed surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification batteries.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Battery names, comma separated or repeated.
        #[arg(long, value_delimiter = ',')]
        battery: Vec<String>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Number of random functions per battery.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Marked length spectrum over a class list.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        classes: Option<String>,
    },
    /// Deformation family: lengths, Livsic integrals and Jacobi fields.
    Deform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        classes: Option<String>,
    },
    /// Carleman weights and estimate over a list of sigma values.
    CarlemanSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
    },
    /// List batteries with what each one verifies.
    ListBatteries,
    /// Print the effective configuration with every default spelled out.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Constant magnetic intensity.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Root directory for run directories.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

impl Common {
    fn apply(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = load(self.config.as_ref())?;
        if let Some(b) = self.backend {
            if b != cfg.system.backend {
                cfg.system.backend = b;
                cfg.system.lambda.clear();
                let kappa = if b == Backend::Bolza { 0.6 } else { 0.0 };
                cfg.system.kappa = KappaSpec::Constant { value: kappa };
                let classes = if b == Backend::Bolza { "g1..g8" } else { "(1,0), (0,1), (1,1)" };
                cfg.spectrum.classes = classes.into();
                cfg.deform.classes = if b == Backend::Bolza { "g1" } else { "(1,0)" }.into();
            }
        }
        if let Some(k) = self.kappa {
            cfg.system.kappa = KappaSpec::Constant { value: k };
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.display().to_string();
        }
        Ok(cfg)
    }
}

fn resolve(command: &Command) -> Result<(Task, ExperimentConfig), CliError> {
    let (task, cfg) = match command {
        Command::Verify { common, battery, sigma, count } => {
            let mut cfg = common.apply()?;
            if !battery.is_empty() {
                cfg.battery.names = battery.clone();
            }
            if let Some(s) = sigma {
                cfg.carleman.sigma = *s;
            }
            if let Some(c) = count {
                cfg.battery.count = *c;
            }
            (Task::Verify, cfg)
        }
        Command::Spectrum { common, classes } => {
            let mut cfg = common.apply()?;
            if let Some(c) = classes {
                cfg.spectrum.classes = c.clone();
            }
            (Task::Spectrum, cfg)
        }
        Command::Deform { common, classes } => {
            let mut cfg = common.apply()?;
            if let Some(c) = classes {
                cfg.deform.classes = c.clone();
            }
            (Task::Deform, cfg)
        }
        Command::CarlemanSweep { common, sigmas } => {
            let mut cfg = common.apply()?;
            if !sigmas.is_empty() {
                cfg.carleman.sweep = sigmas.clone();
            }
            (Task::CarlemanSweep, cfg)
        }
        Command::ListBatteries | Command::PrintConfig { .. } => unreachable!("handled without a run"),
    };
    cfg.validate()?;
    Ok((task, cfg))
}

pub fn list_batteries() -> String {
    BATTERIES.iter().map(|b| format!("{} ({})\n", b.name, b.anchor)).collect()
}

/// Runs the parsed command, printing a summary, and returns the exit code.
pub fn main_with(cli: Cli) -> ExitCode {
    match cli.command {
        Command::ListBatteries => {
            print!("{}", list_batteries());
            ExitCode::SUCCESS
        }
        Command::PrintConfig { config } => match load(config.as_ref()).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                print!("{}", c.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        command => {
            let res = resolve(&command).and_then(|(task, cfg)| run_to_disk(task, &cfg));
            match res {
                Ok((out, dir)) => {
                    let failed = out.failures().count();
                    for r in out.failures() {
                        eprintln!(
                            "FAIL {} [{}] {} {}: residual {:.3e} > {:.3e}{}",
                            r.battery,
                            r.anchor,
                            r.case,
                            r.name,
                            r.residual,
                            r.tolerance,
                            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                        );
                    }
                    println!("{} checks, {} failed; report in {}", out.rows.len(), failed, dir.display());
                    if failed == 0 {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
