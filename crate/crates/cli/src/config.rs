use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nrep", version, about = "Occupation-number constraints, pinning and polytope projection for small fermion systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample random states and check the constraint catalog against them.
    Sample(SampleArgs),
    /// Evaluate a spectrum file against the catalog and report pinning.
    Check(CheckArgs),
    /// Pinning analysis of a state file in its natural orbitals.
    Pin(PinArgs),
    /// Beryllium occupation data: reduction, pinning, amplitude reconstruction.
    DemoBe(DemoBeArgs),
    /// Iron d-shell: edges, pullback vertices, data point, d3 projection.
    DemoIron(DemoIronArgs),
    /// Project a halfspace system onto two variables.
    Project(ProjectArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Machine-readable JSON instead of tables.
    #[arg(long)]
    pub json: bool,
    /// Write the output to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, env = "NREP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_sat: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Spectrum JSON: {"n": 3, "r": 7, "lambda": [...]}.
    pub file: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_pin: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_sat: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PinArgs {
    /// State JSON: {"n", "r", "amplitudes": [{"orbitals", "re", "im"}]}.
    pub file: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_pin: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DemoBeArgs {
    #[arg(long, default_value_t = 1e-5)]
    pub tol_pin: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DemoIronArgs {
    /// Window for calling the data point pinned to edge AB.
    #[arg(long, default_value_t = 0.05)]
    pub tol_pin: f64,
    #[arg(long)]
    pub json: bool,
    /// Also write the plot data CSV here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Halfspace system JSON; omit when using --preset.
    pub file: Option<PathBuf>,
    /// Built-in system instead of a file (d3-low-spin).
    #[arg(long, conflicts_with = "file")]
    pub preset: Option<String>,
    /// Two variable names, e.g. l1,mu. Defaults to the first two variables.
    #[arg(long, value_name = "A,B")]
    pub axes: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Sample,
    Check,
    Pin,
    DemoBe,
    DemoIron,
    Project,
}

/// Validated settings shared by all commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub count: usize,
    pub tol_pin: f64,
    pub tol_sat: f64,
    pub json: bool,
    pub preset: Option<String>,
    pub axes: Option<(String, String)>,
}

impl RunConfig {
    fn base(command: CommandKind) -> Self {
        Self {
            command,
            input: None,
            out: None,
            n: 0,
            r: 0,
            seed: 0,
            count: 1,
            tol_pin: 1e-10,
            tol_sat: 1e-6,
            json: false,
            preset: None,
            axes: None,
        }
    }

    pub fn from_command(command: Command) -> Result<Self> {
        let cfg = match command {
            Command::Sample(a) => Self {
                n: a.n,
                r: a.r,
                count: a.count,
                seed: a.seed,
                tol_sat: a.tol_sat,
                json: a.output.json,
                out: a.output.out,
                ..Self::base(CommandKind::Sample)
            },
            Command::Check(a) => Self {
                input: Some(a.file),
                tol_pin: a.tol_pin,
                tol_sat: a.tol_sat,
                json: a.output.json,
                out: a.output.out,
                ..Self::base(CommandKind::Check)
            },
            Command::Pin(a) => Self {
                input: Some(a.file),
                tol_pin: a.tol_pin,
                json: a.output.json,
                out: a.output.out,
                ..Self::base(CommandKind::Pin)
            },
            Command::DemoBe(a) => Self {
                tol_pin: a.tol_pin,
                json: a.output.json,
                out: a.output.out,
                ..Self::base(CommandKind::DemoBe)
            },
            Command::DemoIron(a) => Self {
                tol_pin: a.tol_pin,
                json: a.json,
                out: a.out,
                ..Self::base(CommandKind::DemoIron)
            },
            Command::Project(a) => {
                let axes = match a.axes {
                    Some(s) => match s.split_once(',') {
                        Some((x, y)) if !x.trim().is_empty() && !y.trim().is_empty() => {
                            Some((x.trim().to_string(), y.trim().to_string()))
                        }
                        _ => bail!("--axes expects two comma-separated names, got {s:?}"),
                    },
                    None => None,
                };
                if a.file.is_none() && a.preset.is_none() {
                    bail!("project needs a system file or --preset");
                }
                Self {
                    input: a.file,
                    preset: a.preset,
                    axes,
                    json: a.output.json,
                    out: a.output.out,
                    ..Self::base(CommandKind::Project)
                }
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("--tol-pin", self.tol_pin), ("--tol-sat", self.tol_sat)] {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.count == 0 {
            bail!("--count must be at least 1");
        }
        Ok(())
    }
}
