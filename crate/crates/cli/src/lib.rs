//! Command implementations behind the `nrep` binary.
//!
//! Each command turns a [`RunConfig`] into an [`Outcome`]: the text for
//! standard output, files to write, and the process exit code. Nothing here
//! prints or touches the filesystem except reading inputs, which keeps the
//! commands testable and their output deterministic.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub mod check;
pub mod config;
pub mod demo;
pub mod pin;
pub mod project;
pub mod sample;
mod table;

pub use config::{Cli, CommandKind, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;
pub const EXIT_PROJECTION: i32 = 4;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Self::default()
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_ERROR,
            stderr: message.into(),
            ..Self::default()
        }
    }

    /// Sends the main output to `--out` when given.
    pub fn routed(mut self, out: &Option<PathBuf>) -> Self {
        if let Some(path) = out {
            let text = std::mem::take(&mut self.stdout);
            self.files.push((path.clone(), text));
        }
        self
    }
}

pub fn run_config(cfg: &RunConfig) -> Outcome {
    let result = match cfg.command {
        CommandKind::Sample => sample::cmd_sample(cfg),
        CommandKind::Check => check::cmd_check(cfg),
        CommandKind::Pin => pin::cmd_pin(cfg),
        CommandKind::DemoBe => demo::cmd_demo_be(cfg),
        CommandKind::DemoIron => demo::cmd_demo_iron(cfg),
        CommandKind::Project => project::cmd_project(cfg),
    };
    result.unwrap_or_else(|e| Outcome::error(format!("error: {e:#}\n")))
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::error(text),
            };
        }
    };
    match RunConfig::from_command(cli.command) {
        Ok(cfg) => run_config(&cfg),
        Err(e) => Outcome::error(format!("error: {e:#}\n")),
    }
}

pub(crate) fn read_input(path: &std::path::Path) -> anyhow::Result<String> {
    use anyhow::Context;
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Deserializes JSON with the failing field path and line/column in errors.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> anyhow::Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!("malformed {what}: field `{path}`: {inner}")
    })
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
