//! Argument parsing and file handling around [`run_command`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use super::commands::{input_error, run_command, Command, Flags, Format, EXIT_INPUT};
use super::scenario::parse_scenario;
use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "histrep", version, about = "Operator representations of decoherence functionals")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Write the primary output here instead of stdout. For `sweep --format
    /// csv` the JSON summary goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated, strictly ascending dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub block_rank: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings (output is no longer byte-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

pub fn run_cli<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput {
                    stderr: text,
                    exit_code: code,
                    ..CliOutput::default()
                }
            } else {
                CliOutput {
                    stdout: text,
                    exit_code: code,
                    ..CliOutput::default()
                }
            };
        }
    };
    run_parsed(&cli)
}

pub fn run_parsed(cli: &Cli) -> CliOutput {
    let name = cli.command.name();
    let fail = |e: Error| {
        let outcome = input_error(name, &e);
        CliOutput {
            stdout: outcome.json(),
            stderr: format!("error: {e}\n"),
            exit_code: outcome.exit_code,
        }
    };

    let text = match std::fs::read_to_string(&cli.scenario) {
        Ok(t) => t,
        Err(e) => {
            return fail(Error::InvalidArgument(format!(
                "cannot read scenario {}: {e}",
                cli.scenario.display()
            )))
        }
    };
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let flags = Flags {
        seed: cli.seed,
        samples: cli.samples,
        dims: cli.dims.clone(),
        block_rank: cli.block_rank,
        tolerance: cli.tolerance,
        format: cli.format,
        timings: cli.timings,
    };
    let outcome = run_command(cli.command, &scenario, &flags);
    let primary = outcome.render(cli.format);
    let stderr = outcome
        .record
        .error
        .as_ref()
        .map(|e| format!("error: {e}\n"))
        .unwrap_or_default();

    match &cli.out {
        Some(path) => {
            let mut written = write_file(path, &primary);
            if written.is_ok() && cli.format == Format::Csv && outcome.csv.is_some() {
                written = write_file(&path.with_extension("json"), &outcome.json());
            }
            match written {
                Ok(()) => CliOutput {
                    stdout: String::new(),
                    stderr,
                    exit_code: outcome.exit_code,
                },
                Err(e) => fail(e),
            }
        }
        None => CliOutput {
            stdout: primary,
            stderr,
            exit_code: outcome.exit_code,
        },
    }
}
