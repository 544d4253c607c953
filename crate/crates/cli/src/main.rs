//! `unresolved` — mine a Stack Exchange-format dump and predict which
//! questions will never see an accepted answer.
//!
//! The binary chains the library's stages over a shared `--workdir`:
//! `synth` fabricates a dump with known structure, `ingest` selects the
//! labeled dataset, `featurize` computes the per-question metric tables,
//! `evaluate` cross-validates the classifiers, `train`/`predict` fit and
//! apply a single model, and `report` emits descriptive statistics.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod args;
mod commands;
mod failure;
mod workspace;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap reports --help and --version through its error type; only
        // genuine parse problems take the usage exit code.
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{err}");
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            eprint!("{err}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let result = match cli.command {
        Command::Synth(args) => commands::cmd_synth(args),
        Command::Ingest(args) => commands::cmd_ingest(args),
        Command::Featurize(args) => commands::cmd_featurize(args),
        Command::Train(args) => commands::cmd_train(args),
        Command::Evaluate(args) => commands::cmd_evaluate(args),
        Command::Predict(args) => commands::cmd_predict(args),
        Command::Report(args) => commands::cmd_report(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            failure.exit_code()
        }
    }
}
