mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<mrfqubo::Error> for Failure {
    fn from(e: mrfqubo::Error) -> Self {
        use mrfqubo::Error as E;
        let code = match e.root() {
            E::InvalidArgument(_) => 2,
            E::Parse { .. } | E::Io(_) | E::Undefined(_) => 3,
            E::Capacity(_) => 4,
            E::Structure(_) | E::Bundle { .. } => 5,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        mrfqubo::Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: 3,
            message: format!("JSON error: {e}"),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self {
            code: 3,
            message: format!("CSV error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = mrfqubo::par::configure_jobs(jobs) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Encode(a) => commands::encode(a),
        Command::Solve(a) => commands::solve(a),
        Command::Stereo(a) => commands::stereo(a),
        Command::Eval(a) => commands::eval(a),
        Command::Stats(a) => commands::stats(a),
        Command::Ablate(a) => commands::ablate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
