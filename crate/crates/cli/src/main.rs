//! Command-line interface for the mirror-krylov toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed inputs), 3 numerical failure.

mod commands;
mod output;

use clap::Parser;

use commands::{Cli, ExitKind};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 1 } else { 0 };
            std::process::exit(code);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(match commands::classify(&err) {
                ExitKind::Usage => 1,
                ExitKind::Data => 2,
                ExitKind::Numerical => 3,
            });
        }
    }
}
