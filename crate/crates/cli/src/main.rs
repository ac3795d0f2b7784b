use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use ahp_cli::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let mut out = BufWriter::new(io::stdout().lock());
    let result = run(cli, &mut stdin.lock(), &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(Into::into)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
