use std::io::Write;
use std::process::ExitCode;

use bellctx_cli::args::Cli;
use bellctx_cli::{run, EXIT_INPUT};
use clap::Parser;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(&cli, argv) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            out.code
        }
        Err(e) => {
            if let Some(detail) = e.detail() {
                println!("{}", serde_json::to_string_pretty(&detail).unwrap_or_default());
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
