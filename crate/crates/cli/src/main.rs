use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = nrep_cli::run(std::env::args_os());
    let mut code = outcome.code;
    for (path, text) in &outcome.files {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: writing {}: {e}", path.display());
            code = nrep_cli::EXIT_ERROR;
        }
    }
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(code as u8)
}
