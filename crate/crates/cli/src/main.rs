use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = twicecens_cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(result.stdout.as_bytes());
    let _ = out.flush();
    let mut err = std::io::stderr().lock();
    for line in &result.log {
        let _ = writeln!(err, "{line}");
    }
    if let Some(e) = &result.error {
        let _ = writeln!(err, "{e}");
    }
    ExitCode::from(result.exit_code as u8)
}
