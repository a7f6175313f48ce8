use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match momentvar::cli::run(std::env::args_os()) {
        Ok(out) => {
            if std::io::stdout().lock().write_all(out.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("momentvar: {}", e.message().trim_start_matches("error: ").trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
