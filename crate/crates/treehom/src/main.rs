use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = treehom::cli::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let code = treehom::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
