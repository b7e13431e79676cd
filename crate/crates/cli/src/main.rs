use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code =
        vsi_achieve_cli::commands::main_with(&argv, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code.code())
}
