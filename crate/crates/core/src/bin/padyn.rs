use std::io::Write;

fn main() {
    let out = padyn::cli::run_cli(std::env::args_os());
    if !out.stdout.is_empty() {
        print!("{}", out.stdout);
        let _ = std::io::stdout().flush();
    }
    if !out.stderr.is_empty() {
        eprintln!("{}", out.stderr);
    }
    std::process::exit(out.exit_code);
}
