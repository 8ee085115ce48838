use frobsplit_cli::{run_args, EXIT_USAGE};
use frobsplit_core::Config;

fn main() {
    let cfg = match Config::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(EXIT_USAGE);
        }
    };
    let out = run_args(std::env::args_os(), &cfg);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
