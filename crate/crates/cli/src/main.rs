use clap::Parser;
use moyalks_cli::{execute, init_threads, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match init_threads(cli.threads).and_then(|()| execute(&cli)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            eprintln!("moyalks: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
