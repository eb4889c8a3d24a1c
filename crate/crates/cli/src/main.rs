use clap::Parser;
use poispred_cli::{output, run, Cli};

fn main() {
    let cli = Cli::parse();
    let command_line = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let result = run(&cli, &command_line).and_then(|r| output::emit(&r.text, &r.out).map_err(Into::into));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
