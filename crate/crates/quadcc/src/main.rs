use clap::Parser;
use quadcc::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let output = run(&cli.command);
    if let Err(e) = output.emit() {
        eprintln!("quadcc: cannot write output: {e}");
        std::process::exit(1);
    }
    std::process::exit(output.exit.code());
}
