use std::process::ExitCode;

use clap::Parser;
use pairgee_cli::args::Cli;
use pairgee_cli::run;

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var(pairgee_cli::THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let code = run(&cli, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
