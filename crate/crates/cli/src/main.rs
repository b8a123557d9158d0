//! `iscat` command-line front end.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, HierarchyAction, HopfAction, ScatterAction};
use output::Failure;

/// `ISCAT_THREADS` takes precedence over `--threads`.
fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let env = match std::env::var("ISCAT_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Failure::invalid(format!("ISCAT_THREADS must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    if let Some(n) = env.or(flag) {
        if n == 0 {
            return Err(Failure::invalid("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new("threads", 5, e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Failure> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Scatter(a) => match &a.action {
            Some(ScatterAction::Poles(p)) => commands::poles(p),
            None => commands::scatter(&a),
        },
        Command::Energy(a) => commands::energy(&a),
        Command::Evolve(a) => commands::evolve_cmd(&a),
        Command::Hopf {
            action: HopfAction::ExpandLogT { max_degree, format },
        } => commands::hopf_expand(max_degree, format),
        Command::Hierarchy {
            action: HierarchyAction::Print { k, mode, format },
        } => commands::hierarchy_print(k, mode.into(), format),
        Command::Gen(a) => commands::gen(&a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            if !text.is_empty() {
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "{}", text.trim_end());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit as u8)
        }
    }
}
