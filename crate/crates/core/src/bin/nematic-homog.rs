use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nematic_homog::cli::{exit_code, load_config, run, Command};

/// Reproducible runs of the nematic homogenisation toolkit.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design a surface energy that shifts the quartic bulk coefficients.
    Design { config: PathBuf },
    /// Tabulate the homogenised potential on a particle shape.
    Hom { config: PathBuf },
    /// Sphere-moment identities against quadrature ladders.
    Identities { config: PathBuf },
    /// Minimise F_0 or F_eps once.
    Minimize { config: PathBuf },
    /// The eps -> 0 minimiser experiment.
    Converge { config: PathBuf },
    /// Counterexample and trace-inequality probes.
    Probe { config: PathBuf },
    /// Evaluate hypotheses H1 to H8.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, path) = match cli.command {
        Cmd::Design { config } => (Command::Design, config),
        Cmd::Hom { config } => (Command::Hom, config),
        Cmd::Identities { config } => (Command::Identities, config),
        Cmd::Minimize { config } => (Command::Minimize, config),
        Cmd::Converge { config } => (Command::Converge, config),
        Cmd::Probe { config } => (Command::Probe, config),
        Cmd::Check { config } => (Command::Check, config),
    };
    let report = load_config(&path, command).and_then(|cfg| run(&cfg));
    match report {
        Ok(r) => {
            let m = &r.manifest;
            match &m.message {
                Some(msg) => println!("{}: {} ({msg})", command.name(), m.status),
                None => println!("{}: {}", command.name(), m.status),
            }
            println!("manifest: {}", r.output_dir.join("manifest.json").display());
            if r.exit_code != 0 {
                eprintln!("{}", m.message.as_deref().unwrap_or(&m.status));
            }
            ExitCode::from(r.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
