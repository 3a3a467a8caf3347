use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgspec::harness::{
    dump_operator, oracle_lambda02, run_experiment, validate_config, write_outputs, ExperimentConfig, Level,
};

#[derive(Parser)]
#[command(name = "wgspec", version, about = "Spectra of thin magnetic waveguides")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the eps sweep and write CSV tables plus summary.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print diagnostics for a config; exits non-zero on errors.
    Validate { config: PathBuf },
    /// Independent oracles.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Write one assembled operator as Matrix Market plus a CSV table.
    DumpOperator {
        config: PathBuf,
        /// Effective variant name or `full`.
        #[arg(long)]
        variant: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Resolvent lambda_{0,2} against the brute-force eps^2 fit.
    Lambda02 { config: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: Cli) -> wgspec::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let rec = run_experiment(&cfg, threads)?;
            write_outputs(&cfg, &rec, &dir)?;
            for s in &rec.slopes {
                let slope = s.slope.map_or("n/a".to_string(), |v| format!("{v:.3}"));
                println!(
                    "{:<16} slope {slope:>8}  {}",
                    s.variant,
                    if s.pass { "pass" } else { "FAIL" }
                );
            }
            println!("wrote {}", dir.display());
            Ok(if rec.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let diags = validate_config(&cfg);
            println!("{}", serde_json::to_string_pretty(&diags)?);
            let failed = diags.iter().any(|d| d.level == Level::Error);
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Oracle {
            which: OracleCommand::Lambda02 { config },
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let rep = oracle_lambda02(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::DumpOperator {
            config,
            variant,
            eps,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let files = dump_operator(&cfg, &variant, eps, &dir)?;
            println!("{}\n{}", files.matrix.display(), files.table.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
