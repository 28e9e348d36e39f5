use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collapse_lab::{acceptance, output, schema, LabError};

#[derive(Parser)]
#[command(name = "collapse-lab", version, about = "Run collapse-simulation scenarios and the acceptance suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario described by a JSON config.
    Run {
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Accept {
        /// A criterion name or number.
        #[arg(long)]
        only: Option<String>,
        /// Also write `acceptance.json` and every criterion's CSV files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of scenario configs.
    Schema,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), LabError> {
    match command {
        Command::Run { config, seed, out } => {
            let run = collapse_lab::run_file(&config, seed, out)?;
            for note in &run.notes {
                println!("{note}");
            }
            let m = &run.manifest;
            println!("{} files written to {} in {:.2} s", m.files.len(), m.output_dir.display(), m.duration_seconds);
            Ok(())
        }
        Command::Accept { only, out } => {
            let report = acceptance::run_suite(only.as_deref(), |v| {
                println!("{}", v.line());
                for note in &v.notes {
                    println!("       {note}");
                }
            })?;
            if let Some(dir) = out {
                let mut artifacts = vec![output::Artifact::json("acceptance.json", &report.to_json())];
                for v in &report.verdicts {
                    for a in &v.artifacts {
                        artifacts.push(output::Artifact { name: format!("{:02}_{}_{}", v.id, v.name, a.name), ..a.clone() });
                    }
                }
                output::write_artifacts(&dir, &artifacts)?;
            }
            let failed: Vec<String> = report.verdicts.iter().filter(|v| !v.passed).map(|v| v.name.to_string()).collect();
            println!("{}/{} criteria passed", report.verdicts.len() - failed.len(), report.verdicts.len());
            if failed.is_empty() {
                Ok(())
            } else {
                Err(LabError::Acceptance(failed.join(", ")))
            }
        }
        Command::Schema => {
            println!("{}", schema::SCHEMA.trim_end());
            Ok(())
        }
    }
}
