use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ocdc::config::{parse_fraction, ConfigLayer};
use ocdc::{losscheck, pipeline, verify, Error};
use ocdc_core::loss::Reduction;
use ocdc_core::Domain;

#[derive(Parser)]
#[command(name = "ocdc", version, about = "Cross-domain object paste augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded augmentation and write images, annotations, label maps and a manifest.
    Augment(ConfigLayer),
    /// Write a seeded fraction of a dataset's annotation file.
    Subsample {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_enum, default_value = "target")]
        domain: DomainArg,
        #[arg(long)]
        fraction: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check every artifact of a finished run.
    Verify { run_dir: PathBuf },
    /// Adversarial loss of a prediction map against a label map.
    LossCheck {
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value = "sum")]
        reduction: ReductionArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Source,
    Target,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionArg {
    Sum,
    Mean,
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Augment(layer) => {
            let config = layer.resolve()?;
            let manifest = pipeline::run_augment(&config)?;
            let summary = serde_json::json!({
                "out_dir": config.out_dir,
                "iterations": manifest.iterations.len(),
                "files": manifest.files.len(),
            });
            println!("{summary}");
        }
        Command::Subsample {
            images,
            annotations,
            domain,
            fraction,
            seed,
            out,
        } => {
            let domain = match domain {
                DomainArg::Source => Domain::Source,
                DomainArg::Target => Domain::Target,
            };
            let kept = pipeline::run_subsample(&images, &annotations, domain, parse_fraction(&fraction)?, seed, &out)?;
            println!("{}", serde_json::json!({ "out": out, "images": kept }));
        }
        Command::Verify { run_dir } => {
            let report = verify::run_verify(&run_dir);
            for finding in &report.findings {
                eprintln!("{finding}");
            }
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::LossCheck {
            prediction,
            labels,
            reduction,
        } => {
            let reduction = match reduction {
                ReductionArg::Sum => Reduction::Sum,
                ReductionArg::Mean => Reduction::Mean,
            };
            let report = losscheck::run_loss_check(&prediction, &labels, reduction)?;
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_line("usage", &e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::from(if e.kind() == "config" { 2 } else { 1 })
        }
    }
}
