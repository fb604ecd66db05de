//! `nldiff`: runs validation, certificates and experiments from a TOML
//! config and writes CSV tables plus a JSON summary.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Context, Outcome};
use config::RunConfig;
use error::CliError;
use output::{config_hash, recorded_config, Artifacts, Summary};

#[derive(Debug, Parser)]
#[command(name = "nldiff", version, about)]
struct Cli {
    /// TOML run configuration; the built-in default model when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Ensemble seed, overriding `numerics.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for parallel ensembles.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.numerics.seed = Some(seed);
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(cli)?;
    let model = cfg.build_model()?;
    let hash = config_hash(&cfg)?;
    let recorded = recorded_config(&cfg);
    let mut out = Artifacts::create(&cfg.output.dir)?;
    let cert = match cli.command {
        Command::Validate => Err(nldiff_core::Error::InvalidState("not computed by validate".into())),
        _ => commands::certify(&cfg, &model),
    };
    if let Ok(c) = &cert {
        out.json("certificate.json", c)?;
    }
    let result = commands::run(
        cli.command,
        &mut Context {
            cfg: &cfg,
            model: &model,
            cert: &cert,
            out: &mut out,
        },
    );
    let (outcome, code, status) = match result {
        Ok(o) if o.failures.is_empty() => (o, 0, "ok"),
        Ok(o) => (o, 1, "property_failure"),
        Err(e) => {
            let code = e.exit_code();
            let o = Outcome {
                report: serde_json::Value::Null,
                failures: vec![e.to_string()],
            };
            (o, code, "error")
        }
    };
    for msg in &outcome.failures {
        eprintln!("{}: {msg}", cli.command.name());
    }
    out.finish(Summary {
        command: cli.command.name(),
        status,
        exit_code: code,
        messages: outcome.failures,
        config_hash: hash,
        config: &recorded,
        certificate: cert.as_ref().ok(),
        certificate_error: match (&cert, cli.command) {
            (_, Command::Validate) | (Ok(_), _) => None,
            (Err(e), _) => Some(e.to_string()),
        },
        report: outcome.report,
    })?;
    println!("{}: {status} ({})", cli.command.name(), cfg.output.dir.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nldiff: {e}");
            e.exit()
        }
    }
}
