use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pqgrowth::config::{ConfigError, ExperimentConfig, ExperimentKind};
use pqgrowth::experiments::{run, RunError};

#[derive(Parser)]
#[command(name = "pqgrowth", version, about = "Minimize degenerate p,q-growth energies and check regularity estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `output`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit one JSON line per solver iteration on stderr
    #[arg(long)]
    trace: bool,
    /// Seed for randomized sampling (overrides the config's `seed`)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an exponent profile; accepts either --config or the five exponents
    Exponents {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        /// Integrability of k and b; "inf" allowed
        #[arg(long, default_value = "inf")]
        r: String,
        /// Integrability of 1/a; "inf" allowed
        #[arg(long, default_value = "inf")]
        s: String,
    },
    Solve(Common),
    OracleCompare(Common),
    EstimateCheck(Common),
    Moser(Common),
    Lavrentiev(Common),
    Counterexample(Common),
}

fn load(kind: ExperimentKind, common: &Common, inline: Option<String>) -> Result<(ExperimentConfig, Vec<u8>), RunError> {
    let text = match (&common.config, inline) {
        (Some(path), _) => fs::read_to_string(path)?,
        (None, Some(text)) => text,
        (None, None) => {
            return Err(ConfigError::Field { field: "config", message: "--config is required".into() }.into());
        }
    };
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if cfg.experiment != kind {
        return Err(ConfigError::Field {
            field: "experiment",
            message: format!("`{}` does not match subcommand `{}`", cfg.experiment.name(), kind.name()),
        }
        .into());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok((cfg, text.into_bytes()))
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    let (kind, common, inline) = match cli.command {
        Command::Exponents { common, p, q, n, r, s } => {
            let inline = match (p, q, n) {
                (Some(p), Some(q), Some(n)) => Some(
                    serde_json::json!({
                        "experiment": "exponents",
                        "profile": { "p": p, "q": q, "n": n, "r": r, "s": s },
                    })
                    .to_string(),
                ),
                _ => None,
            };
            (ExperimentKind::Exponents, common, inline)
        }
        Command::Solve(c) => (ExperimentKind::Solve, c, None),
        Command::OracleCompare(c) => (ExperimentKind::OracleCompare, c, None),
        Command::EstimateCheck(c) => (ExperimentKind::EstimateCheck, c, None),
        Command::Moser(c) => (ExperimentKind::Moser, c, None),
        Command::Lavrentiev(c) => (ExperimentKind::Lavrentiev, c, None),
        Command::Counterexample(c) => (ExperimentKind::Counterexample, c, None),
    };
    let (cfg, bytes) = load(kind, &common, inline)?;
    let out = common.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let outcome = run(&cfg, &bytes, &out, common.trace)?;
    if let Some(e) = &outcome.error {
        eprintln!("pqgrowth: {e}");
    }
    if kind == ExperimentKind::Exponents && outcome.exit_code == 0 {
        print!("{}", fs::read_to_string(out.join("report.json"))?);
    }
    eprintln!("pqgrowth: wrote {} file(s) to {}", outcome.manifest.files.len() + 1, out.display());
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pqgrowth: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
