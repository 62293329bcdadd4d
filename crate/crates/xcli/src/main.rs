use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context as _};
use clap::Parser;
use seqmeas::testers::functions::parse_group;
use seqmeas::testers::FunctionTable;
use seqmeas_xcli::{run_experiment, ExperimentConfig, EXPERIMENTS};

/// Run one seeded experiment and write its result document.
#[derive(Debug, Parser)]
#[command(name = "seqmeas", version, after_help = experiments_help())]
struct Args {
    /// Experiment name.
    experiment: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials per sampled quantity.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Result document (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Per-trial rows (CSV).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Instance parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, String)>,
    /// Function table file for f (lines `x y`).
    #[arg(long)]
    fn_f: Option<PathBuf>,
    /// Function table file for g.
    #[arg(long)]
    fn_g: Option<PathBuf>,
    /// Permutation group file, one image list per line.
    #[arg(long)]
    group: Option<PathBuf>,
}

fn experiments_help() -> String {
    format!("Experiments: {}", EXPERIMENTS.join(", "))
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

fn read_table(path: &PathBuf) -> anyhow::Result<FunctionTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse().with_context(|| format!("parsing {}", path.display()))
}

fn run(args: Args) -> anyhow::Result<bool> {
    let mut config = ExperimentConfig::new(&args.experiment, args.seed, args.trials);
    for (k, v) in args.params {
        if config.params.insert(k.clone(), v).is_some() {
            bail!("parameter `{k}` given twice");
        }
    }
    config.fn_f = args.fn_f.as_ref().map(read_table).transpose()?;
    config.fn_g = args.fn_g.as_ref().map(read_table).transpose()?;
    if let Some(path) = &args.group {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config.group = Some(parse_group(&text).with_context(|| format!("parsing {}", path.display()))?);
    }

    let start = Instant::now();
    let record = run_experiment(&config)?;
    let elapsed = start.elapsed();

    fs::write(&args.out, record.to_json()).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        record
            .write_csv(file)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    for a in record.failed_assertions() {
        eprintln!(
            "FAILED {}: {} {} {} (tol {})",
            a.name, a.observed, a.relation, a.bound, a.tolerance
        );
    }
    eprintln!(
        "{}: {} ({:.3} s)",
        record.experiment,
        if record.passed {
            "all assertions passed"
        } else {
            "assertions failed"
        },
        elapsed.as_secs_f64()
    );
    Ok(record.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
