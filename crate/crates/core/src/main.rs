use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use delayed_psvi::delay::DelayDistribution;
use delayed_psvi::harness::{
    converged_return, optimal_value, run_experiment, write_metrics, write_metrics_to, AgentConfig,
    AgentName, EnvConfig, ExperimentConfig,
};

/// Run a delayed-feedback linear MDP experiment and emit per-episode metrics
/// as CSV.
#[derive(Debug, Parser)]
#[command(name = "delayed-psvi", version)]
struct Cli {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// `synthetic` or `riverswim`.
    #[arg(long)]
    env: Option<String>,
    /// `psvi`, `lpsvi` or `ucbvi` (with the tuned presets for the env).
    #[arg(long)]
    agent: Option<String>,
    /// `constant:T`, `poisson:MEAN`, `pareto:SHAPE:SCALE`,
    /// `multinomial:V=P,V=P,...`, or an inline JSON object.
    #[arg(long)]
    delay: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    /// Repeatable; replaces the configured seed list.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// CSV destination; stdout when neither this nor the config sets one.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_delay(text: &str) -> Result<DelayDistribution> {
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(text)?);
    }
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let num = |s: &str| -> Result<f64> {
        s.trim().parse().with_context(|| format!("bad number {s:?} in --delay"))
    };
    Ok(match kind {
        "constant" => DelayDistribution::Constant {
            value: args.trim().parse().context("bad constant delay")?,
        },
        "poisson" => DelayDistribution::Poisson { mean: num(args)? },
        "pareto" => {
            let (shape, scale) = args
                .split_once(':')
                .context("pareto delay needs SHAPE:SCALE")?;
            DelayDistribution::Pareto {
                shape: num(shape)?,
                scale: num(scale)?,
            }
        }
        "multinomial" => {
            let mut values = Vec::new();
            let mut probs = Vec::new();
            for pair in args.split(',') {
                let (v, p) = pair
                    .split_once('=')
                    .context("multinomial delay needs VALUE=PROB pairs")?;
                values.push(v.trim().parse().context("bad multinomial value")?);
                probs.push(num(p)?);
            }
            DelayDistribution::Multinomial { values, probs }
        }
        other => bail!("unknown delay kind {other:?}"),
    })
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(env) = &cli.env {
        let fresh = match env.as_str() {
            "synthetic" => EnvConfig::synthetic(20),
            "riverswim" => EnvConfig::riverswim(),
            other => bail!("unknown env {other:?}"),
        };
        if fresh.name() != config.env.name() {
            config.env = fresh;
            // Presets depend on the environment.
            config.agent = AgentConfig::preset(config.agent.name(), &config.env, config.horizon);
        }
    }
    if let Some(agent) = &cli.agent {
        let name: AgentName = agent.parse()?;
        if name != config.agent.name() {
            config.agent = AgentConfig::preset(name, &config.env, config.horizon);
        }
    }
    if let Some(delay) = &cli.delay {
        config.delay = parse_delay(delay)?;
    }
    if let Some(k) = cli.episodes {
        config.episodes = k;
    }
    if !cli.seeds.is_empty() {
        config.seeds = cli.seeds.clone();
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = build_config(&cli)?;
    let rows = run_experiment(&config)?;
    match &config.output {
        Some(path) => write_metrics(&rows, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => write_metrics_to(&rows, std::io::stdout().lock())?,
    }
    let optimum = optimal_value(&config)?;
    let last = rows.iter().filter(|r| r.episode == config.episodes);
    let final_regret: f64 =
        last.clone().map(|r| r.cum_regret).sum::<f64>() / config.seeds.len() as f64;
    eprintln!(
        "env={} agent={:?} K={} seeds={} V*={:.4} converged_return={:.4} mean_cum_regret={:.4}",
        config.env.name(),
        config.agent.name(),
        config.episodes,
        config.seeds.len(),
        optimum,
        converged_return(&rows, 0.1),
        final_regret,
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
