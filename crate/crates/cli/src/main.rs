//! `tollsim`: runs the pipeline stage by stage over an output directory,
//! or all at once with `tollsim all`.
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use tollsim_core::pricing::SchemeKind;
use tollsim_core::scenario::stages::{self, Overrides};
use tollsim_core::scenario::{ArtifactStore, ScenarioConfig};

#[derive(Parser)]
#[command(name = "tollsim", version, about = "Passenger and freight congestion-pricing microsimulation")]
struct Cli {
    /// Scenario TOML; only read by `synth` and `all`. Defaults to the built-in desk city.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the scenario seed (`synth` and `all` only).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the number of day-to-day iterations.
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Write per-vehicle trajectories for each run.
    #[arg(long, global = true)]
    emit_trajectories: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the network, population, establishments and contracts.
    Synth,
    /// Day-to-day run without tolls.
    Baseline,
    /// Derive distance, cordon and area schemes from the baseline.
    DesignTolls,
    /// Day-to-day run under one designed scheme.
    Run {
        /// none, distance, cordon or area
        scheme: String,
    },
    /// Welfare, group and indicator tables for every stored run.
    Report,
    /// Every stage in sequence.
    All,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn input_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn init_threads(n: usize) {
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let store = ArtifactStore::open(&cli.out).with_context(|| format!("opening {}", cli.out.display()))?;
    let overrides = Overrides {
        iterations: cli.iterations,
        emit_trajectories: cli.emit_trajectories,
    };
    if let Command::ShowConfig = cli.cmd {
        print!("{}", input_config(&cli)?.to_toml_string()?);
        return Ok(());
    }
    let later_stage = !matches!(cli.cmd, Command::Synth | Command::All);
    if later_stage && (cli.config.is_some() || cli.seed.is_some()) {
        bail!("--config and --seed only apply to `synth` and `all`; later stages reuse the stored configuration");
    }
    let cfg = if later_stage {
        let mut c = stages::stored_config(&store, &overrides)?;
        if let Some(t) = cli.threads {
            c.threads = t;
        }
        c
    } else {
        let mut c = input_config(&cli)?;
        if let Some(k) = cli.iterations {
            c.learning.iterations = k;
            c.learning.max_iterations = c.learning.max_iterations.max(k);
        }
        c.emit_trajectories |= cli.emit_trajectories;
        c
    };
    init_threads(cfg.threads);

    match &cli.cmd {
        Command::Synth => {
            stages::synth(&cfg, &store)?;
        }
        Command::Baseline => {
            stages::baseline(&cfg, &store)?;
        }
        Command::DesignTolls => {
            let d = stages::design(&cfg, &store)?;
            for s in &d.schemes {
                let rates: Vec<String> = s
                    .rates
                    .iter()
                    .map(|r| format!("{}-{}: {:.2}", clock_label(r.start), clock_label(r.end), r.car_rate))
                    .collect();
                println!("{:<8} {}", s.scheme.kind.name(), rates.join(", "));
            }
        }
        Command::Run { scheme } => {
            let kind = SchemeKind::parse(scheme)?;
            let (run, _) = stages::run(&cfg, &store, kind)?;
            println!("{} run: {} iterations, revenue {:.2}", kind.name(), run.changes.len(), run.day.ledger.total());
        }
        Command::Report => print_report(&stages::report(&cfg, &store)?),
        Command::ShowConfig => unreachable!("handled above"),
        Command::All => {
            stages::synth(&cfg, &store)?;
            stages::baseline(&cfg, &store)?;
            stages::design(&cfg, &store)?;
            for kind in SchemeKind::POLICIES {
                stages::run(&cfg, &store, kind)?;
            }
            print_report(&stages::report(&cfg, &store)?);
        }
    }
    Ok(())
}

fn clock_label(m: f64) -> String {
    let m = m.round() as i64;
    format!("{:02}:{:02}", m / 60, m % 60)
}

fn print_report(rows: &[tollsim_core::scenario::Comparison]) {
    println!("{:<8} {:>12} {:>12} {:>12} {:>12} {:>12}", "scheme", "revenue", "pax_cs", "freight_cs", "emissions", "welfare");
    for c in rows {
        let w = &c.welfare;
        println!(
            "{:<8} {:>12.2} {:>12.2} {:>12.2} {:>12.2} {:>12.2}",
            c.scheme.name(),
            w.toll_revenue,
            w.passenger_cs,
            w.freight_cs,
            w.emission_cost,
            w.social_welfare
        );
    }
}
