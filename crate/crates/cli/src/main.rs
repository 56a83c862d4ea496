use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use skybroker::domain::{generate_scenario, write_scenario};
use skybroker::harness::{network_seed, run_experiment, scenario_seed, write_outputs, ExperimentConfig, TimingMode};
use skybroker::network::{load_network, synthetic_network, SkywayNetwork};
use skybroker::pruning::PruningStrategy;
use skybroker::recommend::VotingMethod;

#[derive(Parser)]
#[command(name = "skybroker", version, about = "Swarm drone delivery broker simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the broker over a scenario and write result tables.
    Run(RunArgs),
    /// Generate a synthetic skyway network as JSON.
    Synth {
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert edge-list, coordinate and station files into network JSON.
    Import {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        coords: PathBuf,
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate providers and requests as JSON lines.
    Scenario {
        #[command(flatten)]
        source: NetworkSource,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        providers: usize,
        #[arg(long, default_value_t = 50)]
        requests: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct NetworkSource {
    /// Network JSON written by `synth` or `import`.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Generate a synthetic network with this many nodes.
    #[arg(long)]
    synthetic: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    source: NetworkSource,
    /// Scenario JSON lines written by `scenario`.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    providers: Option<usize>,
    #[arg(long)]
    requests: Option<usize>,
    /// Pruning strategies: brute, capabilities, density.
    #[arg(long, value_delimiter = ',')]
    pruning: Vec<PruningStrategy>,
    /// Pruning percentages.
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    /// Region paths scored per provider.
    #[arg(long)]
    t: Option<usize>,
    /// Voting methods: plurality, irv, borda, condorcet, topweight.
    #[arg(long, value_delimiter = ',')]
    voting: Vec<VotingMethod>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also measure wall-clock time.
    #[arg(long)]
    wall_clock: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            )?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.source.network {
            cfg.network_file = Some(path.clone());
        }
        if let Some(nodes) = self.source.synthetic {
            cfg.network_file = None;
            cfg.synthetic.nodes = nodes;
        }
        if let Some(path) = &self.scenario {
            cfg.scenario_file = Some(path.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.providers {
            cfg.providers = n;
        }
        if let Some(n) = self.requests {
            cfg.requests = n;
        }
        if !self.pruning.is_empty() {
            cfg.strategies = self.pruning.clone();
        }
        if !self.k.is_empty() {
            cfg.k_values = self.k.clone();
        }
        if let Some(t) = self.t {
            cfg.pruning.region_paths = t;
        }
        if !self.voting.is_empty() {
            cfg.methods = self.voting.clone();
        }
        if self.wall_clock {
            cfg.timing = TimingMode::WallClock;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn network_for(source: &NetworkSource, cfg: &mut ExperimentConfig) -> Result<SkywayNetwork> {
    if let Some(path) = &source.network {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(SkywayNetwork::from_json(&text)?);
    }
    if let Some(nodes) = source.synthetic {
        cfg.synthetic.nodes = nodes;
    }
    Ok(synthetic_network(network_seed(cfg), &cfg.synthetic)?)
}

fn open(path: &PathBuf) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    info!("running seed {} with {} configurations", cfg.seed, cfg.configurations().len());
    let result = run_experiment(&cfg)?;
    write_outputs(&result, &args.out)?;
    println!("{:<13} {:>5} {:<10} {:>7} {:>13} {:>11} {:>9}", "strategy", "k", "method", "scored", "satisfaction", "proxy_time", "failures");
    for s in &result.summary {
        let fmt = |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |v| format!("{v:.p$}"));
        println!(
            "{:<13} {:>5} {:<10} {:>7} {:>13} {:>11} {:>9}",
            s.strategy.to_string(),
            s.k,
            s.method.to_string(),
            s.scored,
            fmt(s.mean_satisfaction, 4),
            fmt(s.mean_proxy_time, 1),
            fmt(s.failure_rate, 3)
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(&args),
        Command::Synth { nodes, seed, out } => {
            if nodes < 2 {
                bail!("a network needs at least 2 nodes");
            }
            let mut cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
            cfg.synthetic.nodes = nodes;
            let net = synthetic_network(network_seed(&cfg), &cfg.synthetic)?;
            fs::write(&out, net.to_json()?)?;
            println!("{} nodes, {} segments -> {}", net.node_count(), net.segments().len(), out.display());
            Ok(())
        }
        Command::Import { edges, coords, stations, out } => {
            let net = load_network(open(&edges)?, open(&coords)?, open(&stations)?)?;
            fs::write(&out, net.to_json()?)?;
            println!("{} nodes, {} segments -> {}", net.node_count(), net.segments().len(), out.display());
            Ok(())
        }
        Command::Scenario { source, seed, providers, requests, out } => {
            let mut cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
            let net = network_for(&source, &mut cfg)?;
            let sc = generate_scenario(scenario_seed(&cfg), &net, providers, requests, &cfg.scenario)?;
            write_scenario(&sc, BufWriter::new(File::create(&out)?))?;
            println!("{providers} providers, {requests} requests -> {}", out.display());
            Ok(())
        }
    }
}
