use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use myopic_cli::config::Format;
use myopic_cli::{presets, resolve, resolve_out_dir, run, ConfigError, ExperimentKind, Layers};
use toml::Value;

#[derive(Parser)]
#[command(name = "myopic", version, about = "Experiments on locally optimal but globally poor investing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Start from a shipped preset (see `myopic presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $MYOPIC_OUT_DIR, then ./myopic-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Artifacts to write besides the manifest.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form versus numerically optimal diversified Kelly fractions.
    Kelly {
        #[command(flatten)]
        common: Common,
        /// Win probability of each game.
        #[arg(long)]
        p: Option<f64>,
        /// Largest number of simultaneous games in the table.
        #[arg(long)]
        n_max: Option<u32>,
        /// Tolerance of the numeric optimizer.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact and simulated ticket values in a pari-mutuel lottery.
    Lottery {
        #[command(flatten)]
        common: Common,
        /// Comma-separated pick probabilities of the other players.
        #[arg(long, value_delimiter = ',')]
        popularity: Option<Vec<f64>>,
        /// Number of other players.
        #[arg(long)]
        players: Option<u64>,
        /// Pool shared by the winners of a draw.
        #[arg(long)]
        jackpot: Option<f64>,
        /// Cost of one ticket.
        #[arg(long)]
        ticket_price: Option<f64>,
        /// Monte Carlo draws per number.
        #[arg(long)]
        draws: Option<u64>,
    },
    /// Moments of simulated market paths.
    Sde {
        #[command(flatten)]
        common: Common,
        /// Number of simulated paths.
        #[arg(long)]
        paths: Option<u64>,
        /// Grid steps per path.
        #[arg(long)]
        steps: Option<u64>,
        /// Simulated time span.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Race policies on common random scenarios.
    Arena {
        #[command(flatten)]
        common: Common,
        /// Number of common random scenarios.
        #[arg(long)]
        seeds: Option<u64>,
        /// Rounds per scenario for discrete-game markets.
        #[arg(long)]
        rounds: Option<u64>,
        /// Grid steps for continuous markets.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Delta-hedge an option at a volatility other than the realized one.
    Hedge {
        #[command(flatten)]
        common: Common,
        /// Number of simulated price paths.
        #[arg(long)]
        paths: Option<u64>,
        /// Volatility used to price and hedge.
        #[arg(long)]
        implied_vol: Option<f64>,
        /// Volatility of the simulated paths.
        #[arg(long)]
        realized_vol: Option<f64>,
    },
    /// Order dependence of market impact and the two-venue cycle.
    Impact {
        #[command(flatten)]
        common: Common,
        /// Order size traded on each venue per cycle round.
        #[arg(long)]
        size: Option<f64>,
        /// Number of cycle rounds.
        #[arg(long)]
        rounds: Option<u64>,
    },
    /// Run whatever experiment a config file or preset describes.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// List the shipped presets.
    Presets,
}

fn float(key: &str, v: Option<f64>) -> Option<(String, Value)> {
    v.map(|v| (key.to_string(), Value::Float(v)))
}

fn int(key: &str, v: Option<u64>) -> Result<Option<(String, Value)>, ConfigError> {
    v.map(|v| {
        i64::try_from(v)
            .map(|i| (key.to_string(), Value::Integer(i)))
            .map_err(|_| ConfigError::new(key, format!("{v} is too large")))
    })
    .transpose()
}

fn layers(command: Command) -> Result<Option<(Layers, Common)>, ConfigError> {
    let (kind, common, mut overrides) = match command {
        Command::Presets => return Ok(None),
        Command::Run { common } => (None, common, Vec::new()),
        Command::Kelly { common, p, n_max, tol } => (
            Some(ExperimentKind::Kelly),
            common,
            vec![
                float("kelly.p", p),
                int("kelly.n_max", n_max.map(u64::from))?,
                float("kelly.tol", tol),
            ],
        ),
        Command::Lottery {
            common,
            popularity,
            players,
            jackpot,
            ticket_price,
            draws,
        } => (
            Some(ExperimentKind::Lottery),
            common,
            vec![
                popularity.map(|v| {
                    (
                        "lottery.popularity".to_string(),
                        Value::Array(v.into_iter().map(Value::Float).collect()),
                    )
                }),
                int("lottery.players", players)?,
                float("lottery.jackpot", jackpot),
                float("lottery.ticket_price", ticket_price),
                int("lottery.draws", draws)?,
            ],
        ),
        Command::Sde {
            common,
            paths,
            steps,
            horizon,
        } => (
            Some(ExperimentKind::Sde),
            common,
            vec![
                int("sde.paths", paths)?,
                int("sde.market.grid.n_steps", steps)?,
                float("sde.market.grid.t_end", horizon),
            ],
        ),
        Command::Arena {
            common,
            seeds,
            rounds,
            steps,
        } => (
            Some(ExperimentKind::Arena),
            common,
            vec![
                int("arena.seeds", seeds)?,
                int("arena.market.rounds", rounds)?,
                int("arena.market.grid.n_steps", steps)?,
            ],
        ),
        Command::Hedge {
            common,
            paths,
            implied_vol,
            realized_vol,
        } => (
            Some(ExperimentKind::Hedge),
            common,
            vec![
                int("hedge.paths", paths)?,
                float("hedge.implied_vol", implied_vol),
                float("hedge.realized_vol", realized_vol),
            ],
        ),
        Command::Impact { common, size, rounds } => (
            Some(ExperimentKind::Impact),
            common,
            vec![float("impact.cycle.size", size), int("impact.cycle.rounds", rounds)?],
        ),
    };
    overrides.push(int("seed", common.seed)?);
    if let Some(formats) = &common.format {
        let names = formats
            .iter()
            .map(|f| Value::String(format!("{f:?}").to_lowercase()))
            .collect();
        overrides.push(Some(("formats".into(), Value::Array(names))));
    }
    if kind.is_none() && common.config.is_none() && common.preset.is_none() {
        return Err(ConfigError::new("config", "`run` needs --config or --preset"));
    }
    let layers = Layers {
        experiment: kind,
        preset: common.preset.clone(),
        file: common.config.clone(),
        overrides: overrides.into_iter().flatten().collect(),
    };
    Ok(Some((layers, common)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (layers, common) = match layers(cli.command) {
        Ok(Some(found)) => found,
        Ok(None) => {
            for name in presets::names() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let config = match resolve(&layers) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let out_dir = resolve_out_dir(common.out, &config);
    match run(&config, &out_dir, common.threads, layers.preset) {
        Ok(manifest) => {
            println!("wrote {} to {}", manifest.artifacts.join(", "), out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
