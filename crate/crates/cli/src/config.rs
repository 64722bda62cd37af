//! Experiment configuration: strict TOML, layered preset < file < flags.

use std::fmt;
use std::path::{Path, PathBuf};

use myopic_core::hedging::OptionSpec;
use myopic_core::impact::{ImpactParams, Order};
use myopic_core::strategies::{check_compatible, MarketSpec, Policy};
use myopic_core::{Error as CoreError, GameSpec, GridSpec, LotterySpec};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::presets;

/// Default master seed when neither a preset nor the user picks one.
pub const DEFAULT_SEED: u64 = 0;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MYOPIC_OUT_DIR";

/// A configuration problem, reported with the key that caused it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.into(),
            message: message.to_string(),
        }
    }

    /// Attributes a core validation error to the block it came from.
    fn from_core(block: &str, err: CoreError) -> Self {
        match &err {
            CoreError::InvalidParameter { name, .. } => ConfigError::new(format!("{block}.{name}"), &err),
            _ => ConfigError::new(block, &err),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Kelly,
    Lottery,
    Sde,
    Arena,
    Hedge,
    Impact,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Kelly => "kelly",
            ExperimentKind::Lottery => "lottery",
            ExperimentKind::Sde => "sde",
            ExperimentKind::Arena => "arena",
            ExperimentKind::Hedge => "hedge",
            ExperimentKind::Impact => "impact",
        }
    }

    const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Kelly,
        ExperimentKind::Lottery,
        ExperimentKind::Sde,
        ExperimentKind::Arena,
        ExperimentKind::Hedge,
        ExperimentKind::Impact,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kelly: Option<KellyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lottery: Option<LotteryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sde: Option<SdeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arena: Option<ArenaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hedge: Option<HedgeExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact: Option<ImpactExperiment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KellyConfig {
    pub p: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_n_max() -> u32 {
    10
}

fn default_tol() -> f64 {
    myopic_core::discrete_kelly::DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotteryConfig {
    pub popularity: Vec<f64>,
    /// Defaults to a uniform draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draw: Option<Vec<f64>>,
    pub players: u64,
    pub jackpot: f64,
    pub ticket_price: f64,
    #[serde(default = "default_draws")]
    pub draws: u64,
}

fn default_draws() -> u64 {
    1_000_000
}

impl LotteryConfig {
    pub fn spec(&self) -> myopic_core::Result<LotterySpec> {
        let k = self.popularity.len();
        let draw = self
            .draw
            .clone()
            .unwrap_or_else(|| vec![1.0 / k.max(1) as f64; k]);
        LotterySpec::with_draw(self.popularity.clone(), draw, self.players, self.jackpot, self.ticket_price)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    pub market: MarketSpec,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Number of evenly spaced times at which moments are reported.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

fn default_paths() -> usize {
    1000
}

fn default_checkpoints() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaConfig {
    pub policies: Vec<Policy>,
    pub market: MarketSpec,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

fn default_seeds() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeExperiment {
    pub option: OptionSpec,
    pub s0: f64,
    /// Drift of the simulated underlying.
    #[serde(default)]
    pub mu: f64,
    pub implied_vol: f64,
    pub realized_vol: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default = "default_hedge_paths")]
    pub paths: usize,
    /// Simulation steps to maturity; every rehedge count must divide it.
    #[serde(default = "default_fine_steps")]
    pub fine_steps: usize,
    #[serde(default = "default_rehedge_steps")]
    pub rehedge_steps: Vec<usize>,
}

fn default_hedge_paths() -> usize {
    10_000
}

fn default_fine_steps() -> usize {
    5000
}

fn default_rehedge_steps() -> Vec<usize> {
    vec![50, 500, 5000]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactExperiment {
    pub venue: ImpactParams,
    #[serde(default = "default_mid")]
    pub initial_mid: f64,
    pub seq_a: Vec<Order>,
    pub seq_b: Vec<Order>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<CycleConfig>,
}

fn default_mid() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub hot: ImpactParams,
    pub cold: ImpactParams,
    pub size: f64,
    pub rounds: usize,
    #[serde(default)]
    pub rest: f64,
}

impl ExperimentConfig {
    /// Semantic checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for kind in ExperimentKind::ALL {
            if kind != self.experiment && self.has_block(kind) {
                return Err(ConfigError::new(
                    kind.name(),
                    format!("block does not apply to experiment `{}`", self.experiment.name()),
                ));
            }
        }
        if !self.has_block(self.experiment) {
            let name = self.experiment.name();
            return Err(ConfigError::new(name, format!("missing required table `[{name}]`")));
        }
        if self.formats.is_empty() {
            return Err(ConfigError::new("formats", "at least one output format is required"));
        }
        match self.experiment {
            ExperimentKind::Kelly => validate_kelly(self.kelly.as_ref().expect("checked")),
            ExperimentKind::Lottery => validate_lottery(self.lottery.as_ref().expect("checked")),
            ExperimentKind::Sde => validate_sde(self.sde.as_ref().expect("checked")),
            ExperimentKind::Arena => validate_arena(self.arena.as_ref().expect("checked")),
            ExperimentKind::Hedge => validate_hedge(self.hedge.as_ref().expect("checked")),
            ExperimentKind::Impact => validate_impact(self.impact.as_ref().expect("checked")),
        }
    }

    fn has_block(&self, kind: ExperimentKind) -> bool {
        match kind {
            ExperimentKind::Kelly => self.kelly.is_some(),
            ExperimentKind::Lottery => self.lottery.is_some(),
            ExperimentKind::Sde => self.sde.is_some(),
            ExperimentKind::Arena => self.arena.is_some(),
            ExperimentKind::Hedge => self.hedge.is_some(),
            ExperimentKind::Impact => self.impact.is_some(),
        }
    }
}

fn validate_kelly(c: &KellyConfig) -> Result<(), ConfigError> {
    if !(c.p > 0.5 && c.p < 1.0) {
        return Err(ConfigError::new("kelly.p", format!("{} not in (0.5, 1)", c.p)));
    }
    if c.n_max == 0 || c.n_max > myopic_core::discrete_kelly::MAX_ENUMERATED_GAMES {
        return Err(ConfigError::new(
            "kelly.n_max",
            format!("{} not in 1..={}", c.n_max, myopic_core::discrete_kelly::MAX_ENUMERATED_GAMES),
        ));
    }
    if !(c.tol > 0.0 && c.tol < 1.0) {
        return Err(ConfigError::new("kelly.tol", format!("{} not in (0, 1)", c.tol)));
    }
    Ok(())
}

fn validate_lottery(c: &LotteryConfig) -> Result<(), ConfigError> {
    c.spec().map_err(|e| ConfigError::from_core("lottery", e))?;
    if c.draws == 0 {
        return Err(ConfigError::new("lottery.draws", "must be at least 1"));
    }
    Ok(())
}

fn validate_market(block: &str, market: &MarketSpec) -> Result<(), ConfigError> {
    let key = format!("{block}.market");
    let check = match *market {
        MarketSpec::Discrete { game, rounds } => {
            if rounds == 0 {
                return Err(ConfigError::new(format!("{key}.rounds"), "must be at least 1"));
            }
            GameSpec::new(game.p, game.n_games).map(|_| ())
        }
        MarketSpec::StochasticDrift { params, grid } => params.validate().and(grid.validate()),
        MarketSpec::TrendOu { params, rate, grid } => params
            .validate()
            .and(grid.validate())
            .and(if rate.is_finite() { Ok(()) } else { Err(CoreError::invalid("rate", "must be finite")) }),
        MarketSpec::Gbm {
            mu, sigma, rate, s0, grid,
        } => GridSpec::validate(&grid).and(if mu.is_finite() && rate.is_finite() && sigma > 0.0 && s0 > 0.0 {
            Ok(())
        } else {
            Err(CoreError::invalid("model", "gbm needs finite mu and rate, positive sigma and s0"))
        }),
    };
    check.map_err(|e| ConfigError::from_core(&key, e))
}

fn validate_sde(c: &SdeConfig) -> Result<(), ConfigError> {
    if matches!(c.market, MarketSpec::Discrete { .. }) {
        return Err(ConfigError::new("sde.market.model", "discrete games have no price path"));
    }
    validate_market("sde", &c.market)?;
    if c.paths < 2 {
        return Err(ConfigError::new("sde.paths", "must be at least 2"));
    }
    if c.checkpoints == 0 {
        return Err(ConfigError::new("sde.checkpoints", "must be at least 1"));
    }
    Ok(())
}

fn validate_arena(c: &ArenaConfig) -> Result<(), ConfigError> {
    if c.policies.is_empty() {
        return Err(ConfigError::new("arena.policies", "at least one policy is required"));
    }
    if c.seeds == 0 {
        return Err(ConfigError::new("arena.seeds", "must be at least 1"));
    }
    validate_market("arena", &c.market)?;
    for (i, policy) in c.policies.iter().enumerate() {
        check_compatible(policy, &c.market).map_err(|e| ConfigError::from_core(&format!("arena.policies[{i}]"), e))?;
    }
    Ok(())
}

fn validate_hedge(c: &HedgeExperiment) -> Result<(), ConfigError> {
    c.option.validate().map_err(|e| ConfigError::from_core("hedge.option", e))?;
    let positive = [
        ("hedge.s0", c.s0),
        ("hedge.implied_vol", c.implied_vol),
        ("hedge.realized_vol", c.realized_vol),
    ];
    for (key, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ConfigError::new(key, format!("{value} must be positive and finite")));
        }
    }
    for (key, value) in [("hedge.mu", c.mu), ("hedge.rate", c.rate)] {
        if !value.is_finite() {
            return Err(ConfigError::new(key, "must be finite"));
        }
    }
    if c.paths == 0 {
        return Err(ConfigError::new("hedge.paths", "must be at least 1"));
    }
    if c.fine_steps == 0 {
        return Err(ConfigError::new("hedge.fine_steps", "must be at least 1"));
    }
    if c.rehedge_steps.is_empty() {
        return Err(ConfigError::new("hedge.rehedge_steps", "at least one rehedge count is required"));
    }
    for &k in &c.rehedge_steps {
        if k == 0 || !c.fine_steps.is_multiple_of(k) {
            return Err(ConfigError::new(
                "hedge.rehedge_steps",
                format!("{k} does not divide fine_steps = {}", c.fine_steps),
            ));
        }
    }
    Ok(())
}

fn validate_impact(c: &ImpactExperiment) -> Result<(), ConfigError> {
    c.venue.validate().map_err(|e| ConfigError::from_core("impact.venue", e))?;
    if !c.initial_mid.is_finite() {
        return Err(ConfigError::new("impact.initial_mid", "must be finite"));
    }
    for (name, seq) in [("seq_a", &c.seq_a), ("seq_b", &c.seq_b)] {
        for (i, o) in seq.iter().enumerate() {
            Order::new(o.side, o.size, o.time).map_err(|e| ConfigError::from_core(&format!("impact.{name}[{i}]"), e))?;
        }
    }
    if let Some(cycle) = &c.cycle {
        cycle.hot.validate().map_err(|e| ConfigError::from_core("impact.cycle.hot", e))?;
        cycle.cold.validate().map_err(|e| ConfigError::from_core("impact.cycle.cold", e))?;
        if !(cycle.size > 0.0 && cycle.size.is_finite()) {
            return Err(ConfigError::new("impact.cycle.size", "must be positive and finite"));
        }
        if cycle.rounds == 0 {
            return Err(ConfigError::new("impact.cycle.rounds", "must be at least 1"));
        }
        if !(cycle.rest >= 0.0 && cycle.rest.is_finite()) {
            return Err(ConfigError::new("impact.cycle.rest", "must be finite and non-negative"));
        }
    }
    Ok(())
}

/// Where a configuration layer came from.
#[derive(Debug, Default)]
pub struct Layers {
    pub experiment: Option<ExperimentKind>,
    pub preset: Option<String>,
    pub file: Option<PathBuf>,
    /// Dotted key paths set from command-line flags.
    pub overrides: Vec<(String, Value)>,
}

/// Merges the layers and parses the result strictly.
pub fn resolve(layers: &Layers) -> Result<ExperimentConfig, ConfigError> {
    let mut table = Table::new();
    if let Some(name) = &layers.preset {
        let text = presets::lookup(name).ok_or_else(|| {
            ConfigError::new(
                "preset",
                format!("unknown preset `{name}`; available: {}", presets::names().join(", ")),
            )
        })?;
        merge(&mut table, parse_table(text, &format!("preset {name}"))?);
    }
    if let Some(path) = &layers.file {
        merge(&mut table, read_file(path)?);
    }
    for (key, value) in &layers.overrides {
        set_dotted(&mut table, key, value.clone());
    }
    if let Some(kind) = layers.experiment {
        match table.get("experiment") {
            Some(Value::String(s)) if s != kind.name() => {
                return Err(ConfigError::new(
                    "experiment",
                    format!("configuration is for `{s}` but the `{}` command was used", kind.name()),
                ));
            }
            _ => {
                table.insert("experiment".into(), Value::String(kind.name().into()));
            }
        }
    }
    if !table.contains_key("experiment") {
        return Err(ConfigError::new("experiment", "missing required key"));
    }
    let config: ExperimentConfig = serde_path_to_error::deserialize(Value::Table(table)).map_err(|err| {
        let path = err.path().to_string();
        let key = if path == "." { "config".to_string() } else { path };
        ConfigError::new(key, err.into_inner().message())
    })?;
    config.validate()?;
    Ok(config)
}

fn read_file(path: &Path) -> Result<Table, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

fn parse_table(text: &str, origin: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>()
        .map_err(|e| ConfigError::new("config", format!("{origin}: {}", e.message())))
}

/// Overlays `top` onto `base`. Tables merge key by key, except that a table
/// switching its `model` or `kind` tag replaces the old one outright.
pub fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(old)), Value::Table(new)) if same_tag(old, &new) => merge(old, new),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn same_tag(a: &Table, b: &Table) -> bool {
    ["model", "kind"]
        .iter()
        .all(|tag| b.get(*tag).is_none() || a.get(*tag) == b.get(*tag))
}

fn set_dotted(table: &mut Table, key: &str, value: Value) {
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.into(), value);
            return;
        }
        let entry = current
            .entry(part)
            .or_insert_with(|| Value::Table(Table::new()));
        if !entry.is_table() {
            *entry = Value::Table(Table::new());
        }
        current = entry.as_table_mut().expect("just made a table");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layers(kind: ExperimentKind, overrides: &[(&str, Value)]) -> Layers {
        Layers {
            experiment: Some(kind),
            overrides: overrides.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            ..Layers::default()
        }
    }

    #[test]
    fn flags_alone_make_a_config() {
        let c = resolve(&layers(
            ExperimentKind::Kelly,
            &[("kelly.p", Value::Float(0.6)), ("kelly.n_max", Value::Integer(5))],
        ))
        .unwrap();
        assert_eq!(c.kelly.unwrap().n_max, 5);
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn missing_key_is_named() {
        let err = resolve(&layers(ExperimentKind::Kelly, &[("kelly.n_max", Value::Integer(5))])).unwrap_err();
        assert_eq!(err.key, "kelly");
        assert!(err.message.contains("`p`"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = resolve(&layers(
            ExperimentKind::Kelly,
            &[("kelly.p", Value::Float(0.6)), ("kelly.bogus", Value::Integer(1))],
        ))
        .unwrap_err();
        assert!(err.message.contains("bogus"), "{err}");
        let err = resolve(&layers(
            ExperimentKind::Kelly,
            &[("kelly.p", Value::Float(0.6)), ("colour", Value::Integer(1))],
        ))
        .unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
    }

    #[test]
    fn wrong_type_names_nested_key() {
        let err = resolve(&layers(ExperimentKind::Kelly, &[("kelly.p", Value::String("high".into()))])).unwrap_err();
        assert_eq!(err.key, "kelly.p");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = resolve(&layers(ExperimentKind::Kelly, &[("kelly.p", Value::Float(0.4))])).unwrap_err();
        assert_eq!(err.key, "kelly.p");
        let err = resolve(&Layers {
            preset: Some("gamma-accrual".into()),
            overrides: vec![("hedge.rehedge_steps".into(), Value::Array(vec![Value::Integer(7)]))],
            ..Layers::default()
        })
        .unwrap_err();
        assert_eq!(err.key, "hedge.rehedge_steps");
    }

    #[test]
    fn every_preset_resolves() {
        for name in presets::names() {
            let c = resolve(&Layers {
                preset: Some(name.to_string()),
                ..Layers::default()
            });
            assert!(c.is_ok(), "{name}: {c:?}");
        }
    }

    #[test]
    fn preset_must_match_command() {
        let err = resolve(&Layers {
            experiment: Some(ExperimentKind::Kelly),
            preset: Some("lottery-pump".into()),
            ..Layers::default()
        })
        .unwrap_err();
        assert_eq!(err.key, "experiment");
    }

    #[test]
    fn flags_override_preset() {
        let c = resolve(&Layers {
            experiment: Some(ExperimentKind::Arena),
            preset: Some("myopic-vs-global".into()),
            overrides: vec![("arena.seeds".into(), Value::Integer(7)), ("seed".into(), Value::Integer(3))],
            ..Layers::default()
        })
        .unwrap();
        assert_eq!(c.arena.unwrap().seeds, 7);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn switching_model_replaces_table() {
        let mut base: Table = "[m]\nmodel = \"a\"\nx = 1\n".parse().unwrap();
        merge(&mut base, "[m]\nmodel = \"b\"\ny = 2\n".parse().unwrap());
        let m = base["m"].as_table().unwrap();
        assert!(m.get("x").is_none());
        let mut base: Table = "[m]\nmodel = \"a\"\nx = 1\n".parse().unwrap();
        merge(&mut base, "[m]\ny = 2\n".parse().unwrap());
        assert_eq!(base["m"].as_table().unwrap().len(), 3);
    }

    #[test]
    fn incompatible_policy_is_a_config_error() {
        let err = resolve(&Layers {
            preset: Some("trend-reversion".into()),
            overrides: vec![(
                "arena.policies".into(),
                Value::Array(vec![Value::Table("kind = \"single-game-kelly\"".parse().unwrap())]),
            )],
            ..Layers::default()
        })
        .unwrap_err();
        assert_eq!(err.key, "arena.policies[0]");
    }
}
