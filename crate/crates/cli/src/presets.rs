//! Experiment recipes shipped with the binary.

const PRESETS: &[(&str, &str)] = &[
    ("local-vs-global", include_str!("../presets/local-vs-global.toml")),
    ("lottery-pump", include_str!("../presets/lottery-pump.toml")),
    ("dynamic-vs-static-kelly", include_str!("../presets/dynamic-vs-static-kelly.toml")),
    ("trend-reversion", include_str!("../presets/trend-reversion.toml")),
    ("gamma-accrual", include_str!("../presets/gamma-accrual.toml")),
    ("noncommutative-impact", include_str!("../presets/noncommutative-impact.toml")),
];

const ALIASES: &[(&str, &str)] = &[("myopic-vs-global", "local-vs-global")];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// TOML source of a preset, by name or alias.
pub fn lookup(name: &str) -> Option<&'static str> {
    let name = ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
