//! Scenario configurations shipped with the binary.

use super::config::{parse_config, ScenarioConfig};
use crate::error::{Error, Result};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".conf")))),*]
    };
}

/// `(name, config text)` for every bundled scenario.
pub const BUNDLED: &[(&str, &str)] = bundled![
    "destructive_one_tumor",
    "destructive_two_tumor",
    "destructive_three_tumor",
    "angiogenic_one_tumor",
    "angiogenic_two_tumor",
    "angiogenic_three_tumor",
    "uniform_ode_match",
    "envelope_destruction",
    "envelope_eigen",
    "envelope_capacity",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn text(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled(name: &str) -> Result<ScenarioConfig> {
    let text = text(name).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown scenario '{name}' (known: {})",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    parse_config(text)
}
