//! Optional TOML config whose keys mirror the long flag names.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

/// Every key a config file may carry.
const KNOWN: &[&str] = &[
    "out", "alpha", "beta", "kappa", "nu", "n", "z-re", "z-im", "side", "which", "npoints", "ratio",
    "measure", "variational", "masses", "balayage", "fn", "m", "b", "zeta", "abscissa", "order",
    "x", "re", "im", "mode", "nu1", "nu2", "y", "route", "trials", "seed", "tau", "what", "ns", "xs",
    "pairs",
];

#[derive(Debug, Default)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table =
            text.parse().map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if let Some(k) = table.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key `{k}`")));
        }
        Ok(Self { table })
    }

    /// The flag value if given, else the config value.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required value `--{key}`")))
    }

    pub fn or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Boolean switches: set by the flag, or `true` in the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}
