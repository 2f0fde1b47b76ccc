//! Synthetic fingerprint datasets standing in for hardware captures.
//!
//! Two generators are provided: per-device multivariate Gaussian radio metrics
//! ([`nbiot`]) and multipath OFDM channel amplitude traces ([`csi`]). Both are
//! pure functions of a scenario and a seed.

pub mod csi;
pub mod nbiot;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

pub use csi::{channel_response, data_subcarriers, gen_csi_dataset, CsiScenario, MultipathProfile, PathComponent};
pub use nbiot::{gen_nbiot_dataset, NbIotScenario};

/// Scenario file contents: a `kind` key selects the generator, remaining keys
/// override that generator's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Nbiot(NbIotScenario),
    Csi(CsiScenario),
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
        let kind = match table.get("kind") {
            Some(toml::Value::String(k)) => k.as_str(),
            Some(_) => return Err(key_error(text, "kind", "`kind` must be a string")),
            None => return Err(key_error(text, "kind", "missing `kind` (nbiot or csi)")),
        };
        let (scenario, known) = match kind {
            "nbiot" => {
                let s: NbIotScenario = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
                let known = field_names(&NbIotScenario::default());
                (Scenario::Nbiot(s), known)
            }
            "csi" => {
                let s: CsiScenario = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
                let known = field_names(&CsiScenario::default());
                (Scenario::Csi(s), known)
            }
            other => {
                return Err(key_error(
                    text,
                    "kind",
                    &format!("unknown scenario kind `{other}` (expected nbiot or csi)"),
                ))
            }
        };
        if let Some(key) = table.keys().find(|k| *k != "kind" && !known.contains(k)) {
            return Err(key_error(text, key, &format!("unknown key `{key}`")));
        }
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn generate(&self, seed: u64) -> Result<LabeledDataset> {
        match self {
            Scenario::Nbiot(s) => gen_nbiot_dataset(s, seed),
            Scenario::Csi(s) => gen_csi_dataset(s, seed),
        }
    }
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        line,
        message: e.message().to_string(),
    }
}

fn key_error(text: &str, key: &str, message: &str) -> Error {
    let line = text
        .lines()
        .position(|l| l.trim_start().starts_with(key))
        .map_or(0, |i| i + 1);
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn field_names<T: Serialize>(value: &T) -> Vec<String> {
    toml::Table::try_from(value)
        .map(|t| t.keys().cloned().collect())
        .unwrap_or_default()
}
