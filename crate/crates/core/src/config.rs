//! JSON run configuration.
//!
//! ```json
//! {
//!   "x": {"family": "markov", "order": 1, "table": {"0": 0.2, "1": 0.4}},
//!   "y": {"family": "renewal", "hazard": {"kind": "geometric", "q_inf": 0.6, "amplitude": 0.2, "ratio": 0.5}},
//!   "seed": 1, "replicas": 200, "window": [0, 4999], "truncation": 64, "kmax": 64
//! }
//! ```
//!
//! Families are `iid` (`p`), `markov` (`order`, `table` keyed by time-ordered
//! suffix strings, oldest symbol first) and `renewal` (`hazard`, either
//! `geometric` or `explicit` with `values` and `q_inf`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kernel::{ChainSpec, HazardKind, HazardSequence, MarkovTable};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainConfig {
    Iid { p: f64 },
    Markov { order: usize, table: BTreeMap<String, f64> },
    Renewal { hazard: HazardKind },
}

impl ChainConfig {
    pub fn build(&self) -> Result<ChainSpec> {
        match self {
            ChainConfig::Iid { p } => ChainSpec::iid(*p),
            ChainConfig::Markov { order, table } => Ok(ChainSpec::FiniteMarkov(MarkovTable::from_entries(
                *order,
                table.iter().map(|(k, v)| (k.as_str(), *v)),
            )?)),
            ChainConfig::Renewal { hazard } => Ok(ChainSpec::Renewal(HazardSequence::from_kind(hazard.clone())?)),
        }
    }
}

/// Numeric tolerances that may be overridden per run.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// A certified product bound must exceed this.
    pub condition3: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { condition3: 1e-12 }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_replicas() -> usize {
    200
}

fn default_window() -> (i64, i64) {
    (0, 4999)
}

fn default_truncation() -> usize {
    64
}

fn default_kmax() -> usize {
    64
}

/// Everything a subcommand needs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub x: ChainConfig,
    pub y: ChainConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_window")]
    pub window: (i64, i64),
    /// Forward depth of regeneration marks.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    /// Replica id used by `sample`.
    #[serde(default)]
    pub replica: u64,
    #[serde(default)]
    pub tolerance: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks ranges and builds both chains once to validate probabilities.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.window;
        if m > n {
            return Err(Error::Config(format!("window {m}:{n} is empty")));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.truncation == 0 {
            return Err(Error::Config("truncation must be positive".into()));
        }
        if self.kmax == 0 {
            return Err(Error::Config("kmax must be positive".into()));
        }
        self.specs().map(|_| ())
    }

    pub fn specs(&self) -> Result<(ChainSpec, ChainSpec)> {
        Ok((self.x.build()?, self.y.build()?))
    }

    pub fn window_length(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_families() {
        let cfg = RunConfig::from_json(
            r#"{
                "x": {"family": "markov", "order": 1, "table": {"0": 0.2, "1": 0.4}},
                "y": {"family": "renewal", "hazard": {"kind": "explicit", "values": [0.9, 0.8], "q_inf": 0.7}},
                "window": [-5, 5], "seed": 42
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.window_length(), 11);
        assert_eq!(cfg.replicas, 200);
        let (x, y) = cfg.specs().unwrap();
        assert_eq!(x.markov_order(), Some(1));
        assert_eq!(y.family(), "renewal");
        let iid = RunConfig::from_json(r#"{"x": {"family": "iid", "p": 0.3}, "y": {"family": "iid", "p": 0.5}}"#).unwrap();
        assert_eq!(iid.specs().unwrap().0, ChainSpec::iid(0.3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            r#"{"x": {"family": "iid", "p": 1.3}, "y": {"family": "iid", "p": 0.5}}"#,
            r#"{"x": {"family": "iid", "p": 0.3}, "y": {"family": "iid", "p": 0.5}, "window": [3, 2]}"#,
            r#"{"x": {"family": "iid", "p": 0.3}, "y": {"family": "iid", "p": 0.5}, "replicas": 0}"#,
            r#"{"x": {"family": "iid", "p": 0.3}, "y": {"family": "iid", "p": 0.5}, "sed": 1}"#,
            r#"{"x": {"family": "markov", "order": 1, "table": {"0": 0.2}}, "y": {"family": "iid", "p": 0.5}}"#,
            r#"{"x": {"family": "gibbs"}, "y": {"family": "iid", "p": 0.5}}"#,
            r#"not json"#,
        ];
        for text in bad {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_) | Error::InvalidProbability { .. } | Error::InvalidSpec(_))), "{text}");
        }
    }
}
