use std::path::Path;

use serde::Deserialize;

use crate::{Error, Result};

/// Monte Carlo sweep description.
///
/// Read from flat TOML (`key = value`, arrays for the two grids); every key
/// is optional and falls back to [`ExperimentConfig::default`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Constellation size M.
    pub m: usize,
    /// Block length L.
    pub l: usize,
    pub b3db_tsym: Vec<f64>,
    pub ebn0_db: Vec<f64>,
    /// Blocks per grid point.
    pub trials: usize,
    pub target_firings_per_symbol: usize,
    pub bias_margin: f64,
    /// Grid steps per symbol period.
    pub dt_divisor: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub cond_cap: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 2,
            l: 32,
            b3db_tsym: vec![1.0],
            ebn0_db: vec![4.0, 6.0, 8.0, 10.0],
            trials: 100,
            target_firings_per_symbol: 16,
            bias_margin: 1.5,
            dt_divisor: 1024,
            seed: 1,
            workers: 0,
            cond_cap: crate::DEFAULT_COND_CAP,
        }
    }
}

/// Every key accepted in a config file or as a `--key value` override.
pub const KEYS: &[&str] = &[
    "m",
    "l",
    "b3db_tsym",
    "ebn0_db",
    "trials",
    "target_firings_per_symbol",
    "bias_margin",
    "dt_divisor",
    "seed",
    "workers",
    "cond_cap",
];

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies one override. Grid values are comma-separated lists.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "m" => self.m = parse(key, value)?,
            "l" => self.l = parse(key, value)?,
            "b3db_tsym" => self.b3db_tsym = parse_list(key, value)?,
            "ebn0_db" => self.ebn0_db = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "target_firings_per_symbol" => self.target_firings_per_symbol = parse(key, value)?,
            "bias_margin" => self.bias_margin = parse(key, value)?,
            "dt_divisor" => self.dt_divisor = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "cond_cap" => self.cond_cap = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m < 2 || !self.m.is_power_of_two() {
            return bad(format!("m must be a power of two ≥ 2, got {}", self.m));
        }
        if self.l == 0 {
            return bad("l must be at least 1".into());
        }
        if self.b3db_tsym.is_empty() || self.ebn0_db.is_empty() {
            return bad("b3db_tsym and ebn0_db grids must be nonempty".into());
        }
        if let Some(v) = self
            .b3db_tsym
            .iter()
            .find(|v| !(v.is_finite() && **v > 0.0))
        {
            return bad(format!("b3db_tsym values must be positive, got {v}"));
        }
        if let Some(v) = self
            .ebn0_db
            .iter()
            .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return bad(format!(
                "ebn0_db values must be numbers below +inf or +inf, got {v}"
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.target_firings_per_symbol < 4 {
            return bad("target_firings_per_symbol must be at least 4".into());
        }
        if !(self.bias_margin > 1.0 && self.bias_margin.is_finite()) {
            return bad(format!(
                "bias_margin must exceed 1, got {}",
                self.bias_margin
            ));
        }
        if self.dt_divisor < crate::sampler::MIN_STEPS_PER_SYMBOL {
            return bad(format!(
                "dt_divisor must be at least {}, got {}",
                crate::sampler::MIN_STEPS_PER_SYMBOL,
                self.dt_divisor
            ));
        }
        if !(self.cond_cap >= 1.0) {
            return bad(format!(
                "cond_cap must be at least 1, got {}",
                self.cond_cap
            ));
        }
        Ok(())
    }

    /// Renders the config back to TOML, e.g. for a run manifest.
    pub fn to_toml(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| fmt_toml_float(*x))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "m = {}\nl = {}\nb3db_tsym = [{}]\nebn0_db = [{}]\ntrials = {}\ntarget_firings_per_symbol = {}\n\
             bias_margin = {}\ndt_divisor = {}\nseed = {}\nworkers = {}\ncond_cap = {}\n",
            self.m,
            self.l,
            list(&self.b3db_tsym),
            list(&self.ebn0_db),
            self.trials,
            self.target_firings_per_symbol,
            fmt_toml_float(self.bias_margin),
            self.dt_divisor,
            self.seed,
            self.workers,
            fmt_toml_float(self.cond_cap),
        )
    }
}

fn fmt_toml_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:?}")
    }
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V>
where
    V::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{value}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let inner = value.trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml() {
        let cfg = ExperimentConfig::from_toml_str(
            "m = 4\nl = 16\nb3db_tsym = [0.3, 1.0]\nebn0_db = [0, 5, 10]\ntrials = 7\nseed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.l, 16);
        assert_eq!(cfg.b3db_tsym, vec![0.3, 1.0]);
        assert_eq!(cfg.ebn0_db, vec![0.0, 5.0, 10.0]);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.bias_margin, 1.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml_str("mm = 2").is_err());
        assert!(ExperimentConfig::from_toml_str("m = \"two\"").is_err());
        let cfg = ExperimentConfig {
            dt_divisor: 128,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.ebn0_db.clear();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            m: 3,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("ebn0_db", "1, 2.5,inf").unwrap();
        cfg.set("m", "8").unwrap();
        cfg.set("seed", "99").unwrap();
        assert_eq!(cfg.ebn0_db, vec![1.0, 2.5, f64::INFINITY]);
        assert_eq!(cfg.m, 8);
        assert_eq!(cfg.seed, 99);
        assert!(cfg.set("nope", "1").is_err());
        assert!(cfg.set("trials", "-1").is_err());
        for key in KEYS {
            // every documented key is settable
            let v = if key.contains("db") || key.contains("tsym") {
                "1.0"
            } else {
                "300"
            };
            cfg.set(key, v).unwrap();
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig {
            ebn0_db: vec![f64::INFINITY, 3.25],
            ..ExperimentConfig::default()
        };
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}
