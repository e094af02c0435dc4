//! `key = value` run configuration for `reproduce`.
//!
//! ```text
//! scenario = fixed42
//! seed = 0
//! seeds = 20
//! metrics = nld, gdd, frobenius
//! p = 0.8
//! t_max = 4
//! n_samples = 400
//! output_dir = out/fixed42
//! ```
//!
//! Keys left out take the scenario's defaults. Blank lines and `#` comments
//! are ignored; unknown keys are an error.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use netflow_core::clustering::DEFAULT_RESTARTS;
use netflow_core::flow::{DEFAULT_SAMPLES, DEFAULT_T_MAX};
use netflow_core::Metric;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Parent SBM graph and six single-edge deletions.
    Bridge41,
    /// Twenty graphs with five or ten fixed bridges.
    Fixed42,
    /// Ten draws each from two SBMs differing in cross-block density.
    TwoSbm43,
    /// A population drawn from a user-given two-block SBM.
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Bridge41 => "bridge41",
            Scenario::Fixed42 => "fixed42",
            Scenario::TwoSbm43 => "twosbm43",
            Scenario::Custom => "custom",
        }
    }

    fn default_grid(self) -> (f64, usize) {
        match self {
            Scenario::Fixed42 => (4.0, 400),
            _ => (DEFAULT_T_MAX, DEFAULT_SAMPLES),
        }
    }

    fn default_seeds(self) -> usize {
        match self {
            Scenario::Bridge41 => 50,
            Scenario::Fixed42 | Scenario::TwoSbm43 => 20,
            Scenario::Custom => 1,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "bridge41" => Ok(Scenario::Bridge41),
            "fixed42" => Ok(Scenario::Fixed42),
            "twosbm43" => Ok(Scenario::TwoSbm43),
            "custom" => Ok(Scenario::Custom),
            other => Err(CliError::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Two-block SBM used by the custom scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSbm {
    pub block_sizes: [usize; 2],
    pub p11: f64,
    pub p22: f64,
    pub p12: f64,
    pub count: usize,
}

impl Default for CustomSbm {
    fn default() -> Self {
        Self {
            block_sizes: [10, 10],
            p11: 0.75,
            p22: 0.6,
            p12: 0.04,
            count: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// First seed of the sweep.
    pub seed: u64,
    /// Number of consecutive seeds starting at `seed`.
    pub seeds: usize,
    pub metrics: Vec<Metric>,
    pub t_max: f64,
    pub n_samples: usize,
    /// Within-block edge probability of the fixed-bridge scenario.
    pub p: f64,
    pub custom: CustomSbm,
    pub k: usize,
    pub restarts: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        let (t_max, n_samples) = scenario.default_grid();
        Self {
            scenario,
            seed: 0,
            seeds: scenario.default_seeds(),
            metrics: Metric::ALL.to_vec(),
            t_max,
            n_samples,
            p: 0.8,
            custom: CustomSbm::default(),
            k: 2,
            restarts: DEFAULT_RESTARTS,
            output_dir: PathBuf::from(format!("out/{scenario}")),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return fail("t_max must be a positive number");
        }
        if self.n_samples < 2 {
            return fail("n_samples must be at least 2");
        }
        if self.metrics.is_empty() {
            return fail("metrics must name at least one metric");
        }
        if self.seeds == 0 {
            return fail("seeds must be at least 1");
        }
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1");
        }
        Ok(())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            pairs.push((i + 1, k.trim(), v.trim()));
        }
        let scenario = match pairs.iter().find(|(_, k, _)| *k == "scenario") {
            Some((_, _, v)) => v.parse()?,
            None => return Err(CliError::Config("missing 'scenario'".into())),
        };
        let mut config = Self::for_scenario(scenario);
        for (line, key, value) in pairs {
            config.set(key, value).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "scenario" => {}
            "seed" => self.seed = number(key, value)?,
            "seeds" => self.seeds = number(key, value)?,
            "metrics" => {
                self.metrics = value
                    .split(',')
                    .map(|m| m.trim().parse::<Metric>())
                    .collect::<Result<_, _>>()?
            }
            "t_max" => self.t_max = number(key, value)?,
            "n_samples" => self.n_samples = number(key, value)?,
            "p" => self.p = number(key, value)?,
            "p11" => self.custom.p11 = number(key, value)?,
            "p22" => self.custom.p22 = number(key, value)?,
            "p12" => self.custom.p12 = number(key, value)?,
            "count" => self.custom.count = number(key, value)?,
            "block_sizes" => {
                let sizes: Vec<usize> = value
                    .split(',')
                    .map(|s| number("block_sizes", s.trim()))
                    .collect::<CliResult<_>>()?;
                self.custom.block_sizes = sizes
                    .try_into()
                    .map_err(|_| CliError::Config("block_sizes needs exactly two sizes".into()))?;
            }
            "k" => self.k = number(key, value)?,
            "restarts" => self.restarts = number(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_defaults() {
        let c = RunConfig::parse("scenario = fixed42\n").unwrap();
        assert_eq!((c.t_max, c.n_samples, c.seeds), (4.0, 400, 20));
        let c = RunConfig::parse("scenario = bridge41").unwrap();
        assert_eq!((c.t_max, c.n_samples), (40.0, 1200));
        assert_eq!(c.metrics.len(), 4);
    }

    #[test]
    fn overrides() {
        let text = "# sweep\nscenario=custom\nseed = 7\nmetrics = nld, fro\nblock_sizes = 5,6\np12 = 0.2\noutput_dir = x/y\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.metrics, vec![Metric::Nld, Metric::Frobenius]);
        assert_eq!(c.custom.block_sizes, [5, 6]);
        assert_eq!(c.custom.p12, 0.2);
        assert_eq!(c.output_dir, PathBuf::from("x/y"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("seed = 1").is_err());
        assert!(RunConfig::parse("scenario = bridge41\nfoo = 1").is_err());
        assert!(RunConfig::parse("scenario = bridge41\nt_max = 0").is_err());
        assert!(RunConfig::parse("scenario = bridge41\nn_samples = 1").is_err());
        assert!(RunConfig::parse("scenario = bridge41\nmetrics = nld, cosine").is_err());
        assert!(RunConfig::parse("scenario = bridge41\nseed").is_err());
        let e = RunConfig::parse("scenario = bridge41\n\nseed = x").unwrap_err();
        assert!(e.to_string().contains("line 3"));
        assert_eq!(e.exit_code(), 2);
    }
}
