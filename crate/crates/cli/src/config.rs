//! Run configuration: `key=value` config files, grid specs and the
//! flag > config file > default precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Seed used when neither a flag nor the config file provides one.
pub const DEFAULT_SEED: u64 = 20_160_101;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Lines of `key=value`; blank lines and `#` comments are ignored.
    /// Keys use the long flag names, with `-` or `_` accepted.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got '{raw}'", i + 1)))?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Resolve one setting: the flag wins, then the config file, then `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: Option<T>) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.raw(key) {
            return raw
                .parse()
                .map_err(|_| CliError::Usage(format!("config value for '{key}' is invalid: '{raw}'")));
        }
        default.ok_or_else(|| CliError::Usage(format!("missing required setting --{key}")))
    }
}

/// `min:max:steps`: `steps` equal intervals, so `steps + 1` points
/// including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let w = (self.max - self.min) / self.steps as f64;
        (0..=self.steps).map(|i| if i == self.steps { self.max } else { self.min + w * i as f64 }).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid '{s}' must look like min:max:steps"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("grid '{s}': '{t}' is not a number"));
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let steps: usize = parts[2].trim().parse().map_err(|_| format!("grid '{s}': steps must be a positive integer"))?;
        if steps < 1 {
            return Err(format!("grid '{s}': steps must be at least 1"));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(format!("grid '{s}': need finite min < max"));
        }
        Ok(GridSpec { min, max, steps })
    }
}

/// Comma-separated list of sizes such as `25,50,100`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeList(pub Vec<u64>);

impl FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| format!("'{t}' is not a positive integer")))
            .collect::<Result<Vec<_>, _>>()
            .map(SizeList)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_include_both_ends() {
        let g: GridSpec = "0.1:0.99:90".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 91);
        assert_eq!(pts[0], 0.1);
        assert_eq!(pts[90], 0.99);
        assert!("1:0:5".parse::<GridSpec>().is_err());
        assert!("0:1:0".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
        assert_eq!("-0.4:5:54".parse::<GridSpec>().unwrap().points()[4], -0.4 + 0.4);
    }

    #[test]
    fn precedence() {
        let cfg = ConfigFile::parse("n = 40\n# comment\nbeta=4 # trailing\nsweep_count=3\n").unwrap();
        assert_eq!(cfg.pick(Some(10u64), "n", Some(1)).unwrap(), 10);
        assert_eq!(cfg.pick(None::<u64>, "n", Some(1)).unwrap(), 40);
        assert_eq!(cfg.pick(None::<f64>, "beta", None).unwrap(), 4.0);
        assert_eq!(cfg.pick(None::<u64>, "seed", Some(9)).unwrap(), 9);
        assert_eq!(cfg.raw("sweep-count"), Some("3"));
        assert!(cfg.pick(None::<u64>, "missing", None).is_err());
        assert!(ConfigFile::parse("just words").is_err());
    }

    #[test]
    fn size_lists() {
        assert_eq!("25,50, 100".parse::<SizeList>().unwrap(), SizeList(vec![25, 50, 100]));
        assert!("25,x".parse::<SizeList>().is_err());
    }
}
