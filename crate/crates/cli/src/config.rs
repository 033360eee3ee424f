//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::CliError;

/// Every key a config file may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "b",
    "bandwidth",
    "bmse_source",
    "boot",
    "chernoff_replicates",
    "dt",
    "estimator",
    "format",
    "h0",
    "h0_list",
    "h_grid",
    "half_width",
    "input",
    "level",
    "n",
    "n_grid",
    "out",
    "replicates",
    "reps",
    "scenario",
    "scheme",
    "seed",
    "t0",
];

/// Raw settings from the config file, overridden by flags, plus a record of
/// every value actually used.
#[derive(Debug, Default)]
pub struct Settings {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse_file(text: &str) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Input(format!("config line {}: expected 'key = value'", i + 1))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Input(format!(
                    "config line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            raw.insert(key, value.trim().to_string());
        }
        Ok(Settings {
            raw,
            resolved: BTreeMap::new(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.raw.insert(key.to_string(), value.into());
    }

    pub fn set_opt(&mut self, key: &str, value: &Option<String>) {
        if let Some(v) = value {
            self.set(key, v.clone());
        }
    }

    /// Repeated flags override the file as one comma-separated list.
    pub fn set_list(&mut self, key: &str, values: &[String]) {
        if !values.is_empty() {
            self.set(key, values.join(","));
        }
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Records an extra resolved value, e.g. one derived from the data.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.record(key, value);
    }

    pub fn string(&mut self, key: &str, default: Option<&str>) -> Result<String, CliError> {
        let v = match (self.raw.get(key), default) {
            (Some(v), _) => v.clone(),
            (None, Some(d)) => d.to_string(),
            (None, None) => {
                return Err(CliError::Input(format!("missing required setting '{key}'")))
            }
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn parsed<T>(&mut self, key: &str, default: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display + Clone,
    {
        match self.raw.get(key).cloned() {
            Some(text) => {
                let v: T = text
                    .parse()
                    .map_err(|_| CliError::Input(format!("invalid value '{text}' for '{key}'")))?;
                self.record(key, &v);
                Ok(v)
            }
            None => match default {
                Some(d) => {
                    self.record(key, &d);
                    Ok(d)
                }
                None => Err(CliError::Input(format!("missing required setting '{key}'"))),
            },
        }
    }

    pub fn list<T>(&mut self, key: &str, default: Option<&str>) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
    {
        let text = self.string(key, default)?;
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Input(format!("invalid entry '{s}' in '{key}'")))
            })
            .collect()
    }

    /// Grid given as `start:stop:step` or as a comma-separated list.
    pub fn grid(&mut self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let text = self.string(key, Some(default))?;
        let bad = || CliError::Input(format!("invalid grid '{text}' for '{key}'"));
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() == 3 {
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let (start, stop, step) = (nums[0], nums[1], nums[2]);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Rounding keeps grids such as 0.05:1:0.05 free of representation noise.
            return Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect());
        }
        if parts.len() != 1 {
            return Err(bad());
        }
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }

    /// The sidecar text: one `key = value` line per resolved setting.
    pub fn sidecar(&self, command: &str) -> String {
        let mut out = format!(
            "# resolved configuration\ncommand = {command}\nversion = {}\n",
            env!("CARGO_PKG_VERSION")
        );
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}
