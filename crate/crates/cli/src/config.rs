//! Layered settings: command-line flags over a `key=value` config file over
//! the manifest a demo left in the output directory, then built-in defaults.
//! Every value that was used is recorded so the run can write it back.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use seba_core::io::{read_kv, KeyValues};

pub struct Resolver {
    layers: Vec<(String, KeyValues)>,
    resolved: KeyValues,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Resolver {
    pub fn new(command: &str) -> Self {
        Self {
            layers: Vec::new(),
            resolved: vec![("command".into(), command.into())],
        }
    }

    /// Adds a lower-priority layer read from `path`.
    pub fn push_file(&mut self, path: &Path) -> Result<()> {
        let kv = read_kv(path)?
            .into_iter()
            .map(|(k, v)| (normalize(&k), v))
            .collect();
        self.layers.push((path.display().to_string(), kv));
        Ok(())
    }

    fn lookup(&self, key: &str) -> Option<(&str, &str)> {
        self.layers.iter().find_map(|(src, kv)| {
            kv.iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| (src.as_str(), v.as_str()))
        })
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.retain(|(k, _)| k != key);
        self.resolved.push((key.to_string(), value));
    }

    /// Flag value, else the first layer that defines `key`.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.lookup(key) {
                Some((src, raw)) => Some(
                    raw.parse::<T>()
                        .map_err(|e| anyhow::anyhow!("{src}: bad value '{raw}' for {key}: {e}"))?,
                ),
                None => None,
            },
        };
        match &v {
            Some(x) => self.record(key, x.to_string()),
            None => self.record(key, "auto".into()),
        }
        Ok(v)
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Records a derived value that has no flag.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.record(key, value.to_string());
    }

    #[cfg(test)]
    pub fn resolved(&self) -> &KeyValues {
        &self.resolved
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        let path = out.join("config.kv");
        seba_core::io::write_kv(&path, &self.resolved).with_context(|| "writing resolved config")
    }
}
