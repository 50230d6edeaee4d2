//! Flat `key = value` files with `[section]` headers.
//!
//! Keys before the first header are global (`experiment`, `scale`, `seed`,
//! `out`, `threads`); each section holds overrides for one experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use selprior::Error;

pub const GLOBAL_KEYS: [&str; 5] = ["experiment", "scale", "seed", "out", "threads"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut cfg = ConfigFile::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if name.is_empty() || cfg.sections.contains_key(&name) {
                    return Err(Error::Config(format!("line {}: empty or repeated section [{name}]", i + 1)));
                }
                cfg.sections.insert(name.clone(), BTreeMap::new());
                current = Some(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            let map = match &current {
                Some(s) => cfg.sections.get_mut(s).expect("section exists"),
                None => &mut cfg.global,
            };
            if map.insert(k.clone(), v).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
        }
        if let Some(k) = cfg.global.keys().find(|k| !GLOBAL_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "global key '{k}' is not one of {GLOBAL_KEYS:?}; put experiment settings in a section"
            )));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::Config(format!("unknown scale '{other}' (paper or desk)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        })
    }
}

/// Resolved settings for one experiment: defaults overlaid with overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Rejects keys the experiment does not define.
    pub fn resolve(
        defaults: Vec<(&'static str, String)>,
        overrides: Option<&BTreeMap<String, String>>,
    ) -> Result<Self, Error> {
        let mut values: BTreeMap<String, String> = defaults.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        if let Some(o) = overrides {
            for (k, v) in o {
                match values.get_mut(k) {
                    Some(slot) => *slot = v.clone(),
                    None => {
                        let known: Vec<&str> = values.keys().map(String::as_str).collect();
                        return Err(Error::Config(format!("unknown key '{k}'; expected one of {known:?}")));
                    }
                }
            }
        }
        Ok(Params { values })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, key: &str) -> Result<&str, Error> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, Error> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{raw}'")))
    }

    /// Comma-separated list, or `start:step:stop` for an inclusive range.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, Error> {
        let raw = self.raw(key)?;
        parse_list(raw).map_err(|e| Error::Config(format!("key '{key}': {e}")))
    }
}

fn parse_list<T: FromStr>(raw: &str) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let p: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| format!("bad range '{raw}'")))
            .collect::<Result<_, _>>()?;
        let (start, step, stop) = (p[0], p[1], p[2]);
        if !(step > 0.0) || stop < start {
            return Err(format!("bad range '{raw}'"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return (0..count)
            .map(|i| {
                // Round to remove accumulated binary noise in the grid.
                let v = start + i as f64 * step;
                let v = (v * 1e12).round() / 1e12;
                v.to_string().parse::<T>().map_err(|_| format!("bad value in '{raw}'"))
            })
            .collect();
    }
    let out: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse '{s}'")))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}
