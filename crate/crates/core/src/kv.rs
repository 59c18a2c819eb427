//! Flat `key = value` text with dotted nesting.
//!
//! Lines are `key = value`; `#` starts a comment. Numbers accept plain
//! decimals, fractions (`1/3`) and powers (`2^-12`). Grids are either comma
//! lists, geometric ranges `start:stop:factor`, or linear ranges
//! `start:stop:+step`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Parsed key-value document that records which keys were read.
#[derive(Debug, Default)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
    consumed: Mutex<BTreeSet<String>>,
}

impl Clone for KvMap {
    fn clone(&self) -> Self {
        KvMap {
            entries: self.entries.clone(),
            consumed: Mutex::new(
                self.consumed
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .clone(),
            ),
        }
    }
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    n + 1
                ))
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(KvMap {
            entries,
            consumed: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        KvMap {
            entries: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            consumed: Mutex::new(BTreeSet::new()),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    /// Raw value; marks the key consumed.
    pub fn get(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.consumed
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key.to_string());
        Some(v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_number(v).map_err(|e| keyed(key, e)))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        parse_number(self.require(key)?).map_err(|e| keyed(key, e))
    }

    pub fn int<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("`{key}`: not an integer: {v:?}")))
            })
            .transpose()
    }

    pub fn int_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.int(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::Config(format!("`{key}`: not a boolean: {v:?}"))),
        }
    }

    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_list(v).map_err(|e| keyed(key, e)))
            .transpose()
    }

    pub fn grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_grid(v).map_err(|e| keyed(key, e)))
            .transpose()
    }

    /// Keys never read, in sorted order.
    pub fn unconsumed(&self) -> Vec<String> {
        let used = self.consumed.lock().unwrap_or_else(|e| e.into_inner());
        self.entries
            .keys()
            .filter(|k| !used.contains(*k))
            .cloned()
            .collect()
    }

    /// Fails naming the first key nobody read.
    pub fn ensure_consumed(&self) -> Result<()> {
        match self.unconsumed().first() {
            None => Ok(()),
            Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Canonical text: sorted `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

fn keyed(key: &str, e: Error) -> Error {
    Error::Config(format!("`{key}`: {e}"))
}

/// Decimal, fraction `a/b`, or power `b^e`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_number(a)?;
        let b = parse_number(b)?;
        return Ok(a / b);
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let e: f64 = e.trim().parse().map_err(|_| bad())?;
        return Ok(b.powf(e));
    }
    s.parse::<f64>().map_err(|_| bad())
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_number)
        .collect()
}

/// Comma list, geometric `start:stop:factor`, or linear `start:stop:+step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.len() {
        1 => parse_list(s),
        3 => {
            let start = parse_number(parts[0])?;
            let stop = parse_number(parts[1])?;
            if let Some(step) = parts[2].strip_prefix('+') {
                linear_grid(start, stop, parse_number(step)?)
            } else {
                geometric_grid(start, stop, parse_number(parts[2])?)
            }
        }
        _ => Err(Error::Config(format!("bad grid {s:?}"))),
    }
}

pub fn geometric_grid(start: f64, stop: f64, factor: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && factor > 0.0 && factor != 1.0) {
        return Err(Error::Config(format!(
            "geometric grid needs positive endpoints and factor != 1 ({start}:{stop}:{factor})"
        )));
    }
    if (stop > start) != (factor > 1.0) && stop != start {
        return Err(Error::Config(format!(
            "factor {factor} never reaches {stop} from {start}"
        )));
    }
    let n = ((stop / start).ln() / factor.ln() + 1e-9).floor() as i64;
    Ok((0..=n).map(|k| start * factor.powi(k as i32)).collect())
}

pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Config(format!(
            "linear grid needs start <= stop and step > 0 ({start}:{stop}:+{step})"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_numbers() {
        let kv = KvMap::parse("a = 1/3 # third\n\n b.c = 2^-4\nlist = 1, 2,3\n").unwrap();
        assert!((kv.require_f64("a").unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(kv.require_f64("b.c").unwrap(), 0.0625);
        assert_eq!(kv.list_f64("list").unwrap().unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(kv.unconsumed().is_empty());
    }

    #[test]
    fn tracks_unknown_keys() {
        let kv = KvMap::parse("a = 1\nbogus = 2\n").unwrap();
        kv.require_f64("a").unwrap();
        let err = kv.ensure_consumed().unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn grids() {
        let g = parse_grid("2^-4:2^-12:0.5").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 0.0625);
        assert_eq!(g[8], 2f64.powi(-12));
        let l = parse_grid("0:1:+0.25").unwrap();
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:2:0.5").is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(KvMap::parse("novalue\n").is_err());
        assert!(KvMap::parse("a = 1\na = 2\n").is_err());
        assert!(parse_number("abc").is_err());
    }
}
