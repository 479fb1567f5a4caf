//! Run configuration: an optional `key = value` file with `[section]`s, overridden by flags.
//!
//! Keys outside any section are global (`csv`, `json`, `quad_tol`, `fd_step`,
//! `seed`, `window`). `[surface]` holds the surface spec and each command has
//! its own section. A key is looked up in the flags first, then in the
//! command's section, then in the global section.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use hbern::error::{Error, Result};

pub const GLOBAL_KEYS: &[&str] = &["command", "csv", "json", "quad_tol", "fd_step", "seed", "window"];
pub const SURFACE_KEYS: &[&str] =
    &["strip", "I", "branch", "graph_xy", "graph_yt", "plane", "cylinder", "type2", "g0", "h0"];

pub fn command_keys(cmd: &str) -> &'static [&'static str] {
    match cmd {
        "curvature" => &["window", "grid", "scan"],
        "variation" => &["window", "family", "support", "count", "profile"],
        "instability" => &["J"],
        "reduce" => &["probe", "t_domain", "then_certify", "psi"],
        "highdim" => &["n", "radius", "h", "graph", "nodes", "alpha"],
        _ => &[],
    }
}

/// Parsed config file: section name (empty for global) to key/value pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::invalid(format!("line {}: unterminated section header", no + 1)))?;
                current = name.trim().to_string();
                let known = current == "surface" || !command_keys(&current).is_empty();
                if !known {
                    return Err(Error::invalid(format!("line {}: unknown section [{current}]", no + 1)));
                }
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let allowed = match current.as_str() {
                "" => GLOBAL_KEYS,
                "surface" => SURFACE_KEYS,
                c => command_keys(c),
            };
            if !allowed.contains(&k) {
                let sec = if current.is_empty() { "global".to_string() } else { format!("[{current}]") };
                return Err(Error::invalid(format!("line {}: unknown key `{k}` in {sec}", no + 1)));
            }
            sections.entry(current.clone()).or_default().insert(k.to_string(), v.to_string());
        }
        Ok(Self { sections })
    }
}

/// Merged view of flags over a config file, for one command.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub file: ConfigFile,
}

impl RunConfig {
    pub fn new(command: &str, flags: BTreeMap<String, String>, file: ConfigFile) -> Result<Self> {
        if let Some(c) = file.sections.get("").and_then(|g| g.get("command")) {
            if c != command {
                return Err(Error::invalid(format!("config file is for `{c}`, not `{command}`")));
            }
        }
        Ok(Self { command: command.to_string(), flags, file })
    }

    /// Raw string value of `key`; `section` is `surface` for surface keys, else the command.
    pub fn raw(&self, key: &str) -> Option<&str> {
        if let Some(v) = self.flags.get(key) {
            return Some(v);
        }
        let section = if SURFACE_KEYS.contains(&key) { "surface" } else { self.command.as_str() };
        self.file
            .sections
            .get(section)
            .and_then(|s| s.get(key))
            .or_else(|| self.file.sections.get("").and_then(|s| s.get(key)))
            .map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::invalid(format!("cannot read `{key}` from `{s}`"))),
        }
    }

    pub fn list(&self, key: &str, len: usize) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => Ok(Some(parse_list(s, len).map_err(|e| Error::invalid(format!("`{key}`: {e}")))?)),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(s) => Err(Error::invalid(format!("`{key}` must be true or false, got `{s}`"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.get("seed")?.unwrap_or(0))
    }
}

/// Comma-separated reals; `inf`/`-inf` allowed.
pub fn parse_list(s: &str, len: usize) -> std::result::Result<Vec<f64>, String> {
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let v = v.map_err(|_| format!("`{s}` is not a list of numbers"))?;
    if v.len() != len {
        return Err(format!("expected {len} numbers, got {}", v.len()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_command_section() {
        let file = ConfigFile::parse(
            "seed = 3\nwindow = -1, 1\n[surface]\nstrip = tan_tanh\n[curvature]\ngrid = 11\nwindow = -2, 2 # local\n",
        )
        .unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("grid".to_string(), "21".to_string());
        let rc = RunConfig::new("curvature", flags, file).unwrap();
        assert_eq!(rc.get::<usize>("grid").unwrap(), Some(21));
        assert_eq!(rc.list("window", 2).unwrap(), Some(vec![-2.0, 2.0]));
        assert_eq!(rc.seed().unwrap(), 3);
        assert_eq!(rc.raw("strip"), Some("tan_tanh"));
    }

    #[test]
    fn unknown_keys_and_sections_are_errors() {
        assert!(ConfigFile::parse("[nonsense]\n").is_err());
        assert!(ConfigFile::parse("[curvature]\nfoo = 1\n").is_err());
        assert!(ConfigFile::parse("just text\n").is_err());
    }
}
