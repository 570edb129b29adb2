//! `key = value` experiment files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::UsageError;

/// Every key a config file may carry; names match the long flags.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "out",
    "threads",
    "systems",
    "n",
    "p",
    "s",
    "snr",
    "families",
    "beta-range",
    "dump-csv",
    "manifest",
    "k",
    "l",
    "t-max",
    "v-grid",
    "train-set",
    "epochs",
    "lr",
    "batch-size",
    "w",
    "p-max",
    "model",
    "alpha",
    "deflation",
    "x",
    "y",
    "header",
    "truth",
    "estimator",
];

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            UsageError(format!("{}:{}: expected `key = value`, got {raw:?}", origin.display(), i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(UsageError(format!("{}:{}: unknown key {key:?}", origin.display(), i + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(UsageError(format!("{}:{}: duplicate key {key:?}", origin.display(), i + 1)));
        }
    }
    Ok(out)
}

/// Resolves settings with precedence flag, then config file, then default, and
/// records every resolved value for the run manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver { file, ..Default::default() }
    }

    pub fn load(path: Option<&Path>) -> Result<Self, UsageError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self::new(parse_config(&text, path)?))
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| UsageError(format!("config key {key}: cannot parse {raw:?}: {e}"))),
        }
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn or_default<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, UsageError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, UsageError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self
            .lookup(key, flag)?
            .ok_or_else(|| UsageError(format!("missing required setting --{key} (flag or config key `{key}`)")))?;
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>, UsageError> {
        let v = self.optional(key, flag.map(|p| p.to_string_lossy().into_owned()))?;
        Ok(v.map(PathBuf::from))
    }

    pub fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, UsageError> {
        let v = self.required(key, flag.map(|p| p.to_string_lossy().into_owned()))?;
        Ok(PathBuf::from(v))
    }

    /// A boolean switch: set by the flag, or by `true`/`false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, UsageError> {
        let v = self.lookup(key, flag.then_some(true))?.unwrap_or(false);
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }
}

/// Comma-separated list of values, e.g. `0.3,1,3`.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(items))
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Dummy count: a number, or `p` for one dummy per original column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DummyCount {
    PerColumn,
    Fixed(usize),
}

impl FromStr for DummyCount {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "p" => Ok(DummyCount::PerColumn),
            other => match other.parse::<usize>() {
                Ok(0) => Err("L must be >= 1".into()),
                Ok(l) => Ok(DummyCount::Fixed(l)),
                Err(e) => Err(format!("expected a count or `p`: {e}")),
            },
        }
    }
}

impl Display for DummyCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DummyCount::PerColumn => f.write_str("p"),
            DummyCount::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl DummyCount {
    pub fn as_option(self) -> Option<usize> {
        match self {
            DummyCount::PerColumn => None,
            DummyCount::Fixed(l) => Some(l),
        }
    }
}
