//! Run configuration: command-line flags merged over an optional flat
//! `key = value` file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hauteur_core::ffheight::DEFAULT_FF_CAP;
use hauteur_core::parse::parse_rational;
use hauteur_core::spec_height::{DEFAULT_ARCH_CAP, DEFAULT_TOL};
use hauteur_core::{Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Divisor,
    Height,
    Series,
    Sweep,
    Count,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Table,
    /// One JSON object per line.
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "table" => Ok(Format::Table),
            "json" | "json-lines" | "jsonl" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidArgument(format!(
                "unknown format '{s}' (expected table, json or csv)"
            ))),
        }
    }
}

pub const DEFAULT_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub f: String,
    pub p: String,
    pub t: Vec<Rational>,
    pub order: usize,
    pub tol: f64,
    /// Iteration cap for specialized local heights.
    pub cap: usize,
    /// Iteration cap for function-field local heights.
    pub ff_cap: usize,
    pub bound: Option<u64>,
    pub count_b: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

impl RunConfig {
    /// Defaults for everything except the command and the pair.
    pub fn new(command: Command, f: &str, p: &str) -> RunConfig {
        RunConfig {
            command,
            f: f.into(),
            p: p.into(),
            t: Vec::new(),
            order: DEFAULT_ORDER,
            tol: DEFAULT_TOL,
            cap: DEFAULT_ARCH_CAP,
            ff_cap: DEFAULT_FF_CAP,
            bound: None,
            count_b: None,
            format: Format::Table,
            out: None,
            strict: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tolerance {} must be positive", self.tol));
        }
        if self.order < 1 {
            return bad("series order must be at least 1".into());
        }
        if self.bound == Some(0) {
            return bad("sweep bound must be at least 1".into());
        }
        if self.cap == 0 || self.ff_cap == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }
}

/// Optional settings from either source; `None` means "not given".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub f: Option<String>,
    pub p: Option<String>,
    pub t: Vec<String>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub cap: Option<usize>,
    pub ff_cap: Option<usize>,
    pub bound: Option<u64>,
    pub count_b: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub strict: Option<bool>,
}

fn value<T: FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| {
        Error::InvalidArgument(format!("config line {line}: bad value '{v}' for {key}"))
    })
}

impl Settings {
    /// Reads `key = value` lines; `#` starts a comment. `t` may be given
    /// several times or as a comma-separated list.
    pub fn parse_file(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, v)) = content.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "config line {line}: expected key = value"
                )));
            };
            let (key, v) = (key.trim(), v.trim());
            match key {
                "f" => s.f = Some(v.into()),
                "P" | "p" => s.p = Some(v.into()),
                "t" => s.t.extend(
                    v.split(',')
                        .map(|x| x.trim().to_string())
                        .filter(|x| !x.is_empty()),
                ),
                "order" => s.order = Some(value(key, v, line)?),
                "tol" => s.tol = Some(value(key, v, line)?),
                "cap" => s.cap = Some(value(key, v, line)?),
                "ff_cap" | "ff-cap" => s.ff_cap = Some(value(key, v, line)?),
                "bound" => s.bound = Some(value(key, v, line)?),
                "B" => s.count_b = Some(value(key, v, line)?),
                "format" => s.format = Some(v.parse()?),
                "out" => s.out = Some(PathBuf::from(v)),
                "strict" => s.strict = Some(value(key, v, line)?),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "config line {line}: unknown key '{key}'"
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse_file(&text)
    }

    /// `self` takes precedence over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            f: self.f.or(base.f),
            p: self.p.or(base.p),
            t: if self.t.is_empty() { base.t } else { self.t },
            order: self.order.or(base.order),
            tol: self.tol.or(base.tol),
            cap: self.cap.or(base.cap),
            ff_cap: self.ff_cap.or(base.ff_cap),
            bound: self.bound.or(base.bound),
            count_b: self.count_b.or(base.count_b),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            strict: self.strict.or(base.strict),
        }
    }

    pub fn into_config(self, command: Command) -> Result<RunConfig> {
        let missing = |what: &str| Error::InvalidArgument(format!("missing --{what}"));
        let f = self.f.ok_or_else(|| missing("f"))?;
        let p = self.p.ok_or_else(|| missing("P"))?;
        let mut cfg = RunConfig::new(command, &f, &p);
        cfg.t = self
            .t
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<_>>()?;
        cfg.order = self.order.unwrap_or(cfg.order);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.cap = self.cap.unwrap_or(cfg.cap);
        cfg.ff_cap = self.ff_cap.unwrap_or(cfg.ff_cap);
        cfg.bound = self.bound;
        cfg.count_b = self.count_b;
        cfg.format = self.format.unwrap_or_default();
        cfg.out = self.out;
        cfg.strict = self.strict.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }
}
