//! Experiment configuration: a flat `key = value` file overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: &[&str] = &[
    "example", "alpha", "r", "N", "M", "T", "nu", "mode", "out", "jobs", "gamma", "lambda1",
    "lambda2", "dump_weights",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    One,
    Two,
}

impl Example {
    pub fn id(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Table,
    Audit,
    Recurrence,
    Truncation,
}

/// Grading exponent, possibly tied to alpha (`"2/alpha"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Fixed(f64),
    OverAlpha(f64),
}

impl Grading {
    pub fn resolve(self, alpha: f64) -> f64 {
        match self {
            Self::Fixed(r) => r,
            Self::OverAlpha(c) => c / alpha,
        }
    }

    /// File-name friendly label: `2`, `1.5`, `2_over_alpha`.
    pub fn label(self) -> String {
        match self {
            Self::Fixed(r) => format!("{r}"),
            Self::OverAlpha(c) => format!("{c}_over_alpha"),
        }
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(r) => write!(f, "{r}"),
            Self::OverAlpha(c) => write!(f, "{c}/alpha"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    pub alphas: Vec<f64>,
    pub gradings: Vec<Grading>,
    pub ns: Vec<usize>,
    pub m1: usize,
    pub m2: usize,
    pub t_final: f64,
    pub nu: f64,
    pub mode: Mode,
    pub out: PathBuf,
    /// Worker threads; `0` lets the pool decide.
    pub jobs: usize,
    pub gammas: Option<Vec<f64>>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub dump_weights: bool,
}

/// Raw `key -> value` pairs before interpretation.
pub type RawConfig = BTreeMap<String, String>;

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<RawConfig, CliError> {
    let mut map = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(line, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::config(key, format!("line {}: unknown key", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigFile {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

fn list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CliError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| CliError::config(key, format!("cannot parse `{s}`"))))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::config(key, "empty list"));
    }
    Ok(items)
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(key, format!("not a number: `{value}`")))
}

fn parse_grading(s: &str) -> Option<Grading> {
    let s = s.replace(' ', "");
    if let Some(c) = s.strip_suffix("/alpha").or_else(|| s.strip_suffix("/α")) {
        return c.parse().ok().filter(|c: &f64| *c > 0.0).map(Grading::OverAlpha);
    }
    s.parse().ok().filter(|r: &f64| r.is_finite()).map(Grading::Fixed)
}

/// `64,128,256` or the doubling range `64..1024`.
fn parse_steps(value: &str) -> Result<Vec<usize>, CliError> {
    if let Some((lo, hi)) = value.split_once("..") {
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config("N", format!("cannot parse `{s}`")))
        };
        let (mut n, hi) = (parse(lo)?, parse(hi)?);
        if n == 0 || hi < n {
            return Err(CliError::config("N", format!("bad range `{value}`")));
        }
        let mut out = Vec::new();
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    list("N", value, |s| s.parse::<usize>().ok())
}

fn parse_m(value: &str) -> Result<(usize, usize), CliError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::config("M", format!("cannot parse `{s}`")))
    };
    match value.split_once(['x', ',']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let m = parse(value)?;
            Ok((m, m))
        }
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        for key in raw.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::config(key, "unknown key"));
            }
        }
        let get = |k: &str| raw.get(k).map(String::as_str);

        let mode = match get("mode").unwrap_or("table") {
            "table" => Mode::Table,
            "audit" => Mode::Audit,
            "recurrence" => Mode::Recurrence,
            "truncation" => Mode::Truncation,
            other => {
                return Err(CliError::config(
                    "mode",
                    format!("`{other}` is not one of table, audit, recurrence, truncation"),
                ))
            }
        };
        let example = match get("example").unwrap_or("1") {
            "1" => Example::One,
            "2" => Example::Two,
            "custom" => {
                return Err(CliError::config(
                    "example",
                    "custom problems are built through the library API; the runner supports 1 and 2",
                ))
            }
            other => return Err(CliError::config("example", format!("unknown example `{other}`"))),
        };
        let alphas = list("alpha", get("alpha").unwrap_or("0.3,0.5,0.7"), |s| s.parse::<f64>().ok())?;
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(CliError::config("alpha", format!("{a} is outside (0, 1)")));
        }
        let default_r = if mode == Mode::Audit { "1,2,2/alpha,3" } else { "1,2,2/alpha" };
        let gradings = list("r", get("r").unwrap_or(default_r), parse_grading)?;
        for g in &gradings {
            for &a in &alphas {
                if g.resolve(a) < 1.0 {
                    return Err(CliError::config("r", format!("grading {g} resolves below 1 at alpha = {a}")));
                }
            }
        }
        let default_n = match (mode, example) {
            (Mode::Table, Example::One) => "64..1024",
            (Mode::Recurrence, _) => "128..1024",
            _ => "32..512",
        };
        let ns = parse_steps(get("N").unwrap_or(default_n))?;
        if ns.contains(&0) {
            return Err(CliError::config("N", "step counts must be positive"));
        }
        if matches!(mode, Mode::Table | Mode::Recurrence | Mode::Truncation) {
            if let Some(w) = ns.windows(2).find(|w| w[1] != 2 * w[0]) {
                return Err(CliError::config(
                    "N",
                    format!("step counts must double for rate fitting ({} then {})", w[0], w[1]),
                ));
            }
        }
        let (m1, m2) = parse_m(get("M").unwrap_or("25"))?;
        if m1 < 2 || m2 < 2 {
            return Err(CliError::config("M", "need at least 2 cells per direction"));
        }
        let t_final = get("T").map(|v| number("T", v)).transpose()?.unwrap_or(0.5);
        if t_final <= 0.0 {
            return Err(CliError::config("T", "final time must be positive"));
        }
        let default_nu = match example {
            Example::One => 0.1,
            Example::Two => 0.3,
        };
        let nu = get("nu").map(|v| number("nu", v)).transpose()?.unwrap_or(default_nu);
        if nu <= 0.0 {
            return Err(CliError::config("nu", "diffusivity must be positive"));
        }
        let jobs = match get("jobs") {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::config("jobs", format!("not a thread count: `{v}`")))?,
            None => 0,
        };
        let gammas = get("gamma")
            .map(|v| list("gamma", v, |s| s.parse::<f64>().ok()))
            .transpose()?;
        let lambda = |key: &str| -> Result<Vec<f64>, CliError> {
            let v = list(key, get(key).unwrap_or("0,0.5"), |s| s.parse::<f64>().ok())?;
            if v.iter().any(|l| *l < 0.0) {
                return Err(CliError::config(key, "must be nonnegative"));
            }
            Ok(v)
        };
        let dump_weights = match get("dump_weights").unwrap_or("false") {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => return Err(CliError::config("dump_weights", format!("not a boolean: `{other}`"))),
        };
        Ok(Self {
            example,
            alphas,
            gradings,
            ns,
            m1,
            m2,
            t_final,
            nu,
            mode,
            out: PathBuf::from(get("out").unwrap_or("out")),
            jobs,
            gammas,
            lambda1: lambda("lambda1")?,
            lambda2: lambda("lambda2")?,
            dump_weights,
        })
    }

    /// `γ` values for the recurrence lab at this `alpha`.
    pub fn gammas_for(&self, alpha: f64) -> Vec<f64> {
        self.gammas.clone().unwrap_or_else(|| vec![alpha - 1.0, -0.5, 0.5])
    }
}
