//! Flat `key = value` run configuration.
//!
//! Values come from built-in defaults, then an optional config file, then
//! command-line flags named after the keys. Every value remembers where it
//! came from so that errors can point at a file line or a flag.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Steady,
    Lossy,
    Correlators,
    Threshold,
    SelfCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Steady,
        Scenario::Lossy,
        Scenario::Correlators,
        Scenario::Threshold,
        Scenario::SelfCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Steady => "steady",
            Scenario::Lossy => "lossy",
            Scenario::Correlators => "correlators",
            Scenario::Threshold => "threshold",
            Scenario::SelfCheck => "selfcheck",
        }
    }

    /// Keys read by the scenario, in echo order.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Scenario::Steady => &[
                "sweep",
                "r",
                "r_min",
                "r_max",
                "r_steps",
                "n0",
                "n0_classical",
                "n0_min",
                "n0_max",
                "n0_steps",
            ],
            Scenario::Lossy => &[
                "kappa0",
                "coupling_decay",
                "loss_rate",
                "n0",
                "n0_classical",
                "t_max",
                "dt",
                "t_stride",
            ],
            Scenario::Correlators => &["n0", "r_min", "r_max", "r_steps", "order_max", "family"],
            Scenario::Threshold => &["n0_min", "n0_max", "n0_steps", "spacing"],
            Scenario::SelfCheck => &["samples"],
        }
    }

    fn default_for(self, key: &str) -> Option<&'static str> {
        use Scenario::*;
        let value = match (self, key) {
            (Steady, "sweep") => "r",
            (Steady, "r") => "1",
            (Steady | Correlators, "r_min") => "0",
            (Steady | Correlators, "r_max") => "4",
            (Steady, "r_steps") => "81",
            (Correlators, "r_steps") => "41",
            (Steady | Lossy, "n0") => "0.3",
            (Correlators, "n0") => "0",
            (Steady, "n0_classical") => "matched",
            (Lossy, "n0_classical") => "0.8",
            (Steady, "n0_min") => "0",
            (Steady, "n0_max") => "2",
            (Steady, "n0_steps") => "41",
            (Threshold, "n0_min") => "0.01",
            (Threshold, "n0_max") => "10",
            (Threshold, "n0_steps") => "61",
            (Threshold, "spacing") => "log",
            (Lossy, "kappa0") => "1",
            (Lossy, "coupling_decay") => "0.1",
            (Lossy, "loss_rate") => "0.1",
            (Lossy, "t_max") => "50",
            (Lossy, "dt") => "0.001",
            (Lossy, "t_stride") => "0.1",
            (Correlators, "order_max") => "4",
            (Correlators, "family") => "worst",
            (SelfCheck, "samples") => "100000",
            _ => return None,
        };
        Some(value)
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!(
                    "unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Every accepted key with its help text.
pub const KEYS: &[(&str, &str)] = &[
    (
        "scenario",
        "steady | lossy | correlators | threshold | selfcheck",
    ),
    ("out", "output CSV path; standard output when absent"),
    (
        "plot",
        "also write an SVG line plot next to the CSV (true/false)",
    ),
    ("seed", "seed for Monte Carlo sampling"),
    ("sweep", "steady: sweep axis, r or n0"),
    ("r", "steady: fixed gain for an n0 sweep"),
    ("r_min", "lower end of the gain grid"),
    ("r_max", "upper end of the gain grid"),
    ("r_steps", "number of gain grid points"),
    ("n0", "quantum thermal occupation"),
    (
        "n0_classical",
        "classical noise occupation; steady also accepts `matched` for n0 + 1/2",
    ),
    ("n0_min", "lower end of the occupation grid"),
    ("n0_max", "upper end of the occupation grid"),
    ("n0_steps", "number of occupation grid points"),
    (
        "spacing",
        "threshold: occupation grid spacing, linear or log",
    ),
    ("kappa0", "lossy: initial coupling"),
    ("coupling_decay", "lossy: pump decay rate"),
    ("loss_rate", "lossy: cavity loss rate"),
    ("t_max", "lossy: end time"),
    ("dt", "lossy: integration step"),
    ("t_stride", "lossy: spacing of output rows in time"),
    ("order_max", "correlators: largest correlator order"),
    (
        "family",
        "correlators: worst (all specs of each order) or single (a_h^n)",
    ),
    ("samples", "selfcheck: Monte Carlo samples per scenario"),
];

const COMMON_KEYS: [&str; 4] = ["scenario", "out", "plot", "seed"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Key/value pairs before defaults are resolved.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn config_error(origin: &Origin, key: Option<&str>, message: impl Into<String>) -> CliError {
    let location = match (origin, key) {
        (Origin::Flag, Some(k)) => format!("--{k}"),
        (Origin::Default, Some(k)) => format!("default for `{k}`"),
        (o, _) => o.to_string(),
    };
    CliError::Config(format!("{location}: {}", message.into()))
}

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (index, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: index + 1,
            };
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_error(
                    &origin,
                    None,
                    format!("expected `key = value`, got `{content}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !is_known(key) {
                return Err(config_error(&origin, None, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(config_error(
                    &origin,
                    None,
                    format!("missing value for `{key}`"),
                ));
            }
            if let Some(previous) = raw.entries.get(key) {
                return Err(config_error(
                    &origin,
                    None,
                    format!("duplicate key `{key}` (first set at {})", previous.origin),
                ));
            }
            raw.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    origin,
                },
            );
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("{}: cannot read config: {e}", path.display()))
        })?;
        Self::parse(&text, path)
    }

    /// Command-line value; replaces any file value.
    pub fn set_flag(&mut self, key: &str, value: &str) {
        debug_assert!(is_known(key));
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                origin: Origin::Flag,
            },
        );
    }

    /// Fills in defaults and rejects keys the scenario does not read.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let scenario = match self.entries.get("scenario") {
            Some(e) => e
                .value
                .parse::<Scenario>()
                .map_err(|m| config_error(&e.origin, Some("scenario"), m))?,
            None => Scenario::Steady,
        };
        let allowed: Vec<&str> = COMMON_KEYS.iter().chain(scenario.keys()).copied().collect();
        for (key, entry) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(config_error(
                    &entry.origin,
                    Some(key),
                    format!("key `{key}` is not used by scenario {}", scenario.name()),
                ));
            }
        }

        let mut values = self.entries;
        values.insert(
            "scenario".into(),
            Entry {
                value: scenario.name().into(),
                origin: values
                    .get("scenario")
                    .map_or(Origin::Default, |e| e.origin.clone()),
            },
        );
        for key in ["plot", "seed"] {
            let default = if key == "plot" { "false" } else { "1" };
            values.entry(key.into()).or_insert(Entry {
                value: default.into(),
                origin: Origin::Default,
            });
        }
        for key in scenario.keys() {
            if let Some(default) = scenario.default_for(key) {
                values.entry((*key).into()).or_insert(Entry {
                    value: default.into(),
                    origin: Origin::Default,
                });
            }
        }
        Ok(RunConfig { scenario, values })
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    values: BTreeMap<String, Entry>,
}

impl RunConfig {
    fn entry(&self, key: &str) -> Result<&Entry, CliError> {
        self.values
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing value for `{key}`")))
    }

    /// Error attributed to the place where `key` was set.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> CliError {
        match self.values.get(key) {
            Some(e) => config_error(&e.origin, Some(key), message),
            None => CliError::Config(format!("`{key}`: {}", message.into())),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        let e = self.entry(key)?;
        e.value
            .parse::<T>()
            .map_err(|_| config_error(&e.origin, Some(key), format!("`{}` is not {what}", e.value)))
    }

    /// Finite real number.
    pub fn number(&self, key: &str) -> Result<f64, CliError> {
        let x: f64 = self.parsed(key, "a number")?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.invalid(key, "must be finite"))
        }
    }

    pub fn non_negative(&self, key: &str) -> Result<f64, CliError> {
        let x = self.number(key)?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(self.invalid(key, format!("must be ≥ 0, got {x}")))
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let x = self.number(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.invalid(key, format!("must be > 0, got {x}")))
        }
    }

    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let n: usize = self.parsed(key, "a non-negative integer")?;
        if n >= 1 {
            Ok(n)
        } else {
            Err(self.invalid(key, "must be ≥ 1"))
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.parsed(key, "true or false")
    }

    pub fn text(&self, key: &str) -> Result<&str, CliError> {
        Ok(self.entry(key)?.value.as_str())
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, CliError> {
        let value = self.text(key)?;
        options
            .iter()
            .find(|o| **o == value)
            .copied()
            .ok_or_else(|| {
                self.invalid(
                    key,
                    format!("expected one of {}, got `{value}`", options.join(", ")),
                )
            })
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.values.get("out").map(|e| PathBuf::from(&e.value))
    }

    /// `key = value` lines for every resolved key, in a stable order.
    pub fn echo(&self) -> Vec<String> {
        COMMON_KEYS
            .iter()
            .chain(self.scenario.keys())
            .filter_map(|k| self.values.get(*k).map(|e| format!("{k} = {}", e.value)))
            .collect()
    }
}

/// Inclusive grid of `steps` points, linear or geometric.
pub fn grid(min: f64, max: f64, steps: usize, log: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let f = i as f64 / last;
            if i == steps - 1 {
                max
            } else if log {
                min * (max / min).powf(f)
            } else {
                min + (max - min) * f
            }
        })
        .collect()
}

/// Validated `(min, max, steps)` range read from `<prefix>_min` etc.
pub fn range(config: &RunConfig, prefix: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let min_key = format!("{prefix}_min");
    let max_key = format!("{prefix}_max");
    let min = config.non_negative(&min_key)?;
    let max = config.non_negative(&max_key)?;
    let steps = config.count(&format!("{prefix}_steps"))?;
    if max < min {
        return Err(config.invalid(&max_key, format!("must be ≥ {min_key} ({min}), got {max}")));
    }
    if log && min <= 0.0 {
        return Err(config.invalid(&min_key, "must be > 0 for a log grid"));
    }
    Ok(grid(min, max, steps, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawConfig, CliError> {
        RawConfig::parse(text, Path::new("run.cfg"))
    }

    fn message(e: CliError) -> String {
        e.to_string()
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let raw = parse("# sweep\nscenario = lossy\n\n  t_max=10  # shorter\n").unwrap();
        let config = raw.resolve().unwrap();
        assert_eq!(config.scenario, Scenario::Lossy);
        assert_eq!(config.number("t_max").unwrap(), 10.0);
        assert_eq!(config.number("kappa0").unwrap(), 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            message(parse("n0 = 1\nbogus = 2\n").unwrap_err()),
            "config error: run.cfg:2: unknown key `bogus`"
        );
        assert!(message(parse("\n\nr_min 3").unwrap_err())
            .contains("run.cfg:3: expected `key = value`"));
        assert!(message(parse("n0 = 1\nn0 = 2").unwrap_err())
            .contains("run.cfg:2: duplicate key `n0` (first set at run.cfg:1)"));
        assert!(message(parse("n0 =").unwrap_err()).contains("run.cfg:1: missing value"));
        let config = parse("scenario = steady\nn0 = abc\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert!(
            message(config.number("n0").unwrap_err()).contains("run.cfg:2: `abc` is not a number")
        );
        let config = parse("scenario=steady\n\nr_max = -1")
            .unwrap()
            .resolve()
            .unwrap();
        assert!(message(config.non_negative("r_max").unwrap_err()).contains("run.cfg:3"));
    }

    #[test]
    fn rejects_keys_of_other_scenarios() {
        let e = parse("scenario = threshold\nkappa0 = 2\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(message(e).contains("run.cfg:2: key `kappa0` is not used by scenario threshold"));
        let e = parse("scenario = nope").unwrap().resolve().unwrap_err();
        assert!(message(e).contains("unknown scenario `nope`"));
    }

    #[test]
    fn flags_override_file_values() {
        let mut raw = parse("n0 = 1\n").unwrap();
        raw.set_flag("n0", "2");
        raw.set_flag("r_steps", "x");
        let config = raw.resolve().unwrap();
        assert_eq!(config.number("n0").unwrap(), 2.0);
        assert_eq!(
            message(config.count("r_steps").unwrap_err()),
            "config error: --r_steps: `x` is not a non-negative integer"
        );
    }

    #[test]
    fn defaults_are_echoed() {
        let config = parse("n0 = 0.25").unwrap().resolve().unwrap();
        let echo = config.echo();
        assert_eq!(echo[0], "scenario = steady");
        assert!(echo.contains(&"n0 = 0.25".to_string()));
        assert!(echo.contains(&"n0_classical = matched".to_string()));
        assert!(echo.contains(&"plot = false".to_string()));
        assert!(!echo.iter().any(|l| l.starts_with("out")));
    }

    #[test]
    fn echo_round_trips() {
        let mut raw = parse("scenario = lossy\ndt = 0.002\n").unwrap();
        raw.set_flag("seed", "77");
        let config = raw.resolve().unwrap();
        let text = config.echo().join("\n");
        let again = parse(&text).unwrap().resolve().unwrap();
        assert_eq!(again.echo(), config.echo());
    }

    #[test]
    fn grids() {
        assert_eq!(grid(0.0, 1.0, 3, false), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid(2.0, 5.0, 1, false), vec![2.0]);
        let g = grid(0.01, 10.0, 4, true);
        assert!((g[1] - 0.1).abs() < 1e-15 && g[3] == 10.0);
    }
}
