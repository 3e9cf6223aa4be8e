//! Flat `key = value` parameter files.
//!
//! ```text
//! # two-period baseline
//! L = 2
//! beta = 2, 1        # one value per period; a single value is repeated
//! gamma = 1
//! epsilon = 1
//! alpha = 1
//! delta = 0
//! zeta = 1
//! rho = 1            # or one value per storage
//! sigma = 0          # 0 disables the public forecast
//! n = 1
//! seed = 0
//! m = 3              # optional: public-forecast recipients
//! epsilon_storage = 1, 2; 0.5, 0.5   # optional: per-storage costs, rows split by ';'
//! ```
//!
//! Keys may carry a `[]` suffix (`beta[] = ...`). `inf` is accepted wherever a precision is.
//! Numbers always use `.` as the decimal point. Missing keys take the values shown above,
//! except `m` and `epsilon_storage` which stay unset.

use std::fmt::Write as _;

use crate::error::{ModelError, Result};
use crate::market::{validate, InfoStructure, MarketParams, Rho};

/// Recognized keys, in the order [`Config::render`] writes them.
pub const KEYS: [&str; 13] = [
    "L",
    "beta",
    "gamma",
    "epsilon",
    "alpha",
    "delta",
    "zeta",
    "rho",
    "sigma",
    "n",
    "seed",
    "m",
    "epsilon_storage",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: MarketParams,
    pub info: InfoStructure,
    pub n: usize,
    pub seed: u64,
    pub m: Option<usize>,
    /// `epsilon_storage[i][t]`.
    pub storage_costs: Option<Vec<Vec<f64>>>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: MarketParams::two_period(2.0, 1.0, 1.0, 1.0),
            info: InfoStructure::new(1.0, 0.0, 1.0, 1.0, 0.0),
            n: 1,
            seed: 0,
            m: None,
            storage_costs: None,
        }
    }
}

fn static_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

fn parse_number(key: &'static str, raw: &str) -> Result<f64> {
    let s = raw.trim();
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ModelError::invalid(key, format!("`{s}` is not a number")))
}

fn parse_list(key: &'static str, raw: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = raw.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(ModelError::invalid(key, format!("malformed list `{raw}`")));
    }
    items.into_iter().map(|s| parse_number(key, s)).collect()
}

fn parse_integer<T: std::str::FromStr>(key: &'static str, raw: &str) -> Result<T> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| ModelError::invalid(key, format!("`{}` is not a non-negative integer", raw.trim())))
}

fn fmt_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| fmt_number(*v)).collect::<Vec<_>>().join(", ")
}

/// Raw values collected before the horizon is known, so lists can be broadcast afterwards.
#[derive(Debug, Default)]
struct Raw {
    horizon: Option<usize>,
    beta: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
}

/// Keys a config text sets explicitly, without their `[]` suffix, in file order.
pub fn keys_in(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|line| line.split('#').next())
        .filter_map(|line| line.split_once('='))
        .map(|(k, _)| {
            let k = k.trim();
            k.strip_suffix("[]").unwrap_or(k).to_string()
        })
        .collect()
}

impl Config {
    /// Parses a config file and validates the resulting model.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ModelError::invalid("config", format!("line {}: expected `key = value`", lineno + 1))
            })?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        Self::from_entries(entries.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Applies `key=value` overrides on top of this config. Per-period lists that hold a single
    /// repeated value follow a new horizon.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let overrides: Vec<(&str, &str)> = overrides.into_iter().collect();
        let mut rendered = self.entries();
        let list = |key: &str| match key {
            "beta" => Some(&self.params.beta),
            "gamma" => Some(&self.params.gamma),
            "epsilon" => Some(&self.params.epsilon),
            _ => None,
        };
        for (key, value) in rendered.iter_mut() {
            if let Some(values) = list(key) {
                if values.iter().all(|v| *v == values[0]) {
                    *value = fmt_number(values[0]);
                }
            }
        }
        let base = rendered.iter().map(|(k, v)| (*k, v.as_str()));
        Self::from_entries(base.chain(overrides))
    }

    fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut cfg = Config::default();
        let mut raw = Raw::default();
        let mut rho: Option<Vec<f64>> = None;
        let mut costs_raw: Option<(&'static str, String)> = None;

        for (key, value) in entries {
            let trimmed = key.trim();
            let name = trimmed.strip_suffix("[]").unwrap_or(trimmed);
            let key = static_key(name)
                .ok_or_else(|| ModelError::invalid("config", format!("unknown key `{name}`")))?;
            match key {
                "L" => {
                    let l: usize = parse_integer(key, value)?;
                    if l < 1 {
                        return Err(ModelError::invalid(key, "horizon must be at least 1"));
                    }
                    raw.horizon = Some(l);
                }
                "beta" => raw.beta = Some(parse_list(key, value)?),
                "gamma" => raw.gamma = Some(parse_list(key, value)?),
                "epsilon" => raw.epsilon = Some(parse_list(key, value)?),
                "alpha" => cfg.info.alpha = parse_number(key, value)?,
                "delta" => cfg.info.delta = parse_number(key, value)?,
                "zeta" => cfg.info.zeta = parse_number(key, value)?,
                "rho" => rho = Some(parse_list(key, value)?),
                "sigma" => cfg.info.sigma = parse_number(key, value)?,
                "n" => cfg.n = parse_integer(key, value)?,
                "seed" => cfg.seed = parse_integer(key, value)?,
                "m" => {
                    let v = value.trim();
                    cfg.m = if v.is_empty() || v == "none" {
                        None
                    } else {
                        Some(parse_integer(key, v)?)
                    };
                }
                "epsilon_storage" => {
                    let v = value.trim();
                    costs_raw = if v.is_empty() || v == "none" {
                        None
                    } else {
                        Some((key, v.to_string()))
                    };
                }
                _ => unreachable!("every key in KEYS is handled"),
            }
        }

        let horizon = raw.horizon.unwrap_or(cfg.params.horizon);
        let broadcast = |key: &'static str, values: Option<Vec<f64>>, default: &[f64]| -> Result<Vec<f64>> {
            let values = match values {
                Some(v) => v,
                None if default.len() == horizon => return Ok(default.to_vec()),
                None if default.iter().all(|d| *d == default[0]) => vec![default[0]],
                None => return Err(ModelError::invalid(key, format!("needs {horizon} values"))),
            };
            match values.len() {
                1 => Ok(vec![values[0]; horizon]),
                len if len == horizon => Ok(values),
                len => Err(ModelError::invalid(
                    key,
                    format!("expected 1 or {horizon} values, got {len}"),
                )),
            }
        };
        let defaults = Config::default().params;
        cfg.params = MarketParams::new(
            broadcast("beta", raw.beta, &defaults.beta)?,
            broadcast("gamma", raw.gamma, &defaults.gamma)?,
            broadcast("epsilon", raw.epsilon, &defaults.epsilon)?,
        );

        if let Some(values) = rho {
            cfg.info.rho = if values.len() == 1 {
                Rho::Common(values[0])
            } else if values.len() == cfg.n {
                Rho::PerStorage(values)
            } else {
                return Err(ModelError::invalid(
                    "rho",
                    format!("expected 1 or n={} values, got {}", cfg.n, values.len()),
                ));
            };
        }

        if let Some((key, text)) = costs_raw {
            let rows = text
                .split(';')
                .map(|row| broadcast(key, Some(parse_list(key, row)?), &[]))
                .collect::<Result<Vec<_>>>()?;
            let rows = match rows.len() {
                1 => vec![rows[0].clone(); cfg.n],
                len if len == cfg.n => rows,
                len => {
                    return Err(ModelError::invalid(
                        key,
                        format!("expected 1 or n={} rows, got {len}", cfg.n),
                    ))
                }
            };
            if rows.iter().flatten().any(|e| !(*e > 0.0 && e.is_finite())) {
                return Err(ModelError::invalid(key, "epsilon must be positive"));
            }
            cfg.storage_costs = Some(rows);
        }

        if cfg.n < 1 {
            return Err(ModelError::invalid("n", "storage count must be at least 1"));
        }
        if let Some(m) = cfg.m {
            if m < 1 || m > cfg.n {
                return Err(ModelError::invalid("m", format!("must lie in 1..={}", cfg.n)));
            }
        }
        validate(&cfg.params, &cfg.info)?;
        cfg.info.validate_for(cfg.n)?;
        Ok(cfg)
    }

    /// Key/value pairs in [`KEYS`] order; unset optional keys are omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let rho = match &self.info.rho {
            Rho::Common(r) => fmt_number(*r),
            Rho::PerStorage(v) => fmt_list(v),
        };
        let mut out = vec![
            ("L", self.params.horizon.to_string()),
            ("beta", fmt_list(&self.params.beta)),
            ("gamma", fmt_list(&self.params.gamma)),
            ("epsilon", fmt_list(&self.params.epsilon)),
            ("alpha", fmt_number(self.info.alpha)),
            ("delta", fmt_number(self.info.delta)),
            ("zeta", fmt_number(self.info.zeta)),
            ("rho", rho),
            ("sigma", fmt_number(self.info.sigma)),
            ("n", self.n.to_string()),
            ("seed", self.seed.to_string()),
        ];
        if let Some(m) = self.m {
            out.push(("m", m.to_string()));
        }
        if let Some(costs) = &self.storage_costs {
            let rows: Vec<String> = costs.iter().map(|r| fmt_list(r)).collect();
            out.push(("epsilon_storage", rows.join("; ")));
        }
        out
    }

    /// The resolved config in file syntax, each line prefixed with `prefix`.
    pub fn render(&self, prefix: &str) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{prefix}{k} = {v}");
        }
        s
    }
}
