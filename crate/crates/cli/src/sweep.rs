//! One-parameter sweeps producing long-format CSV: `param,value,metric,result`.

use std::fmt::Write as _;
use std::str::FromStr;

use storage_equilibria::report::fmt_value;
use storage_equilibria::simulator::{estimate_payoff, SimConfig};
use storage_equilibria::{Config, Variant};

use crate::model::resolve;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Delta,
    Alpha,
    N,
    Rho,
    Sigma,
    M,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::Alpha => "alpha",
            SweepParam::N => "n",
            SweepParam::Rho => "rho",
            SweepParam::Sigma => "sigma",
            SweepParam::M => "m",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::N | SweepParam::M)
    }

    fn is_precision(self) -> bool {
        matches!(self, SweepParam::Alpha | SweepParam::Rho | SweepParam::Sigma)
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "delta" => SweepParam::Delta,
            "alpha" => SweepParam::Alpha,
            "n" => SweepParam::N,
            "rho" => SweepParam::Rho,
            "sigma" => SweepParam::Sigma,
            "m" => SweepParam::M,
            other => {
                return Err(CliError::Config(format!(
                    "invalid param: `{other}` is not one of delta, alpha, n, rho, sigma, m"
                )))
            }
        })
    }
}

/// Metrics every variant can report besides its closed-form names.
const MC_METRICS: [&str; 2] = ["mc", "mc_std_error"];

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub fixed: Config,
    pub variant: Variant,
    pub metrics: Vec<String>,
    /// Replications per grid point for the Monte Carlo metrics.
    pub replications: u64,
}

impl SweepSpec {
    /// `explicit_keys` are the keys the fixed block sets itself; the swept one must not be among them.
    pub fn new(
        param: SweepParam,
        grid: Vec<f64>,
        fixed: Config,
        explicit_keys: &[String],
        variant: Variant,
        metrics: Vec<String>,
        replications: u64,
    ) -> Result<Self, CliError> {
        if grid.is_empty() {
            return Err(CliError::Config("invalid values: the grid is empty".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Config(
                "invalid values: the grid must be strictly increasing".into(),
            ));
        }
        if param.is_integer() && grid.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(CliError::Config(format!(
                "invalid values: `{}` takes positive integers",
                param.key()
            )));
        }
        if explicit_keys.iter().any(|k| k == param.key()) {
            return Err(CliError::Config(format!(
                "invalid {}: the swept parameter is also fixed in the config",
                param.key()
            )));
        }
        if metrics.is_empty() {
            return Err(CliError::Config("invalid metrics: none requested".into()));
        }
        Ok(Self {
            param,
            grid,
            fixed,
            variant,
            metrics,
            replications,
        })
    }

    fn config_at(&self, value: f64) -> Result<Config, CliError> {
        let text = if self.param.is_integer() {
            format!("{}", value as u64)
        } else {
            fmt_value(value)
        };
        Ok(self.fixed.with_overrides([(self.param.key(), text.as_str())])?)
    }

    /// Uses a logarithmic axis for precisions spanning two decades or more.
    pub fn log_axis(&self) -> bool {
        self.param.is_precision() && self.grid[0] > 0.0 && self.grid[self.grid.len() - 1] / self.grid[0] >= 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub metric: String,
    pub result: f64,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for &value in &spec.grid {
        let cfg = spec.config_at(value)?;
        let resolved = resolve(&cfg, spec.variant)?;
        let wants_mc = spec.metrics.iter().any(|m| MC_METRICS.contains(&m.as_str()));
        let mc = if wants_mc {
            let mut sim = SimConfig::new(spec.variant, spec.replications, cfg.seed);
            sim.costs = resolved.costs.clone();
            let r = estimate_payoff(&cfg.params, &resolved.info, cfg.n, &resolved.strategy, &sim)?;
            // targeted payoffs are aggregates
            Some(if spec.variant == Variant::Targeted {
                (r.aggregate, r.aggregate_std_error)
            } else {
                (r.mean_payoff[0], r.std_error[0])
            })
        } else {
            None
        };
        for metric in &spec.metrics {
            let result = match (metric.as_str(), mc) {
                ("mc", Some((m, _))) => m,
                ("mc_std_error", Some((_, se))) => se,
                (name, _) => resolved.metric(name).ok_or_else(|| {
                    let known: Vec<&str> = resolved.metrics.iter().map(|(k, _)| k.as_str()).collect();
                    CliError::Config(format!(
                        "invalid metrics: `{name}` is not reported by the {} variant (known: {}, mc, mc_std_error)",
                        spec.variant,
                        known.join(", ")
                    ))
                })?,
            };
            rows.push(SweepRow {
                value,
                metric: metric.clone(),
                result,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# storeq sweep");
    let _ = writeln!(s, "# variant = {}", spec.variant);
    let _ = writeln!(s, "# param = {}", spec.param.key());
    let _ = writeln!(s, "# metrics = {}", spec.metrics.join(", "));
    if spec.metrics.iter().any(|m| MC_METRICS.contains(&m.as_str())) {
        let _ = writeln!(s, "# reps = {}", spec.replications);
    }
    s.push_str(&spec.fixed.render("# "));
    s.push_str("param,value,metric,result\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            spec.param.key(),
            fmt_value(row.value),
            row.metric,
            fmt_value(row.result)
        );
    }
    s
}

/// One chart per metric.
pub fn sweep_svgs(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<(String, String)> {
    spec.metrics
        .iter()
        .map(|metric| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| &r.metric == metric)
                .map(|r| (r.value, r.result))
                .unzip();
            let title = format!("{metric} vs {} ({} variant)", spec.param.key(), spec.variant);
            let svg = crate::svg::line_chart(&title, spec.param.key(), metric, &xs, &ys, spec.log_axis());
            (metric.clone(), svg)
        })
        .collect()
}

/// Parses `--values a,b,c` or `--range start:stop:count` (geometric spacing with `log`).
pub fn parse_grid(values: Option<&str>, range: Option<&str>, log: bool) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("invalid values: `{}` is not a number", s.trim())))
    };
    match (values, range) {
        (Some(v), None) => v.split(',').map(number).collect(),
        (None, Some(r)) => {
            let parts: Vec<&str> = r.split(':').collect();
            let [start, stop, count] = parts[..] else {
                return Err(CliError::Config(format!(
                    "invalid range: expected start:stop:count, got `{r}`"
                )));
            };
            let (start, stop) = (number(start)?, number(stop)?);
            let count: usize = count
                .trim()
                .parse()
                .ok()
                .filter(|c| *c >= 2)
                .ok_or_else(|| CliError::Config(format!("invalid range: count `{count}` must be at least 2")))?;
            if log && !(start > 0.0 && stop > 0.0) {
                return Err(CliError::Config("invalid range: a log range needs positive ends".into()));
            }
            Ok((0..count)
                .map(|k| {
                    let u = k as f64 / (count - 1) as f64;
                    if log {
                        10f64.powf(start.log10() + u * (stop.log10() - start.log10()))
                    } else {
                        start + u * (stop - start)
                    }
                })
                .collect())
        }
        _ => Err(CliError::Config(
            "invalid values: pass exactly one of --values or --range".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid(Some("0, 0.5,1"), None, false).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid(None, Some("0:1:3"), false).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid(None, Some("0.01:100:5"), true).unwrap();
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!(parse_grid(None, None, false).is_err());
        assert!(parse_grid(None, Some("0:1"), false).is_err());
    }

    #[test]
    fn spec_validation() {
        let cfg = Config::default();
        let metrics = vec!["exact".to_string()];
        let ok = |grid: Vec<f64>, param, keys: &[String]| {
            SweepSpec::new(param, grid, cfg.clone(), keys, Variant::Private, metrics.clone(), 10)
        };
        assert!(ok(vec![0.0, 0.1], SweepParam::Delta, &[]).is_ok());
        assert!(ok(vec![0.1, 0.1], SweepParam::Delta, &[]).is_err());
        assert!(ok(vec![], SweepParam::Delta, &[]).is_err());
        assert!(ok(vec![1.5], SweepParam::N, &[]).is_err());
        assert!(ok(vec![0.1], SweepParam::Delta, &["delta".to_string()]).is_err());
    }
}
