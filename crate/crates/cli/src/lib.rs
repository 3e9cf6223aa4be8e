//! Command implementations behind the `storeq` binary. Each command renders its results into
//! strings so output can be compared byte for byte.

pub mod figures;
pub mod model;
pub mod policy;
pub mod svg;
pub mod sweep;

use std::fmt::Write as _;

use storage_equilibria::report::{fmt_value, sim_csv, sim_summary};
use storage_equilibria::simulator::{
    best_response_audit, estimate_payoff, DeviationReport, GridSpec, SimConfig,
};
use storage_equilibria::{Config, ModelError, Variant};

use model::{resolve, Resolved};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Audit(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// What a command produced: text for the terminal, a CSV document, and whether an audit failed.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub summary: String,
    pub csv: String,
    pub audit_failed: bool,
}

/// Parses a config text and applies `key=value` overrides and an optional seed.
pub fn load_config(text: &str, overrides: &[String], seed: Option<u64>) -> Result<Config, CliError> {
    let cfg = Config::parse(text)?;
    let mut pairs = Vec::with_capacity(overrides.len());
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("invalid override `{item}`: expected key=value")))?;
        pairs.push((k.trim(), v.trim()));
    }
    let mut cfg = cfg.with_overrides(pairs)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn header(command: &str, variant: Variant, cfg: &Config, extra: &[(&str, String)]) -> String {
    let mut s = format!("# storeq {command}\n# variant = {variant}\n");
    for (k, v) in extra {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s.push_str(&cfg.render("# "));
    s
}

fn run_audit(cfg: &Config, resolved: &Resolved) -> Result<Option<Vec<DeviationReport>>, CliError> {
    if resolved.variant == Variant::Centralized {
        return Ok(None);
    }
    let reports = best_response_audit(
        &cfg.params,
        &resolved.model_info,
        cfg.n,
        &resolved.strategy,
        resolved.variant,
        resolved.costs.as_deref(),
        Some(GridSpec::default()),
    )?;
    Ok(Some(reports))
}

fn audit_text(reports: &Option<Vec<DeviationReport>>) -> (String, bool) {
    let Some(reports) = reports else {
        return ("best-response audit: not applicable to a single planner\n".into(), false);
    };
    let mut s = String::new();
    let mut failed = false;
    for r in reports {
        let verdict = if r.certified { "CERTIFIED" } else { "NOT CERTIFIED" };
        failed |= !r.certified;
        let _ = writeln!(
            s,
            "best-response audit, {}: gain {:.3e} (relative {:.3e}), grid gain {:.3e} [{verdict}]",
            r.group,
            r.gain,
            r.relative_gain,
            r.grid_gain.unwrap_or(f64::NAN),
        );
    }
    (s, failed)
}

/// Strategy coefficients and closed-form payoffs.
pub fn cmd_equilibrium(cfg: &Config, variant: Variant, audit: bool) -> Result<CommandOutput, CliError> {
    let resolved = resolve(cfg, variant)?;
    let mut csv = header("equilibrium", variant, cfg, &[]);
    csv.push_str("item,value\n");
    let mut summary = String::new();
    for (k, v) in &resolved.metrics {
        let _ = writeln!(csv, "{k},{}", fmt_value(*v));
        let _ = writeln!(summary, "{k:>24} = {}", fmt_value(*v));
    }
    let mut audit_failed = false;
    if audit {
        let (text, failed) = audit_text(&run_audit(cfg, &resolved)?);
        summary.push_str(&text);
        audit_failed = failed;
    }
    Ok(CommandOutput {
        summary,
        csv,
        audit_failed,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions {
    pub replications: u64,
    pub audit: bool,
    pub close_final: bool,
}

/// Monte Carlo estimates next to the closed forms with the band verdict.
pub fn cmd_simulate(cfg: &Config, variant: Variant, opts: SimulateOptions) -> Result<CommandOutput, CliError> {
    let resolved = resolve(cfg, variant)?;
    let mut sim = SimConfig::new(variant, opts.replications, cfg.seed);
    sim.audit = opts.audit;
    sim.close_final = opts.close_final;
    sim.costs = resolved.costs.clone();
    let report = estimate_payoff(&cfg.params, &resolved.info, cfg.n, &resolved.strategy, &sim)?;

    let closed_form = if variant == Variant::MultiPeriod && opts.close_final {
        resolved
            .metric("exact_closed_final")
            .map(|v| vec![v; cfg.n])
    } else {
        resolved.per_storage.clone()
    };

    let extra = [
        ("reps", opts.replications.to_string()),
        ("close_final", opts.close_final.to_string()),
    ];
    let mut csv = header("simulate", variant, cfg, &extra);
    csv.push_str(&sim_csv(&report, closed_form.as_deref()));
    let mut summary = sim_summary(&report, closed_form.as_deref());
    let mut audit_failed = false;
    if opts.audit {
        let (text, failed) = audit_text(&run_audit(cfg, &resolved)?);
        summary.push_str(&text);
        audit_failed = failed;
    }
    Ok(CommandOutput {
        summary,
        csv,
        audit_failed,
    })
}

pub fn cmd_policy(cfg: &Config) -> Result<CommandOutput, CliError> {
    let rows = policy::policy_table(cfg)?;
    let csv = policy::policy_csv(cfg, &rows);
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(
            summary,
            "{:<9} {:<24} individual {:>12.6e}  aggregate {:>12.6e}  {}",
            r.policy,
            r.setting,
            r.individual_published,
            r.aggregate_published,
            r.markers.join(" ")
        );
    }
    Ok(CommandOutput {
        summary,
        csv,
        audit_failed: false,
    })
}
