//! Plain-text renderings of strategies, payoff reports and simulation reports.
//!
//! CSV output is comma separated with a header row; numbers use Rust's shortest round-trip
//! formatting so files are byte-stable across runs and platforms.

use std::fmt::Write as _;

use crate::equilibrium::{LinearStrategy, PayoffReport};
use crate::simulator::SimReport;

/// Width of the agreement band used in every Monte Carlo verdict, in standard errors.
pub const BAND: f64 = 3.0;

pub fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        // fold -0 into 0
        "0".into()
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

/// `|estimate - target| <= BAND * std_error`.
pub fn within_band(estimate: f64, std_error: f64, target: f64) -> bool {
    (estimate - target).abs() <= BAND * std_error
}

/// Coefficient table `group,index,A,B,C`.
///
/// Symmetric and targeted rules list storage groups, heterogeneous rules list storages, and
/// multi-period rules list periods (1-based) followed by the multiplier.
pub fn strategy_csv(strategy: &LinearStrategy) -> String {
    let mut s = String::from("group,index,A,B,C\n");
    let mut row = |group: &str, index: usize, a: f64, b: f64, c: f64| {
        let _ = writeln!(s, "{group},{index},{},{},{}", fmt_value(a), fmt_value(b), fmt_value(c));
    };
    match strategy {
        LinearStrategy::Symmetric(c) => row("all", 0, c.a, c.b, c.c),
        LinearStrategy::Targeted {
            informed,
            uninformed,
            recipients,
        } => {
            row("informed", *recipients, informed.a, informed.b, informed.c);
            row("uninformed", 0, *uninformed, 0.0, 0.0);
        }
        LinearStrategy::MultiPeriod { lambda, periods } => {
            for (t, c) in periods.iter().enumerate() {
                row("period", t + 1, c.a, c.b, c.c);
            }
            row("lambda", 0, *lambda, 0.0, 0.0);
        }
        LinearStrategy::Heterogeneous { storages, sum_b } => {
            for (i, c) in storages.iter().enumerate() {
                row("storage", i, c.a, c.b, c.c);
            }
            row("sum_b", 0, 0.0, *sum_b, 0.0);
        }
    }
    s
}

/// Table `metric,value` of a payoff report; absent expressions are left empty.
pub fn payoff_csv(report: &PayoffReport) -> String {
    let mut s = String::from("metric,value\n");
    let _ = writeln!(s, "exact,{}", fmt_value(report.exact));
    let _ = writeln!(s, "published,{}", opt(report.published));
    let _ = writeln!(s, "asymptotic,{}", opt(report.asymptotic));
    let _ = writeln!(s, "aggregate,{}", fmt_value(report.aggregate));
    if let Some(per) = &report.per_storage {
        for (i, v) in per.iter().enumerate() {
            let _ = writeln!(s, "storage_{i},{}", fmt_value(*v));
        }
    }
    s
}

/// One row per storage plus an aggregate row. `closed_form[i]` adds the exact expected payoff
/// and the band verdict next to each estimate.
pub fn sim_csv(report: &SimReport, closed_form: Option<&[f64]>) -> String {
    let mut s = String::from(
        "storage,mean_payoff,std_error,closed_form,verdict,path_sum_mean,path_sum_std_error\n",
    );
    let verdict = |est: f64, se: f64, target: Option<f64>| match target {
        Some(t) if within_band(est, se, t) => "PASS",
        Some(_) => "FAIL",
        None => "",
    };
    for i in 0..report.mean_payoff.len() {
        let target = closed_form.map(|c| c[i]);
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{}",
            fmt_value(report.mean_payoff[i]),
            fmt_value(report.std_error[i]),
            opt(target),
            verdict(report.mean_payoff[i], report.std_error[i], target),
            fmt_value(report.path_sum_mean[i]),
            fmt_value(report.path_sum_std_error[i]),
        );
    }
    let target = closed_form.map(|c| c.iter().sum::<f64>());
    let _ = writeln!(
        s,
        "aggregate,{},{},{},{},,",
        fmt_value(report.aggregate),
        fmt_value(report.aggregate_std_error),
        opt(target),
        verdict(report.aggregate, report.aggregate_std_error, target),
    );
    s
}

/// Human-readable block summarizing a simulation.
pub fn sim_summary(report: &SimReport, closed_form: Option<&[f64]>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "variant {} | {} replications | seed {}",
        report.variant, report.replications, report.seed
    );
    for i in 0..report.mean_payoff.len() {
        let (m, se) = (report.mean_payoff[i], report.std_error[i]);
        match closed_form {
            Some(c) => {
                let verdict = if within_band(m, se, c[i]) { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    s,
                    "  storage {i}: MC {m:.6} ± {se:.6}  closed form {:.6}  [{verdict}]",
                    c[i]
                );
            }
            None => {
                let _ = writeln!(s, "  storage {i}: MC {m:.6} ± {se:.6}");
            }
        }
    }
    let _ = writeln!(
        s,
        "  aggregate: {:.6} ± {:.6}",
        report.aggregate, report.aggregate_std_error
    );
    let _ = writeln!(s, "  max |path sum|: {:.3e}", report.conservation_residual);
    let _ = writeln!(
        s,
        "  largest single-replication share of squared payoff: {:.3e}",
        report.max_contribution
    );
    if let Some(d) = &report.deviation {
        let _ = writeln!(
            s,
            "  MC deviation gain (storage 0): {:.3e} ± {:.3e}",
            d.gain, d.std_error
        );
    }
    s
}
