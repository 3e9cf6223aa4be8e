//! Side-by-side comparison of the information policies for one parameter block.

use std::fmt::Write as _;

use storage_equilibria::equilibrium::{
    optimal_recipients, payoff_private, payoff_public, sharing_compare, targeted_aggregate_payoff,
    two_period_private, two_period_public,
};
use storage_equilibria::report::fmt_value;
use storage_equilibria::{Config, Result};

/// Public-forecast precisions tabulated, as multiples of `alpha`.
pub const SIGMA_MULTIPLES: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub policy: &'static str,
    pub setting: String,
    /// Published per-storage payoff (aggregate over `n` for targeted release).
    pub individual_published: f64,
    pub aggregate_published: f64,
    pub aggregate_exact: f64,
    pub markers: Vec<&'static str>,
}

pub fn policy_table(cfg: &Config) -> Result<Vec<PolicyRow>> {
    let (p, n) = (&cfg.params, cfg.n);
    let nf = n as f64;
    let mut rows = Vec::new();

    let private_info = cfg.info.with_sigma(0.0);
    let private = payoff_private(&two_period_private(p, &private_info, n)?, p, &private_info, n)?;
    let private_published = private.published.unwrap_or(private.exact);
    rows.push(PolicyRow {
        policy: "private",
        setting: "sigma=0".into(),
        individual_published: private_published,
        aggregate_published: nf * private_published,
        aggregate_exact: private.aggregate,
        markers: vec![],
    });

    let alpha = cfg.info.alpha;
    let first_public = rows.len();
    for k in SIGMA_MULTIPLES {
        let info = cfg.info.with_sigma(k * alpha);
        let r = payoff_public(&two_period_public(p, &info, n)?, p, &info, n)?;
        let published = r.published.unwrap_or(r.exact);
        rows.push(PolicyRow {
            policy: "public",
            setting: format!("sigma={}", fmt_value(k * alpha)),
            individual_published: published,
            aggregate_published: nf * published,
            aggregate_exact: r.aggregate,
            markers: if k == 1.0 { vec!["sigma_star"] } else { vec![] },
        });
    }
    let best_public = (first_public..rows.len())
        .max_by(|a, b| rows[*a].individual_published.total_cmp(&rows[*b].individual_published))
        .expect("public rows exist");
    rows[best_public].markers.push("sigma_max");

    let cmp = sharing_compare(p, &private_info, n)?;
    let shared_published = cmp.shared.published.unwrap_or(cmp.shared.exact);
    rows.push(PolicyRow {
        policy: "sharing",
        setting: format!("sigma=n*rho={}", fmt_value(nf * private_info.rho.of(0))),
        individual_published: shared_published,
        aggregate_published: nf * shared_published,
        aggregate_exact: cmp.shared.aggregate,
        markers: vec![],
    });

    if cfg.info.sigma > 0.0 {
        let choice = optimal_recipients(p, &cfg.info, n)?;
        let mut ms = vec![choice.best];
        if choice.best != n {
            ms.push(n);
        }
        for m in ms {
            let r = targeted_aggregate_payoff(p, &cfg.info, n, m)?;
            let published = r.published.unwrap_or(r.exact);
            rows.push(PolicyRow {
                policy: "targeted",
                setting: format!("m={m}"),
                individual_published: published / nf,
                aggregate_published: published,
                aggregate_exact: r.exact,
                markers: if m == choice.best { vec!["m_star"] } else { vec![] },
            });
        }
    }

    let best = (0..rows.len())
        .max_by(|a, b| rows[*a].aggregate_published.total_cmp(&rows[*b].aggregate_published).then(b.cmp(a)))
        .expect("rows exist");
    rows[best].markers.push("best");
    Ok(rows)
}

pub fn policy_csv(cfg: &Config, rows: &[PolicyRow]) -> String {
    let mut s = String::from("# storeq policy\n");
    s.push_str(&cfg.render("# "));
    s.push_str("policy,setting,individual_published,aggregate_published,aggregate_exact,marker\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.policy,
            r.setting,
            fmt_value(r.individual_published),
            fmt_value(r.aggregate_published),
            fmt_value(r.aggregate_exact),
            r.markers.join(";")
        );
    }
    s
}
