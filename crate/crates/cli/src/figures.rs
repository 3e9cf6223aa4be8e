//! The documented sensitivity sweeps and the configs they run on.

use storage_equilibria::config::keys_in;
use storage_equilibria::{Config, Variant};

use crate::sweep::{parse_grid, SweepParam, SweepSpec};
use crate::CliError;

pub const BASELINE: &str = include_str!("../configs/baseline.cfg");

/// A named sweep: `storeq sweep --config configs/<config> --variant <variant> --param <param>
/// <grid> --metrics <metrics>`.
#[derive(Debug, Clone, Copy)]
pub struct Figure {
    pub name: &'static str,
    pub config_file: &'static str,
    pub config: &'static str,
    pub variant: &'static str,
    pub param: &'static str,
    pub values: Option<&'static str>,
    pub log_range: Option<&'static str>,
    pub metrics: &'static str,
}

pub const FIGURES: [Figure; 7] = [
    Figure {
        name: "fig2_delta",
        config_file: "fig2_delta.cfg",
        config: include_str!("../configs/fig2_delta.cfg"),
        variant: "private",
        param: "delta",
        values: Some("0,0.2,0.4,0.6,0.8"),
        log_range: None,
        metrics: "exact,A,C",
    },
    Figure {
        name: "fig2_alpha",
        config_file: "fig2_alpha.cfg",
        config: include_str!("../configs/fig2_alpha.cfg"),
        variant: "private",
        param: "alpha",
        values: None,
        log_range: Some("0.1:10:9"),
        metrics: "exact,A,C",
    },
    Figure {
        name: "fig2_n",
        config_file: "fig2_n.cfg",
        config: include_str!("../configs/fig2_n.cfg"),
        variant: "private",
        param: "n",
        values: Some("50,100,200,400"),
        log_range: None,
        metrics: "exact,asymptotic",
    },
    Figure {
        name: "fig2_rho",
        config_file: "fig2_rho.cfg",
        config: include_str!("../configs/fig2_rho.cfg"),
        variant: "private",
        param: "rho",
        values: None,
        log_range: Some("0.01:100:17"),
        metrics: "exact,C",
    },
    Figure {
        name: "fig3_sigma",
        config_file: "fig3_sigma.cfg",
        config: include_str!("../configs/fig3_sigma.cfg"),
        variant: "public",
        param: "sigma",
        values: None,
        log_range: Some("0.01:100:17"),
        metrics: "published,exact,B",
    },
    Figure {
        name: "fig4_sharing",
        config_file: "fig4_sharing.cfg",
        config: include_str!("../configs/fig4_sharing.cfg"),
        variant: "sharing",
        param: "n",
        values: Some("1,2,3,5,10,20,50,100"),
        log_range: None,
        metrics: "published,private_published,exact,private_exact",
    },
    Figure {
        name: "fig4_sharing_imprecise",
        config_file: "fig4_sharing_imprecise.cfg",
        config: include_str!("../configs/fig4_sharing_imprecise.cfg"),
        variant: "sharing",
        param: "n",
        values: Some("1,2,3,5,10,20,50,100"),
        log_range: None,
        metrics: "published,private_published,exact,private_exact",
    },
];

impl Figure {
    pub fn spec(&self) -> Result<SweepSpec, CliError> {
        let cfg = Config::parse(self.config)?;
        let grid = parse_grid(self.values, self.log_range, self.log_range.is_some())?;
        let metrics = self.metrics.split(',').map(str::to_string).collect();
        SweepSpec::new(
            self.param.parse::<SweepParam>()?,
            grid,
            cfg,
            &keys_in(self.config),
            self.variant.parse::<Variant>()?,
            metrics,
            0,
        )
    }

    /// Arguments reproducing this sweep with the binary, relative to the cli crate root.
    pub fn args(&self) -> Vec<String> {
        let mut args = vec![
            "sweep".to_string(),
            "--config".into(),
            format!("configs/{}", self.config_file),
            "--variant".into(),
            self.variant.into(),
            "--param".into(),
            self.param.into(),
        ];
        match (self.values, self.log_range) {
            (Some(v), _) => args.extend(["--values".into(), v.into()]),
            (None, Some(r)) => args.extend(["--range".into(), r.into(), "--log".into()]),
            (None, None) => {}
        }
        args.extend(["--metrics".into(), self.metrics.into()]);
        args
    }
}
