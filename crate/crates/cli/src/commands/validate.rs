//! `pgl validate`: run the assumption checks on a kernel, potential, and
//! density triple. Report-only: the exit code stays 0 even when checks
//! fail, because a violated assumption is a finding, not a malfunction.

use super::RunContext;
use crate::config::ValidateCfg;
use crate::error::Result;
use crate::outputs;
use pgl_core::{validate_assumptions, CheckStatus, ValidateOptions};
use serde_json::json;

pub fn run(cfg: &ValidateCfg, ctx: &RunContext) -> Result<()> {
    let kernel = cfg.kernel.build(cfg.dim)?;
    let v = cfg.potential.build()?;
    let rho = cfg.density.build()?;
    let opts = ValidateOptions {
        seed: ctx.seed,
        samples: cfg.samples,
        mass_tol: cfg.mass_tol,
        mass_quadrature: cfg.mass_quadrature,
    };
    let report = validate_assumptions(&kernel, &v, &rho, &opts);

    let checks: Vec<serde_json::Value> = report
        .checks
        .iter()
        .map(|c| {
            let (status, detail) = match &c.status {
                CheckStatus::Pass => ("pass", None),
                CheckStatus::AssumedByConstruction => ("assumed_by_construction", None),
                CheckStatus::Fail { counterexample } => ("fail", Some(counterexample.clone())),
            };
            json!({
                "id": c.id,
                "description": c.description,
                "status": status,
                "counterexample": detail,
            })
        })
        .collect();

    for c in &report.checks {
        let tag = match &c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::AssumedByConstruction => "assumed",
            CheckStatus::Fail { .. } => "FAIL",
        };
        println!("{:<8} {} ({})", tag, c.id, c.description);
    }

    outputs::json_summary(
        ctx.out(),
        "validation.json",
        &ctx.provenance,
        json!({
            "all_pass": report.all_pass(),
            "checks": checks,
            "config": serde_json::to_value(cfg).expect("config serializes"),
        }),
    )?;
    Ok(())
}
