//! `pgl minimize`: build the graph, run the gradient flow, write the raw
//! field, and summarize the run.

use super::{minimize_with_retry, solve_options, RunContext};
use crate::config::MinimizeCfg;
use crate::error::Result;
use crate::outputs;
use pgl_core::{gl_energy_full, phase_purity, FidelitySpec, SolveResult};
use serde_json::json;
use std::io::Write;

pub fn run(cfg: &MinimizeCfg, ctx: &RunContext) -> Result<()> {
    let cloud = cfg.points.realize(ctx.seed)?;
    let (g, eps) = build_graph(cfg, &cloud)?;
    let v = cfg.potential.build()?;
    let fid: Option<FidelitySpec> = match &cfg.fidelity {
        Some(f) if !f.is_empty() => Some(f.build(&cloud)?),
        _ => None,
    };
    let opts = solve_options(&cfg.solver, &g, &v, fid.as_ref(), ctx.seed)?;
    let res = minimize_with_retry(
        &g,
        cfg.p.0,
        &v,
        fid.as_ref(),
        &opts,
        Some(&cloud),
        cfg.solver.dt_retries,
    )?;

    let mut pw = outputs::csv_table(
        ctx.out(),
        "points.csv",
        &ctx.provenance,
        &super::graph::header_for_dim(cloud.dim()),
    )?;
    cloud.write_csv(&mut pw)?;
    pw.flush()?;

    let mut fw = outputs::csv_table(ctx.out(), "field.csv", &ctx.provenance, "u")?;
    res.u.write_csv(&mut fw)?;
    fw.flush()?;

    let breakdown = gl_energy_full(&g, &res.u, cfg.p.0, &v, fid.as_ref())?;
    outputs::json_summary(
        ctx.out(),
        "result.json",
        &ctx.provenance,
        json!({
            "n": g.n(),
            "eps": eps,
            "p": cfg.p.0,
            "energy": serde_json::to_value(breakdown.report(g.n(), eps, cfg.p.0))
                .expect("report serializes"),
            "run": run_record(&res),
            "purity": phase_purity(&res.u),
            "config": serde_json::to_value(cfg).expect("config serializes"),
        }),
    )?;
    Ok(())
}

fn build_graph(
    cfg: &MinimizeCfg,
    cloud: &pgl_core::PointCloud,
) -> Result<(pgl_core::SparseGraph, f64)> {
    crate::config::build_cloud_graph(cloud, &cfg.kernel, &cfg.graph)
}

/// Iterations, convergence flag, and the decimated energy trace. Wall time
/// stays out on purpose so reruns are byte-identical.
pub fn run_record(res: &SolveResult) -> serde_json::Value {
    let (trace, stride) = outputs::decimate_trace(&res.energy_trace, 1000);
    json!({
        "iterations": res.iterations,
        "converged": res.converged,
        "final_energy": res.final_energy(),
        "trace_len": res.energy_trace.len(),
        "trace_stride": stride,
        "trace": trace,
    })
}
