//! `pgl graph`: build the weighted neighborhood graph for a cloud and write
//! the points, the edge list, and a structural summary.

use super::RunContext;
use crate::config::{build_cloud_graph, GraphCmdCfg};
use crate::error::Result;
use crate::outputs;
use pgl_core::connectivity_report;
use serde_json::json;
use std::io::Write;

pub fn run(cfg: &GraphCmdCfg, ctx: &RunContext) -> Result<()> {
    let cloud = cfg.points.realize(ctx.seed)?;
    let (g, eps) = build_cloud_graph(&cloud, &cfg.kernel, &cfg.graph)?;

    let mut pw = outputs::csv_table(
        ctx.out(),
        "points.csv",
        &ctx.provenance,
        &header_for_dim(cloud.dim()),
    )?;
    cloud.write_csv(&mut pw)?;
    pw.flush()?;

    let mut ew = outputs::csv_table(ctx.out(), "edges.csv", &ctx.provenance, "i,j,w")?;
    g.write_edge_csv(&mut ew)?;
    ew.flush()?;

    let conn = connectivity_report(&g);
    outputs::json_summary(
        ctx.out(),
        "graph.json",
        &ctx.provenance,
        json!({
            "n": g.n(),
            "dim": g.dim(),
            "eps": eps,
            "entries": g.entry_count(),
            "components": conn.components,
            "largest_component": conn.sizes.first().copied().unwrap_or(0),
            "config": serde_json::to_value(cfg).expect("config serializes"),
        }),
    )?;
    Ok(())
}

pub fn header_for_dim(dim: usize) -> String {
    (0..dim).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}
