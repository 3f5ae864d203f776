//! `pgl cell`: tabulate the cell-problem surface tension over density values
//! and interface directions.

use super::RunContext;
use crate::config::CellCfg;
use crate::error::{CliError, Result};
use crate::outputs;
use pgl_core::{cell_sigma, SigmaResult};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;

pub fn run(cfg: &CellCfg, ctx: &RunContext) -> Result<()> {
    if cfg.directions.is_empty() {
        return Err(CliError::config("cell needs at least one direction"));
    }
    if cfg.rho_list.is_empty() {
        return Err(CliError::config("cell needs at least one density value"));
    }
    let dim = cfg.directions[0].len();
    if dim == 0 || cfg.directions.iter().any(|d| d.len() != dim) {
        return Err(CliError::config("all directions must share one nonzero dimension"));
    }
    let kernel = cfg.kernel.build(dim)?;
    let v = cfg.potential.build()?;
    let opts = cfg.profile.build();

    // independent solves fan out; collect keeps (rho, direction) order
    let jobs: Vec<(usize, usize)> = (0..cfg.rho_list.len())
        .flat_map(|r| (0..cfg.directions.len()).map(move |d| (r, d)))
        .collect();
    let solves: Vec<SigmaResult> = jobs
        .par_iter()
        .map(|&(r, d)| {
            cell_sigma(cfg.rho_list[r], &cfg.directions[d], &kernel, &v, cfg.p, &opts)
        })
        .collect::<pgl_core::Result<_>>()?;

    let nu_cols: String =
        (0..dim).map(|k| format!("nu{k}")).collect::<Vec<_>>().join(",");
    let mut sw = outputs::csv_table(
        ctx.out(),
        "sigma.csv",
        &ctx.provenance,
        &format!("rho,{nu_cols},sigma,converged"),
    )?;
    for (&(r, d), res) in jobs.iter().zip(&solves) {
        let nu: String = cfg.directions[d]
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(sw, "{},{},{},{}", cfg.rho_list[r], nu, res.value(), res.converged())?;
    }
    sw.flush()?;

    if cfg.write_profiles {
        for (&(r, d), res) in jobs.iter().zip(&solves) {
            let name = format!("profile_r{r}_d{d}.csv");
            let mut pw = outputs::csv_table(ctx.out(), &name, &ctx.provenance, "t,f")?;
            let prof = res.profile();
            let (l, h) = (prof.half_width(), prof.step());
            for (i, f) in prof.values().iter().enumerate() {
                let t = -l + i as f64 * h;
                writeln!(pw, "{t},{f}")?;
            }
            pw.flush()?;
        }
    }

    // per-rho isotropy spread and the monotonicity of sigma in rho, the two
    // table-level properties worth machine-checking downstream
    let mut per_rho = Vec::new();
    for (r, &rho) in cfg.rho_list.iter().enumerate() {
        let values: Vec<f64> = (0..cfg.directions.len())
            .map(|d| solves[r * cfg.directions.len() + d].value())
            .collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        per_rho.push(json!({
            "rho": rho,
            "sigma_min": lo,
            "sigma_max": hi,
            "spread": if lo > 0.0 { (hi - lo) / lo } else { f64::NAN },
        }));
    }
    let mins: Vec<f64> = per_rho
        .iter()
        .map(|row| row["sigma_min"].as_f64().unwrap())
        .collect();
    let monotone = {
        let mut sorted: Vec<(f64, f64)> = cfg
            .rho_list
            .iter()
            .cloned()
            .zip(mins.iter().cloned())
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        sorted.windows(2).all(|w| w[1].1 >= w[0].1)
    };

    outputs::json_summary(
        ctx.out(),
        "cell.json",
        &ctx.provenance,
        json!({
            "p": cfg.p,
            "per_rho": per_rho,
            "sigma_monotone_in_rho": monotone,
            "config": serde_json::to_value(cfg).expect("config serializes"),
        }),
    )?;
    Ok(())
}
