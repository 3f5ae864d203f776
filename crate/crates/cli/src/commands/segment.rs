//! `pgl segment`: scribble-seeded image segmentation on the color-affinity
//! pixel graph.

use super::{minimize_with_retry, solve_options, RunContext};
use crate::config::SegmentCfg;
use crate::error::{CliError, Result};
use crate::outputs;
use pgl_core::image::{read_mask_pgm, write_label_pgm};
use pgl_core::{
    build_pixel_graph, phase_purity, segmentation_objective, threshold, FidelitySpec, ImageGrid,
};
use serde_json::json;
use std::path::Path;

pub fn run(cfg: &SegmentCfg, ctx: &RunContext) -> Result<()> {
    if cfg.image.is_empty() || cfg.mask.is_empty() {
        return Err(CliError::config("segment needs both image and mask paths"));
    }
    let img = ImageGrid::read_pnm_path(Path::new(&cfg.image))?;
    let mask_file = std::fs::File::open(&cfg.mask)
        .map_err(|e| CliError::Config(format!("cannot open mask {}: {e}", cfg.mask)))?;
    let (mw, mh, mask) = read_mask_pgm(std::io::BufReader::new(mask_file))?;
    if (mw, mh) != (img.width(), img.height()) {
        return Err(CliError::config(format!(
            "mask is {mw}x{mh} but the image is {}x{}",
            img.width(),
            img.height()
        )));
    }
    if !mask.contains(&1) || !mask.contains(&-1) {
        return Err(CliError::config("the scribble mask must label both classes"));
    }
    let img = img.with_mask(mask)?;

    let n = img.len();
    let eps = cfg.eps.unwrap_or_else(|| 1.0 / (n as f64).sqrt());
    let g = build_pixel_graph(&img, cfg.tau_color, eps)?;
    let v = cfg.potential.build()?;
    let labeled = img.labeled_pixels();
    let (indices, targets): (Vec<usize>, Vec<f64>) = labeled.iter().copied().unzip();
    let fid = FidelitySpec::new(indices, targets, cfg.lambda, 2.0)?;
    let mut opts = solve_options(&cfg.solver, &g, &v, Some(&fid), ctx.seed)?;
    if cfg.solver.dt.is_none() {
        // pixel graphs make the library default dt uselessly small; size the
        // step from the stability bound instead (flat field: representative
        // for the neutral default init)
        opts.dt = super::stable_dt(&g, &vec![0.0; g.n()], cfg.p.0, &v, Some(&fid));
    }
    let res = minimize_with_retry(&g, cfg.p.0, &v, Some(&fid), &opts, None, cfg.solver.dt_retries)?;

    let labels = threshold(&res.u);
    let mut body = Vec::new();
    write_label_pgm(&mut body, img.width(), img.height(), labels.values())?;
    std::fs::write(
        ctx.out().join("labels.pgm"),
        outputs::pnm_with_provenance(body, &ctx.provenance),
    )?;

    let agreement = {
        let hits = labeled
            .iter()
            .filter(|&&(i, y)| labels.values()[i] == y)
            .count();
        hits as f64 / labeled.len() as f64
    };
    let objective = segmentation_objective(&g, &res.u, cfg.p.0, &v, &labeled, cfg.lambda)?;
    outputs::json_summary(
        ctx.out(),
        "segment.json",
        &ctx.provenance,
        json!({
            "width": img.width(),
            "height": img.height(),
            "eps": eps,
            "objective": objective,
            "purity": phase_purity(&res.u),
            "labeled_agreement": agreement,
            "run": super::minimize::run_record(&res),
            "config": serde_json::to_value(cfg).expect("config serializes"),
        }),
    )?;
    Ok(())
}
