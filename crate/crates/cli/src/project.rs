use anyhow::{bail, Result};
use nrep_core::polytope::{dshell_low_spin_system, emit_polygon, project_2d, HalfspaceSystem, PolygonFormat, PolytopeError};

use crate::{parse_json, read_input, Outcome, RunConfig, EXIT_PROJECTION};

pub const PRESETS: [&str; 1] = ["d3-low-spin"];

pub fn preset(name: &str) -> Result<HalfspaceSystem> {
    match name {
        "d3-low-spin" => Ok(dshell_low_spin_system()),
        other => bail!("unknown preset {other:?} (available: {})", PRESETS.join(", ")),
    }
}

pub fn cmd_project(cfg: &RunConfig) -> Result<Outcome> {
    let sys = match (&cfg.preset, &cfg.input) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => parse_json(&read_input(path)?, "halfspace system")?,
        (None, None) => bail!("project needs a system file or --preset"),
    };
    let (x, y) = match &cfg.axes {
        Some((x, y)) => (x.clone(), y.clone()),
        None if cfg.preset.is_some() => ("l1".to_string(), "mu".to_string()),
        None if sys.dim() >= 2 => (sys.variables()[0].clone(), sys.variables()[1].clone()),
        None => bail!("system has fewer than two variables; pass --axes"),
    };
    let polygon = match project_2d(&sys, &sys.axis(&x)?, &sys.axis(&y)?) {
        Ok(p) => p,
        Err(PolytopeError::Unbounded) => {
            return Ok(Outcome {
                code: EXIT_PROJECTION,
                stderr: format!("error: projection onto ({x}, {y}) is unbounded\n"),
                ..Outcome::default()
            })
        }
        Err(e) => return Err(e.into()),
    };
    if polygon.empty {
        return Ok(Outcome {
            code: EXIT_PROJECTION,
            stderr: "error: system is infeasible; the projection is empty\n".into(),
            ..Outcome::default()
        });
    }
    let format = if cfg.json { PolygonFormat::Json } else { PolygonFormat::Csv };
    let text = emit_polygon(&polygon, format)?;
    let mut outcome = Outcome::ok(text).routed(&cfg.out);
    if polygon.degenerate {
        outcome.stderr = "warning: projection has no interior (point or segment)\n".into();
    }
    Ok(outcome)
}
