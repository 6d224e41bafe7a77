use anyhow::Result;
use nrep_core::constraints::{catalog, ConstraintKind, Relation};
use nrep_core::fock::FermionState;
use nrep_core::rdm::spectrum_of;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::table::{self, sci};
use crate::{to_json, Outcome, RunConfig, EXIT_VIOLATION};

/// A sampled spectrum breaking a constraint by more than this is a bug.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintStats {
    pub label: String,
    pub kind: ConstraintKind,
    pub max_violation: f64,
    /// Samples within the saturation tolerance.
    pub saturated: usize,
    pub closest_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremal {
    pub label: String,
    pub sample: usize,
    pub residual: f64,
    pub spectrum: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub n: usize,
    pub r: usize,
    pub count: usize,
    pub seed: u64,
    pub complete_catalog: bool,
    pub violation_tolerance: f64,
    pub saturation_tolerance: f64,
    /// Samples breaking at least one constraint.
    pub violations: usize,
    pub max_violation: f64,
    pub constraints: Vec<ConstraintStats>,
    /// Per generalized constraint, the sample closest to saturation.
    pub extremal: Vec<Extremal>,
}

fn violation(relation: Relation, residual: f64) -> f64 {
    match relation {
        Relation::Le => -residual,
        Relation::Eq => residual.abs(),
    }
}

pub fn run_campaign(n: usize, r: usize, count: usize, seed: u64, tol_sat: f64) -> Result<SampleReport> {
    let set = catalog(n, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats: Vec<ConstraintStats> = set
        .constraints
        .iter()
        .map(|c| ConstraintStats {
            label: c.label().to_string(),
            kind: c.kind(),
            max_violation: f64::NEG_INFINITY,
            saturated: 0,
            closest_residual: f64::INFINITY,
        })
        .collect();
    let mut extremal: Vec<Option<Extremal>> = vec![None; set.len()];
    let mut violations = 0;
    for sample in 0..count {
        let state = FermionState::random_with(n, r, &mut rng)?;
        let spec = spectrum_of(&state)?;
        let mut broken = false;
        for (k, c) in set.constraints.iter().enumerate() {
            let residual = c.residual(spec.values());
            let v = violation(c.relation(), residual);
            let s = &mut stats[k];
            s.max_violation = s.max_violation.max(v);
            if v > VIOLATION_TOL {
                broken = true;
            }
            if residual.abs() <= tol_sat {
                s.saturated += 1;
            }
            if residual.abs() < s.closest_residual.abs() {
                s.closest_residual = residual;
                if c.kind() == ConstraintKind::Generalized {
                    extremal[k] = Some(Extremal {
                        label: c.label().to_string(),
                        sample,
                        residual,
                        spectrum: spec.values().to_vec(),
                    });
                }
            }
        }
        if broken {
            violations += 1;
        }
    }
    let max_violation = stats.iter().map(|s| s.max_violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(SampleReport {
        n,
        r,
        count,
        seed,
        complete_catalog: set.is_complete(),
        violation_tolerance: VIOLATION_TOL,
        saturation_tolerance: tol_sat,
        violations,
        max_violation,
        constraints: stats,
        extremal: extremal.into_iter().flatten().collect(),
    })
}

pub fn render(rep: &SampleReport) -> String {
    let mut out = format!(
        "sample: n = {}, r = {}, count = {}, seed = {}\n",
        rep.n, rep.r, rep.count, rep.seed
    );
    out.push_str(&format!(
        "catalog: {} constraints ({})\n",
        rep.constraints.len(),
        if rep.complete_catalog { "complete" } else { "valid, possibly incomplete" }
    ));
    out.push_str(&format!(
        "tolerances: violation {}, saturation {}\n\n",
        sci(rep.violation_tolerance),
        sci(rep.saturation_tolerance)
    ));
    let generalized: Vec<&ConstraintStats> =
        rep.constraints.iter().filter(|s| s.kind == ConstraintKind::Generalized).collect();
    let base: Vec<&ConstraintStats> = rep.constraints.iter().filter(|s| s.kind != ConstraintKind::Generalized).collect();
    let mut rows: Vec<Vec<String>> = generalized
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                sci(s.max_violation),
                s.saturated.to_string(),
                sci(s.closest_residual),
            ]
        })
        .collect();
    if !base.is_empty() {
        rows.push(vec![
            format!("base rows ({})", base.len()),
            sci(base.iter().map(|s| s.max_violation).fold(f64::NEG_INFINITY, f64::max)),
            "-".into(),
            "-".into(),
        ]);
    }
    out.push_str(&table::render(
        &["constraint", "max violation", "saturated", "closest residual"],
        &rows,
    ));
    if !rep.extremal.is_empty() {
        out.push_str("\nclosest to saturation:\n");
        for e in &rep.extremal {
            out.push_str(&format!(
                "  {}: sample {}, residual {}, lambda = ({})\n",
                e.label,
                e.sample,
                sci(e.residual),
                table::list(&e.spectrum)
            ));
        }
    }
    out.push_str(&format!("\nmax violation: {}\n", sci(rep.max_violation)));
    out.push_str(&format!("violating samples: {}\n", rep.violations));
    out.push_str(if rep.violations == 0 {
        "result: PASS\n"
    } else {
        "result: FAIL (constraint violated by a sampled spectrum)\n"
    });
    out
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<Outcome> {
    let rep = run_campaign(cfg.n, cfg.r, cfg.count, cfg.seed, cfg.tol_sat)?;
    let text = if cfg.json { to_json(&rep) } else { render(&rep) };
    let mut outcome = Outcome::ok(text).routed(&cfg.out);
    if rep.violations > 0 {
        outcome.code = EXIT_VIOLATION;
    }
    Ok(outcome)
}
