use anyhow::{Context, Result};
use nrep_core::constraints::{catalog, ConstraintKind, ConstraintSet, EvaluationReport, Status};
use nrep_core::pinning::{detect, selection_rule, PinningReport, SelectionRule};
use nrep_core::rdm::Spectrum;
use serde::Serialize;

use crate::table::{self, num, sci};
use crate::{parse_json, read_input, to_json, Outcome, RunConfig, EXIT_INADMISSIBLE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleEntry {
    pub label: String,
    pub rule: Option<SelectionRule>,
    pub note: Option<String>,
}

/// Selection rules for the saturated bound and generalized constraints.
pub fn derive_rules(report: &PinningReport, set: &ConstraintSet) -> Vec<RuleEntry> {
    report
        .saturated
        .iter()
        .filter(|p| matches!(p.kind, ConstraintKind::Bound | ConstraintKind::Generalized))
        .filter_map(|p| set.get(&p.label))
        .map(|c| match selection_rule(c, set.n) {
            Ok(rule) => RuleEntry {
                label: c.label().to_string(),
                rule: Some(rule),
                note: None,
            },
            Err(e) => RuleEntry {
                label: c.label().to_string(),
                rule: None,
                note: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn rules_of(entries: &[RuleEntry]) -> Vec<SelectionRule> {
    entries.iter().filter_map(|e| e.rule.clone()).collect()
}

pub fn render_pinning(report: &PinningReport, rules: &[RuleEntry]) -> String {
    let mut out = format!("saturated at tol {}:\n", sci(report.tolerance));
    if report.is_empty() {
        out.push_str("  none\n");
        return out;
    }
    let rows: Vec<Vec<String>> = report
        .saturated
        .iter()
        .map(|p| {
            let rule = rules
                .iter()
                .find(|e| e.label == p.label)
                .and_then(|e| e.rule.as_ref())
                .map(|r| format!("|det ∩ {}| = {}", table::orbitals(&r.set), r.count))
                .unwrap_or_else(|| "-".into());
            vec![p.label.clone(), kind_name(p.kind).into(), sci(p.residual), rule]
        })
        .collect();
    out.push_str(&table::render(&["constraint", "kind", "residual", "selection rule"], &rows));
    out
}

pub fn kind_name(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::Ordering => "ordering",
        ConstraintKind::Bound => "bound",
        ConstraintKind::Normalization => "normalization",
        ConstraintKind::Generalized => "generalized",
    }
}

pub fn status_name(status: Status) -> &'static str {
    match status {
        Status::Satisfied => "satisfied",
        Status::Saturated => "saturated",
        Status::Violated => "VIOLATED",
    }
}

pub fn render_evaluation(report: &EvaluationReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                kind_name(r.kind).into(),
                num(r.value),
                sci(r.residual),
                status_name(r.status).into(),
            ]
        })
        .collect();
    table::render(&["constraint", "kind", "value", "residual", "status"], &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub n: usize,
    pub r: usize,
    pub lambda: Vec<f64>,
    pub complete_catalog: bool,
    pub admissible: bool,
    pub evaluation: EvaluationReport,
    pub pinning: PinningReport,
    pub rules: Vec<RuleEntry>,
}

pub fn check_spectrum(spec: &Spectrum, tol_pin: f64, tol_sat: f64) -> Result<CheckReport> {
    let set = catalog(spec.n_particles(), spec.rank())?;
    let evaluation = set.evaluate(spec, tol_sat)?;
    let pinning = detect(spec, &set, tol_pin)?;
    let rules = derive_rules(&pinning, &set);
    Ok(CheckReport {
        n: spec.n_particles(),
        r: spec.rank(),
        lambda: spec.values().to_vec(),
        complete_catalog: set.is_complete(),
        admissible: evaluation.is_admissible(),
        evaluation,
        pinning,
        rules,
    })
}

pub fn render(rep: &CheckReport) -> String {
    let mut out = format!("spectrum: n = {}, r = {}\n", rep.n, rep.r);
    out.push_str(&format!("lambda = ({})\n", table::list(&rep.lambda)));
    out.push_str(&format!(
        "catalog: {}\n\n",
        if rep.complete_catalog { "complete" } else { "valid, possibly incomplete" }
    ));
    out.push_str(&render_evaluation(&rep.evaluation));
    let violated: Vec<&str> = rep.evaluation.violated().map(|r| r.label.as_str()).collect();
    out.push('\n');
    if rep.admissible {
        out.push_str("admissible: yes\n\n");
    } else {
        out.push_str(&format!("admissible: no (violated: {})\n\n", violated.join("; ")));
    }
    out.push_str(&render_pinning(&rep.pinning, &rep.rules));
    out
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.input.as_ref().context("check needs a spectrum file")?;
    let spec: Spectrum = parse_json(&read_input(path)?, "spectrum file")?;
    let rep = check_spectrum(&spec, cfg.tol_pin, cfg.tol_sat)?;
    let text = if cfg.json { to_json(&rep) } else { render(&rep) };
    let mut outcome = Outcome::ok(text).routed(&cfg.out);
    if !rep.admissible {
        outcome.code = EXIT_INADMISSIBLE;
    }
    Ok(outcome)
}
