use anyhow::{Context, Result};
use nrep_core::constraints::catalog;
use nrep_core::fock::{FermionState, StateJson};
use nrep_core::pinning::{
    align_degenerate_orbitals, detect, filter_basis, reconstruct_structured, verify_pinned_state, PinVerification,
    PinningReport, StructuredAmplitudes,
};
use nrep_core::rdm::to_natural_frame;
use serde::Serialize;

use crate::check::{derive_rules, render_pinning, rules_of, RuleEntry};
use crate::table::{self, num, sci};
use crate::{parse_json, read_input, to_json, Outcome, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    pub orbitals: Vec<usize>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinReport {
    pub n: usize,
    pub r: usize,
    pub tolerance: f64,
    pub lambda: Vec<f64>,
    pub pinning: PinningReport,
    pub rules: Vec<RuleEntry>,
    /// New label of each natural orbital after aligning degenerate levels.
    pub relabeling: Vec<usize>,
    pub verifications: Vec<PinVerification>,
    /// Determinants allowed by all rules.
    pub admitted_determinants: usize,
    /// Natural-orbital expansion, weights above the tolerance.
    pub support: Vec<SupportEntry>,
    /// Every supported determinant obeys every rule.
    pub support_confirmed: bool,
    pub reconstruction: Option<StructuredAmplitudes>,
    pub notes: Vec<String>,
}

pub fn analyze(state: &FermionState, tol: f64) -> Result<PinReport> {
    state.require_normalized()?;
    let (n, r) = (state.n_particles(), state.rank());
    let set = catalog(n, r)?;
    let (natural, frame) = to_natural_frame(state)?;
    let spectrum = frame.spectrum;
    let pinning = detect(&spectrum, &set, tol)?;
    let rules = derive_rules(&pinning, &set);
    let selection = rules_of(&rules);
    let aligned = align_degenerate_orbitals(&natural, &spectrum, &selection)?;
    let verifications = selection
        .iter()
        .map(|rule| verify_pinned_state(&aligned.state, rule, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let admitted = filter_basis(n, r, &selection)?;
    let support: Vec<SupportEntry> = aligned
        .state
        .terms()
        .filter(|(_, a)| a.norm_sqr() > tol)
        .map(|(d, a)| SupportEntry {
            orbitals: d.orbitals(),
            weight: a.norm_sqr(),
        })
        .collect();
    let support_confirmed = aligned
        .state
        .terms()
        .filter(|(_, a)| a.norm_sqr() > tol)
        .all(|(d, _)| admitted.contains(&d));

    let mut notes = Vec::new();
    if pinning.is_empty() {
        notes.push(format!("no pinning at tol={}", sci(tol)));
    }
    let reconstruction = if (n, r) == (3, 7) {
        match reconstruct_structured(&spectrum, tol) {
            Ok(q) => Some(q),
            Err(e) => {
                notes.push(format!("structured reconstruction not applicable: {e}"));
                None
            }
        }
    } else {
        None
    };
    Ok(PinReport {
        n,
        r,
        tolerance: tol,
        lambda: spectrum.values().to_vec(),
        pinning,
        rules,
        relabeling: aligned.permutation,
        verifications,
        admitted_determinants: admitted.len(),
        support,
        support_confirmed,
        reconstruction,
        notes,
    })
}

pub fn render_reconstruction(q: &StructuredAmplitudes) -> String {
    let mut out = String::from("structured amplitudes (squared moduli):\n");
    let rows = vec![
        vec!["|alpha|^2".to_string(), num(q.alpha_sq)],
        vec!["|beta|^2".to_string(), num(q.beta_sq)],
        vec!["|gamma|^2".to_string(), num(q.gamma_sq)],
        vec!["|delta|^2 from l2 - l3".to_string(), num(q.delta_sq[0])],
        vec!["|delta|^2 from l4 - l5".to_string(), num(q.delta_sq[1])],
        vec!["|delta|^2 from l6 - l7".to_string(), num(q.delta_sq[2])],
        vec!["consistency residual".to_string(), sci(q.consistency_residual)],
        vec!["normalization residual".to_string(), sci(q.normalization_residual)],
    ];
    out.push_str(&table::render(&["quantity", "value"], &rows));
    out
}

pub fn render(rep: &PinReport) -> String {
    let mut out = format!("state: n = {}, r = {}\n", rep.n, rep.r);
    out.push_str(&format!("natural occupations = ({})\n\n", table::list(&rep.lambda)));
    out.push_str(&render_pinning(&rep.pinning, &rep.rules));
    let identity = rep.relabeling.iter().enumerate().all(|(i, &p)| p == i + 1);
    if !identity {
        let pairs: Vec<String> = rep
            .relabeling
            .iter()
            .enumerate()
            .filter(|(i, &p)| p != i + 1)
            .map(|(i, p)| format!("{}->{}", i + 1, p))
            .collect();
        out.push_str(&format!("\ndegenerate natural orbitals relabeled: {}\n", pairs.join(", ")));
    }
    if !rep.verifications.is_empty() {
        out.push_str("\neigenvector check ||(sum_S n_i - k) psi||:\n");
        let rows: Vec<Vec<String>> = rep
            .verifications
            .iter()
            .map(|v| {
                vec![
                    table::orbitals(&v.rule.set),
                    v.rule.count.to_string(),
                    sci(v.residual.abs()),
                    if v.pinned { "pinned" } else { "NOT pinned" }.to_string(),
                ]
            })
            .collect();
        out.push_str(&table::render(&["set", "count", "residual", "status"], &rows));
        out.push_str(&format!("\ndeterminants admitted by all rules: {}\n", rep.admitted_determinants));
    }
    out.push_str(&format!("\nnatural-orbital expansion ({} determinants):\n", rep.support.len()));
    let rows: Vec<Vec<String>> = rep
        .support
        .iter()
        .map(|s| {
            let o: Vec<String> = s.orbitals.iter().map(|i| i.to_string()).collect();
            vec![format!("[{}]", o.join(",")), num(s.weight)]
        })
        .collect();
    out.push_str(&table::render(&["determinant", "weight"], &rows));
    if !rep.verifications.is_empty() {
        out.push_str(&format!(
            "support {} the selection rules\n",
            if rep.support_confirmed { "obeys" } else { "does NOT obey" }
        ));
    }
    if let Some(q) = &rep.reconstruction {
        out.push('\n');
        out.push_str(&render_reconstruction(q));
    }
    for note in &rep.notes {
        out.push_str(&format!("\n{note}\n"));
    }
    out
}

pub fn cmd_pin(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.input.as_ref().context("pin needs a state file")?;
    let json: StateJson = parse_json(&read_input(path)?, "state file")?;
    let state = FermionState::from_json(&json).context("invalid state file")?;
    let rep = analyze(&state, cfg.tol_pin)?;
    let text = if cfg.json { to_json(&rep) } else { render(&rep) };
    Ok(Outcome::ok(text).routed(&cfg.out))
}
