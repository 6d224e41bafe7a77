//! Saturated constraints, the Slater-determinant selection rules they imply,
//! and the structured states that follow from them.
//!
//! A constraint `Σ_{i∈S} λ_i ≤ k` that holds with equality forces every
//! determinant in the natural-orbital expansion to meet `S` in exactly `k`
//! orbitals, i.e. `(Σ_{i∈S} a_i†a_i) Ψ = k Ψ`.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{
    AffineConstraint, ConstraintError, ConstraintKind, ConstraintSet, Relation, Status,
    QUADRUPLE_SETS,
};
use crate::fock::{orbital_mask, slater_basis, FermionState, FockError, SlaterDet};
use crate::rdm::{RdmError, Spectrum};

/// Pinning tolerance for occupation data printed to six decimals.
pub const DATA_PIN_TOL: f64 = 1e-5;
/// Pinning tolerance for synthetic states.
pub const STATE_PIN_TOL: f64 = 1e-10;
/// Occupations within this of 0 or 1 count as empty or filled when reducing
/// a spectrum to its active orbitals.
pub const REDUCTION_TOL: f64 = 5e-7;
/// Natural occupations closer than this are treated as one degenerate level.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Relabeling search gives up beyond this many candidate permutations.
pub const MAX_RELABELINGS: usize = 40_320;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PinningError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Rdm(#[from] RdmError),
    #[error("no selection rule for {label:?}: {reason}")]
    UnsupportedRule { label: String, reason: String },
    #[error("invalid selection rule: {0}")]
    InvalidRule(String),
    #[error("{label} is not saturated (residual {residual:e})")]
    NotPinned { label: String, residual: f64 },
    #[error("inconsistent occupations: {0}")]
    Inconsistent(String),
    #[error("state has weight {weight:e} outside the three-qubit determinants")]
    OffCube { weight: f64 },
    #[error("expected a state of shape ({n}, {r}), got ({got_n}, {got_r})")]
    Shape {
        n: usize,
        r: usize,
        got_n: usize,
        got_r: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinnedConstraint {
    pub label: String,
    pub kind: ConstraintKind,
    pub relation: Relation,
    pub residual: f64,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinningReport {
    pub tolerance: f64,
    /// Saturated constraints, smallest `|residual|` first.
    pub saturated: Vec<PinnedConstraint>,
}

impl PinningReport {
    pub fn is_empty(&self) -> bool {
        self.saturated.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&PinnedConstraint> {
        self.saturated.iter().find(|p| p.label == label)
    }

    pub fn generalized(&self) -> impl Iterator<Item = &PinnedConstraint> {
        self.saturated.iter().filter(|p| p.kind == ConstraintKind::Generalized)
    }
}

/// Every constraint of `set` with `|residual| ≤ tol`. The normalization
/// row holds for every spectrum and is left out.
pub fn detect(spec: &Spectrum, set: &ConstraintSet, tol: f64) -> Result<PinningReport, ConstraintError> {
    let report = set.evaluate(spec, tol)?;
    let mut saturated: Vec<PinnedConstraint> = report
        .rows
        .into_iter()
        .filter(|row| row.kind != ConstraintKind::Normalization && row.residual.abs() <= tol)
        .map(|row| PinnedConstraint {
            label: row.label,
            kind: row.kind,
            relation: row.relation,
            residual: row.residual,
            status: Status::Saturated,
        })
        .collect();
    saturated.sort_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()));
    Ok(PinningReport { tolerance: tol, saturated })
}

/// Determinants must meet `set` in exactly `count` orbitals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionRule {
    pub set: Vec<usize>,
    pub count: usize,
}

impl SelectionRule {
    pub fn new(mut set: Vec<usize>, count: usize, n: usize) -> Result<Self, PinningError> {
        set.sort_unstable();
        set.dedup();
        if set.is_empty() || set[0] == 0 {
            return Err(PinningError::InvalidRule(format!("bad index set {set:?}")));
        }
        if count > set.len().min(n) {
            return Err(PinningError::InvalidRule(format!(
                "count {count} exceeds min(|S| = {}, N = {n})",
                set.len()
            )));
        }
        Ok(Self { set, count })
    }

    pub fn mask(&self, r: usize) -> Result<u16, FockError> {
        orbital_mask(&self.set, r)
    }

    pub fn admits(&self, det: SlaterDet) -> bool {
        self.set.iter().filter(|&&i| det.contains(i)).count() == self.count
    }
}

/// Reads a saturated `Σ_{i∈S} λ_i = k` (or `-Σ_{i∈S} λ_i = -k`) as a rule.
pub fn selection_rule(c: &AffineConstraint, n: usize) -> Result<SelectionRule, PinningError> {
    let unsupported = |reason: &str| PinningError::UnsupportedRule {
        label: c.label().to_string(),
        reason: reason.to_string(),
    };
    let support = c.support();
    let first = support.first().ok_or_else(|| unsupported("empty support"))?;
    let lead = &c.coefficients()[first - 1];
    if !(lead.is_integer() && lead.abs().to_integer() == 1.into()) {
        return Err(unsupported("coefficients are not 0/1"));
    }
    if support.iter().any(|&i| &c.coefficients()[i - 1] != lead) {
        return Err(unsupported("coefficients are not 0/1"));
    }
    let bound = c.bound() * lead;
    if !bound.is_integer() {
        return Err(unsupported("bound is not an integer"));
    }
    let count = bound
        .to_integer()
        .to_i64()
        .filter(|&k| k >= 0)
        .ok_or_else(|| unsupported("negative bound"))? as usize;
    SelectionRule::new(support, count, n)
}

/// Determinants of `∧^n H_r` admitted by every rule.
pub fn filter_basis(n: usize, r: usize, rules: &[SelectionRule]) -> Result<Vec<SlaterDet>, FockError> {
    let masks = rules
        .iter()
        .map(|rule| Ok((rule.mask(r)?, rule.count)))
        .collect::<Result<Vec<_>, FockError>>()?;
    Ok(slater_basis(n, r)?
        .into_iter()
        .filter(|d| masks.iter().all(|&(m, k)| d.overlap(m) == k))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinVerification {
    pub rule: SelectionRule,
    /// `‖(Σ_{i∈S} a_i†a_i - k) Ψ‖`.
    pub residual: f64,
    pub pinned: bool,
}

pub fn verify_pinned_state(
    state: &FermionState,
    rule: &SelectionRule,
    tol: f64,
) -> Result<PinVerification, PinningError> {
    state.require_normalized()?;
    let mut acc = state.scale(Complex64::new(-(rule.count as f64), 0.0));
    for &i in &rule.set {
        let number = state.apply_annihilator(i)?.apply_creator(i)?;
        acc = acc.add(&number)?;
    }
    let residual = acc.norm();
    Ok(PinVerification {
        rule: rule.clone(),
        residual,
        pinned: residual <= tol,
    })
}

/// Sum of the residuals of all rules, the score minimized by
/// [`align_degenerate_orbitals`].
fn total_rule_residual(state: &FermionState, rules: &[SelectionRule]) -> Result<f64, PinningError> {
    let mut total = 0.0;
    for rule in rules {
        total += verify_pinned_state(state, rule, 0.0)?.residual;
    }
    Ok(total)
}

/// Renames orbital `i` to `perm[i - 1]`, re-sorting each determinant with
/// its permutation sign.
pub fn relabel(state: &FermionState, perm: &[usize]) -> Result<FermionState, FockError> {
    let terms = state.terms().map(|(d, a)| {
        let mapped: Vec<usize> = d.orbitals().iter().map(|&i| perm[i - 1]).collect();
        let mut inversions = 0;
        for x in 0..mapped.len() {
            for y in x + 1..mapped.len() {
                if mapped[x] > mapped[y] {
                    inversions += 1;
                }
            }
        }
        let mut sorted = mapped;
        sorted.sort_unstable();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        (sorted, a * sign)
    });
    FermionState::from_terms(state.n_particles(), state.rank(), terms.collect::<Vec<_>>())
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub state: FermionState,
    /// `perm[i - 1]` is the new label of natural orbital `i`.
    pub permutation: Vec<usize>,
    pub residual: f64,
}

/// Natural orbitals sharing an occupation number are only defined up to a
/// unitary mixing within their level; the rules hold for some labeling of
/// each level. Searches label permutations within degenerate levels and
/// keeps the first one minimizing the summed rule residuals.
pub fn align_degenerate_orbitals(
    state: &FermionState,
    spectrum: &Spectrum,
    rules: &[SelectionRule],
) -> Result<Alignment, PinningError> {
    let r = state.rank();
    let identity: Vec<usize> = (1..=r).collect();
    let base = total_rule_residual(state, rules)?;
    let mut best = Alignment {
        state: state.clone(),
        permutation: identity.clone(),
        residual: base,
    };
    let values = spectrum.values();
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > CLUSTER_TOL {
            if i - start > 1 {
                clusters.push((start, i));
            }
            start = i;
        }
    }
    let candidates = clusters
        .iter()
        .try_fold(1usize, |acc, &(a, b)| acc.checked_mul((1..=b - a).product()));
    if rules.is_empty() || base == 0.0 || !matches!(candidates, Some(c) if c <= MAX_RELABELINGS) {
        return Ok(best);
    }
    let mut perm = identity;
    'outer: loop {
        // Odometer over per-cluster permutations, last cluster fastest.
        let mut advanced = false;
        for &(a, b) in clusters.iter().rev() {
            if next_permutation(&mut perm[a..b]) {
                advanced = true;
                break;
            }
            // Wrapped around: back to sorted order, carry into the next cluster.
            perm[a..b].sort_unstable();
        }
        if !advanced {
            break 'outer;
        }
        let candidate = relabel(state, &perm)?;
        let residual = total_rule_residual(&candidate, rules)?;
        if residual < best.residual {
            best = Alignment {
                state: candidate,
                permutation: perm.clone(),
                residual,
            };
            if residual == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}

/// The four determinants of the structured rank-7 state
/// `α[1,2,3] + β[1,4,5] + γ[1,6,7] + δ[2,4,6]`.
pub const STRUCTURED_DETS: [[usize; 3]; 4] = [[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6]];

pub fn structured_state(
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
) -> Result<FermionState, FockError> {
    let amps = [alpha, beta, gamma, delta];
    let terms = STRUCTURED_DETS.iter().zip(amps).map(|(d, a)| (d.to_vec(), a));
    let state = FermionState::from_terms(3, 7, terms.collect::<Vec<_>>())?;
    state.require_normalized()?;
    Ok(state)
}

/// Squared moduli of the structured-state amplitudes. Phases are not
/// recoverable from occupations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuredAmplitudes {
    pub alpha_sq: f64,
    pub beta_sq: f64,
    pub gamma_sq: f64,
    /// `|δ|²` from `λ_2 - λ_3`, `λ_4 - λ_5` and `λ_6 - λ_7`.
    pub delta_sq: [f64; 3],
    pub delta_sq_mean: f64,
    /// Largest pairwise difference between the `|δ|²` estimates.
    pub consistency_residual: f64,
    /// `|α|² + |β|² + |γ|² + mean |δ|² - 1`.
    pub normalization_residual: f64,
}

impl StructuredAmplitudes {
    /// Reads the amplitudes from occupations listed in structured-orbital
    /// order, `o_1 = |α|²+|β|²+|γ|²`, `o_2 = |α|²+|δ|²`, `o_3 = |α|²`, ….
    pub fn from_occupations(occ: &[f64], tol: f64) -> Result<Self, PinningError> {
        if occ.len() != 7 {
            return Err(PinningError::Inconsistent(format!(
                "need 7 occupations, got {}",
                occ.len()
            )));
        }
        let delta_sq = [occ[1] - occ[2], occ[3] - occ[4], occ[5] - occ[6]];
        let (alpha_sq, beta_sq, gamma_sq) = (occ[2], occ[4], occ[6]);
        for (name, v) in [
            ("|α|²", alpha_sq),
            ("|β|²", beta_sq),
            ("|γ|²", gamma_sq),
            ("|δ|² (λ2-λ3)", delta_sq[0]),
            ("|δ|² (λ4-λ5)", delta_sq[1]),
            ("|δ|² (λ6-λ7)", delta_sq[2]),
        ] {
            if v < -tol || v > 1.0 + tol {
                return Err(PinningError::Inconsistent(format!("{name} = {v:e}")));
            }
        }
        let mut consistency_residual: f64 = 0.0;
        for a in 0..3 {
            for b in a + 1..3 {
                consistency_residual = consistency_residual.max((delta_sq[a] - delta_sq[b]).abs());
            }
        }
        let delta_sq_mean = delta_sq.iter().sum::<f64>() / 3.0;
        Ok(Self {
            alpha_sq,
            beta_sq,
            gamma_sq,
            delta_sq,
            delta_sq_mean,
            consistency_residual,
            normalization_residual: alpha_sq + beta_sq + gamma_sq + delta_sq_mean - 1.0,
        })
    }
}

/// Structured amplitudes from a sorted rank-7 spectrum, which must saturate
/// the three quadruple inequalities containing `λ_1` within `tol`.
pub fn reconstruct_structured(spec: &Spectrum, tol: f64) -> Result<StructuredAmplitudes, PinningError> {
    if (spec.n_particles(), spec.rank()) != (3, 7) {
        return Err(PinningError::Shape {
            n: 3,
            r: 7,
            got_n: spec.n_particles(),
            got_r: spec.rank(),
        });
    }
    for set in &QUADRUPLE_SETS[1..] {
        let value: f64 = set.iter().map(|&i| spec.get(i)).sum();
        let residual = 2.0 - value;
        if residual.abs() > tol {
            let names: Vec<String> = set.iter().map(|i| format!("l{i}")).collect();
            return Err(PinningError::NotPinned {
                label: format!("{} <= 2", names.join(" + ")),
                residual,
            });
        }
    }
    StructuredAmplitudes::from_occupations(spec.values(), tol)
}

/// Orbitals removed from a spectrum as filled or empty, and what remains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedSpectrum {
    /// 1-based indices in the original spectrum.
    pub filled: Vec<usize>,
    pub empty: Vec<usize>,
    pub spectrum: Spectrum,
}

/// Drops orbitals with `λ ≥ 1 - tol` (one electron each) and `λ ≤ tol`.
pub fn reduce_inactive(spec: &Spectrum, tol: f64) -> Result<ReducedSpectrum, PinningError> {
    let mut filled = Vec::new();
    let mut empty = Vec::new();
    let mut kept = Vec::new();
    for (i, &v) in spec.values().iter().enumerate() {
        if v >= 1.0 - tol {
            filled.push(i + 1);
        } else if v <= tol {
            empty.push(i + 1);
        } else {
            kept.push(v);
        }
    }
    let n = spec.n_particles().checked_sub(filled.len()).ok_or_else(|| {
        PinningError::Inconsistent(format!("{} filled orbitals for N = {}", filled.len(), spec.n_particles()))
    })?;
    let r = kept.len();
    Ok(ReducedSpectrum {
        filled,
        empty,
        spectrum: Spectrum::new(n, r, kept)?,
    })
}

/// Pairs `(k, 7 - k)` of the three-qubit picture.
pub const QUBIT_PAIRS: [(usize, usize); 3] = [(1, 6), (2, 5), (3, 4)];

/// Amplitudes `c_{b1 b2 b3}` indexed by `4 b1 + 2 b2 + b3`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeQubitState {
    pub amplitudes: [Complex64; 8],
}

impl ThreeQubitState {
    pub fn amplitude(&self, bits: [u8; 3]) -> Complex64 {
        self.amplitudes[(4 * bits[0] + 2 * bits[1] + bits[2]) as usize]
    }

    /// Reduced density matrix of qubit `k ∈ {1, 2, 3}`.
    pub fn marginal(&self, k: usize) -> [[Complex64; 2]; 2] {
        assert!((1..=3).contains(&k), "qubit index {k} out of range");
        let shift = 3 - k;
        let mut rho = [[Complex64::default(); 2]; 2];
        for i in 0..8usize {
            for j in 0..8usize {
                // Same bits on the other two qubits.
                if (i ^ j) & !(1 << shift) != 0 {
                    continue;
                }
                let (a, b) = ((i >> shift) & 1, (j >> shift) & 1);
                rho[a][b] += self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        rho
    }

    /// Eigenvalues of [`marginal`](Self::marginal), larger first.
    pub fn marginal_spectrum(&self, k: usize) -> (f64, f64) {
        let m = self.marginal(k);
        let (a, d) = (m[0][0].re, m[1][1].re);
        let half_gap = (((a - d) / 2.0).powi(2) + m[0][1].norm_sqr()).sqrt();
        let mid = (a + d) / 2.0;
        (mid + half_gap, mid - half_gap)
    }
}

/// Maps a `∧³H₆` state supported on determinants with one orbital from each
/// pair `(k, 7 - k)` to three qubits: `b_k = 0` when orbital `k` is taken.
/// The amplitude of `ψ_{i1} ∧ ψ_{i2} ∧ ψ_{i3}` (pair order) is the
/// determinant amplitude times the sign of sorting `(i1, i2, i3)`.
pub fn bd_three_qubit(state: &FermionState, tol: f64) -> Result<ThreeQubitState, PinningError> {
    if (state.n_particles(), state.rank()) != (3, 6) {
        return Err(PinningError::Shape {
            n: 3,
            r: 6,
            got_n: state.n_particles(),
            got_r: state.rank(),
        });
    }
    let mut amplitudes = [Complex64::default(); 8];
    let mut off = 0.0;
    for (d, a) in state.terms() {
        let mut picks = [0usize; 3];
        let mut on_cube = true;
        for (k, &(lo, hi)) in QUBIT_PAIRS.iter().enumerate() {
            match (d.contains(lo), d.contains(hi)) {
                (true, false) => picks[k] = lo,
                (false, true) => picks[k] = hi,
                _ => on_cube = false,
            }
        }
        if !on_cube {
            off += a.norm_sqr();
            continue;
        }
        let mut inversions = 0;
        for x in 0..3 {
            for y in x + 1..3 {
                if picks[x] > picks[y] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        let index: usize = picks
            .iter()
            .enumerate()
            .map(|(k, &i)| usize::from(i != k + 1) << (2 - k))
            .sum();
        amplitudes[index] = a * sign;
    }
    let weight = off.sqrt();
    if weight > tol {
        return Err(PinningError::OffCube { weight });
    }
    Ok(ThreeQubitState { amplitudes })
}

/// `λ_5 + λ_6 - λ_4`, nonnegative on admissible rank-6 spectra.
pub fn higuchi_margin(spec: &Spectrum) -> f64 {
    spec.get(5) + spec.get(6) - spec.get(4)
}
