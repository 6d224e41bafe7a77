//! Generalized Pauli constraints on natural occupation numbers.
//!
//! Coefficients and bounds are exact rationals; evaluation against
//! floating-point spectra happens in double precision with an explicit
//! tolerance.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, frac, int, Rational};
use crate::rdm::Spectrum;

/// Default tolerance for deciding saturation of a constraint.
pub const DEFAULT_SATURATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("constraint set is for (n, r) = ({n}, {r}); spectrum is for ({sn}, {sr})")]
    DimensionMismatch { n: usize, r: usize, sn: usize, sr: usize },
    #[error("coefficient vector must be nonzero ({0})")]
    ZeroCoefficients(String),
    #[error("coefficient vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("an inequality cannot enter a combination with a negative multiplier ({0})")]
    NegativeInequalityMultiplier(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("constraints have different lengths")]
    MixedLengths,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// Base constraints hold for any ordered spectrum; generalized ones are the
/// extended Pauli constraints proper.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Ordering,
    Bound,
    Normalization,
    Generalized,
}

impl ConstraintKind {
    pub fn is_base(self) -> bool {
        self != ConstraintKind::Generalized
    }
}

/// `Σ_k c_k λ_k  (≤ | =)  b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "AffineConstraintJson", into = "AffineConstraintJson")]
pub struct AffineConstraint {
    label: String,
    coefficients: Vec<Rational>,
    relation: Relation,
    bound: Rational,
    kind: ConstraintKind,
    provenance: String,
    dense: Vec<f64>,
    dense_bound: f64,
}

impl PartialEq for AffineConstraint {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.coefficients == other.coefficients
            && self.relation == other.relation
            && self.bound == other.bound
            && self.kind == other.kind
            && self.provenance == other.provenance
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineConstraintJson {
    pub label: String,
    #[serde(with = "rational::vec")]
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    #[serde(with = "rational")]
    pub bound: Rational,
    pub kind: ConstraintKind,
    pub provenance: String,
}

impl TryFrom<AffineConstraintJson> for AffineConstraint {
    type Error = ConstraintError;
    fn try_from(j: AffineConstraintJson) -> Result<Self, ConstraintError> {
        AffineConstraint::new(j.label, j.coefficients, j.relation, j.bound, j.kind, j.provenance)
    }
}

impl From<AffineConstraint> for AffineConstraintJson {
    fn from(c: AffineConstraint) -> Self {
        AffineConstraintJson {
            label: c.label,
            coefficients: c.coefficients,
            relation: c.relation,
            bound: c.bound,
            kind: c.kind,
            provenance: c.provenance,
        }
    }
}

impl AffineConstraint {
    pub fn new(
        label: impl Into<String>,
        coefficients: Vec<Rational>,
        relation: Relation,
        bound: Rational,
        kind: ConstraintKind,
        provenance: impl Into<String>,
    ) -> Result<Self, ConstraintError> {
        let label = label.into();
        if coefficients.iter().all(Zero::is_zero) {
            return Err(ConstraintError::ZeroCoefficients(label));
        }
        let dense = coefficients.iter().map(rational::to_f64).collect();
        let dense_bound = rational::to_f64(&bound);
        Ok(Self {
            label,
            coefficients,
            relation,
            bound,
            kind,
            provenance: provenance.into(),
            dense,
            dense_bound,
        })
    }

    /// Builds a constraint from integer coefficients, labelled by its formula.
    fn from_ints(
        r: usize,
        terms: &[(usize, i64)],
        relation: Relation,
        bound: i64,
        kind: ConstraintKind,
        provenance: &str,
    ) -> Self {
        let mut coefficients = vec![int(0); r];
        for &(i, c) in terms {
            coefficients[i - 1] += int(c);
        }
        let label = describe(&coefficients, relation, &int(bound));
        Self::new(label, coefficients, relation, int(bound), kind, provenance).expect("nonzero")
    }

    fn indicator(r: usize, indices: &[usize], bound: i64, relation: Relation, provenance: &str) -> Self {
        let terms: Vec<(usize, i64)> = indices.iter().map(|&i| (i, 1)).collect();
        Self::from_ints(r, &terms, relation, bound, ConstraintKind::Generalized, provenance)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `c · λ` in double precision.
    pub fn value(&self, lambda: &[f64]) -> f64 {
        self.dense.iter().zip(lambda).map(|(c, l)| c * l).sum()
    }

    /// `bound - c · λ`; nonnegative when an inequality holds.
    pub fn residual(&self, lambda: &[f64]) -> f64 {
        self.dense_bound - self.value(lambda)
    }

    /// Exact residual at a rational point.
    pub fn residual_exact(&self, point: &[Rational]) -> Rational {
        let value: Rational = self
            .coefficients
            .iter()
            .zip(point)
            .map(|(c, x)| c * x)
            .fold(int(0), |a, b| a + b);
        &self.bound - value
    }

    pub fn satisfied_exact(&self, point: &[Rational]) -> bool {
        let res = self.residual_exact(point);
        match self.relation {
            Relation::Le => !res.is_negative(),
            Relation::Eq => res.is_zero(),
        }
    }

    /// The same half-space or hyperplane: equal up to a positive factor
    /// (any nonzero factor for equalities).
    pub fn is_equivalent(&self, other: &Self) -> bool {
        if self.relation != other.relation || self.len() != other.len() {
            return false;
        }
        let Some(k) = self.coefficients.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        if other.coefficients[k].is_zero() {
            return false;
        }
        let factor = &other.coefficients[k] / &self.coefficients[k];
        if self.relation == Relation::Le && factor.is_negative() {
            return false;
        }
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .all(|(a, b)| a * &factor == *b)
            && &self.bound * &factor == other.bound
    }

    /// Nonnegative combination of inequalities plus arbitrary multiples of
    /// equalities. The result is an equality only if every term is one.
    pub fn linear_combination(
        terms: &[(Rational, &AffineConstraint)],
        kind: ConstraintKind,
        provenance: &str,
    ) -> Result<Self, ConstraintError> {
        let len = terms.first().map(|t| t.1.len()).unwrap_or(0);
        let mut coefficients = vec![int(0); len];
        let mut bound = int(0);
        let mut relation = Relation::Eq;
        for (m, c) in terms {
            if c.len() != len {
                return Err(ConstraintError::MixedLengths);
            }
            if m.is_zero() {
                continue;
            }
            if c.relation == Relation::Le {
                if m.is_negative() {
                    return Err(ConstraintError::NegativeInequalityMultiplier(c.label.clone()));
                }
                relation = Relation::Le;
            }
            for (acc, x) in coefficients.iter_mut().zip(&c.coefficients) {
                *acc += m * x;
            }
            bound += m * &c.bound;
        }
        let label = describe(&coefficients, relation, &bound);
        Self::new(label, coefficients, relation, bound, kind, provenance)
    }

    /// Image under `λ_k ↦ 1 - λ_{r+1-k}`: coefficients `c'_j = -c_{r+1-j}`,
    /// bound `b - Σc`. Applying it twice returns the original exactly.
    pub fn dualize(&self) -> Self {
        let r = self.len();
        let coefficients: Vec<Rational> = (0..r).map(|j| -self.coefficients[r - 1 - j].clone()).collect();
        let total = self.coefficients.iter().fold(int(0), |a, b| a + b);
        let bound = &self.bound - total;
        let label = match self
            .label
            .strip_prefix("dual(")
            .and_then(|s| s.strip_suffix(')'))
        {
            Some(inner) => inner.to_string(),
            None => format!("dual({})", self.label),
        };
        let provenance = match self.provenance.strip_prefix("hole dual of ") {
            Some(inner) => inner.to_string(),
            None => format!("hole dual of {}", self.provenance),
        };
        Self::new(label, coefficients, self.relation, bound, self.kind, provenance).expect("nonzero")
    }

    /// Indices (1-based) with nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Formula text such as `l1 + l6 - l7 <= 1`.
pub fn describe(coefficients: &[Rational], relation: Relation, bound: &Rational) -> String {
    let mut out = String::new();
    for (i, c) in coefficients.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if !rational::is_one(&mag) {
            out.push_str(&rational::format(&mag));
        }
        out.push_str(&format!("l{}", i + 1));
    }
    let rel = match relation {
        Relation::Le => "<=",
        Relation::Eq => "=",
    };
    format!("{out} {rel} {}", rational::format(bound))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Completeness {
    Complete,
    ValidButPossiblyIncomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub n: usize,
    pub r: usize,
    /// Extra coefficient slots for spin variables, appended after the `r`
    /// orbital ones.
    #[serde(default)]
    pub spin_slots: usize,
    pub constraints: Vec<AffineConstraint>,
    pub completeness: Completeness,
}

impl ConstraintSet {
    pub fn new(
        n: usize,
        r: usize,
        spin_slots: usize,
        constraints: Vec<AffineConstraint>,
        completeness: Completeness,
    ) -> Result<Self, ConstraintError> {
        let mut seen = std::collections::HashSet::new();
        for c in &constraints {
            if c.len() != r + spin_slots {
                return Err(ConstraintError::Length {
                    got: c.len(),
                    expected: r + spin_slots,
                });
            }
            if !seen.insert(c.label.clone()) {
                return Err(ConstraintError::DuplicateLabel(c.label.clone()));
            }
        }
        Ok(Self {
            n,
            r,
            spin_slots,
            constraints,
            completeness,
        })
    }

    pub fn get(&self, label: &str) -> Option<&AffineConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn generalized(&self) -> impl Iterator<Item = &AffineConstraint> {
        self.constraints.iter().filter(|c| c.kind == ConstraintKind::Generalized)
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    /// Particle-hole dual set for `(r - n, r)`.
    pub fn dualize(&self) -> ConstraintSet {
        ConstraintSet {
            n: self.r - self.n,
            r: self.r,
            spin_slots: self.spin_slots,
            constraints: self.constraints.iter().map(AffineConstraint::dualize).collect(),
            completeness: self.completeness,
        }
    }

    pub fn evaluate(&self, spec: &Spectrum, tol: f64) -> Result<EvaluationReport, ConstraintError> {
        if spec.n_particles() != self.n || spec.rank() != self.r || self.spin_slots != 0 {
            return Err(ConstraintError::DimensionMismatch {
                n: self.n,
                r: self.r,
                sn: spec.n_particles(),
                sr: spec.rank(),
            });
        }
        Ok(self.evaluate_values(spec.values(), tol))
    }

    /// Evaluates against a raw vector (orbital values followed by any spin
    /// values); the caller is responsible for its length.
    pub fn evaluate_values(&self, values: &[f64], tol: f64) -> EvaluationReport {
        let rows = self
            .constraints
            .iter()
            .map(|c| {
                let value = c.value(values);
                let residual = c.dense_bound - value;
                ConstraintEvaluation {
                    label: c.label.clone(),
                    kind: c.kind,
                    relation: c.relation,
                    value,
                    residual,
                    status: Status::classify(c.relation, residual, tol),
                }
            })
            .collect();
        EvaluationReport { tolerance: tol, rows }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Satisfied,
    Saturated,
    Violated,
}

impl Status {
    pub fn classify(relation: Relation, residual: f64, tol: f64) -> Status {
        match relation {
            Relation::Le if residual < -tol => Status::Violated,
            Relation::Le if residual <= tol => Status::Saturated,
            Relation::Le => Status::Satisfied,
            Relation::Eq if residual.abs() <= tol => Status::Saturated,
            Relation::Eq => Status::Violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintEvaluation {
    pub label: String,
    pub kind: ConstraintKind,
    pub relation: Relation,
    pub value: f64,
    pub residual: f64,
    pub status: Status,
}

impl ConstraintEvaluation {
    /// How far the constraint is broken; zero or negative when it holds.
    pub fn violation(&self) -> f64 {
        match self.relation {
            Relation::Le => -self.residual,
            Relation::Eq => self.residual.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub tolerance: f64,
    pub rows: Vec<ConstraintEvaluation>,
}

impl EvaluationReport {
    pub fn get(&self, label: &str) -> Option<&ConstraintEvaluation> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn is_admissible(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Violated)
    }

    pub fn violated(&self) -> impl Iterator<Item = &ConstraintEvaluation> {
        self.rows.iter().filter(|r| r.status == Status::Violated)
    }

    pub fn saturated(&self) -> impl Iterator<Item = &ConstraintEvaluation> {
        self.rows.iter().filter(|r| r.status == Status::Saturated)
    }

    /// Largest violation over all rows (negative when everything holds strictly).
    pub fn max_violation(&self) -> f64 {
        self.rows
            .iter()
            .map(ConstraintEvaluation::violation)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Catalog

const PROV_BASE: &str = "ordered spectrum with Pauli bound";
const PROV_PAIRS: &str = "two-electron pairing";
const PROV_BD: &str = "Borland-Dennis";
const PROV_QUADRUPLE: &str = "rank-7 quadruple";
const PROV_SYMMETRIC: &str = "symmetric-orbital inequalities";
const PROV_SERIES: &str = "infinite-series extension";
const PROV_SIBLING: &str = "quadruple with infinite-series tail";

/// `λ_i ≥ λ_{i+1}`, `0 ≤ λ_i ≤ 1`, `Σλ = n`.
pub fn base_constraints(n: usize, r: usize) -> Vec<AffineConstraint> {
    let mut out = Vec::with_capacity(3 * r);
    for i in 1..r {
        out.push(
            AffineConstraint::from_ints(
                r,
                &[(i, -1), (i + 1, 1)],
                Relation::Le,
                0,
                ConstraintKind::Ordering,
                PROV_BASE,
            )
            .with_label(format!("l{i} >= l{}", i + 1)),
        );
    }
    for i in 1..=r {
        out.push(
            AffineConstraint::from_ints(r, &[(i, -1)], Relation::Le, 0, ConstraintKind::Bound, PROV_BASE)
                .with_label(format!("l{i} >= 0")),
        );
        out.push(
            AffineConstraint::from_ints(r, &[(i, 1)], Relation::Le, 1, ConstraintKind::Bound, PROV_BASE)
                .with_label(format!("l{i} <= 1")),
        );
    }
    let all: Vec<(usize, i64)> = (1..=r).map(|i| (i, 1)).collect();
    out.push(
        AffineConstraint::from_ints(r, &all, Relation::Eq, n as i64, ConstraintKind::Normalization, PROV_BASE)
            .with_label(format!("sum = {n}")),
    );
    out
}

/// `λ_{2k-1} = λ_{2k}`, plus `λ_r = 0` for odd `r`.
pub fn pair_degeneracy(r: usize) -> Vec<AffineConstraint> {
    let mut out: Vec<_> = (1..=r / 2)
        .map(|k| {
            AffineConstraint::from_ints(
                r,
                &[(2 * k - 1, 1), (2 * k, -1)],
                Relation::Eq,
                0,
                ConstraintKind::Generalized,
                PROV_PAIRS,
            )
        })
        .collect();
    if r % 2 == 1 {
        out.push(AffineConstraint::indicator(r, &[r], 0, Relation::Eq, PROV_PAIRS));
    }
    out
}

/// `λ_1 + λ_6 = λ_2 + λ_5 = λ_3 + λ_4 = 1`, `λ_4 ≤ λ_5 + λ_6`.
pub fn borland_dennis() -> Vec<AffineConstraint> {
    vec![
        AffineConstraint::indicator(6, &[1, 6], 1, Relation::Eq, PROV_BD),
        AffineConstraint::indicator(6, &[2, 5], 1, Relation::Eq, PROV_BD),
        AffineConstraint::indicator(6, &[3, 4], 1, Relation::Eq, PROV_BD),
        AffineConstraint::from_ints(
            6,
            &[(4, 1), (5, -1), (6, -1)],
            Relation::Le,
            0,
            ConstraintKind::Generalized,
            PROV_BD,
        ),
    ]
}

/// Index sets of the four rank-7 inequalities `Σ_{i∈S} λ_i ≤ 2`.
pub const QUADRUPLE_SETS: [[usize; 4]; 4] = [[2, 3, 4, 5], [1, 3, 4, 6], [1, 2, 5, 6], [1, 2, 4, 7]];

pub fn rank7_quadruple() -> Vec<AffineConstraint> {
    QUADRUPLE_SETS
        .iter()
        .map(|s| AffineConstraint::indicator(7, s, 2, Relation::Le, PROV_QUADRUPLE))
        .collect()
}

/// `λ_{k+1} + λ_{r-k} ≤ 1` for `k + 1 < r - k`.
pub fn symmetric_orbital_inequalities(r: usize) -> Vec<AffineConstraint> {
    (0..r)
        .take_while(|k| k + 1 < r - k)
        .map(|k| AffineConstraint::indicator(r, &[k + 1, r - k], 1, Relation::Le, PROV_SYMMETRIC))
        .collect()
}

/// `1, 2, 4, 7, 11, 16, …` (successive gaps 1, 2, 3, …) up to `r`.
pub fn series_indices(r: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut gap) = (1, 1);
    while i <= r {
        out.push(i);
        i += gap;
        gap += 1;
    }
    out
}

/// `λ_1 + λ_2 + λ_4 + λ_7 + λ_11 + … ≤ 2`, truncated at rank `r`.
pub fn series_inequality(r: usize) -> AffineConstraint {
    AffineConstraint::indicator(r, &series_indices(r), 2, Relation::Le, PROV_SERIES)
}

/// The other three quadruple inequalities with the series tail from `λ_11`.
pub fn series_siblings(r: usize) -> Vec<AffineConstraint> {
    let tail: Vec<usize> = series_indices(r).into_iter().filter(|&i| i >= 11).collect();
    QUADRUPLE_SETS[..3]
        .iter()
        .map(|s| {
            let mut idx = s.to_vec();
            idx.extend(&tail);
            AffineConstraint::indicator(r, &idx, 2, Relation::Le, PROV_SIBLING)
        })
        .collect()
}

fn three_particle_generalized(r: usize) -> Option<(Vec<AffineConstraint>, Completeness)> {
    match r {
        6 => Some((borland_dennis(), Completeness::Complete)),
        7 => Some((rank7_quadruple(), Completeness::Complete)),
        8..=crate::fock::MAX_RANK => {
            let mut out = Vec::new();
            if r.is_multiple_of(2) {
                out.extend(symmetric_orbital_inequalities(r));
            }
            out.push(series_inequality(r));
            out.extend(series_siblings(r));
            Some((out, Completeness::ValidButPossiblyIncomplete))
        }
        _ => None,
    }
}

fn generalized_for(n: usize, r: usize) -> Option<(Vec<AffineConstraint>, Completeness)> {
    if n == 2 {
        return Some((pair_degeneracy(r), Completeness::Complete));
    }
    if n == 3 {
        if let Some(found) = three_particle_generalized(r) {
            return Some(found);
        }
    }
    if r >= 3 && n == r - 2 {
        let dual = pair_degeneracy(r).iter().map(AffineConstraint::dualize).collect();
        return Some((dual, Completeness::Complete));
    }
    if r >= 6 && n + 3 == r && n >= 3 {
        let (set, completeness) = three_particle_generalized(r)?;
        return Some((set.iter().map(AffineConstraint::dualize).collect(), completeness));
    }
    None
}

/// Known constraints for `∧^n H_r`: base constraints plus whatever
/// generalized family applies. Unsupported shapes get base constraints only.
pub fn catalog(n: usize, r: usize) -> Result<ConstraintSet, ConstraintError> {
    if n == 0 || n > r || r > crate::fock::MAX_RANK {
        return Err(ConstraintError::DimensionMismatch { n, r, sn: n, sr: r });
    }
    let mut constraints = base_constraints(n, r);
    let completeness = match generalized_for(n, r) {
        Some((extra, completeness)) => {
            constraints.extend(extra);
            completeness
        }
        None => Completeness::ValidButPossiblyIncomplete,
    };
    ConstraintSet::new(n, r, 0, constraints, completeness)
}

/// `λ_1 + λ_6 - λ_7 ≤ 1`: the sum of the second and third rank-7
/// inequalities with the normalization `Σλ = 3` subtracted.
pub fn derive_pauli_from_quadruple() -> AffineConstraint {
    let quad = rank7_quadruple();
    let trace = base_constraints(3, 7).pop().expect("normalization row");
    AffineConstraint::linear_combination(
        &[(int(1), &quad[1]), (int(1), &quad[2]), (int(-1), &trace)],
        ConstraintKind::Generalized,
        "derived from the rank-7 quadruple",
    )
    .expect("valid combination")
}

/// Half of a rational, used by callers assembling fractional rows.
pub fn half() -> Rational {
    frac(1, 2)
}
