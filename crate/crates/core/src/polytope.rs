//! Exact-rational halfspace systems and their projection to a plane.
//!
//! Projection substitutes equalities away, then runs Fourier–Motzkin
//! elimination with duplicate-direction pruning and Chernikov's history
//! bound, and finally intersects the surviving halfplanes. Every eliminated
//! stage is kept so polygon points can be lifted back to feasible points of
//! the full system.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{ConstraintSet, Relation};
use crate::data;
use crate::rational::{self, frac, int, Rational};
use crate::spin;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("row has {got} coefficients, system has {expected} variables")]
    Dimension { got: usize, expected: usize },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("the projected region is unbounded")]
    Unbounded,
    #[error("polygon is empty")]
    Empty,
    #[error("system format error: {0}")]
    Format(String),
}

/// `coefficients · x  (≤ | =)  bound`; the relation is implied by which
/// list of a [`HalfspaceSystem`] holds the row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub coefficients: Vec<Rational>,
    pub bound: Rational,
}

impl Row {
    pub fn new(coefficients: Vec<Rational>, bound: Rational) -> Self {
        Self { coefficients, bound }
    }

    pub fn dot(&self, x: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v)
    }

    pub fn dot_f64(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(x)
            .map(|(a, v)| rational::to_f64(a) * v)
            .sum()
    }

    fn negated(&self) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|a| -a).collect(),
            bound: -&self.bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct HalfspaceSystem {
    variables: Vec<String>,
    equalities: Vec<Row>,
    inequalities: Vec<Row>,
}

/// On-disk form: `{"variables": [...], "rows": [{"coefficients": ["1",
/// "1/2"], "relation": "<=", "bound": "2"}]}` with `<=`, `>=` or `=`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemJson {
    pub variables: Vec<String>,
    pub rows: Vec<RowJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowJson {
    #[serde(with = "rational::vec")]
    pub coefficients: Vec<Rational>,
    pub relation: String,
    #[serde(with = "rational")]
    pub bound: Rational,
}

impl TryFrom<SystemJson> for HalfspaceSystem {
    type Error = PolytopeError;
    fn try_from(j: SystemJson) -> Result<Self, PolytopeError> {
        let mut eq = Vec::new();
        let mut le = Vec::new();
        for (i, row) in j.rows.into_iter().enumerate() {
            let r = Row::new(row.coefficients, row.bound);
            match row.relation.as_str() {
                "<=" => le.push(r),
                ">=" => le.push(r.negated()),
                "=" => eq.push(r),
                other => {
                    return Err(PolytopeError::Format(format!(
                        "rows[{i}].relation: expected \"<=\", \">=\" or \"=\", got {other:?}"
                    )))
                }
            }
        }
        HalfspaceSystem::new(j.variables, eq, le)
    }
}

impl From<HalfspaceSystem> for SystemJson {
    fn from(s: HalfspaceSystem) -> Self {
        let mut rows: Vec<RowJson> = s
            .equalities
            .into_iter()
            .map(|r| RowJson {
                coefficients: r.coefficients,
                relation: "=".into(),
                bound: r.bound,
            })
            .collect();
        rows.extend(s.inequalities.into_iter().map(|r| RowJson {
            coefficients: r.coefficients,
            relation: "<=".into(),
            bound: r.bound,
        }));
        SystemJson {
            variables: s.variables,
            rows,
        }
    }
}

impl HalfspaceSystem {
    pub fn new(
        variables: Vec<String>,
        equalities: Vec<Row>,
        inequalities: Vec<Row>,
    ) -> Result<Self, PolytopeError> {
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(PolytopeError::DuplicateVariable(v.clone()));
            }
        }
        for row in equalities.iter().chain(&inequalities) {
            if row.coefficients.len() != variables.len() {
                return Err(PolytopeError::Dimension {
                    got: row.coefficients.len(),
                    expected: variables.len(),
                });
            }
        }
        Ok(Self {
            variables,
            equalities,
            inequalities,
        })
    }

    /// Variables `l1..lr`, one row per constraint.
    pub fn from_constraints(set: &ConstraintSet) -> Self {
        let variables = (1..=set.r).map(|i| format!("l{i}")).collect();
        let mut eq = Vec::new();
        let mut le = Vec::new();
        for c in &set.constraints {
            let row = Row::new(c.coefficients().to_vec(), c.bound().clone());
            match c.relation() {
                Relation::Le => le.push(row),
                Relation::Eq => eq.push(row),
            }
        }
        Self::new(variables, eq, le).expect("catalog rows match the rank")
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn equalities(&self) -> &[Row] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Row] {
        &self.inequalities
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// The functional picking out one named variable.
    pub fn axis(&self, name: &str) -> Result<Vec<Rational>, PolytopeError> {
        let k = self
            .variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolytopeError::UnknownVariable(name.to_string()))?;
        Ok((0..self.dim()).map(|i| if i == k { int(1) } else { int(0) }).collect())
    }

    pub fn contains_exact(&self, x: &[Rational]) -> bool {
        self.equalities.iter().all(|r| r.dot(x) == r.bound)
            && self.inequalities.iter().all(|r| r.dot(x) <= r.bound)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.equalities
            .iter()
            .all(|r| (r.dot_f64(x) - rational::to_f64(&r.bound)).abs() <= tol)
            && self
                .inequalities
                .iter()
                .all(|r| r.dot_f64(x) <= rational::to_f64(&r.bound) + tol)
    }
}

// ---------------------------------------------------------------------------
// Elimination

/// A working inequality with the set of source inequalities it came from.
#[derive(Clone, Debug)]
struct FmRow {
    a: Vec<Rational>,
    b: Rational,
    history: Vec<u64>,
}

impl FmRow {
    fn history_len(&self) -> usize {
        self.history.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_trivial(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }

    /// Scales so the first nonzero coefficient has modulus one.
    fn normalize(&mut self) {
        if let Some(lead) = self.a.iter().find(|x| !x.is_zero()).map(Signed::abs) {
            if !lead.is_one() {
                for x in &mut self.a {
                    *x /= &lead;
                }
                self.b /= &lead;
            }
        }
    }
}

fn union(h1: &[u64], h2: &[u64]) -> Vec<u64> {
    h1.iter().zip(h2).map(|(x, y)| x | y).collect()
}

enum Reduced {
    Rows(Vec<FmRow>),
    Infeasible,
}

/// Drops trivially true rows, flags `0 ≤ negative`, and keeps the tightest
/// row for each direction.
fn prune(rows: Vec<FmRow>) -> Reduced {
    let mut best: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut out: Vec<FmRow> = Vec::new();
    for mut row in rows {
        if row.is_trivial() {
            if row.b.is_negative() {
                return Reduced::Infeasible;
            }
            continue;
        }
        row.normalize();
        match best.get(&row.a) {
            Some(&k) => {
                let kept = &out[k];
                if row.b < kept.b || (row.b == kept.b && row.history_len() < kept.history_len()) {
                    out[k] = row;
                }
            }
            None => {
                best.insert(row.a.clone(), out.len());
                out.push(row);
            }
        }
    }
    Reduced::Rows(out)
}

/// One Fourier–Motzkin step on variable `k`. `steps` counts eliminations
/// including this one; rows built from more than `steps + 1` sources are
/// redundant (Chernikov).
fn eliminate(rows: &[FmRow], k: usize, steps: usize) -> Reduced {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for row in rows {
        if row.a[k].is_positive() {
            pos.push(row);
        } else if row.a[k].is_negative() {
            neg.push(row);
        } else {
            out.push(row.clone());
        }
    }
    for p in &pos {
        for q in &neg {
            let history = union(&p.history, &q.history);
            if history.iter().map(|w| w.count_ones() as usize).sum::<usize>() > steps + 1 {
                continue;
            }
            let (sp, sq) = (-&q.a[k], p.a[k].clone());
            let a: Vec<Rational> = p.a.iter().zip(&q.a).map(|(x, y)| x * &sp + y * &sq).collect();
            let b = &p.b * &sp + &q.b * &sq;
            out.push(FmRow { a, b, history });
        }
    }
    prune(out)
}

/// Rows involving one eliminated variable, kept for back-substitution.
#[derive(Clone, Debug)]
struct Stage {
    var: usize,
    rows: Vec<FmRow>,
}

/// `x_var = (bound - Σ_{j≠var} a_j x_j) / a_var`.
#[derive(Clone, Debug)]
struct Pivot {
    var: usize,
    row: Row,
}

fn cross(o: &[Rational; 2], a: &[Rational; 2], b: &[Rational; 2]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Counterclockwise hull without collinear points (monotone chain).
fn convex_hull(mut pts: Vec<[Rational; 2]>) -> Vec<[Rational; 2]> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[Rational; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<[Rational; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Convex polygon in the projection plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon2D {
    /// Counterclockwise, no repeated or collinear vertices.
    pub vertices: Vec<[Rational; 2]>,
    /// Irredundant halfplanes `a x + b y ≤ c`, one per edge in vertex order
    /// (fewer for degenerate polygons).
    pub halfplanes: Vec<Row>,
    /// The system was infeasible.
    pub empty: bool,
    /// Nonempty but without interior (a point or a segment).
    pub degenerate: bool,
}

impl Polygon2D {
    fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            halfplanes: Vec::new(),
            empty: true,
            degenerate: false,
        }
    }

    pub fn vertices_f64(&self) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|[x, y]| [rational::to_f64(x), rational::to_f64(y)])
            .collect()
    }

    pub fn contains_exact(&self, p: &[Rational; 2]) -> bool {
        !self.empty && self.halfplanes.iter().all(|h| h.dot(p) <= h.bound)
    }

    /// Containment with each halfplane relaxed by `tol` (in distance units).
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        !self.empty
            && self.halfplanes.iter().all(|h| {
                let (a, b) = (rational::to_f64(&h.coefficients[0]), rational::to_f64(&h.coefficients[1]));
                a * p[0] + b * p[1] <= rational::to_f64(&h.bound) + tol * a.hypot(b)
            })
    }
}

/// Result of projecting a system to the plane of two functionals.
#[derive(Clone, Debug)]
pub struct Projection {
    pub polygon: Polygon2D,
    dim: usize,
    pivots: Vec<Pivot>,
    stages: Vec<Stage>,
}

impl Projection {
    pub fn compute(sys: &HalfspaceSystem, x: &[Rational], y: &[Rational]) -> Result<Self, PolytopeError> {
        let d = sys.dim();
        for f in [x, y] {
            if f.len() != d {
                return Err(PolytopeError::Dimension { got: f.len(), expected: d });
            }
        }
        let total = d + 2;
        let extend = |row: &Row, ex: Rational, ey: Rational| {
            let mut a = row.coefficients.clone();
            a.push(ex);
            a.push(ey);
            Row::new(a, row.bound.clone())
        };
        let mut equalities: Vec<Row> = sys
            .equalities
            .iter()
            .map(|r| extend(r, int(0), int(0)))
            .collect();
        equalities.push(extend(&Row::new(x.to_vec(), int(0)), int(-1), int(0)));
        equalities.push(extend(&Row::new(y.to_vec(), int(0)), int(0), int(-1)));
        let mut inequalities: Vec<Row> = sys
            .inequalities
            .iter()
            .map(|r| extend(r, int(0), int(0)))
            .collect();

        // Substitute equalities away, pivoting on original variables only.
        let mut pivots: Vec<Pivot> = Vec::new();
        let mut planar: Vec<Row> = Vec::new();
        let mut infeasible = false;
        while let Some(eq) = equalities.pop() {
            let Some(p) = (0..d).find(|&j| !eq.coefficients[j].is_zero()) else {
                if eq.coefficients.iter().all(Zero::is_zero) {
                    infeasible |= !eq.bound.is_zero();
                } else {
                    planar.push(eq.clone());
                    planar.push(eq.negated());
                }
                continue;
            };
            let substitute = |row: &mut Row| {
                if row.coefficients[p].is_zero() {
                    return;
                }
                let f = &row.coefficients[p] / &eq.coefficients[p];
                for j in 0..total {
                    let delta = &f * &eq.coefficients[j];
                    row.coefficients[j] -= delta;
                }
                row.bound -= &f * &eq.bound;
            };
            equalities.iter_mut().for_each(substitute);
            inequalities.iter_mut().for_each(substitute);
            planar.iter_mut().for_each(substitute);
            pivots.push(Pivot { var: p, row: eq });
        }
        if infeasible {
            return Ok(Self {
                polygon: Polygon2D::empty(),
                dim: d,
                pivots,
                stages: Vec::new(),
            });
        }
        inequalities.extend(planar);
        let words = inequalities.len().div_ceil(64).max(1);
        let rows: Vec<FmRow> = inequalities
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let mut history = vec![0u64; words];
                history[i / 64] |= 1 << (i % 64);
                FmRow {
                    a: r.coefficients,
                    b: r.bound,
                    history,
                }
            })
            .collect();

        let pivoted: Vec<usize> = pivots.iter().map(|p| p.var).collect();
        let mut remaining: Vec<usize> = (0..d).filter(|j| !pivoted.contains(j)).collect();
        let mut stages = Vec::new();
        let empty = |pivots, stages| Self {
            polygon: Polygon2D::empty(),
            dim: d,
            pivots,
            stages,
        };
        let mut rows = match prune(rows) {
            Reduced::Rows(r) => r,
            Reduced::Infeasible => return Ok(empty(pivots, stages)),
        };
        let mut steps = 0;
        while !remaining.is_empty() && !rows.is_empty() {
            // Cheapest variable first: fewest new rows.
            let (idx, &k) = remaining
                .iter()
                .enumerate()
                .min_by_key(|&(_, &k)| {
                    let p = rows.iter().filter(|r| r.a[k].is_positive()).count();
                    let n = rows.iter().filter(|r| r.a[k].is_negative()).count();
                    (p * n) as isize - (p + n) as isize
                })
                .expect("nonempty");
            remaining.remove(idx);
            steps += 1;
            stages.push(Stage {
                var: k,
                rows: rows.iter().filter(|r| !r.a[k].is_zero()).cloned().collect(),
            });
            rows = match eliminate(&rows, k, steps) {
                Reduced::Rows(r) => r,
                Reduced::Infeasible => return Ok(empty(pivots, stages)),
            };
        }
        let planar: Vec<Row> = rows
            .into_iter()
            .map(|r| Row::new(vec![r.a[d].clone(), r.a[d + 1].clone()], r.b))
            .collect();
        let polygon = polygon_from_halfplanes(planar)?;
        Ok(Self {
            polygon,
            dim: d,
            pivots,
            stages,
        })
    }

    /// A point of the full system whose image is `(x, y)`, or `None` when
    /// `(x, y)` is outside the projection.
    pub fn lift(&self, x: &Rational, y: &Rational) -> Option<Vec<Rational>> {
        if self.polygon.empty {
            return None;
        }
        let mut point: Vec<Rational> = vec![Rational::zero(); self.dim + 2];
        point[self.dim] = x.clone();
        point[self.dim + 1] = y.clone();
        for stage in self.stages.iter().rev() {
            let k = stage.var;
            let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
            for row in &stage.rows {
                let rest = row
                    .a
                    .iter()
                    .zip(&point)
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .fold(Rational::zero(), |acc, (_, (a, v))| acc + a * v);
                let limit = (&row.b - rest) / &row.a[k];
                if row.a[k].is_positive() {
                    hi = Some(match hi {
                        Some(h) if h < limit => h,
                        _ => limit,
                    });
                } else {
                    lo = Some(match lo {
                        Some(l) if l > limit => l,
                        _ => limit,
                    });
                }
            }
            point[k] = match (lo, hi) {
                (Some(l), Some(h)) if l > h => return None,
                (Some(l), Some(h)) => (l + h) * frac(1, 2),
                (Some(l), None) => l,
                (None, Some(h)) => h,
                (None, None) => Rational::zero(),
            };
        }
        for pivot in self.pivots.iter().rev() {
            let k = pivot.var;
            let rest = pivot
                .row
                .coefficients
                .iter()
                .zip(&point)
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(Rational::zero(), |acc, (_, (a, v))| acc + a * v);
            point[k] = (&pivot.row.bound - rest) / &pivot.row.coefficients[k];
        }
        point.truncate(self.dim);
        Some(point)
    }
}

/// Polygon cut out by planar halfplanes `a x + b y ≤ c`.
fn polygon_from_halfplanes(rows: Vec<Row>) -> Result<Polygon2D, PolytopeError> {
    let rows: Vec<Row> = {
        let fm: Vec<FmRow> = rows
            .into_iter()
            .map(|r| FmRow {
                a: r.coefficients,
                b: r.bound,
                history: vec![0],
            })
            .collect();
        match prune(fm) {
            Reduced::Rows(r) => r.into_iter().map(|r| Row::new(r.a, r.b)).collect(),
            Reduced::Infeasible => return Ok(Polygon2D::empty()),
        }
    };
    if !planar_feasible(&rows) {
        return Ok(Polygon2D::empty());
    }
    if rows.is_empty() {
        return Err(PolytopeError::Unbounded);
    }
    for r in &rows {
        let (a, b) = (&r.coefficients[0], &r.coefficients[1]);
        for dir in [[-b, a.clone()], [b.clone(), -a]] {
            if rows.iter().all(|h| !h.dot(&dir).is_positive()) {
                return Err(PolytopeError::Unbounded);
            }
        }
    }
    let mut points = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a1, b1, c1) = (&rows[i].coefficients[0], &rows[i].coefficients[1], &rows[i].bound);
            let (a2, b2, c2) = (&rows[j].coefficients[0], &rows[j].coefficients[1], &rows[j].bound);
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let p = [(c1 * b2 - c2 * b1) / &det, (a1 * c2 - a2 * c1) / &det];
            if rows.iter().all(|h| h.dot(&p) <= h.bound) {
                points.push(p);
            }
        }
    }
    let vertices = convex_hull(points);
    if vertices.is_empty() {
        // Bounded and feasible always has a vertex.
        return Ok(Polygon2D::empty());
    }
    let on = |h: &Row, p: &[Rational; 2]| h.dot(p) == h.bound;
    let halfplanes: Vec<Row> = if vertices.len() >= 3 {
        (0..vertices.len())
            .filter_map(|i| {
                let (p, q) = (&vertices[i], &vertices[(i + 1) % vertices.len()]);
                rows.iter().find(|h| on(h, p) && on(h, q)).cloned()
            })
            .collect()
    } else {
        rows.iter().filter(|h| vertices.iter().any(|p| on(h, p))).cloned().collect()
    };
    let degenerate = vertices.len() < 3;
    Ok(Polygon2D {
        vertices,
        halfplanes: if degenerate { rows } else { halfplanes },
        empty: false,
        degenerate,
    })
}

/// Fourier–Motzkin down to no variables.
fn planar_feasible(rows: &[Row]) -> bool {
    let fm: Vec<FmRow> = rows
        .iter()
        .map(|r| FmRow {
            a: r.coefficients.clone(),
            b: r.bound.clone(),
            history: vec![0],
        })
        .collect();
    let Reduced::Rows(step) = eliminate(&fm, 1, usize::MAX - 1) else {
        return false;
    };
    matches!(eliminate(&step, 0, usize::MAX - 1), Reduced::Rows(_))
}

/// Projects `sys` onto the plane of the functionals `x` and `y`.
pub fn project_2d(sys: &HalfspaceSystem, x: &[Rational], y: &[Rational]) -> Result<Polygon2D, PolytopeError> {
    Ok(Projection::compute(sys, x, y)?.polygon)
}

// ---------------------------------------------------------------------------
// d-shell instances

/// Three d electrons in the low-spin sector: occupations `l1..l5` and the
/// spin moment `mu`.
pub fn dshell_low_spin_system() -> HalfspaceSystem {
    let vars: Vec<String> = ["l1", "l2", "l3", "l4", "l5", "mu"].iter().map(|s| s.to_string()).collect();
    let row = |c: [Rational; 6], b: Rational| Row::new(c.to_vec(), b);
    let z = || int(0);
    let h = || frac(1, 2);
    let mut le = vec![
        // l1 + (l4 + l5)/2 ≤ 2
        row([int(1), z(), z(), h(), h(), z()], int(2)),
        // mu ≤ 3 - 2(l1 - l2)
        row([int(2), int(-2), z(), z(), z(), int(1)], int(3)),
        // mu ≤ 3 - 2(l2 - l3)
        row([z(), int(2), int(-2), z(), z(), int(1)], int(3)),
        // mu ≥ 2(l1 - l3) - 3
        row([int(2), z(), int(-2), z(), z(), int(-1)], int(3)),
        // mu ≥ 4 l1 - 2 l2 + 2 l4 - 7
        row([int(4), int(-2), z(), int(2), z(), int(-1)], int(7)),
    ];
    for i in 0..4 {
        let mut c: [Rational; 6] = std::array::from_fn(|_| z());
        c[i] = int(-1);
        c[i + 1] = int(1);
        le.push(row(c, z()));
    }
    le.push(row([z(), z(), z(), z(), int(-1), z()], z()));
    le.push(row([int(1), z(), z(), z(), z(), z()], int(2)));
    le.push(row([z(), z(), z(), z(), z(), int(-1)], z()));
    le.push(row([z(), z(), z(), z(), z(), int(1)], int(1)));
    let eq = vec![row([int(1), int(1), int(1), int(1), int(1), z()], int(3))];
    HalfspaceSystem::new(vars, eq, le).expect("well-formed")
}

/// `mu = slope · n_t + intercept`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLine {
    pub slope: Rational,
    pub intercept: Rational,
}

impl EdgeLine {
    pub fn at(&self, n_t: f64) -> f64 {
        rational::to_f64(&self.slope) * n_t + rational::to_f64(&self.intercept)
    }

    pub fn at_exact(&self, n_t: &Rational) -> Rational {
        &self.slope * n_t + &self.intercept
    }

    pub fn contains_exact(&self, p: &[Rational; 2]) -> bool {
        self.at_exact(&p[0]) == p[1]
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        (p[1] - self.at(p[0])).abs() / rational::to_f64(&self.slope).hypot(1.0)
    }
}

/// The two printed edges of the d⁷ `(n_t, μ)` region and the vertices `A`,
/// `B` on them.
#[derive(Clone, Debug, PartialEq)]
pub struct DShellEdges {
    /// `μ = 7 n_t - 8`, containing the segment `[A, B]`.
    pub ab: EdgeLine,
    /// `μ = 16 - 9 n_t`.
    pub second: EdgeLine,
    pub a: [Rational; 2],
    pub b: [Rational; 2],
}

fn pullback_point(p: &data::Pullback) -> [Rational; 2] {
    let w = spin::weights(&data::D7_MOMENT_WEIGHTS);
    let mu = spin::moment_exact(&p.spin, &w).expect("four spin entries");
    [p.orbital[0].clone(), mu]
}

pub fn dshell_d7_edges() -> DShellEdges {
    DShellEdges {
        ab: EdgeLine {
            slope: int(7),
            intercept: int(-8),
        },
        second: EdgeLine {
            slope: int(-9),
            intercept: int(16),
        },
        a: pullback_point(&data::pullback_a()),
        b: pullback_point(&data::pullback_b()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointClassification {
    pub point: [f64; 2],
    /// `μ - (7 n_t - 8)`.
    pub residual_ab: f64,
    /// `μ - (16 - 9 n_t)`.
    pub residual_second: f64,
    pub distance_ab: f64,
    pub distance_second: f64,
    /// `μ ≤ 7 n_t - 8 + tol`.
    pub below_ab: bool,
    /// `μ ≤ 16 - 9 n_t + tol`.
    pub below_second: bool,
    /// On the line through `A, B` within `tol`, with `n_t` in `[n_A, n_B]`.
    pub pinned_to_ab: bool,
}

pub fn classify_point(p: [f64; 2], edges: &DShellEdges, tol: f64) -> PointClassification {
    let residual_ab = p[1] - edges.ab.at(p[0]);
    let residual_second = p[1] - edges.second.at(p[0]);
    let (lo, hi) = (rational::to_f64(&edges.a[0]), rational::to_f64(&edges.b[0]));
    PointClassification {
        point: p,
        residual_ab,
        residual_second,
        distance_ab: edges.ab.distance(p),
        distance_second: edges.second.distance(p),
        below_ab: residual_ab <= tol,
        below_second: residual_second <= tol,
        pinned_to_ab: residual_ab.abs() <= tol && (lo..=hi).contains(&p[0]),
    }
}

// ---------------------------------------------------------------------------
// Emission

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygonFormat {
    Csv,
    Json,
}

/// `v` with `digits` significant digits, shortest form (like `%.12g`).
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV (`x,y` header, closed ring) or a JSON array of `[x, y]` pairs.
pub fn emit_polygon(poly: &Polygon2D, format: PolygonFormat) -> Result<String, PolytopeError> {
    if poly.empty || poly.vertices.is_empty() {
        return Err(PolytopeError::Empty);
    }
    let pts = poly.vertices_f64();
    Ok(match format {
        PolygonFormat::Csv => {
            let mut out = String::from("x,y\n");
            for p in pts.iter().chain(std::iter::once(&pts[0])) {
                out.push_str(&format!("{},{}\n", format_significant(p[0], 12), format_significant(p[1], 12)));
            }
            out
        }
        PolygonFormat::Json => {
            let parts: Vec<String> = pts
                .iter()
                .map(|p| format!("[{},{}]", format_significant(p[0], 12), format_significant(p[1], 12)))
                .collect();
            format!("[{}]\n", parts.join(","))
        }
    })
}
