use anyhow::Result;
use nrep_core::constraints::{catalog, ConstraintKind};
use nrep_core::data;
use nrep_core::pinning::{
    detect, filter_basis, reconstruct_structured, reduce_inactive, PinningReport, StructuredAmplitudes, REDUCTION_TOL,
};
use nrep_core::polytope::{
    classify_point, dshell_d7_edges, dshell_low_spin_system, format_significant, EdgeLine, PointClassification,
    Projection,
};
use nrep_core::rational::{self, Rational};
use nrep_core::rdm::Spectrum;
use nrep_core::spin::{self, CubicOccupations};
use serde::Serialize;

use crate::check::{derive_rules, render_pinning, rules_of, RuleEntry};
use crate::pin::render_reconstruction;
use crate::table::{self, num, sci};
use crate::{to_json, Outcome, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerylliumReport {
    pub occupations: Vec<f64>,
    pub reduction_tolerance: f64,
    pub filled: Vec<usize>,
    pub empty: Vec<usize>,
    pub n: usize,
    pub r: usize,
    pub lambda: Vec<f64>,
    pub pinning: PinningReport,
    /// `λ1 + λ2 + λ4 + λ7 - 2`.
    pub main_residual: f64,
    pub rules: Vec<RuleEntry>,
    pub admitted: Vec<Vec<usize>>,
    pub reconstruction: StructuredAmplitudes,
}

pub fn beryllium(tol_pin: f64) -> Result<BerylliumReport> {
    let full = Spectrum::new(
        data::BERYLLIUM_ELECTRONS,
        data::BERYLLIUM_OCCUPATIONS.len(),
        data::BERYLLIUM_OCCUPATIONS.to_vec(),
    )?;
    let reduced = reduce_inactive(&full, REDUCTION_TOL)?;
    let spec = &reduced.spectrum;
    let set = catalog(spec.n_particles(), spec.rank())?;
    let pinning = detect(spec, &set, tol_pin)?;
    let rules = derive_rules(&pinning, &set);
    // Pauli-type rules only remove the nearly empty or filled orbitals; the
    // expansion is bounded by the generalized ones.
    let generalized: Vec<_> = rules
        .iter()
        .filter(|e| set.get(&e.label).is_some_and(|c| c.kind() == ConstraintKind::Generalized))
        .cloned()
        .collect();
    let admitted = filter_basis(spec.n_particles(), spec.rank(), &rules_of(&generalized))?;
    let main_residual = [1, 2, 4, 7].iter().map(|&i| spec.get(i)).sum::<f64>() - 2.0;
    Ok(BerylliumReport {
        occupations: data::BERYLLIUM_OCCUPATIONS.to_vec(),
        reduction_tolerance: REDUCTION_TOL,
        filled: reduced.filled.clone(),
        empty: reduced.empty.clone(),
        n: spec.n_particles(),
        r: spec.rank(),
        lambda: spec.values().to_vec(),
        pinning,
        main_residual,
        rules,
        admitted: admitted.iter().map(|d| d.orbitals()).collect(),
        reconstruction: reconstruct_structured(spec, tol_pin)?,
    })
}

pub fn render_beryllium(rep: &BerylliumReport) -> String {
    let mut out = String::from("beryllium, ten spin-orbitals\n");
    out.push_str(&format!("occupations = ({})\n", table::list(&rep.occupations)));
    out.push_str(&format!(
        "removed at tol {}: filled {:?}, empty {:?}\n",
        sci(rep.reduction_tolerance),
        rep.filled,
        rep.empty
    ));
    out.push_str(&format!(
        "active system: n = {}, r = {}, lambda = ({})\n\n",
        rep.n,
        rep.r,
        table::list(&rep.lambda)
    ));
    out.push_str(&render_pinning(&rep.pinning, &rep.rules));
    out.push_str(&format!("\nl1 + l2 + l4 + l7 - 2 = {}\n", sci(rep.main_residual)));
    let dets: Vec<String> = rep
        .admitted
        .iter()
        .map(|d| format!("[{}]", d.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    out.push_str(&format!(
        "determinants admitted by the generalized rules ({}): {}\n\n",
        dets.len(),
        dets.join(" ")
    ));
    out.push_str(&render_reconstruction(&rep.reconstruction));
    out
}

pub fn cmd_demo_be(cfg: &RunConfig) -> Result<Outcome> {
    let rep = beryllium(cfg.tol_pin)?;
    let text = if cfg.json { to_json(&rep) } else { render_beryllium(&rep) };
    Ok(Outcome::ok(text).routed(&cfg.out))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactPoint {
    pub exact: [String; 2],
    pub value: [f64; 2],
}

impl ExactPoint {
    fn new(p: &[Rational; 2]) -> Self {
        Self {
            exact: [rational::format(&p[0]), rational::format(&p[1])],
            value: [rational::to_f64(&p[0]), rational::to_f64(&p[1])],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IronReport {
    pub edge_ab: String,
    pub edge_second: String,
    pub a: ExactPoint,
    pub b: ExactPoint,
    pub iron: PointClassification,
    pub pin_tolerance: f64,
    pub spin_occupations: Vec<f64>,
    pub moment: f64,
    pub cubic: CubicOccupations,
    /// The d3 low-spin region projected to `(l1, mu)`.
    pub d3_polygon: Vec<ExactPoint>,
    pub plot_csv: String,
}

fn line_name(e: &EdgeLine) -> String {
    let slope = rational::format(&e.slope);
    let c = &e.intercept;
    if c.is_integer() && *c < Rational::from_integer(0.into()) {
        format!("mu = {slope} n_t - {}", rational::format(&-c))
    } else {
        format!("mu = {} + {slope} n_t", rational::format(c)).replace("+ -", "- ")
    }
}

fn plot_csv(edges: &nrep_core::polytope::DShellEdges, iron: [f64; 2], polygon: &[[f64; 2]]) -> String {
    let f = |v: f64| format_significant(v, 12);
    let mut out = String::from("series,x,y\n");
    for (name, line) in [("edge_ab", &edges.ab), ("edge_second", &edges.second)] {
        for n_t in [1.0, 2.0] {
            out.push_str(&format!("{name},{},{}\n", f(n_t), f(line.at(n_t))));
        }
    }
    for (name, p) in [("vertex_A", &edges.a), ("vertex_B", &edges.b)] {
        out.push_str(&format!("{name},{},{}\n", f(rational::to_f64(&p[0])), f(rational::to_f64(&p[1]))));
    }
    out.push_str(&format!("iron,{},{}\n", f(iron[0]), f(iron[1])));
    for p in polygon.iter().chain(polygon.first()) {
        out.push_str(&format!("d3_low_spin,{},{}\n", f(p[0]), f(p[1])));
    }
    out
}

pub fn iron(tol_pin: f64) -> Result<IronReport> {
    let edges = dshell_d7_edges();
    let point = [data::IRON_N_T, data::IRON_MOMENT];
    let classification = classify_point(point, &edges, tol_pin);
    let spin_occ = spin::iron_spin_occupations();
    let moment = spin::moment(&spin_occ, &spin::weights(&data::D7_MOMENT_WEIGHTS))?;
    let cubic = spin::cubic_occupations(data::IRON_N_T)?;
    let sys = dshell_low_spin_system();
    let proj = Projection::compute(&sys, &sys.axis("l1")?, &sys.axis("mu")?)?;
    let polygon = proj.polygon.vertices_f64();
    Ok(IronReport {
        edge_ab: line_name(&edges.ab),
        edge_second: line_name(&edges.second),
        a: ExactPoint::new(&edges.a),
        b: ExactPoint::new(&edges.b),
        iron: classification,
        pin_tolerance: tol_pin,
        spin_occupations: spin_occ.values().to_vec(),
        moment,
        cubic,
        d3_polygon: proj.polygon.vertices.iter().map(ExactPoint::new).collect(),
        plot_csv: plot_csv(&edges, point, &polygon),
    })
}

pub fn render_iron(rep: &IronReport) -> String {
    let mut out = String::from("iron d-shell (d7, S = 3/2), coordinates (n_t, mu)\n");
    out.push_str(&format!("edge AB: {}\n", rep.edge_ab));
    out.push_str(&format!("second edge: {}\n", rep.edge_second));
    out.push_str(&format!("A = ({}, {})\n", rep.a.exact[0], rep.a.exact[1]));
    out.push_str(&format!("B = ({}, {})\n\n", rep.b.exact[0], rep.b.exact[1]));
    let c = &rep.iron;
    out.push_str(&format!("data point: n_t = {}, mu = {}\n", num(c.point[0]), num(c.point[1])));
    out.push_str(&format!(
        "  |mu - (7 n_t - 8)| = {} (tol {})\n",
        format_significant(c.residual_ab.abs(), 6),
        num(rep.pin_tolerance)
    ));
    out.push_str(&format!("  mu - (16 - 9 n_t) = {}\n", num(c.residual_second)));
    out.push_str(&format!("  distance to AB line = {}\n", num(c.distance_ab)));
    out.push_str(&format!(
        "  classification: {}\n\n",
        if c.pinned_to_ab {
            "pinned-to-AB"
        } else if !c.below_ab || !c.below_second {
            "violates an edge"
        } else {
            "interior"
        }
    ));
    out.push_str(&format!(
        "spin occupations = ({}), sum = {}\n",
        table::list(&rep.spin_occupations),
        num(rep.spin_occupations.iter().sum())
    ));
    out.push_str(&format!("moment 3mu1 + mu2 - mu3 - 3mu4 = {}\n", num(rep.moment)));
    out.push_str(&format!(
        "cubic occupations at n_t = {}: n_e = {}, lambda = ({})\n\n",
        num(rep.cubic.splitting.n_t),
        num(rep.cubic.splitting.n_e),
        table::list(&rep.cubic.occupations)
    ));
    let verts: Vec<String> = rep
        .d3_polygon
        .iter()
        .map(|p| format!("({}, {})", p.exact[0], p.exact[1]))
        .collect();
    out.push_str(&format!("d3 low-spin projection to (l1, mu): {}\n\n", verts.join(" ")));
    out.push_str("plot data (csv):\n");
    out.push_str(&rep.plot_csv);
    out
}

pub fn cmd_demo_iron(cfg: &RunConfig) -> Result<Outcome> {
    let rep = iron(cfg.tol_pin)?;
    let text = if cfg.json { to_json(&rep) } else { render_iron(&rep) };
    let mut outcome = Outcome::ok(text);
    if let Some(path) = &cfg.out {
        outcome.files.push((path.clone(), rep.plot_csv.clone()));
    }
    Ok(outcome)
}
