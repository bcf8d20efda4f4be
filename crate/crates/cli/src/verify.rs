//! Verification suites. Every suite is deterministic: random samples come
//! from fixed ChaCha seeds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use vbquant_core::conventions::{DIRAC_SIGN, POISSON_SIGN};
use vbquant_core::gauge::{
    connection_quadrature, gauge_residual, lift_orthogonality_residual, BasePoint, BaseSpace, BaseTangent, ConnectionField,
    LieAlgebraRep, RepConnection,
};
use vbquant_core::numerics::{hermitian_eigenvalues, sphere_rule, ComplexMatrix};
use vbquant_core::orbit::{
    chart_transition, embed_point, moment_hamiltonian, Chart, ChartPoint, FiberHamiltonian, ProductHamiltonian,
};
use vbquant_core::su2::Su2;
use vbquant_core::transport::{
    covariant_residual_total_space, covariant_section_solve, default_fiber_samples, transport, wilson_loop, BasePath,
};
use vbquant_core::Complex64;

use crate::commands::{latitude_of, monopole_law, section_rows, CliError, Suite};
use crate::document::{num, Check, ResultDocument};
use crate::scenario::Scenario;

const SAMPLES: usize = 40;

/// Smallest separation demanded of the quadratic counterexample over the
/// moment-map residual floor.
const QUADRATIC_RATIO: f64 = 1e3;

struct Report {
    checks: Vec<Check>,
    info: serde_json::Map<String, Value>,
}

impl Report {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            info: serde_json::Map::new(),
        }
    }

    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check::at_most(name, value, tol));
    }

    fn info(&mut self, key: &str, v: Value) {
        self.info.insert(key.to_string(), v);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand3(r: &mut ChaCha8Rng) -> [f64; 3] {
    std::array::from_fn(|_| r.gen_range(-1.0..1.0))
}

fn rand2(r: &mut ChaCha8Rng, scale: f64) -> [f64; 2] {
    std::array::from_fn(|_| r.gen_range(-scale..scale))
}

fn rand_chart_point(r: &mut ChaCha8Rng) -> ChartPoint {
    let chart = if r.gen_bool(0.5) { Chart::North } else { Chart::South };
    ChartPoint {
        chart,
        z: Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)),
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

pub fn run_suite(suite: Suite, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Orbit, Suite::Fiber, Suite::Gauge, Suite::Transport],
        one => std::slice::from_ref(match one {
            Suite::Orbit => &Suite::Orbit,
            Suite::Fiber => &Suite::Fiber,
            Suite::Gauge => &Suite::Gauge,
            _ => &Suite::Transport,
        }),
    };
    for &one in suites {
        let report = match one {
            Suite::Orbit => orbit(s),
            Suite::Fiber => fiber(s)?,
            Suite::Gauge => gauge(s)?,
            _ => transport_suite(s)?,
        };
        for mut c in report.checks {
            c.name = format!("{}.{}", one.name(), c.name);
            doc.check(c);
        }
        doc.set(one.name(), Value::Object(report.info));
    }
    Ok(())
}

fn orbit(s: &Scenario) -> Report {
    let mut rep = Report::new();
    let spec = s.spec;
    let geom = &s.fiber.geom;
    let t = &s.tolerances;
    let j = spec.j();
    let mut r = rng(101);
    let (mut radius, mut relation, mut poisson, mut chart) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..SAMPLES {
        let p = rand_chart_point(&mut r);
        let x = embed_point(&spec, &p);
        radius = radius.max(((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - j).abs());

        // Omega(X_w, xi) = -dw(xi)
        let (a, b) = (rand3(&mut r), rand3(&mut r));
        let w = moment_hamiltonian(&spec, a);
        let xi = rand2(&mut r, 1.0);
        let grad = w.chart_gradient(&p);
        relation = relation.max((geom.symplectic_form_at(&p, geom.hamiltonian_field(&w, &p), xi) + grad[0] * xi[0] + grad[1] * xi[1]).abs());

        let lhs = geom.poisson_bracket(&w, &moment_hamiltonian(&spec, b), &p);
        let rhs = POISSON_SIGN * moment_hamiltonian(&spec, cross(a, b)).value(&p);
        poisson = poisson.max((lhs - rhs).abs());

        if let Ok(q) = chart_transition(&p) {
            let y = embed_point(&spec, &q);
            chart = chart.max((0..3).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max));
            chart = chart.max((geom.poisson_bracket(&w, &moment_hamiltonian(&spec, b), &q) - lhs).abs());
        }
    }
    // dx dy / (1 + r^2)^2 = dt dphi / 4
    let rule = sphere_rule(12, 4).expect("fixed rule");
    let area = rule.integrate(|tt, phi| {
        let p = ChartPoint::from_sphere_coords(tt, phi);
        let d = 1.0 + p.z.norm_sqr();
        geom.symplectic_density(&p) * d * d / 4.0
    });
    rep.at_most("radius", radius, t.orbit);
    rep.at_most("hamiltonian_relation", relation, t.orbit * (1.0 + j));
    rep.at_most("poisson_sign", poisson, t.poisson * (1.0 + j));
    rep.at_most("chart_covariance", chart, t.chart * (1.0 + j));
    rep.at_most("area", (area - 4.0 * PI * j).abs(), t.orbit * (1.0 + 4.0 * PI * j));
    rep.info("two_j", json!(spec.two_j));
    rep.info("area", num(area));
    rep.info("samples", json!(SAMPLES));
    rep
}

fn fiber(s: &Scenario) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let f = &s.fiber;
    let spec = s.spec;
    let t = &s.tolerances;
    let j = spec.j();
    let mut r = rng(202);
    let (mut herm, mut spectrum, mut dirac, mut pol) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut homo, mut unit_dev) = (0.0f64, 0.0f64);
    for _ in 0..SAMPLES / 4 {
        let (a, b) = (rand3(&mut r), rand3(&mut r));
        let oa = f.prequant(&moment_hamiltonian(&spec, a))?.matrix;
        let ob = f.prequant(&moment_hamiltonian(&spec, b))?.matrix;
        let oc = f.prequant(&moment_hamiltonian(&spec, cross(a, b)))?.matrix;
        herm = herm.max(oa.hermiticity_deviation());
        dirac = dirac.max((&oa.commutator(&ob) - &oc.scale(Complex64::new(0.0, DIRAC_SIGN))).max_abs());
        pol = pol.max(f.polarization_residual(&moment_hamiltonian(&spec, a)));

        let u = unit(a);
        let eig = hermitian_eigenvalues(&f.prequant(&moment_hamiltonian(&spec, u))?.matrix)?;
        for (k, e) in eig.iter().enumerate() {
            spectrum = spectrum.max((e - (k as f64 - j)).abs());
        }

        let (g1, g2) = (Su2(rand3(&mut r)).exp(), Su2(rand3(&mut r)).exp());
        let x1 = f.transition(&g1);
        let lhs = f.transition(&(g1 * g2));
        homo = homo.max((&lhs - &(&x1 * &f.transition(&g2))).max_abs());
        unit_dev = unit_dev.max(x1.unitarity_deviation());
    }
    let brackets = LieAlgebraRep::from_transitions(&f.basis).bracket_deviation();
    rep.at_most("gram", f.basis.gram_relative_error(), t.gram);
    rep.at_most("hermiticity", herm, t.hermiticity);
    rep.at_most("spectrum", spectrum, t.spectrum);
    rep.at_most("dirac", dirac, t.dirac);
    rep.at_most("representation", homo, t.representation);
    rep.at_most("unitarity", unit_dev, t.unitarity);
    rep.at_most("rep_brackets", brackets, t.representation);
    rep.at_most("polarization", pol, t.polarization);
    if spec.two_j >= 1 {
        // a quadratic function of the orbit point must leave the polarization
        let h3 = moment_hamiltonian(&spec, [0.0, 0.0, 1.0]);
        let quad = f.polarization_residual(&ProductHamiltonian(h3, h3));
        let ratio = quad / pol.max(f64::EPSILON);
        rep.checks.push(Check::at_least("quadratic_separation", ratio, QUADRATIC_RATIO));
        rep.info("quadratic_residual", num(quad));
    }
    rep.info("dirac_sign", num(DIRAC_SIGN));
    rep.info("dim", json!(spec.dim()));
    Ok(rep)
}

/// Base points of the model in every chart that contains them.
fn chart_samples(s: &Scenario) -> Vec<BasePoint> {
    let m = &s.model;
    let mut out = Vec::new();
    for q in m.sample_points() {
        for &c in m.charts() {
            if m.chart_contains(c, q) {
                out.push(BasePoint::new(c, q, [0.3, -0.2]));
            }
        }
    }
    out
}

fn gauge(s: &Scenario) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let m = &s.model;
    let f = &s.fiber;
    let t = &s.tolerances;
    let conn = RepConnection::new(m, f);
    let mut r = rng(303);
    let (mut equiv, mut anti, mut lin, mut mom, mut lift, mut law) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut overlaps = 0usize;
    let points = chart_samples(s);
    for b in &points {
        let v1 = BaseTangent::new(rand2(&mut r, 1.0), rand2(&mut r, 1.0));
        let v2 = BaseTangent::new(rand2(&mut r, 1.0), rand2(&mut r, 1.0));
        let aq = connection_quadrature(m, f, b, &v1)?.matrix;
        let ar = conn.connection(b, &v1)?;
        equiv = equiv.max((&aq - &ar).norm_op());
        anti = anti.max(aq.anti_hermiticity_deviation());

        let a2 = conn.connection(b, &v2)?;
        let sum = conn.connection(b, &v1.combine(1.0, &v2, 2.0))?;
        lin = lin.max((&sum - &(&ar + &a2.scale_real(2.0))).max_abs());

        // only the position part of a tangent enters
        let proj = conn.connection(b, &BaseTangent::position(v1.dq))?;
        let proj_q = connection_quadrature(m, f, b, &BaseTangent::position(v1.dq))?.matrix;
        mom = mom.max((&proj - &ar).max_abs()).max((&proj_q - &aq).max_abs());

        let z = ChartPoint::north(Complex64::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5)));
        lift = lift.max(lift_orthogonality_residual(m, &f.geom, b, &v1, &z, rand2(&mut r, 1.0))?);

        for &other in m.charts() {
            if other != b.chart && m.chart_contains(other, b.q) {
                let v = BaseTangent::position(rand2(&mut r, 1.0));
                law = law.max(gauge_residual(m, f, b.chart, other, b, &v)?);
                overlaps += 1;
            }
        }
    }
    rep.at_most("rep_brackets", conn.rep.bracket_deviation(), t.representation);
    rep.at_most("equivalence", equiv, t.equivalence);
    rep.at_most("anti_hermiticity", anti, t.anti_hermiticity);
    rep.at_most("linearity", lin, t.linearity);
    rep.at_most("momentum_independence", mom, t.linearity);
    rep.at_most("lift_orthogonality", lift, t.lift);
    rep.at_most("assume", m.assume_residual, t.polarization);
    if overlaps > 0 {
        rep.at_most("gauge_law", law, t.gauge);
    }
    let charts: Vec<Value> = m.charts().iter().map(|c| Value::String(c.name().into())).collect();
    rep.info("charts", Value::Array(charts));
    rep.info("points", json!(points.len()));
    rep.info("overlap_samples", json!(overlaps));
    Ok(rep)
}

/// Path used when the scenario names none of its own.
fn default_path(s: &Scenario) -> BasePath {
    match s.model.base {
        BaseSpace::Sphere => BasePath::latitude(PI / 3.0, 1000),
        BaseSpace::Plane => BasePath::segment([0.0, 0.0], [1.0, -0.6], [0.3, 0.2], [-0.5, 1.0], 1000),
    }
    .expect("fixed path")
}

fn transport_suite(s: &Scenario) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let t = &s.tolerances;
    let rep_conn = RepConnection::new(&s.model, &s.fiber);
    let quad_conn = vbquant_core::gauge::QuadratureConnection {
        model: &s.model,
        fiber: &s.fiber,
    };
    let mut paths: Vec<(String, BasePath)> = s.paths.iter().map(|(k, p)| (k.clone(), p.clone())).collect();
    if paths.is_empty() {
        paths.push(("default".into(), default_path(s)));
    }
    let id = ComplexMatrix::identity(s.spec.dim());
    let samples = default_fiber_samples();
    let (mut unit_dev, mut reversal, mut source, mut total, mut law) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut law_paths = 0usize;
    for (_, path) in &paths {
        let fwd = transport(&rep_conn, path)?;
        let back = transport(&rep_conn, &path.reversed())?;
        unit_dev = unit_dev.max(fwd.max_unitarity_deviation);
        reversal = reversal
            .max((&(&fwd.unitary * &back.unitary) - &id).max_abs())
            .max((fwd.alpha_phase + back.alpha_phase).abs());
        total = total.max(covariant_residual_total_space(&rep_conn, &s.fiber, path, &fwd, &samples)?);

        // quadrature transport is costlier; compare on a coarse copy
        let coarse = BasePath {
            pieces: path.pieces.iter().map(|(p, n)| (*p, (*n).clamp(1, 100))).collect(),
            charts: path.charts,
        };
        let ur = transport(&rep_conn, &coarse)?.unitary;
        let uq = transport(&quad_conn, &coarse)?.unitary;
        source = source.max((&ur - &uq).max_abs());

        if let Some(want) = latitude_of(path).and_then(|theta| monopole_law(s, theta)) {
            let w = wilson_loop(&rep_conn, path)?;
            law = law.max((&w.unitary - &ComplexMatrix::from_diag(&want)).max_abs());
            law_paths += 1;
        }
    }
    rep.at_most("unitarity", unit_dev, t.transport_unitarity);
    rep.at_most("reversal", reversal, t.reversal);
    rep.at_most("source_independence", source, t.source);
    rep.at_most("total_space_residual", total, t.total_space);
    if law_paths > 0 {
        rep.at_most("holonomy_law", law, t.holonomy);
    }

    let (q_points, p_points, psi0) = match &s.file.section {
        Some(sec) => (sec.q_points.clone(), sec.p_points.clone(), sec.psi0.clone()),
        None => {
            let q = match s.model.base {
                BaseSpace::Sphere => vec![[0.6, 0.3], [1.0, 1.2]],
                BaseSpace::Plane => vec![[0.2, 0.1], [0.5, -0.3]],
            };
            (q, vec![[0.0, 0.0], [0.5, 0.2], [1.0, 1.0]], None)
        }
    };
    let rows = section_rows(s, q_points.len(), psi0.as_ref());
    let sec = covariant_section_solve(&rep_conn, &q_points, &rows, &p_points)?;
    rep.at_most("section_residual", sec.residual, t.section);

    let names: Vec<Value> = paths.iter().map(|(n, _)| Value::String(n.clone())).collect();
    rep.info("paths", Value::Array(names));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn scenario(text: &str) -> Scenario {
        Scenario::validate(parse_scenario(text).unwrap()).unwrap()
    }

    #[test]
    fn every_suite_passes_on_a_constant_model() {
        let s = scenario(r#"{"orbit": {"two_j": 2}, "model": {"kind": "constant", "a1": [0.5, 0, 0.2], "a2": [0, -0.4, 0.1]}}"#);
        let mut doc = ResultDocument::new("verify all", Value::Null);
        run_suite(Suite::All, &s, &mut doc).unwrap();
        for c in &doc.checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(doc.checks.iter().any(|c| c.name == "fiber.quadratic_separation"));
    }

    #[test]
    fn gauge_law_is_checked_on_monopole_overlaps() {
        let s = scenario(r#"{"orbit": {"two_j": 1}, "model": {"kind": "monopole"}}"#);
        let mut doc = ResultDocument::new("verify gauge", Value::Null);
        run_suite(Suite::Gauge, &s, &mut doc).unwrap();
        let law = doc.checks.iter().find(|c| c.name == "gauge.gauge_law").expect("overlap check");
        assert!(law.pass, "{law:?}");
    }

    #[test]
    fn a_wrong_tolerance_is_reported() {
        let mut s = scenario(r#"{"orbit": {"two_j": 3}}"#);
        s.tolerances.gram = 1e-300;
        let mut doc = ResultDocument::new("verify fiber", Value::Null);
        run_suite(Suite::Fiber, &s, &mut doc).unwrap();
        assert!(!doc.passed());
    }
}
