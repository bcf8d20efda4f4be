//! The bundle layer: base charts, Yang–Mills potentials and transitions, the
//! orbit function of a base tangent, horizontal lifts, and the connection on
//! the quantum bundle computed two ways.
//!
//! The base is `B = T*Q` with `Q` two-dimensional. A potential is a pair of
//! su(2) elements `(a_1, a_2)`, the coefficients of `a_k dq_k`. Sections are
//! row vectors and the connection acts on the right, so for a transition
//! `g = g_ij` from chart `i` to chart `j`
//!
//! ```text
//! a^j = Ad_g a^i - dg g^-1,        A^j = X A^i X^-1 - dX X^-1,   X = X(g).
//! ```

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::conventions::{ASSUME_TOL, GAUGE_FD_STEP, REP_FD_STEP};
use crate::error::{Error, Result};
use crate::fiberq::{quantize_group, FiberBasis, QuantumFiber};
use crate::numerics::ComplexMatrix;
use crate::orbit::{pairing_hamiltonian, ChartPoint, FiberHamiltonian, MomentHamiltonian, OrbitGeometry, OrbitSpec};
use crate::su2::{Su2, Su2Group};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Anti-Hermiticity tolerance on assembled connection matrices.
pub const CONNECTION_TOL: f64 = 1e-8;

/// Largest mismatch allowed in the gauge relation between registered chart
/// potentials.
pub const MODEL_CONSISTENCY_TOL: f64 = 1e-8;

/// Configuration space of the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseSpace {
    /// `R^2` with global coordinates `q = (q1, q2)`.
    Plane,
    /// The two-sphere in colatitude and azimuth, `q = (theta, phi)`.
    Sphere,
}

/// Chart labels on `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseChart {
    /// The single chart of a plane model.
    Global,
    /// Second plane chart of a regauged model, related to `Global` by `g(q)`.
    Regauged,
    /// Sphere minus the South pole.
    North,
    /// Sphere minus the North pole.
    South,
}

impl BaseChart {
    pub fn name(self) -> &'static str {
        match self {
            BaseChart::Global => "global",
            BaseChart::Regauged => "regauged",
            BaseChart::North => "north",
            BaseChart::South => "south",
        }
    }
}

/// A point `(q, p)` of `T*Q` in a declared chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint {
    pub chart: BaseChart,
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl BasePoint {
    pub fn new(chart: BaseChart, q: [f64; 2], p: [f64; 2]) -> Self {
        Self { chart, q, p }
    }

    pub fn in_chart(&self, chart: BaseChart) -> Self {
        Self { chart, ..*self }
    }

    pub fn shifted(&self, v: &BaseTangent, s: f64) -> Self {
        Self {
            chart: self.chart,
            q: [self.q[0] + s * v.dq[0], self.q[1] + s * v.dq[1]],
            p: [self.p[0] + s * v.dp[0], self.p[1] + s * v.dp[1]],
        }
    }
}

/// Tangent `(dq, dp)` to `T*Q`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaseTangent {
    pub dq: [f64; 2],
    pub dp: [f64; 2],
}

impl BaseTangent {
    pub fn new(dq: [f64; 2], dp: [f64; 2]) -> Self {
        Self { dq, dp }
    }

    pub fn position(dq: [f64; 2]) -> Self {
        Self { dq, dp: [0.0; 2] }
    }

    pub fn momentum(dp: [f64; 2]) -> Self {
        Self { dq: [0.0; 2], dp }
    }

    /// The projection to `T_q Q`.
    pub fn project(&self) -> [f64; 2] {
        self.dq
    }

    pub fn combine(&self, c1: f64, other: &BaseTangent, c2: f64) -> BaseTangent {
        BaseTangent {
            dq: [c1 * self.dq[0] + c2 * other.dq[0], c1 * self.dq[1] + c2 * other.dq[1]],
            dp: [c1 * self.dp[0] + c2 * other.dp[0], c1 * self.dp[1] + c2 * other.dp[1]],
        }
    }
}

/// Canonical one-form `p . dq` on a tangent.
pub fn canonical_one_form(b: &BasePoint, v: &BaseTangent) -> f64 {
    b.p[0] * v.dq[0] + b.p[1] * v.dq[1]
}

/// Yang–Mills data of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// Zero potential over the plane.
    Trivial,
    /// Constant `a_1 dq1 + a_2 dq2` over the plane.
    Constant { a: [Su2; 2] },
    /// Monopole of integer charge `k` over the sphere: North potential
    /// `k (1 - cos theta) tau_3 dphi`, South `k (-1 - cos theta) tau_3 dphi`,
    /// transition `g_NS = exp(2 k phi tau_3)`.
    Monopole { charge: i32 },
    /// Constant `a` on the global chart, re-expressed on a second chart by
    /// `g(q) = exp(q1 xi_1) exp(q2 xi_2)`. With `a = 0` this is pure gauge.
    Regauged { a: [Su2; 2], xi: [Su2; 2] },
}

/// A Yang–Mills-equipped base with its fiber.
///
/// Construction checks the model data: the chart potentials must satisfy the
/// gauge relation on overlaps, and every orbit function the model produces
/// must preserve the polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeModel {
    pub orbit: OrbitSpec,
    pub base: BaseSpace,
    pub potential: Potential,
    /// Largest polarization residual found while validating.
    pub assume_residual: f64,
}

impl GaugeModel {
    pub fn new(orbit: OrbitSpec, potential: Potential) -> Result<Self> {
        let base = match potential {
            Potential::Monopole { .. } => BaseSpace::Sphere,
            _ => BaseSpace::Plane,
        };
        let mut model = Self {
            orbit,
            base,
            potential,
            assume_residual: 0.0,
        };
        model.check_potential_finite()?;
        model.check_consistency()?;
        model.assume_residual = model.check_polarization()?;
        Ok(model)
    }

    pub fn trivial(orbit: OrbitSpec) -> Result<Self> {
        Self::new(orbit, Potential::Trivial)
    }

    pub fn constant(orbit: OrbitSpec, a1: Su2, a2: Su2) -> Result<Self> {
        Self::new(orbit, Potential::Constant { a: [a1, a2] })
    }

    pub fn monopole(orbit: OrbitSpec, charge: i32) -> Result<Self> {
        Self::new(orbit, Potential::Monopole { charge })
    }

    pub fn pure_gauge(orbit: OrbitSpec, xi1: Su2, xi2: Su2) -> Result<Self> {
        Self::regauged(orbit, Su2::ZERO, Su2::ZERO, xi1, xi2)
    }

    pub fn regauged(orbit: OrbitSpec, a1: Su2, a2: Su2, xi1: Su2, xi2: Su2) -> Result<Self> {
        Self::new(orbit, Potential::Regauged { a: [a1, a2], xi: [xi1, xi2] })
    }

    /// Charts of the atlas; the first is the default.
    pub fn charts(&self) -> &'static [BaseChart] {
        match self.potential {
            Potential::Trivial | Potential::Constant { .. } => &[BaseChart::Global],
            Potential::Monopole { .. } => &[BaseChart::North, BaseChart::South],
            Potential::Regauged { .. } => &[BaseChart::Global, BaseChart::Regauged],
        }
    }

    /// Whether `q` lies in the domain of `chart`.
    pub fn chart_contains(&self, chart: BaseChart, q: [f64; 2]) -> bool {
        if !self.charts().contains(&chart) || !(q[0].is_finite() && q[1].is_finite()) {
            return false;
        }
        match chart {
            BaseChart::Global | BaseChart::Regauged => true,
            BaseChart::North => (0.0..PI).contains(&q[0]),
            BaseChart::South => q[0] > 0.0 && q[0] <= PI,
        }
    }

    pub fn check_point(&self, b: &BasePoint) -> Result<()> {
        if self.chart_contains(b.chart, b.q) {
            Ok(())
        } else {
            Err(Error::chart(format!(
                "q = ({}, {}) is outside the {} chart",
                b.q[0],
                b.q[1],
                b.chart.name()
            )))
        }
    }

    /// Potential coefficients `(a_1, a_2)` on `chart` at `q`.
    pub fn potential_at(&self, chart: BaseChart, q: [f64; 2]) -> Result<[Su2; 2]> {
        self.check_point(&BasePoint::new(chart, q, [0.0; 2]))?;
        Ok(match (self.potential, chart) {
            (Potential::Trivial, _) => [Su2::ZERO; 2],
            (Potential::Constant { a }, _) => a,
            (Potential::Monopole { charge }, c) => {
                let k = charge as f64;
                let pole = if c == BaseChart::North { 1.0 } else { -1.0 };
                [Su2::ZERO, Su2([0.0, 0.0, k * (pole - libm::cos(q[0]))])]
            }
            (Potential::Regauged { a, .. }, BaseChart::Global) => a,
            (Potential::Regauged { a, xi }, _) => {
                let g = regauge_element(xi, q);
                let dg = regauge_log_derivative(xi, q);
                [g.adjoint(&a[0]) - dg[0], g.adjoint(&a[1]) - dg[1]]
            }
        })
    }

    /// `<a(q), Pi(v)>` in su(2).
    pub fn potential_on(&self, b: &BasePoint, v: &BaseTangent) -> Result<Su2> {
        let [a1, a2] = self.potential_at(b.chart, b.q)?;
        let dq = v.project();
        Ok(a1 * dq[0] + a2 * dq[1])
    }

    /// Transition `g_ij(q)` from chart `from` to chart `to`.
    pub fn transition(&self, from: BaseChart, to: BaseChart, q: [f64; 2]) -> Result<Su2Group> {
        for c in [from, to] {
            self.check_point(&BasePoint::new(c, q, [0.0; 2]))?;
        }
        if from == to {
            return Ok(Su2Group::IDENTITY);
        }
        let g = match self.potential {
            Potential::Monopole { charge } => Su2([0.0, 0.0, 2.0 * charge as f64 * q[1]]).exp(),
            Potential::Regauged { xi, .. } => regauge_element(xi, q),
            _ => return Err(Error::chart("model has a single chart")),
        };
        Ok(match from {
            BaseChart::North | BaseChart::Global => g,
            _ => g.inverse(),
        })
    }

    /// `(dg/dq_k) g^-1` for the transition, k = 1, 2.
    pub fn transition_log_derivative(&self, from: BaseChart, to: BaseChart, q: [f64; 2]) -> Result<[Su2; 2]> {
        let g = self.transition(from, to, q)?;
        if from == to {
            return Ok([Su2::ZERO; 2]);
        }
        let forward = match self.potential {
            Potential::Monopole { charge } => [Su2::ZERO, Su2([0.0, 0.0, 2.0 * charge as f64])],
            Potential::Regauged { xi, .. } => regauge_log_derivative(xi, q),
            _ => unreachable!("single-chart models return early"),
        };
        Ok(match from {
            BaseChart::North | BaseChart::Global => forward,
            // d(g^-1) g = -g^-1 dg = -Ad_{g^-1}(dg g^-1), with g^-1 the
            // reverse transition
            _ => [-g.adjoint(&forward[0]), -g.adjoint(&forward[1])],
        })
    }

    /// The chart used for `q` when none is requested.
    pub fn default_chart(&self, q: [f64; 2]) -> BaseChart {
        match self.base {
            BaseSpace::Sphere if q[0] >= 0.5 * PI => BaseChart::South,
            BaseSpace::Sphere => BaseChart::North,
            BaseSpace::Plane => BaseChart::Global,
        }
    }

    /// Base points on which model data is validated.
    pub fn sample_points(&self) -> Vec<[f64; 2]> {
        match self.base {
            BaseSpace::Plane => alloc::vec![[0.0, 0.0], [0.7, -0.4], [-1.3, 0.9], [2.1, 1.7]],
            BaseSpace::Sphere => alloc::vec![[0.4, 0.3], [1.1, 2.0], [PI / 2.0, -0.8], [2.3, 4.4], [2.9, 1.0]],
        }
    }

    fn check_potential_finite(&self) -> Result<()> {
        let finite = |a: &[Su2]| a.iter().all(|x| x.0.iter().all(|c| c.is_finite()));
        let ok = match self.potential {
            Potential::Trivial => true,
            Potential::Constant { a } => finite(&a),
            Potential::Monopole { .. } => true,
            Potential::Regauged { a, xi } => finite(&a) && finite(&xi),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration("potential coefficients must be finite".into()))
        }
    }

    /// Gauge relation between chart potentials on sampled overlap points, with
    /// `dg g^-1` by central differences of the transition matrices.
    fn check_consistency(&self) -> Result<()> {
        let charts = self.charts();
        for &q in &self.sample_points() {
            for &from in charts {
                for &to in charts {
                    if from == to || !self.chart_contains(from, q) || !self.chart_contains(to, q) {
                        continue;
                    }
                    let ai = self.potential_at(from, q)?;
                    let aj = self.potential_at(to, q)?;
                    let g = self.transition(from, to, q)?;
                    let ginv = g.inverse().matrix();
                    for k in 0..2 {
                        let mut qp = q;
                        let mut qm = q;
                        qp[k] += GAUGE_FD_STEP;
                        qm[k] -= GAUGE_FD_STEP;
                        let dg = (&self.transition(from, to, qp)?.matrix() - &self.transition(from, to, qm)?.matrix())
                            .scale_real(0.5 / GAUGE_FD_STEP);
                        let log = Su2::from_matrix(&(&dg * &ginv))?;
                        let want = g.adjoint(&ai[k]) - log;
                        let dev = (aj[k] - want).norm();
                        if !(dev <= MODEL_CONSISTENCY_TOL) {
                            return Err(Error::Configuration(format!(
                                "potentials on {} and {} violate the gauge relation at q = ({}, {}) by {dev:.3e}",
                                from.name(),
                                to.name(),
                                q[0],
                                q[1]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the polarization check on the orbit functions of every chart
    /// potential at the sample points.
    fn check_polarization(&self) -> Result<f64> {
        let fiber = QuantumFiber::new(self.orbit)?;
        let mut worst: f64 = 0.0;
        for &q in &self.sample_points() {
            for &chart in self.charts() {
                if !self.chart_contains(chart, q) {
                    continue;
                }
                let b = BasePoint::new(chart, q, [0.0; 2]);
                for dq in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
                    let w = orbit_function(self, &b, &BaseTangent::position(dq))?;
                    worst = worst.max(fiber.polarization_residual(&w));
                }
            }
        }
        if !(worst <= ASSUME_TOL) {
            return Err(Error::Configuration(format!(
                "orbit functions do not preserve the polarization (residual {worst:.3e})"
            )));
        }
        Ok(worst)
    }
}

fn regauge_element(xi: [Su2; 2], q: [f64; 2]) -> Su2Group {
    (xi[0] * q[0]).exp() * (xi[1] * q[1]).exp()
}

fn regauge_log_derivative(xi: [Su2; 2], q: [f64; 2]) -> [Su2; 2] {
    [xi[0], (xi[0] * q[0]).exp().adjoint(&xi[1])]
}

/// The orbit function `w(x) = <x, a(v)>` of a base tangent, with `x` the
/// coadjoint orbit point.
pub fn orbit_function(model: &GaugeModel, b: &BasePoint, v: &BaseTangent) -> Result<MomentHamiltonian> {
    let a = model.potential_on(b, v)?;
    Ok(pairing_hamiltonian(&model.orbit, a.coeffs()))
}

/// Horizontal lift `v# = v - H_w` at the fiber point `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalLift {
    pub base: BaseTangent,
    /// Chart components of the fiber part.
    pub fiber: [f64; 2],
}

pub fn horizontal_lift(
    model: &GaugeModel,
    geom: &OrbitGeometry,
    b: &BasePoint,
    v: &BaseTangent,
    f: &ChartPoint,
) -> Result<HorizontalLift> {
    let w = orbit_function(model, b, v)?;
    let x = geom.hamiltonian_field(&w, f);
    Ok(HorizontalLift {
        base: *v,
        fiber: [-x[0], -x[1]],
    })
}

/// Total-space one-form `beta = p dq + sum_k w_k(q, f) dq_k + Re theta(f)`
/// in coordinates `(q1, q2, p1, p2, x, y)`, where `w_k` is the orbit
/// function of `d/dq_k`. Its differential is the closed extension.
fn total_space_form(model: &GaugeModel, geom: &OrbitGeometry, chart: BaseChart, f_chart: crate::orbit::Chart, c: &[f64; 6]) -> Result<[f64; 6]> {
    let b = BasePoint::new(chart, [c[0], c[1]], [c[2], c[3]]);
    let f = ChartPoint {
        chart: f_chart,
        z: Complex64::new(c[4], c[5]),
    };
    let [a1, a2] = model.potential_at(chart, b.q)?;
    let w1 = pairing_hamiltonian(&model.orbit, a1.coeffs()).value(&f);
    let w2 = pairing_hamiltonian(&model.orbit, a2.coeffs()).value(&f);
    let th = geom.real_potential_at(&f);
    Ok([b.p[0] + w1, b.p[1] + w2, 0.0, 0.0, th[0], th[1]])
}

/// `|d beta(v#, xi)|` for a vertical `xi`, with `d beta` by central
/// differences (step `h`) of the total-space one-form. Zero when the lift is
/// horizontal.
pub fn lift_orthogonality_residual(
    model: &GaugeModel,
    geom: &OrbitGeometry,
    b: &BasePoint,
    v: &BaseTangent,
    f: &ChartPoint,
    xi: [f64; 2],
) -> Result<f64> {
    const H: f64 = 1e-5;
    model.check_point(b)?;
    let lift = horizontal_lift(model, geom, b, v, f)?;
    let u = [lift.base.dq[0], lift.base.dq[1], lift.base.dp[0], lift.base.dp[1], lift.fiber[0], lift.fiber[1]];
    let x = [0.0, 0.0, 0.0, 0.0, xi[0], xi[1]];
    let c0 = [b.q[0], b.q[1], b.p[0], b.p[1], f.z.re, f.z.im];
    // jac[a][c] = d beta_c / d coord_a
    let mut jac = [[0.0; 6]; 6];
    for a in 0..6 {
        let mut cp = c0;
        let mut cm = c0;
        cp[a] += H;
        cm[a] -= H;
        let bp = total_space_form(model, geom, b.chart, f.chart, &cp)?;
        let bm = total_space_form(model, geom, b.chart, f.chart, &cm)?;
        for c in 0..6 {
            jac[a][c] = (bp[c] - bm[c]) / (2.0 * H);
        }
    }
    let mut d = 0.0;
    for a in 0..6 {
        for c in 0..6 {
            d += jac[a][c] * (u[a] * x[c] - x[a] * u[c]);
        }
    }
    Ok(d.abs())
}

/// Representation matrices `rho(tau_a)` on the quantum fiber, obtained by
/// differentiating the quantized transitions along one-parameter subgroups.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraRep {
    pub generators: [ComplexMatrix; 3],
}

impl LieAlgebraRep {
    /// `rho(tau_a) = d/dt X(exp(t tau_a))` at `t = 0` by central differences.
    pub fn from_transitions(basis: &FiberBasis) -> Self {
        let h = REP_FD_STEP;
        let generators = core::array::from_fn(|a| {
            let plus = quantize_group(basis, &(Su2::basis(a) * h).exp());
            let minus = quantize_group(basis, &(Su2::basis(a) * -h).exp());
            (&plus - &minus).scale_real(0.5 / h)
        });
        Self { generators }
    }

    pub fn dim(&self) -> usize {
        self.generators[0].rows()
    }

    /// `rho(xi)` by linearity.
    pub fn apply(&self, xi: &Su2) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (g, c) in self.generators.iter().zip(xi.0) {
            out.axpy(c.into(), g);
        }
        out
    }

    /// `max_ab |[rho_a, rho_b] - rho([tau_a, tau_b])|`.
    pub fn bracket_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let lhs = self.generators[a].commutator(&self.generators[b]);
                let rhs = self.apply(&Su2::basis(a).bracket(&Su2::basis(b)));
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
        worst
    }
}

/// Value `A(v)` of the connection on the quantum bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    pub matrix: ComplexMatrix,
}

/// `[A(v)]_{mu nu} = i <phi_nu | O(w) phi_mu>` for the orbit function `w`
/// of `v`, assembled by quadrature.
pub fn connection_quadrature(model: &GaugeModel, fiber: &QuantumFiber, b: &BasePoint, v: &BaseTangent) -> Result<ConnectionMatrix> {
    let w = orbit_function(model, b, v)?;
    let o = fiber.prequant(&w)?;
    let matrix = o.matrix.transpose().scale(I);
    let dev = matrix.anti_hermiticity_deviation();
    if !(dev <= CONNECTION_TOL) {
        return Err(Error::accuracy("anti-Hermiticity of the connection", dev, CONNECTION_TOL));
    }
    Ok(ConnectionMatrix { matrix })
}

/// `A(v) = rho(<a, Pi(v)>)`.
pub fn connection_rep(model: &GaugeModel, rep: &LieAlgebraRep, b: &BasePoint, v: &BaseTangent) -> Result<ConnectionMatrix> {
    let a = model.potential_on(b, v)?;
    Ok(ConnectionMatrix { matrix: rep.apply(&a) })
}

/// Anything that yields connection matrices along the base.
pub trait ConnectionField {
    fn model(&self) -> &GaugeModel;

    fn connection(&self, b: &BasePoint, v: &BaseTangent) -> Result<ComplexMatrix>;

    /// Fiber dimension.
    fn dim(&self) -> usize {
        self.model().orbit.dim()
    }

    /// Quantized transition `X(g)`.
    fn transition_matrix(&self, g: &Su2Group) -> ComplexMatrix;
}

/// Connection from the representation formula.
#[derive(Debug, Clone)]
pub struct RepConnection<'a> {
    pub model: &'a GaugeModel,
    pub rep: LieAlgebraRep,
    pub basis: &'a FiberBasis,
}

impl<'a> RepConnection<'a> {
    pub fn new(model: &'a GaugeModel, fiber: &'a QuantumFiber) -> Self {
        Self {
            model,
            rep: LieAlgebraRep::from_transitions(&fiber.basis),
            basis: &fiber.basis,
        }
    }
}

impl ConnectionField for RepConnection<'_> {
    fn model(&self) -> &GaugeModel {
        self.model
    }

    fn connection(&self, b: &BasePoint, v: &BaseTangent) -> Result<ComplexMatrix> {
        connection_rep(self.model, &self.rep, b, v).map(|c| c.matrix)
    }

    fn transition_matrix(&self, g: &Su2Group) -> ComplexMatrix {
        quantize_group(self.basis, g)
    }
}

/// Connection assembled from prequantization operators by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConnection<'a> {
    pub model: &'a GaugeModel,
    pub fiber: &'a QuantumFiber,
}

impl ConnectionField for QuadratureConnection<'_> {
    fn model(&self) -> &GaugeModel {
        self.model
    }

    fn connection(&self, b: &BasePoint, v: &BaseTangent) -> Result<ComplexMatrix> {
        connection_quadrature(self.model, self.fiber, b, v).map(|c| c.matrix)
    }

    fn transition_matrix(&self, g: &Su2Group) -> ComplexMatrix {
        self.fiber.transition(g)
    }
}

/// Operator-norm residual of the gauge law
/// `A^j(v) = X A^i(v) X^-1 - (v X) X^-1` at `q`, with `A` by quadrature in
/// both charts and `v X` by central differences of the quantized transition.
pub fn gauge_residual(
    model: &GaugeModel,
    fiber: &QuantumFiber,
    from: BaseChart,
    to: BaseChart,
    b: &BasePoint,
    v: &BaseTangent,
) -> Result<f64> {
    let bi = b.in_chart(from);
    let bj = b.in_chart(to);
    let g = model.transition(from, to, b.q)?;
    let ai = connection_quadrature(model, fiber, &bi, v)?.matrix;
    let aj = connection_quadrature(model, fiber, &bj, v)?.matrix;
    let x = fiber.transition(&g);
    let xinv = fiber.transition(&g.inverse());
    let h = GAUGE_FD_STEP;
    let gp = model.transition(from, to, bi.shifted(v, h).q)?;
    let gm = model.transition(from, to, bi.shifted(v, -h).q)?;
    let dx = (&fiber.transition(&gp) - &fiber.transition(&gm)).scale_real(0.5 / h);
    let rhs = &(&(&x * &ai) * &xinv) - &(&dx * &xinv);
    Ok((&aj - &rhs).norm_op())
}

/// Curvature `F(v1, v2) = v1 A(v2) - v2 A(v1) + [A(v1), A(v2)]` for constant
/// chart tangents, derivatives by central differences.
pub fn curvature(conn: &dyn ConnectionField, b: &BasePoint, v1: &BaseTangent, v2: &BaseTangent) -> Result<ComplexMatrix> {
    const H: f64 = 1e-5;
    let a1 = conn.connection(b, v1)?;
    let a2 = conn.connection(b, v2)?;
    let d1a2 = (&conn.connection(&b.shifted(v1, H), v2)? - &conn.connection(&b.shifted(v1, -H), v2)?).scale_real(0.5 / H);
    let d2a1 = (&conn.connection(&b.shifted(v2, H), v1)? - &conn.connection(&b.shifted(v2, -H), v1)?).scale_real(0.5 / H);
    Ok(&(&d1a2 - &d2a1) + &a1.commutator(&a2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::MONOPOLE_HOLONOMY_SIGN;
    use crate::numerics::cis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fiber(two_j: u32) -> QuantumFiber {
        QuantumFiber::new(OrbitSpec::new(two_j)).unwrap()
    }

    fn rand_su2(rng: &mut ChaCha8Rng, scale: f64) -> Su2 {
        Su2(core::array::from_fn(|_| rng.gen_range(-scale..scale)))
    }

    #[test]
    fn zero_potential_gives_zero_everything() {
        let f = fiber(2);
        let m = GaugeModel::trivial(f.spec()).unwrap();
        let b = BasePoint::new(BaseChart::Global, [0.3, -1.0], [2.0, 0.5]);
        let v = BaseTangent::new([1.0, 2.0], [0.5, 0.0]);
        let w = orbit_function(&m, &b, &v).unwrap();
        assert_eq!(w.a, [0.0; 3]);
        let z = ChartPoint::north(Complex64::new(0.4, 0.2));
        let lift = horizontal_lift(&m, &f.geom, &b, &v, &z).unwrap();
        assert_eq!(lift.base, v);
        assert_eq!(lift.fiber, [0.0, 0.0]);
        assert!(connection_quadrature(&m, &f, &b, &v).unwrap().matrix.max_abs() < 1e-14);
        let rep = LieAlgebraRep::from_transitions(&f.basis);
        assert_eq!(connection_rep(&m, &rep, &b, &v).unwrap().matrix.max_abs(), 0.0);
    }

    #[test]
    fn momentum_tangents_are_projected_away() {
        let f = fiber(3);
        let m = GaugeModel::constant(f.spec(), Su2([0.3, -0.7, 1.1]), Su2([1.0, 0.2, 0.0])).unwrap();
        let b = BasePoint::new(BaseChart::Global, [0.0, 0.0], [0.0, 0.0]);
        let vp = BaseTangent::momentum([1.0, -3.0]);
        assert!(connection_quadrature(&m, &f, &b, &vp).unwrap().matrix.max_abs() < 1e-14);
        let v = BaseTangent::position([0.4, 0.9]);
        let a = connection_quadrature(&m, &f, &b, &v).unwrap().matrix;
        let a2 = connection_quadrature(&m, &f, &b, &v.combine(1.0, &vp, 1.0)).unwrap().matrix;
        assert_eq!(a, a2);
    }

    #[test]
    fn representation_is_a_lie_homomorphism() {
        for two_j in 0..=6 {
            let f = fiber(two_j);
            let rep = LieAlgebraRep::from_transitions(&f.basis);
            assert!(rep.bracket_deviation() < 1e-9, "two_j={two_j}: {}", rep.bracket_deviation());
            for g in &rep.generators {
                assert!(g.anti_hermiticity_deviation() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_potential_gives_rho_tau1() {
        let f = fiber(2);
        let m = GaugeModel::constant(f.spec(), Su2::basis(0), Su2::ZERO).unwrap();
        let rep = LieAlgebraRep::from_transitions(&f.basis);
        let b = BasePoint::new(BaseChart::Global, [0.0; 2], [0.0; 2]);
        let v = BaseTangent::position([1.0, 0.0]);
        let a = connection_rep(&m, &rep, &b, &v).unwrap().matrix;
        assert_eq!(a, rep.generators[0]);
        let aq = connection_quadrature(&m, &f, &b, &v).unwrap().matrix;
        assert!((&a - &aq).max_abs() < 1e-9);
        let w = orbit_function(&m, &b, &v).unwrap();
        assert_eq!(w.a, [crate::conventions::ORBIT_AXIS[0], 0.0, 0.0]);
    }

    #[test]
    fn monopole_connection_is_diagonal() {
        let f = fiber(2);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        let rep = LieAlgebraRep::from_transitions(&f.basis);
        let theta = 1.1;
        let b = BasePoint::new(BaseChart::North, [theta, 0.3], [0.0; 2]);
        let v = BaseTangent::position([0.0, 1.0]);
        let a = connection_rep(&m, &rep, &b, &v).unwrap().matrix;
        let want: Vec<Complex64> = (0..3)
            .map(|k| I * (MONOPOLE_HOLONOMY_SIGN * (1.0 - k as f64) * (1.0 - libm::cos(theta))))
            .collect();
        assert!((&a - &ComplexMatrix::from_diag(&want)).max_abs() < 1e-9);
        let aq = connection_quadrature(&m, &f, &b, &v).unwrap().matrix;
        assert!((&a - &aq).max_abs() < 1e-8);
    }

    #[test]
    fn quadrature_and_rep_agree_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for two_j in 0..=4 {
            let f = fiber(two_j);
            let rep = LieAlgebraRep::from_transitions(&f.basis);
            let m = GaugeModel::regauged(
                f.spec(),
                rand_su2(&mut rng, 1.0),
                rand_su2(&mut rng, 1.0),
                rand_su2(&mut rng, 1.0),
                rand_su2(&mut rng, 1.0),
            )
            .unwrap();
            for _ in 0..10 {
                let chart = if rng.gen_bool(0.5) { BaseChart::Global } else { BaseChart::Regauged };
                let b = BasePoint::new(chart, [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [0.0; 2]);
                let v = BaseTangent::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), 0.0]);
                let aq = connection_quadrature(&m, &f, &b, &v).unwrap().matrix;
                let ar = connection_rep(&m, &rep, &b, &v).unwrap().matrix;
                assert!((&aq - &ar).norm_op() < 1e-8, "two_j={two_j}");
            }
        }
    }

    #[test]
    fn connection_is_linear_in_the_tangent() {
        let f = fiber(3);
        let m = GaugeModel::monopole(f.spec(), 2).unwrap();
        let b = BasePoint::new(BaseChart::South, [2.0, 0.7], [1.0, -1.0]);
        let v1 = BaseTangent::new([0.3, -1.2], [0.0, 1.0]);
        let v2 = BaseTangent::new([-0.8, 0.5], [2.0, 0.0]);
        let a = |v: &BaseTangent| connection_quadrature(&m, &f, &b, v).unwrap().matrix;
        let lhs = a(&v1.combine(1.5, &v2, -0.25));
        let rhs = &a(&v1).scale_real(1.5) + &a(&v2).scale_real(-0.25);
        assert!((&lhs - &rhs).max_abs() < 1e-9);
    }

    #[test]
    fn gauge_law_holds_on_monopole_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = fiber(2);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        for _ in 0..10 {
            let b = BasePoint::new(BaseChart::North, [PI / 2.0, rng.gen_range(0.0..2.0 * PI)], [0.0; 2]);
            let v = BaseTangent::position([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let r = gauge_residual(&m, &f, BaseChart::North, BaseChart::South, &b, &v).unwrap();
            assert!(r <= 1e-6, "{r}");
            let r = gauge_residual(&m, &f, BaseChart::South, BaseChart::North, &b, &v).unwrap();
            assert!(r <= 1e-6, "{r}");
        }
    }

    #[test]
    fn opposite_sign_law_fails() {
        // the law with +dX X^-1 is off by twice the derivative term
        let f = fiber(2);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        let b = BasePoint::new(BaseChart::North, [PI / 2.0, 0.4], [0.0; 2]);
        let v = BaseTangent::position([0.0, 1.0]);
        let ai = connection_quadrature(&m, &f, &b, &v).unwrap().matrix;
        let aj = connection_quadrature(&m, &f, &b.in_chart(BaseChart::South), &v).unwrap().matrix;
        let g = m.transition(BaseChart::North, BaseChart::South, b.q).unwrap();
        let x = f.transition(&g);
        let xinv = f.transition(&g.inverse());
        let rep = LieAlgebraRep::from_transitions(&f.basis);
        let dx = &rep.apply(&Su2([0.0, 0.0, 2.0])) * &x;
        let plus = &(&(&x * &ai) * &xinv) + &(&dx * &xinv);
        assert!((&aj - &plus).norm_op() > 1.0);
        assert!(gauge_residual(&m, &f, BaseChart::North, BaseChart::South, &b, &v).unwrap() < 1e-6);
    }

    #[test]
    fn pole_is_outside_the_overlap() {
        let f = fiber(1);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        let b = BasePoint::new(BaseChart::North, [0.0, 0.0], [0.0; 2]);
        let v = BaseTangent::position([1.0, 0.0]);
        assert!(matches!(gauge_residual(&m, &f, BaseChart::North, BaseChart::South, &b, &v), Err(Error::Chart(_))));
        let out = BasePoint::new(BaseChart::North, [PI, 0.0], [0.0; 2]);
        assert!(matches!(orbit_function(&m, &out, &v), Err(Error::Chart(_))));
        let wrong = BasePoint::new(BaseChart::Global, [1.0, 0.0], [0.0; 2]);
        assert!(matches!(orbit_function(&m, &wrong, &v), Err(Error::Chart(_))));
    }

    #[test]
    fn identity_transition_residual_vanishes() {
        let f = fiber(2);
        let m = GaugeModel::constant(f.spec(), Su2([0.2, 0.0, 1.0]), Su2([0.0, -0.5, 0.0])).unwrap();
        let b = BasePoint::new(BaseChart::Global, [0.1, 0.2], [0.0; 2]);
        let v = BaseTangent::position([1.0, 1.0]);
        assert!(gauge_residual(&m, &f, BaseChart::Global, BaseChart::Global, &b, &v).unwrap() <= 1e-10);
    }

    #[test]
    fn pure_gauge_law_and_flatness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = fiber(3);
        let m = GaugeModel::pure_gauge(f.spec(), rand_su2(&mut rng, 1.5), rand_su2(&mut rng, 1.5)).unwrap();
        let conn = RepConnection::new(&m, &f);
        for _ in 0..5 {
            let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let b = BasePoint::new(BaseChart::Global, q, [0.0; 2]);
            let v = BaseTangent::position([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            assert!(gauge_residual(&m, &f, BaseChart::Global, BaseChart::Regauged, &b, &v).unwrap() <= 1e-6);
            let br = b.in_chart(BaseChart::Regauged);
            let e1 = BaseTangent::position([1.0, 0.0]);
            let e2 = BaseTangent::position([0.0, 1.0]);
            let c = curvature(&conn, &br, &e1, &e2).unwrap();
            assert!(c.max_abs() <= 1e-6, "{}", c.max_abs());
        }
    }

    #[test]
    fn constant_curvature_is_the_commutator() {
        let f = fiber(1);
        let m = GaugeModel::constant(f.spec(), Su2::basis(0), Su2::basis(1)).unwrap();
        let conn = RepConnection::new(&m, &f);
        let b = BasePoint::new(BaseChart::Global, [0.0; 2], [0.0; 2]);
        let e1 = BaseTangent::position([1.0, 0.0]);
        let e2 = BaseTangent::position([0.0, 1.0]);
        let c = curvature(&conn, &b, &e1, &e2).unwrap();
        assert!((&c - &conn.rep.generators[2]).max_abs() < 1e-9);
        assert!(c.norm_op() > 0.1);
        let anti = curvature(&conn, &b, &e2, &e1).unwrap();
        assert!((&c + &anti).max_abs() < 1e-12);
    }

    #[test]
    fn horizontal_lift_is_orthogonal_to_vertical_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = fiber(2);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        let b = BasePoint::new(BaseChart::North, [PI / 2.0, 0.9], [0.3, -0.2]);
        let v = BaseTangent::position([0.0, 1.0]);
        for _ in 0..20 {
            let z = ChartPoint::north(Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
            let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r = lift_orthogonality_residual(&m, &f.geom, &b, &v, &z, xi).unwrap();
            assert!(r <= 1e-8, "{r}");
        }
        // the unlifted tangent is not horizontal
        let z = ChartPoint::north(Complex64::new(0.5, 0.1));
        let w = orbit_function(&m, &b, &v).unwrap();
        let x = f.geom.hamiltonian_field(&w, &z);
        let skew = f.geom.symplectic_form_at(&z, x, [0.0, 1.0]);
        assert!(skew.abs() > 1e-3);
    }

    #[test]
    fn inconsistent_data_is_refused() {
        let spec = OrbitSpec::new(1);
        let bad = GaugeModel::constant(spec, Su2([f64::NAN, 0.0, 0.0]), Su2::ZERO);
        assert!(matches!(bad, Err(Error::Configuration(_))));
    }

    #[test]
    fn transition_phase_matches_monopole_winding() {
        let f = fiber(2);
        let m = GaugeModel::monopole(f.spec(), 1).unwrap();
        let g = m.transition(BaseChart::North, BaseChart::South, [1.0, 0.5]).unwrap();
        let x = f.transition(&g);
        for k in 0..3 {
            let mq = 1.0 - k as f64;
            assert!(crate::numerics::cabs(x[(k, k)] - cis(mq * 2.0 * 0.5)) < 1e-12);
        }
    }
}
