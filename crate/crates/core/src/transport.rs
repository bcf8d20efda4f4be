//! Parallel transport of row-vector wavefunctions along base paths.
//!
//! Along a path with velocity `v` the wavefunction obeys
//! `Psi' = Psi (i <alpha_B, v> + A(v))`. The scalar part is integrated
//! separately, so a transport result is a phase and a unitary with
//! `Psi(1) = Psi(0) e^{i phase} U`. Paths are concatenations of smooth pieces,
//! each carrying its own step count, and composition runs left to right:
//! `U(a then b) = U(a) U(b)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::conventions::{CROSSING_TOL, LIFT_FD_STEP};
use crate::error::{Error, Result};
use crate::fiberq::QuantumFiber;
use crate::gauge::{canonical_one_form, orbit_function, BaseChart, BasePoint, BaseSpace, BaseTangent, ConnectionField};
use crate::numerics::{cabs, cis, rk4_step, ComplexMatrix};
use crate::orbit::{ChartPoint, FiberHamiltonian};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unitarity deviation beyond which a transport is rejected.
pub const UNITARITY_TOL: f64 = 1e-6;

/// Closure tolerance for loops.
pub const CLOSURE_TOL: f64 = 1e-12;

/// One smooth piece of a base path, parametrized by `s in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathPiece {
    /// Straight line in `(q, p)`.
    Segment { q: [[f64; 2]; 2], p: [[f64; 2]; 2] },
    /// `q = (theta, phi0 + sweep s)` at `p = 0`.
    Latitude { theta: f64, phi0: f64, sweep: f64 },
    /// Fixed `q` with `p = center + radius (cos, sin)(angle0 + sweep s)`.
    MomentumCircle { q: [f64; 2], center: [f64; 2], radius: f64, angle0: f64, sweep: f64 },
}

impl PathPiece {
    pub fn eval(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        match *self {
            PathPiece::Segment { q, p } => (lerp(q[0], q[1], s), lerp(p[0], p[1], s)),
            PathPiece::Latitude { theta, phi0, sweep } => ([theta, phi0 + sweep * s], [0.0; 2]),
            PathPiece::MomentumCircle { q, center, radius, angle0, sweep } => {
                let (sn, cs) = libm::sincos(angle0 + sweep * s);
                (q, [center[0] + radius * cs, center[1] + radius * sn])
            }
        }
    }

    pub fn velocity(&self, s: f64) -> BaseTangent {
        match *self {
            PathPiece::Segment { q, p } => BaseTangent::new(
                [q[1][0] - q[0][0], q[1][1] - q[0][1]],
                [p[1][0] - p[0][0], p[1][1] - p[0][1]],
            ),
            PathPiece::Latitude { sweep, .. } => BaseTangent::position([0.0, sweep]),
            PathPiece::MomentumCircle { radius, angle0, sweep, .. } => {
                let (sn, cs) = libm::sincos(angle0 + sweep * s);
                BaseTangent::momentum([-radius * sweep * sn, radius * sweep * cs])
            }
        }
    }

    pub fn reversed(&self) -> PathPiece {
        match *self {
            PathPiece::Segment { q, p } => PathPiece::Segment {
                q: [q[1], q[0]],
                p: [p[1], p[0]],
            },
            PathPiece::Latitude { theta, phi0, sweep } => PathPiece::Latitude {
                theta,
                phi0: phi0 + sweep,
                sweep: -sweep,
            },
            PathPiece::MomentumCircle { q, center, radius, angle0, sweep } => PathPiece::MomentumCircle {
                q,
                center,
                radius,
                angle0: angle0 + sweep,
                sweep: -sweep,
            },
        }
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s]
}

/// How the base chart is chosen along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPolicy {
    /// The model's own split: hemispheres on the sphere, the first chart on
    /// the plane.
    Auto,
    Fixed(BaseChart),
    /// `below` while `q[coord] < value`, `above` otherwise.
    Boundary { coord: usize, value: f64, below: BaseChart, above: BaseChart },
}

impl ChartPolicy {
    fn resolve(self, base: BaseSpace) -> ChartPolicy {
        match (self, base) {
            (ChartPolicy::Auto, BaseSpace::Sphere) => ChartPolicy::Boundary {
                coord: 0,
                value: 0.5 * PI,
                below: BaseChart::North,
                above: BaseChart::South,
            },
            (ChartPolicy::Auto, BaseSpace::Plane) => ChartPolicy::Fixed(BaseChart::Global),
            (p, _) => p,
        }
    }

    fn chart_at(self, q: [f64; 2]) -> BaseChart {
        match self {
            ChartPolicy::Fixed(c) => c,
            ChartPolicy::Boundary { coord, value, below, above } => {
                if q[coord] < value {
                    below
                } else {
                    above
                }
            }
            ChartPolicy::Auto => unreachable!("resolved before use"),
        }
    }
}

/// A piecewise-smooth path in `T*Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePath {
    /// Pieces with their RK4 step counts.
    pub pieces: Vec<(PathPiece, usize)>,
    pub charts: ChartPolicy,
}

impl BasePath {
    pub fn new(pieces: Vec<(PathPiece, usize)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("a path needs at least one piece"));
        }
        if pieces.iter().any(|&(_, n)| n == 0) {
            return Err(Error::invalid("every path piece needs at least one step"));
        }
        Ok(Self {
            pieces,
            charts: ChartPolicy::Auto,
        })
    }

    pub fn segment(q0: [f64; 2], q1: [f64; 2], p0: [f64; 2], p1: [f64; 2], steps: usize) -> Result<Self> {
        Self::new(vec![(PathPiece::Segment { q: [q0, q1], p: [p0, p1] }, steps)])
    }

    /// Full turn around the latitude `theta`, starting at `phi = 0`.
    pub fn latitude(theta: f64, steps: usize) -> Result<Self> {
        Self::new(vec![(
            PathPiece::Latitude {
                theta,
                phi0: 0.0,
                sweep: 2.0 * PI,
            },
            steps,
        )])
    }

    /// Counter-clockwise circle in momentum space over a fixed `q`.
    pub fn momentum_circle(q: [f64; 2], center: [f64; 2], radius: f64, steps: usize) -> Result<Self> {
        Self::new(vec![(
            PathPiece::MomentumCircle {
                q,
                center,
                radius,
                angle0: 0.0,
                sweep: 2.0 * PI,
            },
            steps,
        )])
    }

    /// Straight segments through the `(q, p)` vertices, `steps` each.
    pub fn polyline(vertices: &[([f64; 2], [f64; 2])], steps: usize) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("a polyline needs at least two vertices"));
        }
        Self::new(
            vertices
                .windows(2)
                .map(|w| (PathPiece::Segment { q: [w[0].0, w[1].0], p: [w[0].1, w[1].1] }, steps))
                .collect(),
        )
    }

    pub fn with_charts(mut self, charts: ChartPolicy) -> Self {
        self.charts = charts;
        self
    }

    /// `self` followed by `other`, keeping the chart policy of `self`.
    pub fn then(&self, other: &BasePath) -> BasePath {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        BasePath {
            pieces,
            charts: self.charts,
        }
    }

    pub fn reversed(&self) -> BasePath {
        BasePath {
            pieces: self.pieces.iter().rev().map(|&(p, n)| (p.reversed(), n)).collect(),
            charts: self.charts,
        }
    }

    pub fn start(&self) -> ([f64; 2], [f64; 2]) {
        self.pieces[0].0.eval(0.0)
    }

    pub fn end(&self) -> ([f64; 2], [f64; 2]) {
        self.pieces[self.pieces.len() - 1].0.eval(1.0)
    }

    pub fn total_steps(&self) -> usize {
        self.pieces.iter().map(|&(_, n)| n).sum()
    }

    /// Whether the path closes within [`CLOSURE_TOL`]; on the sphere the
    /// azimuth is compared modulo `2 pi`.
    pub fn is_closed(&self, base: BaseSpace) -> bool {
        let ((q0, p0), (q1, p1)) = (self.start(), self.end());
        let mut dphi = q1[1] - q0[1];
        if base == BaseSpace::Sphere {
            dphi -= 2.0 * PI * libm::round(dphi / (2.0 * PI));
        }
        let d = [q1[0] - q0[0], dphi, p1[0] - p0[0], p1[1] - p0[1]];
        d.iter().all(|x| x.abs() <= CLOSURE_TOL)
    }
}

/// Transport state after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub piece: usize,
    pub s: f64,
    pub chart: BaseChart,
    pub unitary: ComplexMatrix,
    pub phase: f64,
}

impl Frame {
    /// `e^{i phase} U`.
    pub fn wavefunction(&self) -> ComplexMatrix {
        self.unitary.scale(cis(self.phase))
    }
}

/// A registered chart change along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub piece: usize,
    pub s: f64,
    pub from: BaseChart,
    pub to: BaseChart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub unitary: ComplexMatrix,
    /// Accumulated `integral <alpha_B, v> dt`.
    pub alpha_phase: f64,
    pub steps: usize,
    pub max_unitarity_deviation: f64,
    pub initial_chart: BaseChart,
    pub final_chart: BaseChart,
    pub crossings: Vec<Crossing>,
    /// State at the start and after every step.
    pub frames: Vec<Frame>,
}

impl TransportResult {
    pub fn wavefunction(&self) -> ComplexMatrix {
        self.unitary.scale(cis(self.alpha_phase))
    }
}

/// One RK4 step of the unitary and the phase from `s0` to `s1` (either
/// direction) on `piece` in `chart`. The phase uses the same three stage
/// points as the matrix part.
fn step(
    conn: &dyn ConnectionField,
    piece: &PathPiece,
    chart: BaseChart,
    u: &ComplexMatrix,
    s0: f64,
    s1: f64,
) -> Result<(ComplexMatrix, f64)> {
    let h = s1 - s0;
    let sm = s0 + 0.5 * h;
    let stage = |s: f64| -> Result<(ComplexMatrix, f64)> {
        let (q, p) = piece.eval(s);
        let b = BasePoint::new(chart, q, p);
        let v = piece.velocity(s);
        Ok((conn.connection(&b, &v)?, canonical_one_form(&b, &v)))
    };
    let (a0, al0) = stage(s0)?;
    let (am, alm) = stage(sm)?;
    let (a1, al1) = stage(s1)?;
    let mut field = |t: f64, y: &ComplexMatrix| {
        let a = if t == s0 {
            &a0
        } else if t == sm {
            &am
        } else {
            &a1
        };
        y * a
    };
    let next = rk4_step(&mut field, s0, u, h);
    Ok((next, h / 6.0 * (al0 + 4.0 * alm + al1)))
}

/// Solves `Psi' = Psi (i <alpha_B, v> + A(v))` from `Psi(0) = I` by RK4,
/// inserting `X(g_ij)^-1` on the right at every chart crossing.
pub fn transport(conn: &dyn ConnectionField, path: &BasePath) -> Result<TransportResult> {
    let model = conn.model();
    let policy = path.charts.resolve(model.base);
    let n = conn.dim();
    let (q_start, p_start) = path.start();
    let initial_chart = policy.chart_at(q_start);
    model.check_point(&BasePoint::new(initial_chart, q_start, p_start))?;

    let mut u = ComplexMatrix::identity(n);
    let mut phase = 0.0;
    let mut chart = initial_chart;
    let mut worst: f64 = 0.0;
    let mut crossings = Vec::new();
    let mut frames = Vec::with_capacity(path.total_steps() + 1);
    frames.push(Frame {
        piece: 0,
        s: 0.0,
        chart,
        unitary: u.clone(),
        phase,
    });

    for (ip, &(piece, steps)) in path.pieces.iter().enumerate() {
        let h = 1.0 / steps as f64;
        for k in 0..steps {
            let s0 = k as f64 * h;
            let s1 = if k + 1 == steps { 1.0 } else { (k + 1) as f64 * h };
            let next_chart = policy.chart_at(piece.eval(s1).0);
            if next_chart != chart {
                let sc = bisect_crossing(&policy, &piece, s0, s1, chart);
                let (u1, dp) = step(conn, &piece, chart, &u, s0, sc)?;
                let g = model.transition(chart, next_chart, piece.eval(sc).0)?;
                u = &u1 * &conn.transition_matrix(&g.inverse());
                phase += dp;
                crossings.push(Crossing {
                    piece: ip,
                    s: sc,
                    from: chart,
                    to: next_chart,
                });
                chart = next_chart;
                let (u2, dp) = step(conn, &piece, chart, &u, sc, s1)?;
                u = u2;
                phase += dp;
            } else {
                let (u1, dp) = step(conn, &piece, chart, &u, s0, s1)?;
                u = u1;
                phase += dp;
            }
            worst = worst.max(u.unitarity_deviation());
            frames.push(Frame {
                piece: ip,
                s: s1,
                chart,
                unitary: u.clone(),
                phase,
            });
        }
    }
    if !(worst <= UNITARITY_TOL) {
        return Err(Error::accuracy("unitarity of the transport", worst, UNITARITY_TOL));
    }
    Ok(TransportResult {
        unitary: u,
        alpha_phase: phase,
        steps: path.total_steps(),
        max_unitarity_deviation: worst,
        initial_chart,
        final_chart: chart,
        crossings,
        frames,
    })
}

fn bisect_crossing(policy: &ChartPolicy, piece: &PathPiece, mut lo: f64, mut hi: f64, start: BaseChart) -> f64 {
    while (hi - lo).abs() > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        if policy.chart_at(piece.eval(mid).0) == start {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Holonomy around a closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct WilsonLoop {
    /// Transport unitary expressed in the starting chart.
    pub unitary: ComplexMatrix,
    pub trace: Complex64,
    pub alpha_phase: f64,
}

pub fn wilson_loop(conn: &dyn ConnectionField, path: &BasePath) -> Result<WilsonLoop> {
    let model = conn.model();
    if !path.is_closed(model.base) {
        return Err(Error::invalid("Wilson loops need a closed path"));
    }
    let res = transport(conn, path)?;
    let mut u = res.unitary;
    if res.final_chart != res.initial_chart {
        let g = model.transition(res.final_chart, res.initial_chart, path.end().0)?;
        u = &u * &conn.transition_matrix(&g.inverse());
    }
    Ok(WilsonLoop {
        trace: u.trace(),
        unitary: u,
        alpha_phase: res.alpha_phase,
    })
}

/// Covariantly constant section over a `q` slice times a set of momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSection {
    pub q_points: Vec<[f64; 2]>,
    pub p_points: Vec<[f64; 2]>,
    /// `values[iq][ip]` is the row vector `Psi(q, p)`.
    pub values: Vec<Vec<Vec<Complex64>>>,
    /// Largest residual of the transport equation along consecutive momenta.
    pub residual: f64,
}

/// Extends boundary data `Psi_0(q)` to sections constant along the vertical
/// polarization `span{d/dp_k}` of `T*Q`, and reports the residual of the
/// transport equation between consecutive grid momenta.
pub fn covariant_section_solve(
    conn: &dyn ConnectionField,
    q_points: &[[f64; 2]],
    psi0: &[Vec<Complex64>],
    p_points: &[[f64; 2]],
) -> Result<BundleSection> {
    let model = conn.model();
    let n = conn.dim();
    if q_points.len() != psi0.len() || q_points.is_empty() || p_points.is_empty() {
        return Err(Error::invalid("boundary data must give one row vector per q point"));
    }
    if psi0.iter().any(|r| r.len() != n || r.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()))) {
        return Err(Error::invalid("boundary rows must be finite with 2j + 1 entries"));
    }
    let mut values = Vec::with_capacity(q_points.len());
    let mut residual: f64 = 0.0;
    for (&q, row) in q_points.iter().zip(psi0) {
        let chart = model.default_chart(q);
        for &p in p_points {
            let b = BasePoint::new(chart, q, p);
            for e in [[1.0, 0.0], [0.0, 1.0]] {
                let v = BaseTangent::momentum(e);
                let a = conn.connection(&b, &v)?;
                if a.max_abs() != 0.0 || canonical_one_form(&b, &v) != 0.0 {
                    return Err(Error::UnsupportedPolarization(alloc::format!(
                        "connection has a momentum component at q = ({}, {})",
                        q[0],
                        q[1]
                    )));
                }
            }
        }
        let slice: Vec<Vec<Complex64>> = p_points.iter().map(|_| row.clone()).collect();
        for (ip, w) in p_points.windows(2).enumerate() {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let len = libm::hypot(d[0], d[1]);
            if len == 0.0 {
                continue;
            }
            let v = BaseTangent::momentum([d[0] / len, d[1] / len]);
            let mid = BasePoint::new(chart, q, [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])]);
            let mut gen = conn.connection(&mid, &v)?;
            let alpha = canonical_one_form(&mid, &v);
            for i in 0..n {
                gen[(i, i)] += I * alpha;
            }
            let psi_mid: Vec<Complex64> = slice[ip].iter().zip(&slice[ip + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let rhs = gen.left_apply(&psi_mid);
            for mu in 0..n {
                let lhs = (slice[ip + 1][mu] - slice[ip][mu]) / len;
                residual = residual.max(cabs(lhs - rhs[mu]));
            }
        }
        values.push(slice);
    }
    Ok(BundleSection {
        q_points: q_points.to_vec(),
        p_points: p_points.to_vec(),
        values,
        residual,
    })
}

/// Fiber points, all with `|z| <= 2`, at which total-space sections are
/// sampled.
pub fn default_fiber_samples() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.3, 0.8),
        Complex64::new(1.0, 1.0),
        Complex64::new(-1.2, -0.4),
        Complex64::new(0.2, -1.5),
        Complex64::new(1.9, 0.3),
        Complex64::new(-1.0, 1.6),
    ]
}

/// Flow of the lifted fiber point `f' = -H_{w(s)}(f)` for one RK4 step.
fn lift_fiber_point(
    conn: &dyn ConnectionField,
    fiber: &QuantumFiber,
    piece: &PathPiece,
    chart: BaseChart,
    z: Complex64,
    s0: f64,
    h: f64,
) -> Result<Complex64> {
    let model = conn.model();
    let field = |s: f64, z: Complex64| -> Result<Complex64> {
        let (q, p) = piece.eval(s);
        let w = orbit_function(model, &BasePoint::new(chart, q, p), &piece.velocity(s))?;
        let x = fiber.geom.hamiltonian_field(&w, &ChartPoint::north(z));
        Ok(Complex64::new(-x[0], -x[1]))
    };
    let k1 = field(s0, z)?;
    let k2 = field(s0 + 0.5 * h, z + k1 * (0.5 * h))?;
    let k3 = field(s0 + 0.5 * h, z + k2 * (0.5 * h))?;
    let k4 = field(s0 + h, z + k3 * h)?;
    Ok(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Residual of the total-space equation `v# psi = i <alpha_E, v#> psi` for
/// `psi = sum_mu Psi_mu phi_mu` rebuilt from a transport result.
///
/// At sampled steps `s0`, `psi(s0 +- h)` is obtained by one short RK4 step
/// from the neighbouring stored frames, the fiber point is carried along the
/// lift, and the central difference is compared with
/// `i (<alpha_B, v> + w(f) - theta(H_w)) psi`. Every row of the transport is
/// checked at every fiber sample; the maximum is returned.
pub fn covariant_residual_total_space(
    conn: &dyn ConnectionField,
    fiber: &QuantumFiber,
    path: &BasePath,
    result: &TransportResult,
    samples: &[Complex64],
) -> Result<f64> {
    let model = conn.model();
    let h = LIFT_FD_STEP;
    let frames = &result.frames;
    let n = conn.dim();
    let candidates: Vec<usize> = (1..frames.len().saturating_sub(1))
        .filter(|&k| {
            let (a, b, c) = (&frames[k - 1], &frames[k], &frames[k + 1]);
            let hstep = 1.0 / path.pieces[b.piece].1 as f64;
            a.piece == b.piece
                && c.piece == b.piece
                && a.chart == b.chart
                && c.chart == b.chart
                && hstep > 2.0 * h
                && (b.s - a.s - hstep).abs() < 1e-12
                && (c.s - b.s - hstep).abs() < 1e-12
                && !result.crossings.iter().any(|x| x.piece == b.piece && x.s > a.s && x.s < c.s)
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::invalid("path has no interior steps to sample"));
    }
    let stride = (candidates.len() / 12).max(1);
    let mut worst: f64 = 0.0;
    for &k in candidates.iter().step_by(stride) {
        let (prev, cur, next) = (&frames[k - 1], &frames[k], &frames[k + 1]);
        let piece = path.pieces[cur.piece].0;
        let chart = cur.chart;
        let s0 = cur.s;
        let (u_plus, dp_plus) = step(conn, &piece, chart, &next.unitary, next.s, s0 + h)?;
        let (u_minus, dp_minus) = step(conn, &piece, chart, &prev.unitary, prev.s, s0 - h)?;
        let psi_plus = u_plus.scale(cis(next.phase + dp_plus));
        let psi_minus = u_minus.scale(cis(prev.phase + dp_minus));
        let psi0 = cur.wavefunction();

        let (q, p) = piece.eval(s0);
        let b = BasePoint::new(chart, q, p);
        let v = piece.velocity(s0);
        let alpha = canonical_one_form(&b, &v);
        let w = orbit_function(model, &b, &v)?;
        for &z in samples {
            let zp = lift_fiber_point(conn, fiber, &piece, chart, z, s0, h)?;
            let zm = lift_fiber_point(conn, fiber, &piece, chart, z, s0, -h)?;
            let pt = ChartPoint::north(z);
            let x = fiber.geom.hamiltonian_field(&w, &pt);
            let theta_x = fiber.geom.kahler_potential_at(&pt) * Complex64::new(x[0], x[1]);
            let gen = I * (alpha + w.value(&pt) - theta_x);
            for mu in 0..n {
                let fp = fiber.basis.section_at(psi_plus.row(mu), zp);
                let fm = fiber.basis.section_at(psi_minus.row(mu), zm);
                let f0 = fiber.basis.section_at(psi0.row(mu), z);
                let lhs = (fp - fm) / (2.0 * h);
                worst = worst.max(cabs(lhs - gen * f0));
            }
        }
    }
    Ok(worst)
}
