//! Classical geometry of the fiber: the coadjoint orbit of spin weight `j`,
//! realized as the radius-`j` sphere in two stereographic charts.
//!
//! The North chart coordinate `z` sends `z = 0` to `(0, 0, j)`; the South
//! chart coordinate is `1/z`. In either chart
//!
//! ```text
//! Omega_F = s * 4j / (1 + |z|^2)^2 dx ^ dy,        total area 4 pi j
//! theta   = -2ij conj(z) dz / (1 + |z|^2)           (holomorphic frame)
//! ```
//!
//! and `d theta = Omega_F`. Hamiltonian vector fields solve
//! `Omega_F(H_w, -) = -d_F w`.

use num_complex::Complex64;

use crate::conventions::{GRADIENT_FD_STEP, ORBIT_AXIS, SYMPLECTIC_SIGN};
use crate::error::{Error, Result};

/// Orbit of half-integral spin `two_j / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitSpec {
    pub two_j: u32,
}

impl OrbitSpec {
    pub fn new(two_j: u32) -> Self {
        Self { two_j }
    }

    #[inline]
    pub fn j(&self) -> f64 {
        0.5 * self.two_j as f64
    }

    /// Dimension `2j + 1` of the quantum fiber.
    #[inline]
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    North,
    South,
}

impl Chart {
    pub fn opposite(self) -> Chart {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub z: Complex64,
}

impl ChartPoint {
    pub fn north(z: Complex64) -> Self {
        Self { chart: Chart::North, z }
    }

    pub fn south(z: Complex64) -> Self {
        Self { chart: Chart::South, z }
    }

    /// The point shifted by a real chart tangent.
    pub fn shifted(&self, u: [f64; 2]) -> Self {
        Self {
            chart: self.chart,
            z: self.z + Complex64::new(u[0], u[1]),
        }
    }

    /// North-chart point on the unit sphere at `t = cos(theta)`, azimuth `phi`.
    pub fn from_sphere_coords(t: f64, phi: f64) -> Self {
        let r = libm::sqrt((1.0 - t) / (1.0 + t));
        let (s, c) = libm::sincos(phi);
        Self::north(Complex64::new(r * c, r * s))
    }
}

/// A smooth real function on the fiber, evaluated in chart coordinates.
pub trait FiberHamiltonian {
    fn value(&self, pt: &ChartPoint) -> f64;

    /// `(dw/dx, dw/dy)` in the chart of `pt`. Defaults to central differences.
    fn chart_gradient(&self, pt: &ChartPoint) -> [f64; 2] {
        let h = GRADIENT_FD_STEP;
        let dx = (self.value(&pt.shifted([h, 0.0])) - self.value(&pt.shifted([-h, 0.0]))) / (2.0 * h);
        let dy = (self.value(&pt.shifted([0.0, h])) - self.value(&pt.shifted([0.0, -h]))) / (2.0 * h);
        [dx, dy]
    }
}

impl<T: FiberHamiltonian + ?Sized> FiberHamiltonian for &T {
    fn value(&self, pt: &ChartPoint) -> f64 {
        (**self).value(pt)
    }

    fn chart_gradient(&self, pt: &ChartPoint) -> [f64; 2] {
        (**self).chart_gradient(pt)
    }
}

/// Linear function `a . x` of the embedded point; analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentHamiltonian {
    pub spec: OrbitSpec,
    pub a: [f64; 3],
}

impl FiberHamiltonian for MomentHamiltonian {
    fn value(&self, pt: &ChartPoint) -> f64 {
        dot(self.a, embed_point(&self.spec, pt))
    }

    fn chart_gradient(&self, pt: &ChartPoint) -> [f64; 2] {
        let (gx, gy) = embed_gradient(&self.spec, pt);
        [dot(self.a, gx), dot(self.a, gy)]
    }
}

/// Constant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantHamiltonian(pub f64);

impl FiberHamiltonian for ConstantHamiltonian {
    fn value(&self, _pt: &ChartPoint) -> f64 {
        self.0
    }

    fn chart_gradient(&self, _pt: &ChartPoint) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Pointwise product, gradient by the product rule.
#[derive(Debug, Clone, Copy)]
pub struct ProductHamiltonian<A, B>(pub A, pub B);

impl<A: FiberHamiltonian, B: FiberHamiltonian> FiberHamiltonian for ProductHamiltonian<A, B> {
    fn value(&self, pt: &ChartPoint) -> f64 {
        self.0.value(pt) * self.1.value(pt)
    }

    fn chart_gradient(&self, pt: &ChartPoint) -> [f64; 2] {
        let (a, b) = (self.0.value(pt), self.1.value(pt));
        let (ga, gb) = (self.0.chart_gradient(pt), self.1.chart_gradient(pt));
        [ga[0] * b + a * gb[0], ga[1] * b + a * gb[1]]
    }
}

/// Arbitrary function of the embedded point, gradient by central differences.
pub struct EmbeddedFn<F> {
    pub spec: OrbitSpec,
    pub f: F,
}

impl<F: Fn([f64; 3]) -> f64> FiberHamiltonian for EmbeddedFn<F> {
    fn value(&self, pt: &ChartPoint) -> f64 {
        (self.f)(embed_point(&self.spec, pt))
    }
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Point of the radius-`j` sphere in R^3.
pub fn embed_point(spec: &OrbitSpec, pt: &ChartPoint) -> [f64; 3] {
    let j = spec.j();
    let (x, y) = (pt.z.re, pt.z.im);
    let d = 1.0 + x * x + y * y;
    let r2 = x * x + y * y;
    match pt.chart {
        Chart::North => [j * 2.0 * x / d, j * 2.0 * y / d, j * (1.0 - r2) / d],
        Chart::South => [j * 2.0 * x / d, -j * 2.0 * y / d, j * (r2 - 1.0) / d],
    }
}

/// Partial derivatives of [`embed_point`] with respect to the chart's `x`, `y`.
pub fn embed_gradient(spec: &OrbitSpec, pt: &ChartPoint) -> ([f64; 3], [f64; 3]) {
    let j = spec.j();
    let (x, y) = (pt.z.re, pt.z.im);
    let d = 1.0 + x * x + y * y;
    let d2 = d * d;
    let gx = [
        j * (2.0 / d - 4.0 * x * x / d2),
        j * (-4.0 * x * y / d2),
        j * (-4.0 * x / d2),
    ];
    let gy = [
        j * (-4.0 * x * y / d2),
        j * (2.0 / d - 4.0 * y * y / d2),
        j * (-4.0 * y / d2),
    ];
    match pt.chart {
        Chart::North => (gx, gy),
        Chart::South => ([gx[0], -gx[1], -gx[2]], [gy[0], -gy[1], -gy[2]]),
    }
}

/// Coordinates of the orbit point in su(2)^*, dual to the `tau` basis.
pub fn coadjoint_point(spec: &OrbitSpec, pt: &ChartPoint) -> [f64; 3] {
    let x = embed_point(spec, pt);
    [ORBIT_AXIS[0] * x[0], ORBIT_AXIS[1] * x[1], ORBIT_AXIS[2] * x[2]]
}

/// Re-expresses a point in the other chart via `z -> 1/z`.
pub fn chart_transition(pt: &ChartPoint) -> Result<ChartPoint> {
    if pt.z == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleNotInOverlap);
    }
    Ok(ChartPoint {
        chart: pt.chart.opposite(),
        z: Complex64::new(1.0, 0.0) / pt.z,
    })
}

/// Symplectic geometry of the orbit under the frozen conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    pub spec: OrbitSpec,
    pub symplectic_sign: f64,
}

impl OrbitGeometry {
    pub fn new(spec: OrbitSpec) -> Self {
        Self {
            spec,
            symplectic_sign: SYMPLECTIC_SIGN,
        }
    }

    /// Coefficient of `dx ^ dy` in the chart of `pt`.
    pub fn symplectic_density(&self, pt: &ChartPoint) -> f64 {
        let d = 1.0 + pt.z.norm_sqr();
        self.symplectic_sign * 4.0 * self.spec.j() / (d * d)
    }

    pub fn symplectic_form_at(&self, pt: &ChartPoint, u1: [f64; 2], u2: [f64; 2]) -> f64 {
        self.symplectic_density(pt) * (u1[0] * u2[1] - u1[1] * u2[0])
    }

    /// Coefficient `c` of the holomorphic-frame potential `theta = c dz`.
    pub fn kahler_potential_at(&self, pt: &ChartPoint) -> Complex64 {
        let d = 1.0 + pt.z.norm_sqr();
        Complex64::new(0.0, -2.0 * self.spec.j()) * pt.z.conj() / d
    }

    /// `theta(u)` for a real chart tangent `u`.
    pub fn kahler_potential_on(&self, pt: &ChartPoint, u: [f64; 2]) -> Complex64 {
        self.kahler_potential_at(pt) * Complex64::new(u[0], u[1])
    }

    /// Real part of `theta` as a covector `(a_x, a_y)`; a real potential for
    /// `Omega_F` since the imaginary part of `theta` is exact.
    pub fn real_potential_at(&self, pt: &ChartPoint) -> [f64; 2] {
        let c = self.kahler_potential_at(pt);
        [c.re, -c.im]
    }

    /// Hamiltonian vector field of `w` at `pt`, in chart components.
    ///
    /// On the degenerate orbit `j = 0` the form vanishes and the field is
    /// taken to be zero.
    pub fn hamiltonian_field<H: FiberHamiltonian + ?Sized>(&self, w: &H, pt: &ChartPoint) -> [f64; 2] {
        let rho = self.symplectic_density(pt);
        if rho == 0.0 {
            return [0.0, 0.0];
        }
        let [wx, wy] = w.chart_gradient(pt);
        [-wy / rho, wx / rho]
    }

    /// `{w1, w2} = Omega_F(H_{w1}, H_{w2})`.
    pub fn poisson_bracket<A, B>(&self, w1: &A, w2: &B, pt: &ChartPoint) -> f64
    where
        A: FiberHamiltonian + ?Sized,
        B: FiberHamiltonian + ?Sized,
    {
        let x1 = self.hamiltonian_field(w1, pt);
        let x2 = self.hamiltonian_field(w2, pt);
        self.symplectic_form_at(pt, x1, x2)
    }
}

pub fn moment_hamiltonian(spec: &OrbitSpec, a: [f64; 3]) -> MomentHamiltonian {
    MomentHamiltonian { spec: *spec, a }
}

/// Orbit function of a Lie-algebra element: `w(x) = <x, xi>` with `x` the
/// coadjoint point.
pub fn pairing_hamiltonian(spec: &OrbitSpec, xi: [f64; 3]) -> MomentHamiltonian {
    moment_hamiltonian(
        spec,
        [ORBIT_AXIS[0] * xi[0], ORBIT_AXIS[1] * xi[1], ORBIT_AXIS[2] * xi[2]],
    )
}
