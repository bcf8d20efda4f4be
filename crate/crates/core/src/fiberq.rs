//! The quantum fiber `Q(F)`: holomorphic sections of the prequantum line
//! bundle over the orbit, written in the North holomorphic frame as
//! polynomials of degree at most `2j`.
//!
//! The inner product is
//!
//! ```text
//! <f | g> = ((2j + 1) / pi) * integral conj(f) g (1 + |z|^2)^-(2j + 2) dA
//! ```
//!
//! under which the monomials are orthogonal with `|z^k|^2 = 1 / C(2j, k)`.
//! On the sphere rule this measure is `(2j+1)/(4 pi) ((1+t)/2)^(2j) dt dphi`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{binomial, cpowi, ComplexMatrix, QuadratureRule};
use crate::orbit::{ChartPoint, FiberHamiltonian, OrbitGeometry, OrbitSpec};
use crate::su2::Su2Group;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on the quadrature Gram against its closed form.
pub const GRAM_TOL: f64 = 1e-8;

/// Tolerance on the Hermiticity of assembled prequantization matrices.
pub const HERMITICITY_TOL: f64 = 1e-8;

/// A quadrature node with the fiber measure folded into its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberNode {
    pub pt: ChartPoint,
    pub weight: f64,
}

/// Nodes of `rule` as North-chart points, weighted by the fiber measure.
pub fn fiber_nodes(spec: &OrbitSpec, rule: &QuadratureRule) -> Vec<FiberNode> {
    let two_j = spec.two_j;
    let pref = (two_j as f64 + 1.0) / (4.0 * core::f64::consts::PI);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&(t, phi), &w)| FiberNode {
            pt: ChartPoint::from_sphere_coords(t, phi),
            weight: w * pref * libm::pow(0.5 * (1.0 + t), two_j as f64),
        })
        .collect()
}

/// Closed-form Gram entry `<z^k | z^k> = 1 / C(2j, k)`.
pub fn monomial_norm_sq(spec: &OrbitSpec, k: u32) -> f64 {
    1.0 / binomial(spec.two_j, k)
}

/// Orthonormalized monomial basis `phi_k = z^k / |z^k|`, `k = 0..=2j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberBasis {
    pub spec: OrbitSpec,
    /// `|z^k|` under the quadrature inner product.
    pub norms: Vec<f64>,
    /// Quadrature Gram matrix of the raw monomials.
    pub gram: ComplexMatrix,
}

impl FiberBasis {
    #[inline]
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `phi_k(z)` in the North holomorphic frame.
    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        cpowi(z, k as u32) / self.norms[k]
    }

    /// `phi_k'(z)`.
    pub fn eval_derivative(&self, k: usize, z: Complex64) -> Complex64 {
        if k == 0 {
            ZERO
        } else {
            cpowi(z, k as u32 - 1) * (k as f64 / self.norms[k])
        }
    }

    /// All basis functions at `z`.
    pub fn eval_all(&self, z: Complex64) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.eval(k, z)).collect()
    }

    /// The section `sum_mu psi_mu phi_mu` at `z`.
    pub fn section_at(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        coeffs.iter().enumerate().map(|(k, c)| c * self.eval(k, z)).sum()
    }

    /// `max |gram - closed form| / closed form` over all entries.
    pub fn gram_relative_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let exact = monomial_norm_sq(&self.spec, a as u32);
            for b in 0..n {
                let want = if a == b { exact } else { 0.0 };
                let err = crate::numerics::cabs(self.gram[(a, b)] - want) / exact;
                worst = worst.max(err);
            }
        }
        worst
    }
}

/// Coefficients of a polarized section in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSection {
    pub coefficients: Vec<Complex64>,
}

impl FiberSection {
    pub fn new(spec: &OrbitSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != spec.dim() {
            return Err(Error::invalid("section length must be 2j + 1"));
        }
        Ok(Self { coefficients })
    }
}

/// Computes the Gram matrix of the monomials by quadrature and returns the
/// orthonormalized basis.
///
/// Fails with an accuracy error when the rule under-resolves the Gram.
pub fn build_basis(spec: &OrbitSpec, rule: &QuadratureRule) -> Result<FiberBasis> {
    let n = spec.dim();
    let nodes = fiber_nodes(spec, rule);
    let mut gram = ComplexMatrix::zeros(n, n);
    let mut powers = vec![ZERO; n];
    for node in &nodes {
        let z = node.pt.z;
        let mut p = Complex64::new(1.0, 0.0);
        for slot in powers.iter_mut() {
            *slot = p;
            p *= z;
        }
        for a in 0..n {
            let ca = powers[a].conj() * node.weight;
            for b in 0..n {
                gram[(a, b)] += ca * powers[b];
            }
        }
    }
    let norms = (0..n).map(|k| libm::sqrt(gram[(k, k)].re.max(0.0))).collect();
    let basis = FiberBasis {
        spec: *spec,
        norms,
        gram,
    };
    let err = basis.gram_relative_error();
    if !(err <= GRAM_TOL) {
        return Err(Error::accuracy("monomial Gram matrix", err, GRAM_TOL));
    }
    Ok(basis)
}

/// Geometry, basis and quadrature rule of one fiber, built together.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumFiber {
    pub geom: OrbitGeometry,
    pub basis: FiberBasis,
    pub rule: QuadratureRule,
}

impl QuantumFiber {
    /// Fiber with the default rule sizes for its spin.
    pub fn new(spec: OrbitSpec) -> Result<Self> {
        let (n_t, n_phi) = crate::conventions::default_rule_sizes(spec.two_j);
        Self::with_rule(spec, n_t, n_phi)
    }

    pub fn with_rule(spec: OrbitSpec, n_t: usize, n_phi: usize) -> Result<Self> {
        let rule = crate::numerics::sphere_rule(n_t, n_phi)?;
        let basis = build_basis(&spec, &rule)?;
        Ok(Self {
            geom: OrbitGeometry::new(spec),
            basis,
            rule,
        })
    }

    #[inline]
    pub fn spec(&self) -> OrbitSpec {
        self.basis.spec
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn prequant<H: FiberHamiltonian + ?Sized>(&self, w: &H) -> Result<PrequantOperator> {
        prequant_matrix(&self.geom, &self.basis, w, &self.rule)
    }

    pub fn polarization_residual<H: FiberHamiltonian + ?Sized>(&self, w: &H) -> f64 {
        polarization_residual(&self.geom, &self.basis, w, &self.rule)
    }

    pub fn transition(&self, g: &Su2Group) -> ComplexMatrix {
        quantize_group(&self.basis, g)
    }
}

/// `O(w) = -i H_w - theta(H_w) + w` as an `n x n` matrix
/// `M[nu][mu] = <phi_nu | O(w) phi_mu>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrequantOperator {
    pub matrix: ComplexMatrix,
}

/// Values of `O(w) phi_mu` at one node, for every `mu`.
fn apply_prequant<H: FiberHamiltonian + ?Sized>(
    geom: &OrbitGeometry,
    basis: &FiberBasis,
    w: &H,
    pt: &ChartPoint,
    out: &mut [Complex64],
) {
    let field = geom.hamiltonian_field(w, pt);
    let xz = Complex64::new(field[0], field[1]);
    let theta_x = geom.kahler_potential_at(pt) * xz;
    let value = w.value(pt);
    let z = pt.z;
    for (mu, slot) in out.iter_mut().enumerate() {
        let phi = basis.eval(mu, z);
        let dphi = basis.eval_derivative(mu, z);
        // H_w acts on holomorphic phi as phi'(z) dz(H_w)
        *slot = -I * dphi * xz - theta_x * phi + phi * value;
    }
}

/// Assembles the prequantization matrix of `w` by quadrature.
///
/// On the degenerate orbit `j = 0` the only section is constant and `O(w)`
/// reduces to the mean of `w`.
pub fn prequant_matrix<H: FiberHamiltonian + ?Sized>(
    geom: &OrbitGeometry,
    basis: &FiberBasis,
    w: &H,
    rule: &QuadratureRule,
) -> Result<PrequantOperator> {
    let spec = &basis.spec;
    let n = spec.dim();
    let nodes = fiber_nodes(spec, rule);
    if spec.two_j == 0 {
        let mean: f64 = nodes.iter().map(|nd| nd.weight * w.value(&nd.pt)).sum();
        return Ok(PrequantOperator {
            matrix: ComplexMatrix::from_diag(&[Complex64::new(mean, 0.0)]),
        });
    }
    let mut matrix = ComplexMatrix::zeros(n, n);
    let mut applied = vec![ZERO; n];
    for node in &nodes {
        apply_prequant(geom, basis, w, &node.pt, &mut applied);
        for nu in 0..n {
            let bra = basis.eval(nu, node.pt.z).conj() * node.weight;
            for mu in 0..n {
                matrix[(nu, mu)] += bra * applied[mu];
            }
        }
    }
    let dev = matrix.hermiticity_deviation();
    if !(dev <= HERMITICITY_TOL) {
        return Err(Error::accuracy("Hermiticity of the prequantization matrix", dev, HERMITICITY_TOL));
    }
    Ok(PrequantOperator { matrix })
}

/// Largest L^2 distance from `O(w) phi_mu` to `Q(F)` over the basis.
///
/// The complement of `Q(F)` is taken inside the space of all square-integrable
/// sections sampled on the quadrature nodes: the residual function
/// `O(w) phi_mu - sum_nu <phi_nu|O(w) phi_mu> phi_nu` is formed pointwise and
/// its norm integrated. A polarization-preserving `O(w)` gives a residual at
/// rounding level.
pub fn polarization_residual<H: FiberHamiltonian + ?Sized>(
    geom: &OrbitGeometry,
    basis: &FiberBasis,
    w: &H,
    rule: &QuadratureRule,
) -> f64 {
    let spec = &basis.spec;
    let n = spec.dim();
    if spec.two_j == 0 {
        return 0.0;
    }
    let nodes = fiber_nodes(spec, rule);
    let mut values = Vec::with_capacity(nodes.len());
    let mut phis = Vec::with_capacity(nodes.len());
    let mut coeffs = ComplexMatrix::zeros(n, n);
    for node in &nodes {
        let mut applied = vec![ZERO; n];
        apply_prequant(geom, basis, w, &node.pt, &mut applied);
        let phi = basis.eval_all(node.pt.z);
        for nu in 0..n {
            let bra = phi[nu].conj() * node.weight;
            for mu in 0..n {
                coeffs[(nu, mu)] += bra * applied[mu];
            }
        }
        values.push(applied);
        phis.push(phi);
    }
    let mut worst: f64 = 0.0;
    for mu in 0..n {
        let mut norm_sq = 0.0;
        for ((node, applied), phi) in nodes.iter().zip(&values).zip(&phis) {
            let projected: Complex64 = (0..n).map(|nu| coeffs[(nu, mu)] * phi[nu]).sum();
            norm_sq += node.weight * (applied[mu] - projected).norm_sqr();
        }
        worst = worst.max(libm::sqrt(norm_sq));
    }
    worst
}

/// Quantization of a fiber transition `g in SU(2)`.
///
/// The matrix uses the row convention of the transport equation: the section
/// `sum_mu psi_mu phi_mu` is carried to `sum_nu (psi X)_nu phi_nu`, and
/// `X(g1 g2) = X(g1) X(g2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTransition {
    pub group: Su2Group,
    pub matrix: ComplexMatrix,
}

/// Lifts `g = [[a, b], [-conj b, conj a]]` to `Q(F)` by substitution with the
/// automorphy factor:
/// `p(z) -> (-conj(b) z + conj(a))^(2j) p((a z + b) / (-conj(b) z + conj(a)))`.
pub fn quantize_transition(basis: &FiberBasis, g: &ComplexMatrix) -> Result<QuantizedTransition> {
    let group = Su2Group::from_matrix(g)?;
    Ok(QuantizedTransition {
        group,
        matrix: quantize_group(basis, &group),
    })
}

/// [`quantize_transition`] for an already validated group element.
pub fn quantize_group(basis: &FiberBasis, g: &Su2Group) -> ComplexMatrix {
    let two_j = basis.spec.two_j as usize;
    let n = two_j + 1;
    let (a, b) = (g.a, g.b);
    let lin = [b, a];
    let auto = [a.conj(), -b.conj()];
    let mut x = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        // (a z + b)^k (-conj(b) z + conj(a))^(2j - k), coefficients low to high
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..k {
            poly = poly_mul(&poly, &lin);
        }
        for _ in k..two_j {
            poly = poly_mul(&poly, &auto);
        }
        for (m, c) in poly.iter().enumerate() {
            x[(k, m)] = c * (basis.norms[m] / basis.norms[k]);
        }
    }
    x
}

fn poly_mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::default_rule_sizes;
    use crate::numerics::{cis, sphere_rule};
    use crate::orbit::{moment_hamiltonian, ConstantHamiltonian, ProductHamiltonian};
    use crate::su2::Su2;

    fn setup(two_j: u32) -> (OrbitGeometry, FiberBasis, QuadratureRule) {
        let spec = OrbitSpec::new(two_j);
        let (nt, np) = default_rule_sizes(two_j);
        let rule = sphere_rule(nt, np).unwrap();
        let basis = build_basis(&spec, &rule).unwrap();
        (OrbitGeometry::new(spec), basis, rule)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gram_examples() {
        let (_, b0, _) = setup(0);
        assert!((b0.gram[(0, 0)].re - 1.0).abs() < 1e-14);
        let (_, b1, _) = setup(1);
        assert!((&b1.gram - &ComplexMatrix::identity(2)).max_abs() < 1e-13);
        let (_, b2, _) = setup(2);
        let want = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        assert!((&b2.gram - &want).max_abs() < 1e-13);
    }

    #[test]
    fn under_resolved_rule_is_an_accuracy_failure() {
        let spec = OrbitSpec::new(6);
        let rule = sphere_rule(2, 3).unwrap();
        assert!(matches!(build_basis(&spec, &rule), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn constant_hamiltonian_is_scalar() {
        let (g, b, r) = setup(3);
        let o = prequant_matrix(&g, &b, &ConstantHamiltonian(1.75), &r).unwrap();
        let want = ComplexMatrix::identity(4).scale_real(1.75);
        assert!((&o.matrix - &want).max_abs() < 1e-12);
        assert!(polarization_residual(&g, &b, &ConstantHamiltonian(1.75), &r) < 1e-12);
    }

    #[test]
    fn spin_half_examples() {
        let (g, b, r) = setup(1);
        let o3 = prequant_matrix(&g, &b, &moment_hamiltonian(&b.spec, [0.0, 0.0, 1.0]), &r).unwrap();
        let want3 = ComplexMatrix::from_diag(&[c(0.5, 0.0), c(-0.5, 0.0)]);
        assert!((&o3.matrix - &want3).max_abs() < 1e-12);
        let o1 = prequant_matrix(&g, &b, &moment_hamiltonian(&b.spec, [1.0, 0.0, 0.0]), &r).unwrap();
        let want1 = ComplexMatrix::from_real_rows(&[[0.0, 0.5], [0.5, 0.0]]);
        assert!((&o1.matrix - &want1).max_abs() < 1e-12);
    }

    #[test]
    fn moment_operators_are_diagonal_down_the_monomials() {
        for two_j in 0..=6 {
            let (g, b, r) = setup(two_j);
            let o = prequant_matrix(&g, &b, &moment_hamiltonian(&b.spec, [0.0, 0.0, 1.0]), &r).unwrap();
            let j = b.spec.j();
            let want: Vec<Complex64> = (0..b.dim()).map(|k| c(j - k as f64, 0.0)).collect();
            assert!((&o.matrix - &ComplexMatrix::from_diag(&want)).max_abs() < 1e-11, "two_j={two_j}");
        }
    }

    #[test]
    fn quadratic_hamiltonian_leaks_out_of_the_polarization() {
        let (g, b, r) = setup(2);
        let h3 = moment_hamiltonian(&b.spec, [0.0, 0.0, 1.0]);
        let moment = polarization_residual(&g, &b, &h3, &r);
        let quad = polarization_residual(&g, &b, &ProductHamiltonian(h3, h3), &r);
        assert!(moment <= 1e-8, "{moment}");
        assert!(quad >= 1e3 * moment.max(1e-12), "{quad} vs {moment}");
    }

    #[test]
    fn transition_examples() {
        let (_, b, _) = setup(3);
        let id = quantize_transition(&b, &ComplexMatrix::identity(2)).unwrap();
        assert!((&id.matrix - &ComplexMatrix::identity(4)).max_abs() < 1e-15);

        let t = 0.83;
        let g = ComplexMatrix::from_diag(&[cis(t / 2.0), cis(-t / 2.0)]);
        let x = quantize_transition(&b, &g).unwrap().matrix;
        let j = b.spec.j();
        // z^k picks up a^k conj(a)^(2j-k), so the phase runs opposite to m
        let want: Vec<Complex64> = (0..4).map(|k| cis(-(j - k as f64) * t)).collect();
        assert!((&x - &ComplexMatrix::from_diag(&want)).max_abs() < 1e-14);
        let x3 = quantize_group(&b, &Su2([0.0, 0.0, t]).exp());
        let want3: Vec<Complex64> = (0..4).map(|k| cis((j - k as f64) * t)).collect();
        assert!((&x3 - &ComplexMatrix::from_diag(&want3)).max_abs() < 1e-14);

        let (_, b1, _) = setup(1);
        let flip = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let x = quantize_transition(&b1, &flip).unwrap().matrix;
        assert!((&x - &ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]])).max_abs() < 1e-15);
    }

    #[test]
    fn non_unimodular_transition_rejected() {
        let (_, b, _) = setup(2);
        let g = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, 1.0)]);
        assert!(matches!(quantize_transition(&b, &g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn transitions_are_unitary() {
        let (_, b, _) = setup(5);
        let g = Su2([0.4, -2.2, 1.3]).exp();
        assert!(quantize_group(&b, &g).unitarity_deviation() < 1e-12);
    }

    #[test]
    fn section_length_checked() {
        let spec = OrbitSpec::new(2);
        assert!(FiberSection::new(&spec, vec![ZERO; 2]).is_err());
        assert!(FiberSection::new(&spec, vec![ZERO; 3]).is_ok());
    }
}
