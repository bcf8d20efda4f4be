//! The group SU(2) and its Lie algebra in the basis `tau_a = -(i/2) sigma_a`.
//!
//! With this normalization `[tau_1, tau_2] = tau_3` (cyclically), so the Lie
//! bracket of coefficient triples is the cross product.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{cabs, ComplexMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Element `sum_a c_a tau_a` of su(2).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Su2(pub [f64; 3]);

impl Su2 {
    pub const ZERO: Su2 = Su2([0.0; 3]);

    pub fn basis(a: usize) -> Su2 {
        let mut c = [0.0; 3];
        c[a] = 1.0;
        Su2(c)
    }

    #[inline]
    pub fn coeffs(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.0;
        libm::sqrt(x * x + y * y + z * z)
    }

    /// Lie bracket; equals the cross product of coefficient triples.
    pub fn bracket(&self, other: &Su2) -> Su2 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Su2([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    /// The anti-Hermitian traceless 2x2 matrix `-(i/2) c . sigma`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let [c1, c2, c3] = self.0;
        let h = -0.5 * I;
        ComplexMatrix::new(
            2,
            2,
            alloc::vec![
                h * c3,
                h * Complex64::new(c1, -c2),
                h * Complex64::new(c1, c2),
                -h * c3,
            ],
        )
        .expect("2x2")
    }

    /// Reads coefficients back from a 2x2 matrix via `c_a = i tr(sigma_a X)`.
    /// Only the anti-Hermitian traceless part is kept.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Su2> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::invalid("su(2) elements are 2x2"));
        }
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let tr1 = b + c;
        let tr2 = I * b - I * c;
        let tr3 = a - d;
        Ok(Su2([(I * tr1).re, (I * tr2).re, (I * tr3).re]))
    }

    /// Closed-form exponential.
    pub fn exp(&self) -> Su2Group {
        let r = self.norm();
        if r == 0.0 {
            return Su2Group::IDENTITY;
        }
        let (s, c) = libm::sincos(0.5 * r);
        let [n1, n2, n3] = self.0.map(|x| x / r);
        Su2Group {
            a: Complex64::new(c, -s * n3),
            b: Complex64::new(-s * n2, -s * n1),
        }
    }
}

impl Add for Su2 {
    type Output = Su2;

    fn add(self, o: Su2) -> Su2 {
        Su2([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Su2 {
    type Output = Su2;

    fn sub(self, o: Su2) -> Su2 {
        self + (-o)
    }
}

impl Neg for Su2 {
    type Output = Su2;

    fn neg(self) -> Su2 {
        Su2(self.0.map(|x| -x))
    }
}

impl Mul<f64> for Su2 {
    type Output = Su2;

    fn mul(self, s: f64) -> Su2 {
        Su2(self.0.map(|x| x * s))
    }
}

/// `[[a, b], [-conj(b), conj(a)]]` with `|a|^2 + |b|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Group {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2Group {
    pub const IDENTITY: Su2Group = Su2Group {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    /// Validates a 2x2 matrix as a special-unitary element.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Su2Group> {
        const TOL: f64 = 1e-10;
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::invalid("SU(2) elements are 2x2"));
        }
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if cabs(det - Complex64::new(1.0, 0.0)) > TOL {
            return Err(Error::invalid("group element is not unimodular"));
        }
        if m.unitarity_deviation() > TOL {
            return Err(Error::invalid("group element is not unitary"));
        }
        Ok(Su2Group {
            a: m[(0, 0)],
            b: m[(0, 1)],
        })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(2, 2, alloc::vec![self.a, self.b, -self.b.conj(), self.a.conj()])
            .expect("2x2")
    }

    pub fn inverse(&self) -> Su2Group {
        Su2Group {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `g xi g^-1`.
    pub fn adjoint(&self, xi: &Su2) -> Su2 {
        let m = self.matrix();
        let conj = &(&m * &xi.to_matrix()) * &self.inverse().matrix();
        Su2::from_matrix(&conj).expect("2x2")
    }
}

impl Mul for Su2Group {
    type Output = Su2Group;

    fn mul(self, o: Su2Group) -> Su2Group {
        Su2Group {
            a: self.a * o.a - self.b * o.b.conj(),
            b: self.a * o.b + self.b * o.a.conj(),
        }
    }
}
