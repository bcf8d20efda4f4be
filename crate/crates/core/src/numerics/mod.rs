//! Shared numerical kernels.
//!
//! Everything here is deterministic: identical inputs give bit-identical
//! outputs, since no kernel reorders its floating-point reductions.

mod diff;
mod eigen;
mod expm;
mod matrix;
mod ode;
mod quadrature;

pub use diff::{central_difference, DEFAULT_FD_STEP};
pub use eigen::hermitian_eigenvalues;
pub use expm::matrix_exp;
pub use matrix::ComplexMatrix;
pub use ode::{rk4_integrate, rk4_step, uniform_grid};
pub use quadrature::{gauss_legendre, sphere_rule, QuadratureRule, QuadratureRule1D};

use num_complex::Complex64;

/// `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = libm::sincos(theta);
    Complex64::new(c, s)
}

/// Complex exponential.
#[inline]
pub fn cexp(z: Complex64) -> Complex64 {
    cis(z.im) * libm::exp(z.re)
}

/// `|z|`.
#[inline]
pub fn cabs(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Integer power of a complex number by repeated squaring.
pub fn cpowi(z: Complex64, mut k: u32) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc)
}
