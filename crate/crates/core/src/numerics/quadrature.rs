//! Gauss–Legendre and product rules on the sphere.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// One-dimensional rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// A rule on the sphere in `(t, phi)` with `t = cos(theta)`.
///
/// Weights carry the area element `dt dphi`, so they sum to `4 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub n_t: usize,
    pub n_phi: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&(t, phi), &w)| w * f(t, phi))
            .sum()
    }

    pub fn integrate_complex(
        &self,
        mut f: impl FnMut(f64, f64) -> num_complex::Complex64,
    ) -> num_complex::Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&(t, phi), &w)| f(t, phi) * w)
            .sum()
    }
}

/// `n`-point Gauss–Legendre rule, exact through degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule1D> {
    if n == 0 {
        return Err(Error::invalid("Gauss-Legendre rule needs at least one node"));
    }
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, then Newton on P_n
        let k = (i + 1) as f64;
        let nf = n as f64;
        let mut x = libm::cos(PI * (k - 0.25) / (nf + 0.5))
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Product rule: Gauss–Legendre in `t = cos(theta)` times the uniform
/// trapezoid in `phi`.
///
/// Exact for integrands whose azimuthal Fourier modes are below `n_phi` in
/// absolute value and whose `t`-dependence is a polynomial of degree at most
/// `2 n_t - 1`.
pub fn sphere_rule(n_t: usize, n_phi: usize) -> Result<QuadratureRule> {
    if n_t == 0 || n_phi == 0 {
        return Err(Error::invalid("sphere rule sizes must be positive"));
    }
    let gl = gauss_legendre(n_t)?;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_t * n_phi);
    let mut weights = Vec::with_capacity(n_t * n_phi);
    for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
        for k in 0..n_phi {
            nodes.push((t, dphi * k as f64));
            weights.push(wt * dphi);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        n_t,
        n_phi,
    })
}
