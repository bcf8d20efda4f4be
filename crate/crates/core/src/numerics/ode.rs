use alloc::vec::Vec;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// `n + 1` equally spaced points from `a` to `b`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    (0..=n).map(|k| if k == n { b } else { a + h * k as f64 }).collect()
}

/// One classical RK4 step of `y' = field(t, y)` from `t` to `t + h`.
pub fn rk4_step<F>(field: &mut F, t: f64, y: &ComplexMatrix, h: f64) -> ComplexMatrix
where
    F: FnMut(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let k1 = field(t, y);
    let mut y2 = y.clone();
    y2.axpy((0.5 * h).into(), &k1);
    let k2 = field(t + 0.5 * h, &y2);
    let mut y3 = y.clone();
    y3.axpy((0.5 * h).into(), &k2);
    let k3 = field(t + 0.5 * h, &y3);
    let mut y4 = y.clone();
    y4.axpy(h.into(), &k3);
    let k4 = field(t + h, &y4);

    let mut out = y.clone();
    out.axpy((h / 6.0).into(), &k1);
    out.axpy((h / 3.0).into(), &k2);
    out.axpy((h / 3.0).into(), &k3);
    out.axpy((h / 6.0).into(), &k4);
    out
}

/// Fixed-step classical RK4 over `t_grid`, returning the value at the last
/// grid point.
pub fn rk4_integrate<F>(mut field: F, y0: &ComplexMatrix, t_grid: &[f64]) -> Result<ComplexMatrix>
where
    F: FnMut(f64, &ComplexMatrix) -> ComplexMatrix,
{
    if t_grid.len() < 2 {
        return Err(Error::invalid("time grid needs at least two points"));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    let mut y = y0.clone();
    for w in t_grid.windows(2) {
        y = rk4_step(&mut field, w[0], &y, w[1] - w[0]);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_diag(&[Complex64::new(x, 0.0)])
    }

    #[test]
    fn zero_field_keeps_identity() {
        let y = rk4_integrate(|_, y| ComplexMatrix::zeros(y.rows(), y.cols()), &ComplexMatrix::identity(3), &uniform_grid(0.0, 1.0, 10)).unwrap();
        assert_eq!(y, ComplexMatrix::identity(3));
    }

    #[test]
    fn exponential_growth() {
        let y = rk4_integrate(|_, y| y.clone(), &scalar(1.0), &uniform_grid(0.0, 1.0, 100)).unwrap();
        assert!((y[(0, 0)].re - core::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        // y' = cos(t) y, y(0) = 1, exact y(2) = exp(sin 2)
        let exact = libm::exp(libm::sin(2.0));
        let err = |n| {
            let y = rk4_integrate(|t, y| y.scale_real(libm::cos(t)), &scalar(1.0), &uniform_grid(0.0, 2.0, n)).unwrap();
            (y[(0, 0)].re - exact).abs()
        };
        let ratio = err(20) / err(40);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn bad_grids_rejected() {
        let y0 = scalar(1.0);
        assert!(rk4_integrate(|_, y| y.clone(), &y0, &[0.0]).is_err());
        assert!(rk4_integrate(|_, y| y.clone(), &y0, &[0.0, 1.0, 1.0]).is_err());
        assert!(rk4_integrate(|_, y| y.clone(), &y0, &[0.0, -1.0]).is_err());
    }
}
