use core::ops::{Mul, Sub};

use crate::error::{Error, Result};

/// Step used for derivatives of matrix-valued transition data.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Symmetric difference quotient `(f(x + h) - f(x - h)) / 2h`; error `O(h^2)`.
pub fn central_difference<T, F>(mut f: F, x: f64, h: f64) -> Result<T>
where
    F: FnMut(f64) -> T,
    T: Sub<Output = T> + Mul<f64, Output = T>,
{
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let hi = f(x + h);
    let lo = f(x - h);
    Ok((hi - lo) * (0.5 / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexMatrix;

    #[test]
    fn quadratic_is_exact() {
        let d = central_difference(|x: f64| x * x, 1.0, 1e-5).unwrap();
        assert!((d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sine_at_zero() {
        let d = central_difference(libm::sin, 0.0, 1e-5).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_gives_exact_zero() {
        assert_eq!(central_difference(|_| 3.25, 0.7, 1e-5).unwrap(), 0.0);
        let m = central_difference(|_| ComplexMatrix::identity(2), 0.0, 1e-3).unwrap();
        assert_eq!(m.max_abs(), 0.0);
    }

    #[test]
    fn non_positive_step_rejected() {
        assert!(central_difference(|x: f64| x, 0.0, 0.0).is_err());
        assert!(central_difference(|x: f64| x, 0.0, -1.0).is_err());
        assert!(central_difference(|x: f64| x, 0.0, f64::NAN).is_err());
    }
}
