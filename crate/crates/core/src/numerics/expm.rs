use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its Frobenius norm is at most 1/2;
/// the series is summed until the next term falls below `1e-18` of the sum,
/// then squared back `s` times.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::invalid("matrix exponential of a non-square matrix"));
    }
    let n = m.rows();
    let norm = m.norm_fro();
    let mut s = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        s += 1;
    }
    let a = m.scale_real(libm::ldexp(1.0, -(s as i32)));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = (&term * &a).scale_real(1.0 / k as f64);
        sum += &term;
        if term.norm_fro() <= 1e-18 * sum.norm_fro() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    Ok(sum)
}
