//! Eigenvalues of small Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The `n x n` Hermitian `H = S + iT` is embedded as the real symmetric
/// `[[S, -T], [T, S]]`, whose spectrum is that of `H` with every eigenvalue
/// doubled; cyclic Jacobi sweeps diagonalize the embedding.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::invalid("eigenvalues of a non-square matrix"));
    }
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize so tiny anti-Hermitian noise cannot stall the sweeps
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(&mut a, m);
    let mut eig: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

fn jacobi_symmetric(a: &mut [f64], m: usize) {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off <= 1e-30 * scale {
            return;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn pauli_y_has_unit_spectrum() {
        let i = Complex64::new(0.0, 1.0);
        let sy = ComplexMatrix::new(2, 2, vec![Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)]).unwrap();
        let e = hermitian_eigenvalues(&sy).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_sorted() {
        let d = ComplexMatrix::from_real_rows(&[[3.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, 0.5]]);
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![-2.0, 0.5, 3.0]);
    }
}
