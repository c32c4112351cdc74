use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64};

/// Norm bound (1-norm) below which the Taylor kernel is applied directly.
const SQUARING_THRESHOLD: f64 = 0.5;
const MAX_TAYLOR_DEGREE: usize = 30;

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 0.5, the
/// truncated Taylor series is evaluated with the Paterson–Stockmeyer scheme
/// at the lowest degree whose remainder bound is below `tol 2^-s`, and the
/// result is squared `s` times.
pub fn matrix_exp(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "matrix_exp of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("matrix_exp tolerance {tol} must be positive")));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("matrix_exp of a non-finite matrix".into()));
    }
    let norm = a.norm_one();
    let squarings = if norm > SQUARING_THRESHOLD {
        (norm / SQUARING_THRESHOLD).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale_real((0.5_f64).powi(squarings as i32));
    let scaled_norm = norm * (0.5_f64).powi(squarings as i32);
    // Each squaring doubles the relative error of the kernel.
    let degree = taylor_degree(scaled_norm, tol * (0.5_f64).powi(squarings as i32));
    let mut result = taylor_paterson_stockmeyer(&scaled, degree);
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Smallest degree `m` with `x^(m+1)/(m+1)! * 1/(1 - x/(m+2)) <= tol * e^-x`.
fn taylor_degree(x: f64, tol: f64) -> usize {
    if x == 0.0 {
        return 1;
    }
    let target = tol * (-x).exp();
    let mut term = x; // x^(m+1)/(m+1)! for m = 0
    for m in 1..=MAX_TAYLOR_DEGREE {
        term *= x / (m + 1) as f64;
        let tail = term / (1.0 - x / (m + 2) as f64);
        if tail <= target {
            return m;
        }
    }
    MAX_TAYLOR_DEGREE
}

fn taylor_paterson_stockmeyer(a: &ComplexMatrix, degree: usize) -> ComplexMatrix {
    let n = a.rows();
    let block = (degree as f64).sqrt().ceil().max(1.0) as usize;
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut c = 1.0;
    for k in 0..=degree {
        if k > 0 {
            c /= k as f64;
        }
        coeffs.push(c);
    }

    // powers[i] = A^i for i in 0..=block
    let mut powers = Vec::with_capacity(block + 1);
    powers.push(ComplexMatrix::identity(n));
    powers.push(a.clone());
    for i in 2..=block {
        let next = powers[i - 1].matmul(a);
        powers.push(next);
    }

    let chunks = degree / block;
    let chunk_poly = |j: usize| {
        let mut acc = ComplexMatrix::zeros(n, n);
        for i in 0..block {
            let k = j * block + i;
            if k > degree {
                break;
            }
            acc.axpy(C64::new(coeffs[k], 0.0), &powers[i]);
        }
        acc
    };

    let mut acc = chunk_poly(chunks);
    for j in (0..chunks).rev() {
        acc = acc.matmul(&powers[block]);
        acc += &chunk_poly(j);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{I, ONE, ZERO};

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&ComplexMatrix::zeros(4, 4), 1e-12).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);
    }

    #[test]
    fn exp_of_diagonal() {
        let d = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-2.0, 0.0)]);
        let e = matrix_exp(&d, 1e-12).unwrap();
        assert!((e[(0, 0)].re - 1f64.exp()).abs() < 1e-12 * 1f64.exp());
        assert!((e[(1, 1)].re - (-2f64).exp()).abs() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn exp_of_rotation_generator() {
        let theta = std::f64::consts::FRAC_PI_4;
        let sx = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let e = matrix_exp(&sx.scale(-I * theta), 1e-12).unwrap();
        let expected = &ComplexMatrix::identity(2).scale_real(theta.cos()) - &sx.scale(I * theta.sin());
        assert!(e.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn large_norm_scalar() {
        let a = ComplexMatrix::diagonal(&[C64::new(-30.0, 5.0)]);
        let e = matrix_exp(&a, 1e-12).unwrap();
        let expected = C64::new(-30.0, 5.0).exp();
        assert!((e[(0, 0)] - expected).norm() <= 1e-12 * expected.norm());
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(matrix_exp(&ComplexMatrix::zeros(2, 3), 1e-12), Err(Error::Dimension(_))));
    }

    #[test]
    fn degree_grows_with_tighter_tolerance() {
        assert!(taylor_degree(0.5, 1e-16) > taylor_degree(0.5, 1e-6));
        assert!(taylor_degree(0.5, 1e-12) <= MAX_TAYLOR_DEGREE);
    }
}
