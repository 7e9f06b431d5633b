//! Schmidt purity from singular values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::jsa::JsaMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum SvdError {
    #[error("singular value decomposition did not converge")]
    NoConvergence,
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("{len} values do not fill a {rows}x{cols} matrix")]
    Shape { rows: usize, cols: usize, len: usize },
}

/// Singular values of a row-major `rows × cols` complex matrix, descending.
pub fn singular_values(values: &[Complex64], rows: usize, cols: usize) -> Result<Vec<f64>, SvdError> {
    if values.len() != rows * cols {
        return Err(SvdError::Shape {
            rows,
            cols,
            len: values.len(),
        });
    }
    let m = DMatrix::from_row_slice(rows, cols, values);
    let svd = m.try_svd(false, false, f64::EPSILON, 10_000).ok_or(SvdError::NoConvergence)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `Σσ⁴ / (Σσ²)²`.
pub fn purity_from_singular_values(s: &[f64]) -> Result<f64, SvdError> {
    let s2: f64 = s.iter().map(|x| x * x).sum();
    if s2 == 0.0 {
        return Err(SvdError::ZeroMatrix);
    }
    let s4: f64 = s.iter().map(|x| x.powi(4)).sum();
    Ok(s4 / (s2 * s2))
}

pub fn svd_purity(v: &JsaMatrix) -> Result<f64, SvdError> {
    purity_from_singular_values(&singular_values(v.values(), v.rows(), v.cols())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rank_one_and_two_mode() {
        let x = [1.0, -2.0, 0.5];
        let y = [Complex64::new(0.3, 1.0), Complex64::new(-1.0, 0.2)];
        let outer: Vec<Complex64> = x.iter().flat_map(|&a| y.iter().map(move |&b| b * a)).collect();
        let s = singular_values(&outer, 3, 2).unwrap();
        assert!(s[1] < 1e-12 * s[0]);
        assert_relative_eq!(purity_from_singular_values(&s).unwrap(), 1.0, max_relative = 1e-12);

        let mut diag = vec![Complex64::default(); 9];
        diag[0] = Complex64::new(2.0, 0.0);
        diag[4] = Complex64::new(0.0, 2.0);
        let s = singular_values(&diag, 3, 3).unwrap();
        assert_relative_eq!(purity_from_singular_values(&s).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            purity_from_singular_values(&singular_values(&[Complex64::default(); 4], 2, 2).unwrap()),
            Err(SvdError::ZeroMatrix)
        );
        assert!(matches!(singular_values(&[Complex64::default(); 3], 2, 2), Err(SvdError::Shape { .. })));
    }
}
