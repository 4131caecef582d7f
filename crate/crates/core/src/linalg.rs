//! Dense complex helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EIGEN_MAX_ITER: usize = 100_000;

/// `(A + A*) / 2`
pub fn real_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `(A - A*) / (2i)`
pub fn imag_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Only the Hermitian part of `a` is used, so tiny rounding asymmetries are harmless.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!("expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericFailure("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(real_part(a), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Rebuilds `V diag(f(λ)) V*` from an eigen-decomposition.
pub fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let s = f(lambda);
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * vectors.adjoint()
}

/// `|H|` for Hermitian `H`, via its spectral decomposition; the result is exactly Hermitian.
pub fn hermitian_abs(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    Ok(real_part(&spectral_map(&values, &vectors, f64::abs)))
}

/// Largest singular value, from the eigenvalues of `A* A`.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let gram = a.adjoint() * a;
    let (values, _) = hermitian_eigen(&gram)?;
    Ok(values.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact check: every entry equals the first entry of its diagonal.
pub fn is_toeplitz(a: &CMatrix) -> bool {
    let (r, c) = a.shape();
    (1..r).all(|i| (1..c).all(|j| a[(i, j)] == a[(i - 1, j - 1)]))
}

/// Exact entrywise check `A[i,j] == conj(A[j,i])`.
pub fn is_hermitian(a: &CMatrix) -> bool {
    a.is_square() && (0..a.nrows()).all(|i| (0..=i).all(|j| a[(i, j)] == a[(j, i)].conj()))
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Standard inner product `<x, y> = Σ x_i conj(y_i)`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parts_of_diagonal_phase() {
        let a = CMatrix::from_diagonal_element(2, 2, c(0.0, 1.0));
        assert_eq!(real_part(&a), CMatrix::zeros(2, 2));
        assert_eq!(imag_part(&a), CMatrix::identity(2, 2));
    }

    #[test]
    fn eigen_sorted_descending_and_orthonormal() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(0.5, 0.0),
                c(0.0, -1.0),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(0.5, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ],
        );
        let (values, vectors) = hermitian_eigen(&a).unwrap();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let gram = vectors.adjoint() * &vectors;
        assert!((gram - CMatrix::identity(3, 3)).norm() < 1e-12);
        let rebuilt = spectral_map(&values, &vectors, |x| x);
        assert!((rebuilt - a).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -3.0)]));
        assert!((spectral_norm(&a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn structure_predicates() {
        let t = CMatrix::from_fn(4, 4, |i, j| c(i as f64 - j as f64, 0.0));
        assert!(is_toeplitz(&t));
        assert!(!is_hermitian(&t));
        let h = CMatrix::from_fn(3, 3, |i, j| {
            let d = i as f64 - j as f64;
            c(1.0, d)
        });
        assert!(is_hermitian(&h));
        assert!(is_toeplitz(&h));
    }

    #[test]
    fn non_finite_is_numeric_failure() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(hermitian_eigen(&a), Err(Error::NumericFailure(_))));
    }
}
