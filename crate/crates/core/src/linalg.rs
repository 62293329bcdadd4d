//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`. The Hermitian
//! eigensolver is nalgebra's Householder tridiagonalisation + implicit QR;
//! this module only fixes the output ordering and phases.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Tolerance for Hermiticity, unitarity and normalisation checks.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance for quantities produced by decompositions or repeated products.
pub const DECOMP_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    a.kronecker(b)
}

pub fn outer(a: &Vector, b: &Vector) -> Matrix {
    a * b.adjoint()
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermitian_deviation(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `U†U − I`.
pub fn unitary_deviation(u: &Matrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs(&(prod - identity(u.nrows())))
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
///
/// Each eigenvector is rotated so that its first component with modulus above
/// 1e-9 is real and positive. Eigenvalues closer than 1e-10 form a tie, and
/// ties are ordered by the position of that leading component, then by its
/// modulus (larger first).
pub fn hermitian_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let dev = hermitian_deviation(m);
    if dev > STATE_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.nrows();
    let eig = symmetrize(m)
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::NotHermitian(f64::NAN))?;

    struct Entry {
        value: f64,
        lead: usize,
        lead_mod: f64,
        column: Vector,
    }

    let mut entries: Vec<Entry> = (0..n)
        .map(|k| {
            let mut column: Vector = eig.eigenvectors.column(k).into_owned();
            let lead = column.iter().position(|z| z.norm() > 1e-9).unwrap_or(0);
            let pivot = column[lead];
            if pivot.norm() > 0.0 {
                let phase = pivot.conj() / pivot.norm();
                column *= phase;
            }
            let norm = column.norm();
            if norm > 0.0 {
                column /= real(norm);
            }
            Entry {
                value: eig.eigenvalues[k],
                lead,
                lead_mod: column[lead].norm(),
                column,
            }
        })
        .collect();

    entries.sort_by(|a, b| b.value.total_cmp(&a.value));
    // Order each cluster of near-equal eigenvalues by the tie-break key.
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && (entries[end - 1].value - entries[end].value).abs() <= 1e-10 {
            end += 1;
        }
        entries[start..end].sort_by(|a, b| a.lead.cmp(&b.lead).then(b.lead_mod.total_cmp(&a.lead_mod)));
        start = end;
    }

    let values = entries.iter().map(|e| e.value).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, e) in entries.iter().enumerate() {
        vectors.set_column(k, &e.column);
    }
    Ok((values, vectors))
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &Matrix, f: impl Fn(f64) -> f64) -> Result<Matrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let diag = Vector::from_iterator(values.len(), values.iter().map(|&v| real(f(v))));
    Ok(&vectors * Matrix::from_diagonal(&diag) * vectors.adjoint())
}

/// Half the sum of absolute eigenvalues of a Hermitian matrix.
pub fn half_trace_norm(m: &Matrix) -> Result<f64> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Orthonormalise the columns of `m` by modified Gram–Schmidt.
pub(crate) fn gram_schmidt(m: &Matrix) -> Matrix {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for i in 0..j {
            let qi: Vector = q.column(i).into_owned();
            let proj = qi.dotc(&q.column(j).into_owned());
            let updated: Vector = q.column(j).into_owned() - qi * proj;
            q.set_column(j, &updated);
        }
        let norm = q.column(j).norm();
        let normalized: Vector = q.column(j).into_owned() / real(norm);
        q.set_column(j, &normalized);
    }
    q
}

/// Dense matrix of the permutation `|x⟩ ↦ |images[x]⟩`.
pub fn permutation_matrix(images: &[usize]) -> Matrix {
    let n = images.len();
    let mut m = Matrix::zeros(n, n);
    for (x, &y) in images.iter().enumerate() {
        m[(y, x)] = real(1.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_identity_and_diagonal() {
        let (vals, _) = hermitian_eigen(&identity(2)).unwrap();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);

        let d = Matrix::from_diagonal(&Vector::from_vec(vec![real(0.3), real(0.7)]));
        let (vals, vecs) = hermitian_eigen(&d).unwrap();
        assert!((vals[0] - 0.7).abs() < 1e-14 && (vals[1] - 0.3).abs() < 1e-14);
        assert!((vecs[(1, 0)] - real(1.0)).norm() < 1e-12);
        assert!((vecs[(0, 1)] - real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_is_ordered_by_leading_component() {
        let (vals, vecs) = hermitian_eigen(&identity(3)).unwrap();
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs(&(gram - identity(3))) < 1e-12);
        for k in 0..3 {
            assert!((vecs[(k, k)] - real(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = identity(2);
        m[(0, 1)] = real(1.0);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn trace_norm_of_pure_difference() {
        let plus = Vector::from_vec(vec![real(0.5f64.sqrt()), real(0.5f64.sqrt())]);
        let zero = Vector::from_vec(vec![real(1.0), real(0.0)]);
        let d = outer(&plus, &plus) - outer(&zero, &zero);
        assert!((half_trace_norm(&d).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
