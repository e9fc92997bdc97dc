// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[inline]
pub fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Trace norm: the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.singular_values().iter().sum()
}

/// Principal square root of a positive-semidefinite matrix.
///
/// Negative eigenvalues (numerical noise) are clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = values.len();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for i in 0..d {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

/// `exp(a) v` by a scaled Taylor series, without forming `exp(a)`.
pub fn expm_action(a: &CMatrix, v: &CVector) -> CVector {
    let one_norm = a
        .column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let steps = one_norm.ceil().max(1.0) as usize;
    let scale = 1.0 / steps as f64;
    let mut out = v.clone();
    let mut term = v.clone();
    let mut next = v.clone();
    for _ in 0..steps {
        term.copy_from(&out);
        for k in 1..30 {
            next.gemv(c(scale / k as f64), a, &term, c(0.0));
            std::mem::swap(&mut term, &mut next);
            out += &term;
            if term.norm() <= 1e-17 * out.norm() {
                break;
            }
        }
    }
    out
}

/// `exp(−i h t)` for a Hermitian generator.
pub fn unitary(h: &CMatrix, t: f64) -> CMatrix {
    expm(&(h * ci(-t)))
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// Column-stacking vectorisation.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Matrix with the given real diagonal.
pub fn real_diagonal(diag: &[f64]) -> CMatrix {
    let d = diag.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { c(diag[i]) } else { c(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_sqrt_squares_back() {
        let m = real_diagonal(&[0.25, 0.0, 4.0]);
        let s = psd_sqrt(&m);
        assert!((&s * &s - &m).norm() < 1e-12);
        assert!((s[(2, 2)].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted_ascending() {
        let m = real_diagonal(&[3.0, -1.0, 2.0]);
        let (values, vectors) = hermitian_eigen(&m);
        assert_eq!(values.len(), 3);
        assert!((values[0] + 1.0).abs() < 1e-12 && (values[2] - 3.0).abs() < 1e-12);
        let back = &vectors * real_diagonal(&values) * vectors.adjoint();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn expm_action_matches_expm() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            Complex64::new((i + 2 * j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.7)
        });
        let v = CVector::from_fn(4, |i, _| Complex64::new(1.0 + i as f64, -0.5));
        let diff = expm(&a) * &v - expm_action(&a, &v);
        assert!(diff.norm() < 1e-11 * v.norm() * expm(&a).norm());
    }

    #[test]
    fn unitary_is_unitary() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.5), c(-1.0)]);
        let u = unitary(&h, 0.7);
        assert!((&u * u.adjoint() - identity(2)).norm() < 1e-13);
    }
}
