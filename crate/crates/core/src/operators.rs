// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Named operators for the two- and three-level systems.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{c, ci, CMatrix};

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), ci(-1.0), ci(1.0), c(0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn j_x() -> CMatrix {
    let s = c(FRAC_1_SQRT_2);
    let z = c(0.0);
    CMatrix::from_row_slice(3, 3, &[z, s, z, s, z, s, z, s, z])
}

pub fn j_y() -> CMatrix {
    let p = ci(FRAC_1_SQRT_2);
    let m = ci(-FRAC_1_SQRT_2);
    let z = c(0.0);
    CMatrix::from_row_slice(3, 3, &[z, m, z, p, z, m, z, p, z])
}

pub fn j_z() -> CMatrix {
    CMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(-1.0),
        ],
    )
}

/// `|index⟩⟨index|` in dimension `dim`.
pub fn projector(dim: usize, index: usize) -> CMatrix {
    transition(dim, index, index)
}

/// `|row⟩⟨col|` in dimension `dim`.
pub fn transition(dim: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(row, col)] = c(1.0);
    m
}

/// Lowering operator `|0⟩⟨1|` used for amplitude damping.
pub fn lowering() -> CMatrix {
    transition(2, 0, 1)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub const NAMES: &[&str] = &["sx", "sy", "sz", "jx", "jy", "jz", "lower"];

/// Looks up an operator by its short name.
pub fn by_name(name: &str) -> Result<CMatrix> {
    match name.to_ascii_lowercase().as_str() {
        "sx" | "sigma_x" | "x" => Ok(sigma_x()),
        "sy" | "sigma_y" | "y" => Ok(sigma_y()),
        "sz" | "sigma_z" | "z" => Ok(sigma_z()),
        "jx" => Ok(j_x()),
        "jy" => Ok(j_y()),
        "jz" => Ok(j_z()),
        "lower" | "sigma_minus" | "sm" => Ok(lowering()),
        other => Err(Error::UnknownIdentifier {
            given: other.to_string(),
            valid: NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, operator_norm};

    #[test]
    fn paulis_are_involutory_and_traceless() {
        for p in [sigma_x(), sigma_y(), sigma_z()] {
            assert!((&p * &p - identity(2)).norm() < 1e-15);
            assert!(p.trace().norm() < 1e-15);
            assert!(hermiticity_defect(&p) < 1e-15);
        }
    }

    #[test]
    fn pauli_algebra() {
        let xy = sigma_x() * sigma_y();
        assert!((xy - sigma_z() * ci(1.0)).norm() < 1e-15);
    }

    #[test]
    fn angular_momentum_algebra() {
        for j in [j_x(), j_y(), j_z()] {
            assert!(hermiticity_defect(&j) < 1e-15);
            assert!((operator_norm(&j) - 1.0).abs() < 1e-12);
        }
        // [Jx, Jy] = i Jz and Jx² + Jy² + Jz² = 2 I for spin 1.
        let comm = j_x() * j_y() - j_y() * j_x();
        assert!((comm - j_z() * ci(1.0)).norm() < 1e-14);
        let casimir = j_x() * j_x() + j_y() * j_y() + j_z() * j_z();
        assert!((casimir - identity(3) * c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn entries_match_listing() {
        let jy = j_y();
        assert!((jy[(0, 1)] - ci(-FRAC_1_SQRT_2)).norm() < 1e-16);
        assert!((jy[(1, 0)] - ci(FRAC_1_SQRT_2)).norm() < 1e-16);
        assert!((jy[(2, 1)] - ci(FRAC_1_SQRT_2)).norm() < 1e-16);
        assert_eq!(sigma_y()[(0, 1)], ci(-1.0));
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = by_name("foo").unwrap_err();
        assert!(err.to_string().contains("jy"));
    }
}
