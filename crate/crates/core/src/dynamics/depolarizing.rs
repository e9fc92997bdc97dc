// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c};
use crate::state::DensityMatrix;

/// `p_D I/d + (1 − p_D) ρ`.
pub fn apply_depolarizing(rho: &DensityMatrix, p_d: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::param("p_D", format!("{p_d} is outside [0, 1]")));
    }
    let d = rho.dim();
    let out = linalg::identity(d) * c(p_d / d as f64) + rho.matrix() * c(1.0 - p_d);
    Ok(DensityMatrix::from_trusted(out))
}

/// `p_D = 1 − e^{−γ Ts}`.
pub fn depolarizing_probability(gamma: f64, ts: f64) -> f64 {
    1.0 - (-gamma * ts).exp()
}

/// `1/d + (1 − 1/d) e^{−γ Ts}`: overlap between a pure state and its depolarized image.
pub fn depolarizing_overlap(gamma: f64, ts: f64, d: usize) -> f64 {
    let inv = 1.0 / d as f64;
    inv + (1.0 - inv) * (-gamma * ts).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::overlap;

    #[test]
    fn endpoints() {
        let rho = DensityMatrix::basis(3, 1);
        let same = apply_depolarizing(&rho, 0.0).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-15);
        let mixed = apply_depolarizing(&rho, 1.0).unwrap();
        assert!((mixed.matrix() - DensityMatrix::maximally_mixed(3).matrix()).norm() < 1e-15);
        assert!(apply_depolarizing(&rho, 1.5).is_err());
        assert!(apply_depolarizing(&rho, -0.1).is_err());
    }

    #[test]
    fn qubit_example() {
        let e = (-0.1f64).exp();
        let out = apply_depolarizing(&DensityMatrix::basis(2, 0), 1.0 - e).unwrap();
        assert!((out.matrix()[(0, 0)].re - (1.0 + e) / 2.0).abs() < 1e-15);
        assert!((out.matrix()[(1, 1)].re - (1.0 - e) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_formula() {
        assert_eq!(depolarizing_overlap(0.0, 1.0, 2), 1.0);
        assert!((depolarizing_overlap(1e6, 1.0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((depolarizing_overlap(0.1, 1.0, 2) - 0.952_418_709).abs() < 1e-9);
        let rho = DensityMatrix::basis(2, 0);
        let out = apply_depolarizing(&rho, depolarizing_probability(0.1, 1.0)).unwrap();
        let direct = overlap(&out, &rho).unwrap();
        assert!((direct - depolarizing_overlap(0.1, 1.0, 2)).abs() < 1e-12);
    }
}
