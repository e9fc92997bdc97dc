// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::policy::NumericPolicy;

/// One control Hamiltonian `H_μ` with its amplitude bound `|u_μ| ≤ u_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlChannel {
    pub operator: CMatrix,
    pub u_max: f64,
}

/// Hamiltonian perturbation `Δ H'_Δ` with `‖H'_Δ‖ = 1` and `|Δ| ≤ Δ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertainty {
    pub delta_bar: f64,
    pub direction: CMatrix,
    pub delta: f64,
}

impl Uncertainty {
    pub fn new(delta_bar: f64, direction: CMatrix, delta: f64) -> Result<Self> {
        if !(delta_bar >= 0.0 && delta_bar.is_finite()) {
            return Err(Error::param("delta_bar", "must be finite and nonnegative"));
        }
        if delta.abs() > delta_bar * (1.0 + 1e-12) {
            return Err(Error::param(
                "delta",
                format!("|{delta}| exceeds the bound {delta_bar}"),
            ));
        }
        check_hermitian(&direction, "uncertainty direction")?;
        let norm = linalg::operator_norm(&direction);
        if (norm - 1.0).abs() > NumericPolicy::DEFAULT.operator_norm_tol {
            return Err(Error::InvalidOperator(format!(
                "uncertainty direction has operator norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            delta_bar,
            direction,
            delta,
        })
    }

    pub fn perturbation(&self) -> CMatrix {
        &self.direction * c(self.delta)
    }
}

/// How [`sample_uncertainty`] chooses the magnitude `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertaintyMode {
    /// `Δ = Δ̄`.
    FixedWorstCase,
    /// `Δ ~ U[0, Δ̄]`.
    UniformMagnitude,
}

/// Draws a random unit-norm Hermitian direction and a magnitude `Δ`.
pub fn sample_uncertainty<R: Rng + ?Sized>(
    delta_bar: f64,
    dim: usize,
    rng: &mut R,
    mode: UncertaintyMode,
) -> Uncertainty {
    let direction = random_unit_hermitian(dim, rng);
    let delta = match mode {
        UncertaintyMode::FixedWorstCase => delta_bar,
        UncertaintyMode::UniformMagnitude => rng.random::<f64>() * delta_bar,
    };
    Uncertainty {
        delta_bar,
        direction,
        delta,
    }
}

/// Hermitised complex Gaussian matrix rescaled to unit operator norm.
pub(crate) fn random_unit_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    loop {
        let raw = CMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im)
        });
        let h = linalg::hermitian_part(&raw);
        let norm = linalg::operator_norm(&h);
        if norm > 1e-8 {
            return h * c(1.0 / norm);
        }
    }
}

/// `H(t) = H0 + Σ u_μ(t) H_μ (+ Δ H'_Δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    h0: CMatrix,
    controls: Vec<ControlChannel>,
    uncertainty: Option<Uncertainty>,
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidOperator(format!("{what} is not square")));
    }
    let defect = linalg::hermiticity_defect(m);
    if defect > NumericPolicy::DEFAULT.hermitian_tol {
        return Err(Error::InvalidOperator(format!(
            "{what} is not Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(())
}

impl HamiltonianModel {
    pub fn new(h0: CMatrix, controls: Vec<ControlChannel>) -> Result<Self> {
        check_hermitian(&h0, "free Hamiltonian")?;
        let d = h0.nrows();
        for (k, ch) in controls.iter().enumerate() {
            check_hermitian(&ch.operator, "control Hamiltonian")?;
            if ch.operator.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: ch.operator.nrows(),
                });
            }
            if !(ch.u_max > 0.0 && ch.u_max.is_finite()) {
                return Err(Error::param(
                    "u_max",
                    format!("control {k} bound must be positive, got {}", ch.u_max),
                ));
            }
        }
        Ok(Self {
            h0,
            controls,
            uncertainty: None,
        })
    }

    /// Single control channel `H0 + u H1` with `|u| ≤ u_max`.
    pub fn single_control(h0: CMatrix, h1: CMatrix, u_max: f64) -> Result<Self> {
        Self::new(
            h0,
            vec![ControlChannel {
                operator: h1,
                u_max,
            }],
        )
    }

    pub fn with_uncertainty(mut self, uncertainty: Uncertainty) -> Result<Self> {
        if uncertainty.direction.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: uncertainty.direction.nrows(),
            });
        }
        self.uncertainty = Some(uncertainty);
        Ok(self)
    }

    pub fn without_uncertainty(&self) -> Self {
        Self {
            h0: self.h0.clone(),
            controls: self.controls.clone(),
            uncertainty: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    pub fn controls(&self) -> &[ControlChannel] {
        &self.controls
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn uncertainty(&self) -> Option<&Uncertainty> {
        self.uncertainty.as_ref()
    }

    /// Instantaneous Hamiltonian for the given control values.
    pub fn hamiltonian(&self, values: &[f64], include_uncertainty: bool) -> CMatrix {
        let mut h = self.h0.clone();
        for (ch, &u) in self.controls.iter().zip(values) {
            if u != 0.0 {
                h += &ch.operator * c(u);
            }
        }
        if include_uncertainty {
            if let Some(unc) = &self.uncertainty {
                h += unc.perturbation();
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{sigma_x, sigma_z};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_direction_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3, 5] {
            let u = sample_uncertainty(0.1, d, &mut rng, UncertaintyMode::UniformMagnitude);
            assert!((linalg::operator_norm(&u.direction) - 1.0).abs() < 1e-9);
            assert!(linalg::hermiticity_defect(&u.direction) < 1e-14);
            assert!(u.delta >= 0.0 && u.delta <= 0.1);
        }
    }

    #[test]
    fn zero_bound_gives_zero_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = sample_uncertainty(0.0, 2, &mut rng, UncertaintyMode::FixedWorstCase);
        assert_eq!(u.perturbation().norm(), 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_uncertainty(
            0.2,
            3,
            &mut ChaCha8Rng::seed_from_u64(9),
            UncertaintyMode::FixedWorstCase,
        );
        let b = sample_uncertainty(
            0.2,
            3,
            &mut ChaCha8Rng::seed_from_u64(9),
            UncertaintyMode::FixedWorstCase,
        );
        assert_eq!(a, b);
        assert_eq!(a.delta, 0.2);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_bounds() {
        let mut bad = sigma_x();
        bad[(0, 1)] = c(2.0);
        assert!(HamiltonianModel::new(bad, vec![]).is_err());
        assert!(HamiltonianModel::single_control(sigma_z(), sigma_x(), 0.0).is_err());
        assert!(Uncertainty::new(0.1, sigma_x(), 0.2).is_err());
        assert!(Uncertainty::new(0.1, sigma_x() * c(2.0), 0.05).is_err());
    }

    #[test]
    fn hamiltonian_assembly() {
        let m = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0)
            .unwrap()
            .with_uncertainty(Uncertainty::new(0.1, sigma_z(), 0.05).unwrap())
            .unwrap();
        let h = m.hamiltonian(&[0.5], true);
        let expected = sigma_z() * c(1.05) + sigma_x() * c(0.5);
        assert!((h - expected).norm() < 1e-15);
        let h = m.hamiltonian(&[0.5], false);
        assert!((h - sigma_z() - sigma_x() * c(0.5)).norm() < 1e-15);
    }
}
