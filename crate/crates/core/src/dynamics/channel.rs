// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::operators;
use crate::policy::NumericPolicy;

/// Lindblad operators `L_i` (unit operator norm) with rates `γ_i ≤ γ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationChannel {
    dim: usize,
    operators: Vec<CMatrix>,
    rates: Vec<f64>,
    rate_bound: f64,
}

impl DissipationChannel {
    pub fn new(
        dim: usize,
        operators: Vec<CMatrix>,
        rates: Vec<f64>,
        rate_bound: f64,
    ) -> Result<Self> {
        if operators.len() != rates.len() {
            return Err(Error::param(
                "rates",
                format!("{} operators but {} rates", operators.len(), rates.len()),
            ));
        }
        if !(rate_bound >= 0.0 && rate_bound.is_finite()) {
            return Err(Error::param("rate_bound", "must be finite and nonnegative"));
        }
        let tol = NumericPolicy::DEFAULT.operator_norm_tol;
        for (l, &g) in operators.iter().zip(&rates) {
            if l.nrows() != dim || l.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.nrows(),
                });
            }
            let norm = linalg::operator_norm(l);
            if (norm - 1.0).abs() > tol {
                return Err(Error::InvalidOperator(format!(
                    "Lindblad operator has operator norm {norm}, expected 1"
                )));
            }
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::param(
                    "rates",
                    format!("rate {g} is negative or non-finite"),
                ));
            }
            if g > rate_bound * (1.0 + 1e-12) {
                return Err(Error::param(
                    "rates",
                    format!("rate {g} exceeds the bound {rate_bound}"),
                ));
            }
        }
        Ok(Self {
            dim,
            operators,
            rates,
            rate_bound,
        })
    }

    /// No dissipation.
    pub fn closed(dim: usize) -> Self {
        Self {
            dim,
            operators: Vec::new(),
            rates: Vec::new(),
            rate_bound: 0.0,
        }
    }

    /// One operator `L` (normalised to unit operator norm) at rate `γ`.
    pub fn single(operator: CMatrix, gamma: f64) -> Result<Self> {
        let norm = linalg::operator_norm(&operator);
        if norm == 0.0 {
            return Err(Error::InvalidOperator("zero Lindblad operator".into()));
        }
        let dim = operator.nrows();
        Self::new(dim, vec![operator * c(1.0 / norm)], vec![gamma], gamma)
    }

    /// `L = σ_y` at rate `γ`.
    pub fn sigma_y(gamma: f64) -> Result<Self> {
        Self::single(operators::sigma_y(), gamma)
    }

    /// `L = J_y` at rate `γ`.
    pub fn j_y(gamma: f64) -> Result<Self> {
        Self::single(operators::j_y(), gamma)
    }

    /// Two-level phase damping, `L = σ_z` at rate `γ` (so `L†L = I`).
    pub fn phase_damping(gamma: f64) -> Result<Self> {
        Self::single(operators::sigma_z(), gamma)
    }

    /// Two-level amplitude damping, `L = |0⟩⟨1|` at rate `γ`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        Self::single(operators::lowering(), gamma)
    }

    /// Depolarizing generator whose flow is `ρ(t) = p I/d + (1 − p) ρ(0)` with `p = 1 − e^{−γt}`.
    ///
    /// For `d = 2` the operators are the three Pauli matrices at rate `γ/4`
    /// each; otherwise all `d²` transitions `|j⟩⟨k|` at rate `γ/d`.
    pub fn depolarizing(dim: usize, gamma: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", "depolarizing needs d ≥ 2"));
        }
        if dim == 2 {
            let ops = vec![
                operators::sigma_x(),
                operators::sigma_y(),
                operators::sigma_z(),
            ];
            let r = gamma / 4.0;
            return Self::new(2, ops, vec![r; 3], r);
        }
        let mut ops = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                ops.push(operators::transition(dim, j, k));
            }
        }
        let r = gamma / dim as f64;
        Self::new(dim, ops, vec![r; dim * dim], r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    /// `Σ_i γ_i`.
    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Number of Lindblad operators with a nonzero rate.
    pub fn active_count(&self) -> usize {
        self.rates.iter().filter(|&&g| g > 0.0).count()
    }

    /// True when the channel has no effect on the dynamics.
    pub fn is_closed(&self) -> bool {
        self.active_count() == 0
    }

    /// `Σ_i γ_i L_i† L_i`.
    pub fn decay_operator(&self) -> CMatrix {
        let mut k = CMatrix::zeros(self.dim, self.dim);
        for (l, &g) in self.operators.iter().zip(&self.rates) {
            if g > 0.0 {
                k += l.adjoint() * l * c(g);
            }
        }
        k
    }

    /// `(γ_i, L_i)` pairs with a nonzero rate.
    pub(crate) fn active(&self) -> impl Iterator<Item = (f64, &CMatrix)> {
        self.rates
            .iter()
            .zip(&self.operators)
            .filter(|(g, _)| **g > 0.0)
            .map(|(g, l)| (*g, l))
    }

    /// True when every `L_i† L_i` is proportional to the identity.
    pub fn is_uniform(&self) -> bool {
        self.operators.iter().all(|l| {
            let ltl = l.adjoint() * l;
            let scale = ltl[(0, 0)];
            (ltl - linalg::identity(self.dim) * scale).norm() < 1e-10
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_channels_are_valid() {
        assert!(DissipationChannel::sigma_y(0.1).unwrap().is_uniform());
        assert!(DissipationChannel::phase_damping(0.1).unwrap().is_uniform());
        assert!(!DissipationChannel::amplitude_damping(0.1)
            .unwrap()
            .is_uniform());
        assert_eq!(DissipationChannel::j_y(0.01).unwrap().dim(), 3);
        let dep = DissipationChannel::depolarizing(3, 0.3).unwrap();
        assert_eq!(dep.operators().len(), 9);
        assert!((dep.decay_operator() - linalg::identity(3) * c(0.3)).norm() < 1e-14);
        assert!(DissipationChannel::closed(2).is_closed());
    }

    #[test]
    fn validation() {
        let l = operators::sigma_x() * c(0.5);
        assert!(DissipationChannel::new(2, vec![l], vec![0.1], 0.1).is_err());
        assert!(DissipationChannel::new(2, vec![operators::sigma_x()], vec![-0.1], 0.1).is_err());
        assert!(DissipationChannel::new(2, vec![operators::sigma_x()], vec![0.2], 0.1).is_err());
        assert!(DissipationChannel::new(3, vec![operators::sigma_x()], vec![0.1], 0.1).is_err());
    }

    #[test]
    fn single_normalises() {
        let ch = DissipationChannel::single(operators::sigma_y() * c(0.1), 0.01).unwrap();
        assert!((linalg::operator_norm(&ch.operators()[0]) - 1.0).abs() < 1e-12);
    }
}
