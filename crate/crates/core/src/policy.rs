// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Centralised numeric tolerances.
//!
//! Every invariant check in the crate reads its threshold from
//! [`NumericPolicy::DEFAULT`], so tests and integrators agree on what
//! "valid" means.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Entrywise bound on `|ρ − ρ†|` for a density matrix.
    pub hermitian_tol: f64,
    /// Bound on `|Tr ρ − 1|`.
    pub trace_tol: f64,
    /// Smallest eigenvalue allowed for a PSD matrix (as `−psd_tol`).
    pub psd_tol: f64,
    /// Bound on `|‖ψ‖ − 1|` for a pure state.
    pub pure_norm_tol: f64,
    /// Bound on `|‖L‖ − 1|` for Lindblad operators and uncertainty directions.
    pub operator_norm_tol: f64,
    /// Eigenvalues within this distance of the maximum are treated as degenerate.
    pub degeneracy_tol: f64,
    /// Invariant slack tolerated after numerical integration.
    pub integration_tol: f64,
    /// Entrywise bound on `|Σ E_k − I|` for a POVM.
    pub povm_sum_tol: f64,
    /// Outcome probabilities may drift this far outside `[0, 1]` before renormalising.
    pub probability_drift_tol: f64,
    /// Outcomes below this probability are never selected.
    pub min_outcome_probability: f64,
    /// Imaginary residue discarded from quantities that are real in exact arithmetic.
    pub imaginary_residue_tol: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-10,
        trace_tol: 1e-10,
        psd_tol: 1e-10,
        pure_norm_tol: 1e-12,
        operator_norm_tol: 1e-9,
        degeneracy_tol: 1e-10,
        integration_tol: 1e-6,
        povm_sum_tol: 1e-9,
        probability_drift_tol: 1e-8,
        min_outcome_probability: 1e-12,
        imaginary_residue_tol: 1e-10,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}
