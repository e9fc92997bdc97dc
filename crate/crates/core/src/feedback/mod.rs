// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Measurement-based feedback: re-solve, apply one sampling period, measure
//! against the nominal prediction, project to the nearest pure state, repeat.

mod povm;
mod run;

pub use povm::{build_step_povm, measure, Effect, Povm};
pub use run::{
    forced_outcome_mode, run_qtopc, run_qtopc_fixed_povm, run_qtopc_fixed_povm_with,
    run_qtopc_with, FeedbackConfig, OutcomeMode, PovmMode, RunRecord, SolveCache, StepRecord,
    Termination, FIXED_POVM_GRID,
};

use crate::error::Result;
use crate::linalg::c;
use crate::state::PureState;

/// Computational basis `{|0⟩, |1⟩}`.
pub fn basis_m1() -> Result<Povm> {
    Povm::from_basis(&[PureState::basis(2, 0), PureState::basis(2, 1)])
}

/// Rotated basis with amplitudes `√3/2` and `1/2`.
pub fn basis_m2() -> Result<Povm> {
    let a = 3f64.sqrt() / 2.0;
    Povm::from_basis(&[
        PureState::from_slice(&[c(a), c(0.5)])?,
        PureState::from_slice(&[c(0.5), c(-a)])?,
    ])
}
