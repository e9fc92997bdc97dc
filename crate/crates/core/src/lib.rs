// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-optimal predictive control of open quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`state`], [`operators`], [`linalg`], [`policy`]: states, metrics and the
//!   shared numeric tolerances.
//! - [`dynamics`]: unitary, Lindblad and quantum-trajectory evolution.
//! - [`control`]: time-optimal open-loop solvers (bang-bang search and
//!   projected gradient descent with a free final time).
//! - [`feedback`]: the measure/project/re-solve loop driven by POVMs.
//! - [`bounds`]: success-probability floors, stability predicates and
//!   convergence-rate formulas.
//! - [`experiments`]: presets, Monte-Carlo campaigns, file emission and the
//!   reproduction harness behind the `qtopc` binary.

pub mod bounds;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod feedback;
pub mod linalg;
pub mod operators;
pub mod policy;
pub mod state;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use policy::NumericPolicy;
pub use state::{DensityMatrix, PureState};
