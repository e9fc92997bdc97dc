// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution of closed and open systems.
//!
//! Closed evolution is exact (matrix exponentials per segment). Open
//! evolution integrates the Lindblad equation with fixed-step RK4, or applies
//! the exact Liouvillian propagator when [`Integrator::Exact`] is requested.
//! Quantum trajectories unravel the same dynamics into a non-Hermitian drift
//! with random jumps.

mod channel;
mod depolarizing;
mod master;
mod model;
mod nominal;
mod rng;
mod schedule;
mod trajectory;

pub use channel::DissipationChannel;
pub use depolarizing::{apply_depolarizing, depolarizing_overlap, depolarizing_probability};
pub use master::{
    evolve_master, evolve_master_with, lindblad_rhs, liouvillian, superoperator_propagator,
    Integrator, DEFAULT_STEP,
};
pub(crate) use model::random_unit_hermitian;
pub use model::{
    sample_uncertainty, ControlChannel, HamiltonianModel, Uncertainty, UncertaintyMode,
};
pub use nominal::{evolve_nominal, evolve_unitary, schedule_unitary};
pub use rng::stream;
pub use schedule::{ControlSchedule, Segment};
pub use trajectory::{
    no_jump_path, no_jump_probability, sample_trajectory, sample_trajectory_with_step, Jump,
    NoJumpPath, TrajectorySample,
};
