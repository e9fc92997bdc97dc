// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Lower bounds on the probability of measuring the nominal state, stability
//! predicates for the feedback loop, and convergence-rate formulas.

mod falsify;
mod floors;
mod stability;

pub use falsify::{
    depolarizing_variant_report, falsify_all, falsify_appendix_a, falsify_depolarizing_n,
    falsify_general, falsify_general_trajectories, falsify_two_level, falsify_two_level_variant,
    falsify_uniform, FalsificationReport, RateConvention, DETERMINISTIC_TOL,
};
pub use floors::{
    appendix_a_gamma, success_floor, success_floor_appendix_a, success_floor_depolarizing,
    success_floor_general, success_floor_two_level, success_floor_two_level_variant,
    success_floor_uniform, BoundKind, BoundSpec, Floor, TwoLevelVariant,
};
pub use stability::{
    convergence_rate, failure_sequence, stability_report, stability_report_with_epsilon,
    target_probability_floor, Condition, StabilityReport,
};
