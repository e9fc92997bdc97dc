// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-optimal open-loop control on the nominal model.
//!
//! The cost is `J = λ0 t_f + D²(ρ_tar, ρ(t_f))`. Two solvers are provided: a
//! bang-bang switching-time search for single-control qubits and a nested
//! projected-gradient solver for any dimension.

mod bangbang;
mod engine;
mod gradient;
mod neldermead;
mod problem;
mod search;

use serde::{Deserialize, Serialize};

pub use bangbang::{solve_bangbang_two_level, solve_bangbang_warm};
pub use gradient::{refine_schedule, solve_gradient, solve_gradient_warm, DescentTrace};
pub use problem::{cost_parts, evaluate_cost, ControlProblem, SolveResult, SolverParams};

use crate::dynamics::ControlSchedule;
use crate::error::Result;

/// Which open-loop solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    BangBang,
    Gradient,
}

impl SolverKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bangbang" | "bang-bang" => Some(Self::BangBang),
            "gradient" => Some(Self::Gradient),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::BangBang => "bang-bang",
            Self::Gradient => "gradient",
        }
    }
}

/// Dispatches to the selected solver with an optional warm start.
pub fn solve(
    problem: &ControlProblem,
    kind: SolverKind,
    warm: Option<&ControlSchedule>,
) -> Result<SolveResult> {
    match kind {
        SolverKind::BangBang => solve_bangbang_warm(problem, warm),
        SolverKind::Gradient => solve_gradient_warm(problem, warm),
    }
}
