// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve_master_with, evolve_unitary, ControlSchedule, DissipationChannel, HamiltonianModel,
    Integrator,
};
use crate::error::{Error, Result};
use crate::state::{terminal_error, DensityMatrix};

/// Tuning knobs shared by both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Piecewise-constant segments `K` for the gradient solver.
    pub segments: usize,
    /// Largest switch count tried by the bang-bang search.
    pub max_switches: usize,
    /// Central finite-difference step.
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
    /// Descent stops once an accepted step improves the cost by less than this.
    pub improvement_tol: f64,
    /// Iteration cap per descent run.
    pub max_iterations: usize,
    /// Final-time tolerance of the golden-section search.
    pub tf_tolerance: f64,
    /// Grid points of the coarse final-time scan that brackets the golden-section search.
    pub tf_scan_points: usize,
    /// Cost-evaluation cap per Nelder–Mead run.
    pub nm_max_evals: usize,
    /// Nelder–Mead stops when the simplex cost spread falls below this.
    pub nm_tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            segments: 50,
            max_switches: 3,
            fd_step: 1e-6,
            armijo: 1e-4,
            shrink: 0.5,
            improvement_tol: 1e-10,
            max_iterations: 5000,
            tf_tolerance: 1e-3,
            tf_scan_points: 16,
            nm_max_evals: 1500,
            nm_tolerance: 1e-13,
        }
    }
}

/// `min λ0 t_f + D²(ρ_tar, ρ(t_f))` over bounded piecewise-constant controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub model: HamiltonianModel,
    /// Nominal dissipation used inside the optimisation; closed by default.
    pub channel: DissipationChannel,
    pub initial: DensityMatrix,
    pub target: DensityMatrix,
    pub lambda0: f64,
    pub t_max: f64,
    pub params: SolverParams,
}

impl ControlProblem {
    pub fn new(
        model: HamiltonianModel,
        initial: DensityMatrix,
        target: DensityMatrix,
        lambda0: f64,
        t_max: f64,
    ) -> Result<Self> {
        let channel = DissipationChannel::closed(model.dim());
        Self::with_channel(model, channel, initial, target, lambda0, t_max)
    }

    pub fn with_channel(
        model: HamiltonianModel,
        channel: DissipationChannel,
        initial: DensityMatrix,
        target: DensityMatrix,
        lambda0: f64,
        t_max: f64,
    ) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::param("lambda0", "must be positive"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_max", "must be positive"));
        }
        let d = model.dim();
        for found in [channel.dim(), initial.dim(), target.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        Ok(Self {
            model,
            channel,
            initial,
            target,
            lambda0,
            t_max,
            params: SolverParams::default(),
        })
    }

    pub fn with_params(mut self, params: SolverParams) -> Self {
        self.params = params;
        self
    }

    /// Same problem from a different initial state.
    pub fn from_state(&self, initial: DensityMatrix) -> Self {
        Self {
            initial,
            ..self.clone()
        }
    }

    /// Final state reached by `schedule` under the nominal model.
    pub fn propagate(&self, schedule: &ControlSchedule) -> Result<DensityMatrix> {
        if self.channel.is_closed() {
            evolve_unitary(&self.initial, &self.model, schedule, false)
        } else {
            evolve_master_with(
                &self.initial,
                &self.model,
                schedule,
                &self.channel,
                false,
                Integrator::Exact,
            )
        }
    }
}

/// Output of a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub schedule: ControlSchedule,
    pub cost: f64,
    pub terminal_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveResult {
    pub fn t_f(&self) -> f64 {
        self.schedule.duration()
    }
}

/// `λ0 t_f + D²(ρ_tar, ρ(t_f))` under the problem's nominal model.
pub fn evaluate_cost(problem: &ControlProblem, schedule: &ControlSchedule) -> Result<f64> {
    Ok(cost_parts(problem, schedule)?.0)
}

/// `(J, D²)` for `schedule`.
pub fn cost_parts(problem: &ControlProblem, schedule: &ControlSchedule) -> Result<(f64, f64)> {
    let final_state = problem.propagate(schedule)?;
    let err = terminal_error(&problem.target, &final_state)?;
    let cost = problem.lambda0 * schedule.duration() + err;
    if !cost.is_finite() {
        return Err(Error::NonFiniteCost {
            schedule: schedule.describe(),
        });
    }
    Ok((cost, err))
}
