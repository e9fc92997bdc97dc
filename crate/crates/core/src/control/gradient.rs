// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::dynamics::{ControlSchedule, Segment};
use crate::error::{Error, Result};

use super::engine::Engine;
use super::problem::{cost_parts, ControlProblem, SolveResult, SolverParams};
use super::search::scan_then_golden;

/// Accepted-step history of one projected-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentTrace {
    /// Controls, segment-major (`values[s * m + μ]`).
    pub values: Vec<f64>,
    /// Cost before the first step followed by the cost after every accepted step.
    pub costs: Vec<f64>,
    /// True when the run stopped on the improvement tolerance rather than the iteration cap.
    pub converged: bool,
}

impl DescentTrace {
    pub fn cost(&self) -> f64 {
        *self.costs.last().expect("trace holds the initial cost")
    }

    pub fn iterations(&self) -> usize {
        self.costs.len() - 1
    }
}

fn clip(u: &mut [f64], u_max: &[f64]) {
    let m = u_max.len();
    for (i, v) in u.iter_mut().enumerate() {
        let b = u_max[i % m];
        *v = v.clamp(-b, b);
    }
}

fn describe(durations: &[f64], u: &[f64], m: usize) -> String {
    let segs: Vec<Segment> = durations
        .iter()
        .enumerate()
        .map(|(s, &d)| Segment {
            duration: d,
            values: u[s * m..(s + 1) * m].to_vec(),
        })
        .collect();
    match ControlSchedule::new(segs) {
        Ok(s) => s.describe(),
        Err(_) => format!("{u:?}"),
    }
}

/// Projected gradient descent with Armijo backtracking on fixed durations.
fn descend(
    engine: &Engine,
    durations: &[f64],
    u0: &[f64],
    p: &SolverParams,
) -> Result<DescentTrace> {
    let m = engine.n_controls();
    let mut u = u0.to_vec();
    clip(&mut u, &engine.u_max);
    let non_finite = |u: &[f64]| Error::NonFiniteCost {
        schedule: describe(durations, u, m),
    };
    let (mut cost, mut grad) = engine.cost_and_gradient(durations, &u, p.fd_step);
    if !cost.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(non_finite(&u));
    }
    let mut costs = vec![cost];
    let g_max = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let u_scale = engine.u_max.iter().fold(0.0f64, |a, &b| a.max(b));
    if m == 0 || g_max == 0.0 {
        return Ok(DescentTrace {
            values: u,
            costs,
            converged: true,
        });
    }
    let mut alpha = u_scale / g_max;
    let mut cand = vec![0.0; u.len()];
    for _ in 0..p.max_iterations {
        let mut accepted = None;
        while alpha > 1e-14 * u_scale / g_max.max(1e-300) {
            for ((c, &x), &g) in cand.iter_mut().zip(&u).zip(&grad) {
                *c = x - alpha * g;
            }
            clip(&mut cand, &engine.u_max);
            let slope: f64 = cand
                .iter()
                .zip(&u)
                .zip(&grad)
                .map(|((c, x), g)| g * (c - x))
                .sum();
            if slope >= 0.0 {
                break;
            }
            let c_cost = engine.cost_grid(durations, &cand);
            if !c_cost.is_finite() {
                return Err(non_finite(&cand));
            }
            if c_cost <= cost + p.armijo * slope && c_cost < cost {
                accepted = Some(c_cost);
                break;
            }
            alpha *= p.shrink;
        }
        let Some(new_cost) = accepted else {
            return Ok(DescentTrace {
                values: u,
                costs,
                converged: true,
            });
        };
        let improvement = cost - new_cost;
        u.copy_from_slice(&cand);
        cost = new_cost;
        costs.push(cost);
        if improvement < p.improvement_tol {
            return Ok(DescentTrace {
                values: u,
                costs,
                converged: true,
            });
        }
        let (c2, g2) = engine.cost_and_gradient(durations, &u, p.fd_step);
        if !c2.is_finite() || g2.iter().any(|g| !g.is_finite()) {
            return Err(non_finite(&u));
        }
        alpha /= p.shrink;
        grad = g2;
    }
    Ok(DescentTrace {
        values: u,
        costs,
        converged: false,
    })
}

fn grid_schedule(durations: &[f64], u: &[f64], m: usize) -> Result<ControlSchedule> {
    ControlSchedule::new(
        durations
            .iter()
            .enumerate()
            .map(|(s, &d)| Segment {
                duration: d,
                values: u[s * m..(s + 1) * m].to_vec(),
            })
            .collect(),
    )
}

/// Runs projected gradient descent on the segment values of `schedule`,
/// keeping its durations fixed.
pub fn refine_schedule(
    problem: &ControlProblem,
    schedule: &ControlSchedule,
) -> Result<DescentTrace> {
    schedule.check_against(&problem.model)?;
    let engine = Engine::new(problem);
    let durations: Vec<f64> = schedule.segments().iter().map(|s| s.duration).collect();
    let u0: Vec<f64> = schedule
        .segments()
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .collect();
    descend(&engine, &durations, &u0, &problem.params)
}

/// Resamples `schedule` onto `k` equal segments spanning `t_f`, stretching time.
fn resample(schedule: &ControlSchedule, k: usize, m: usize) -> Vec<f64> {
    let total = schedule.duration();
    let mut out = Vec::with_capacity(k * m);
    for s in 0..k {
        let t = (s as f64 + 0.5) / k as f64 * total;
        match schedule.value_at(t) {
            Some(v) => out.extend_from_slice(v),
            None => out.extend(std::iter::repeat_n(0.0, m)),
        }
    }
    out
}

struct Candidate {
    schedule: ControlSchedule,
    cost: f64,
    converged: bool,
}

/// Nested free-final-time solver: projected gradient descent on `K`
/// piecewise-constant segments inside a search over `t_f ∈ [0, t_max]`.
pub fn solve_gradient(problem: &ControlProblem) -> Result<SolveResult> {
    solve_gradient_warm(problem, None)
}

/// As [`solve_gradient`], also using `warm` as a candidate, as a descent start
/// on its own segment grid, and as an extra initial guess at every `t_f`.
pub fn solve_gradient_warm(
    problem: &ControlProblem,
    warm: Option<&ControlSchedule>,
) -> Result<SolveResult> {
    let engine = Engine::new(problem);
    let p = &problem.params;
    let m = engine.n_controls();
    let k = p.segments.max(1);
    let warm = warm.filter(|w| !w.is_empty() && w.check_against(&problem.model).is_ok());

    let idle_cost = engine.cost_of(std::iter::empty());
    let mut best = Candidate {
        schedule: ControlSchedule::empty(),
        cost: idle_cost,
        converged: true,
    };
    let mut iterations = 0usize;
    let mut failure: Option<Error> = None;

    let mut inits: Vec<Vec<f64>> = vec![vec![0.0; k * m]];
    for sign in [1.0, -1.0] {
        inits.push(
            (0..k * m)
                .map(|i| sign * engine.u_max[i % m.max(1)])
                .collect(),
        );
    }
    if let Some(w) = warm {
        inits.push(resample(w, k, m));
    }

    let mut evaluate = |t_f: f64, best: &mut Candidate, iterations: &mut usize| -> f64 {
        if t_f <= 1e-12 {
            return idle_cost;
        }
        let durations = vec![t_f / k as f64; k];
        let mut local = f64::INFINITY;
        for u0 in &inits {
            match descend(&engine, &durations, u0, p) {
                Ok(trace) => {
                    *iterations += trace.iterations();
                    let c = trace.cost();
                    local = local.min(c);
                    if c < best.cost {
                        if let Ok(s) = grid_schedule(&durations, &trace.values, m) {
                            best.schedule = s;
                            best.cost = c;
                            best.converged = trace.converged;
                        }
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        local
    };

    scan_then_golden(
        |t| evaluate(t, &mut best, &mut iterations),
        0.0,
        problem.t_max,
        p.tf_scan_points,
        p.tf_tolerance,
    );
    if let Some(e) = failure {
        return Err(e);
    }

    if let Some(w) = warm {
        let w_cost = engine.cost_of(w.segments().iter().map(|s| (&s.values[..], s.duration)));
        if w_cost < best.cost {
            best = Candidate {
                schedule: w.clone(),
                cost: w_cost,
                converged: true,
            };
        }
        let trace = refine_schedule(problem, w)?;
        iterations += trace.iterations();
        if trace.cost() < best.cost {
            let durations: Vec<f64> = w.segments().iter().map(|s| s.duration).collect();
            best = Candidate {
                schedule: grid_schedule(&durations, &trace.values, m)?,
                cost: trace.cost(),
                converged: trace.converged,
            };
        }
    }

    let schedule = best.schedule;
    let (cost, terminal_error) = cost_parts(problem, &schedule)?;
    let converged = best.converged && !(schedule.is_empty() && idle_cost > 1e-12);
    Ok(SolveResult {
        schedule,
        cost,
        terminal_error,
        iterations,
        converged,
    })
}
