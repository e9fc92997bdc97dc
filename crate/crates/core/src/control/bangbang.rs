// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::dynamics::{ControlSchedule, Segment};
use crate::error::{Error, Result};

use super::engine::Engine;
use super::neldermead;
use super::problem::{cost_parts, ControlProblem, SolveResult};
use super::search::scan_then_golden;

const MIN_ARC: f64 = 1e-12;

/// Fractions of `t_max` used as initial total times.
const INIT_TOTALS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Bang-bang schedule `sign·u_max, −sign·u_max, …` with the given arc lengths.
fn arcs_to_schedule(sign: f64, arcs: &[f64], u_max: f64) -> ControlSchedule {
    let mut segments = Vec::new();
    let mut s = sign;
    for &a in arcs {
        if a > MIN_ARC {
            segments.push(Segment {
                duration: a,
                values: vec![s * u_max],
            });
        }
        s = -s;
    }
    ControlSchedule::new(segments)
        .expect("arcs are positive")
        .coalesced()
}

fn arc_cost(engine: &Engine, sign: f64, arcs: &[f64], u_max: f64) -> f64 {
    let plus = [sign * u_max];
    let minus = [-sign * u_max];
    engine.cost_of(arcs.iter().enumerate().map(|(i, &a)| {
        let v: &[f64] = if i % 2 == 0 { &plus } else { &minus };
        (v, a.abs())
    }))
}

/// Candidate kept by the search.
struct Best {
    schedule: ControlSchedule,
    cost: f64,
}

impl Best {
    fn offer(&mut self, schedule: ControlSchedule, cost: f64) {
        if cost < self.cost {
            self.schedule = schedule;
            self.cost = cost;
        }
    }
}

/// Time-optimal bang-bang search for a single-control two-level problem.
pub fn solve_bangbang_two_level(problem: &ControlProblem) -> Result<SolveResult> {
    solve_bangbang_warm(problem, None)
}

/// As [`solve_bangbang_two_level`], also trying `warm` (typically the previous
/// schedule shifted by one sampling period) as a candidate and a start point.
pub fn solve_bangbang_warm(
    problem: &ControlProblem,
    warm: Option<&ControlSchedule>,
) -> Result<SolveResult> {
    if problem.model.dim() != 2 || problem.model.n_controls() != 1 {
        return Err(Error::param(
            "problem",
            "bang-bang search needs a two-level system with one control",
        ));
    }
    let engine = Engine::new(problem);
    let u_max = engine.u_max[0];
    let p = &problem.params;
    let t_max = problem.t_max;
    let mut evals = 0usize;

    let idle_cost = engine.cost_of(std::iter::empty());
    let mut best = Best {
        schedule: ControlSchedule::empty(),
        cost: idle_cost,
    };

    for sign in [1.0, -1.0] {
        let line = scan_then_golden(
            |t| arc_cost(&engine, sign, &[t], u_max),
            0.0,
            t_max,
            p.tf_scan_points,
            p.tf_tolerance * 1e-3,
        );
        evals += line.evals;
        best.offer(arcs_to_schedule(sign, &[line.x], u_max), line.f);
    }

    let run = |sign: f64, x0: &[f64], best: &mut Best, evals: &mut usize| {
        let steps: Vec<f64> = x0.iter().map(|&x| 0.25 * x.abs().max(0.05)).collect();
        let mut f = |x: &[f64]| {
            if x.iter().map(|a| a.abs()).sum::<f64>() > t_max {
                return f64::INFINITY;
            }
            arc_cost(&engine, sign, x, u_max)
        };
        let first = neldermead::minimize(&mut f, x0, &steps, p.nm_tolerance, p.nm_max_evals);
        let polish_steps: Vec<f64> = first.x.iter().map(|&x| 0.05 * x.abs().max(0.01)).collect();
        let second = neldermead::minimize(
            &mut f,
            &first.x,
            &polish_steps,
            p.nm_tolerance,
            p.nm_max_evals,
        );
        *evals += first.evals + second.evals;
        let arcs: Vec<f64> = second.x.iter().map(|a| a.abs()).collect();
        best.offer(arcs_to_schedule(sign, &arcs, u_max), second.f);
    };

    for switches in 0..=p.max_switches {
        let n = switches + 1;
        for sign in [1.0, -1.0] {
            for frac in INIT_TOTALS {
                let x0 = vec![frac * t_max / n as f64; n];
                run(sign, &x0, &mut best, &mut evals);
            }
        }
    }

    if let Some(w) = warm {
        if !w.is_empty() {
            let w_cost = engine.cost_of(w.segments().iter().map(|s| (&s.values[..], s.duration)));
            best.offer(w.clone(), w_cost);
            let arcs = w.coalesced();
            let saturated = arcs
                .segments()
                .iter()
                .all(|s| (s.values[0].abs() - u_max).abs() < 1e-12);
            let alternating = arcs
                .segments()
                .windows(2)
                .all(|s| s[0].values[0] * s[1].values[0] < 0.0);
            if saturated && alternating {
                let sign = arcs.segments()[0].values[0].signum();
                let x0: Vec<f64> = arcs.segments().iter().map(|s| s.duration).collect();
                run(sign, &x0, &mut best, &mut evals);
            }
        }
    }

    let schedule = best.schedule;
    let (cost, terminal_error) = cost_parts(problem, &schedule)?;
    let converged = !(schedule.is_empty() && idle_cost > 1e-12);
    Ok(SolveResult {
        schedule,
        cost,
        terminal_error,
        iterations: evals,
        converged,
    })
}
