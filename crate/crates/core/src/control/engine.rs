// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Cost evaluation inside the solvers.
//!
//! Pure closed problems propagate state vectors with `d × d` unitaries.
//! Everything else propagates `vec(ρ)` with `d² × d²` superoperators.

use crate::dynamics::liouvillian;
use crate::linalg::{self, c, ci, CMatrix, CVector};
use crate::state::nearest_pure_state;

use super::problem::ControlProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Pure,
    Liouville,
}

pub(crate) struct Engine {
    mode: Mode,
    dim: usize,
    lambda0: f64,
    /// Generator at zero control: `−i H0` or the Liouvillian of `H0`.
    base: CMatrix,
    /// Generator contribution per unit control.
    control_gens: Vec<CMatrix>,
    init: CVector,
    target_vec: CVector,
    target: CMatrix,
    pub u_max: Vec<f64>,
}

fn is_pure(rho: &CMatrix) -> bool {
    (linalg::trace_product(rho, rho).re - 1.0).abs() < 1e-12
}

impl Engine {
    pub fn new(problem: &ControlProblem) -> Self {
        let d = problem.model.dim();
        let pure = problem.channel.is_closed()
            && is_pure(problem.initial.matrix())
            && is_pure(problem.target.matrix());
        let u_max = problem.model.controls().iter().map(|ch| ch.u_max).collect();
        let target = problem.target.matrix().clone();
        if pure {
            let init = nearest_pure_state(&problem.initial).into_amplitudes();
            let target_vec = nearest_pure_state(&problem.target).into_amplitudes();
            Self {
                mode: Mode::Pure,
                dim: d,
                lambda0: problem.lambda0,
                base: problem.model.h0() * ci(-1.0),
                control_gens: problem
                    .model
                    .controls()
                    .iter()
                    .map(|ch| &ch.operator * ci(-1.0))
                    .collect(),
                init,
                target_vec,
                target,
                u_max,
            }
        } else {
            let base = liouvillian(problem.model.h0(), &problem.channel);
            let id = linalg::identity(d);
            let control_gens = problem
                .model
                .controls()
                .iter()
                .map(|ch| {
                    let h = &ch.operator;
                    (id.kronecker(h) - h.transpose().kronecker(&id)) * ci(-1.0)
                })
                .collect();
            Self {
                mode: Mode::Liouville,
                dim: d,
                lambda0: problem.lambda0,
                base,
                control_gens,
                init: linalg::vectorize(problem.initial.matrix()),
                target_vec: CVector::zeros(0),
                target,
                u_max,
            }
        }
    }

    pub fn n_controls(&self) -> usize {
        self.control_gens.len()
    }

    /// Propagator of one constant-control segment.
    pub fn segment(&self, values: &[f64], duration: f64) -> CMatrix {
        linalg::expm(&(self.generator(values) * c(duration)))
    }

    pub fn terminal_error(&self, state: &CVector) -> f64 {
        match self.mode {
            Mode::Pure => (1.0 - self.target_vec.dotc(state).norm_sqr()).clamp(0.0, 1.0),
            Mode::Liouville => {
                let rho = linalg::unvectorize(state, self.dim);
                let dist = (0.5 * linalg::trace_norm(&(rho - &self.target))).clamp(0.0, 1.0);
                dist * dist
            }
        }
    }

    fn generator(&self, values: &[f64]) -> CMatrix {
        let mut gen = self.base.clone();
        for (g, &u) in self.control_gens.iter().zip(values) {
            if u != 0.0 {
                gen += g * c(u);
            }
        }
        gen
    }

    /// `exp(G(values) duration) state`.
    fn advance(&self, values: &[f64], duration: f64, state: &CVector) -> CVector {
        match self.mode {
            Mode::Pure => self.segment(values, duration) * state,
            Mode::Liouville => linalg::expm_action(&(self.generator(values) * c(duration)), state),
        }
    }

    /// Cost of `(values, duration)` pieces applied in order.
    pub fn cost_of<'a, I>(&self, pieces: I) -> f64
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        let mut state = self.init.clone();
        let mut t = 0.0;
        for (values, dur) in pieces {
            if dur <= 0.0 {
                continue;
            }
            state = self.advance(values, dur, &state);
            t += dur;
        }
        self.lambda0 * t + self.terminal_error(&state)
    }

    /// Cost and central-difference gradient for controls `u` (segment-major)
    /// over the given durations.
    pub fn cost_and_gradient(&self, durations: &[f64], u: &[f64], eps: f64) -> (f64, Vec<f64>) {
        let m = self.n_controls();
        let k = durations.len();
        let props: Vec<CMatrix> = (0..k)
            .map(|s| self.segment(&u[s * m..(s + 1) * m], durations[s]))
            .collect();
        // forward[s] is the state before segment s.
        let mut forward = Vec::with_capacity(k + 1);
        forward.push(self.init.clone());
        for p in &props {
            let next = p * forward.last().unwrap();
            forward.push(next);
        }
        let t_f: f64 = durations.iter().sum();
        let time_cost = self.lambda0 * t_f;
        let cost = time_cost + self.terminal_error(&forward[k]);

        let mut grad = vec![0.0; k * m];
        let mut values = vec![0.0; m];
        match self.mode {
            Mode::Pure => {
                // back[s] = ⟨tar| U_K ⋯ U_{s+1}, as a column of conjugates.
                let mut back = vec![CVector::zeros(self.dim); k];
                let mut b = self.target_vec.clone();
                for s in (0..k).rev() {
                    back[s] = b.clone();
                    b = props[s].adjoint() * b;
                }
                for s in 0..k {
                    values.copy_from_slice(&u[s * m..(s + 1) * m]);
                    for mu in 0..m {
                        let base = values[mu];
                        let eval = |delta: f64, values: &mut Vec<f64>| {
                            values[mu] = base + delta;
                            let p = self.segment(values, durations[s]);
                            let amp = back[s].dotc(&(p * &forward[s]));
                            time_cost + (1.0 - amp.norm_sqr()).clamp(0.0, 1.0)
                        };
                        let plus = eval(eps, &mut values);
                        let minus = eval(-eps, &mut values);
                        values[mu] = base;
                        grad[s * m + mu] = (plus - minus) / (2.0 * eps);
                    }
                }
            }
            Mode::Liouville => {
                // suffix[s] = P_K ⋯ P_{s+1}.
                let dd = self.dim * self.dim;
                let mut suffix = vec![CMatrix::identity(dd, dd); k];
                let mut acc = CMatrix::identity(dd, dd);
                for s in (0..k).rev() {
                    suffix[s] = acc.clone();
                    acc = &acc * &props[s];
                }
                for s in 0..k {
                    values.copy_from_slice(&u[s * m..(s + 1) * m]);
                    for mu in 0..m {
                        let base = values[mu];
                        let eval = |delta: f64, values: &mut Vec<f64>| {
                            values[mu] = base + delta;
                            let fin = &suffix[s] * self.advance(values, durations[s], &forward[s]);
                            time_cost + self.terminal_error(&fin)
                        };
                        let plus = eval(eps, &mut values);
                        let minus = eval(-eps, &mut values);
                        values[mu] = base;
                        grad[s * m + mu] = (plus - minus) / (2.0 * eps);
                    }
                }
            }
        }
        (cost, grad)
    }

    /// Cost for controls `u` (segment-major) over the given durations.
    pub fn cost_grid(&self, durations: &[f64], u: &[f64]) -> f64 {
        let m = self.n_controls();
        self.cost_of(
            durations
                .iter()
                .enumerate()
                .map(|(s, &d)| (&u[s * m..(s + 1) * m], d)),
        )
    }
}
