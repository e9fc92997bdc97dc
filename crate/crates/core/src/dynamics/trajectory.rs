// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ci, CMatrix, CVector};
use crate::state::PureState;

use super::channel::DissipationChannel;
use super::master::DEFAULT_STEP;
use super::model::HamiltonianModel;
use super::schedule::ControlSchedule;

/// Per-step jump probabilities above this invalidate the first-order rule.
const MAX_JUMP_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub operator: usize,
}

/// Outcome of one quantum trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub state: PureState,
    pub jumps: Vec<Jump>,
    pub no_jump: bool,
}

/// Normalised no-jump states sampled on the integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoJumpPath {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
}

fn check_inputs(
    psi0: &PureState,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    step: f64,
) -> Result<()> {
    for found in [psi0.dim(), channel.dim()] {
        if found != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found,
            });
        }
    }
    schedule.check_against(model)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::param("step", "must be positive"));
    }
    let total = schedule.duration();
    if !schedule.is_empty() && step > total * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            step,
            duration: total,
        });
    }
    Ok(())
}

/// `exp(−i H_eff dt)` with `H_eff = H − (i/2) Σ γ L†L`.
fn drift_propagator(h: &CMatrix, channel: &DissipationChannel, dt: f64) -> CMatrix {
    let g = h * ci(-1.0) - channel.decay_operator() * c(0.5);
    linalg::expm(&(g * c(dt)))
}

/// Samples one quantum-jump trajectory at the default step.
pub fn sample_trajectory<R: Rng + ?Sized>(
    psi0: &PureState,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    include_uncertainty: bool,
    rng: &mut R,
) -> Result<TrajectorySample> {
    sample_trajectory_with_step(
        psi0,
        model,
        schedule,
        channel,
        include_uncertainty,
        DEFAULT_STEP,
        rng,
    )
}

/// Samples one quantum-jump trajectory.
///
/// Each step either jumps, with probability `dp = Σ γ_i ⟨L_i†L_i⟩ dt`, or
/// follows the non-Hermitian drift and renormalises.
pub fn sample_trajectory_with_step<R: Rng + ?Sized>(
    psi0: &PureState,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    include_uncertainty: bool,
    step: f64,
    rng: &mut R,
) -> Result<TrajectorySample> {
    check_inputs(psi0, model, schedule, channel, step)?;
    let active: Vec<(usize, f64, &CMatrix)> = channel
        .operators()
        .iter()
        .zip(channel.rates())
        .enumerate()
        .filter(|(_, (_, &g))| g > 0.0)
        .map(|(i, (l, &g))| (i, g, l))
        .collect();

    let mut psi = psi0.amplitudes().clone();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    let mut weights = vec![0.0; active.len()];
    for seg in schedule.segments() {
        let h = model.hamiltonian(&seg.values, include_uncertainty);
        let n = ((seg.duration / step).round() as usize).max(1);
        let dt = seg.duration / n as f64;
        let drift = drift_propagator(&h, channel, dt);
        for _ in 0..n {
            let mut dp = 0.0;
            for (w, (_, g, l)) in weights.iter_mut().zip(&active) {
                *w = g * (*l * &psi).norm_squared() * dt;
                dp += *w;
            }
            if dp > MAX_JUMP_PROBABILITY {
                return Err(Error::JumpStepTooLarge { dp, time: t });
            }
            if dp > 0.0 && rng.random::<f64>() < dp {
                let mut pick = rng.random::<f64>() * dp;
                let mut chosen = active.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if pick < *w {
                        chosen = k;
                        break;
                    }
                    pick -= w;
                }
                let (index, _, l) = active[chosen];
                psi = l * &psi;
                jumps.push(Jump {
                    time: t + dt,
                    operator: index,
                });
            } else {
                psi = &drift * &psi;
            }
            let norm = psi.norm();
            psi /= c(norm);
            t += dt;
        }
    }
    Ok(TrajectorySample {
        state: PureState::normalized(psi)?,
        no_jump: jumps.is_empty(),
        jumps,
    })
}

/// Integrates the jump-free drift and records the normalised state on the grid.
pub fn no_jump_path(
    psi0: &PureState,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    include_uncertainty: bool,
    step: f64,
) -> Result<NoJumpPath> {
    check_inputs(psi0, model, schedule, channel, step)?;
    let mut psi = psi0.amplitudes().clone();
    let mut times = vec![0.0];
    let mut states = vec![psi.clone()];
    let mut t = 0.0;
    for seg in schedule.segments() {
        let h = model.hamiltonian(&seg.values, include_uncertainty);
        let n = ((seg.duration / step).round() as usize).max(1);
        let dt = seg.duration / n as f64;
        let drift = drift_propagator(&h, channel, dt);
        for _ in 0..n {
            psi = &drift * &psi;
            let norm = psi.norm();
            psi /= c(norm);
            t += dt;
            times.push(t);
            states.push(psi.clone());
        }
    }
    Ok(NoJumpPath { times, states })
}

/// `exp(−∫ Σ γ_k ⟨L_k†L_k⟩ ds)` over `interval`, by trapezoidal quadrature
/// along the no-jump path.
pub fn no_jump_probability(
    channel: &DissipationChannel,
    path: &NoJumpPath,
    interval: (f64, f64),
) -> f64 {
    let k = channel.decay_operator();
    let rate = |psi: &CVector| psi.dotc(&(&k * psi)).re;
    let (a, b) = interval;
    let eps = 1e-12;
    let mut integral = 0.0;
    for w in 0..path.times.len().saturating_sub(1) {
        let (t0, t1) = (path.times[w], path.times[w + 1]);
        if t0 < a - eps || t1 > b + eps {
            continue;
        }
        integral += 0.5 * (t1 - t0) * (rate(&path.states[w]) + rate(&path.states[w + 1]));
    }
    (-integral).exp().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_nominal;
    use crate::operators::{sigma_x, sigma_z};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_channel_matches_nominal() {
        let model = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        let sched = ControlSchedule::constant(vec![1.0], 0.8).unwrap();
        let psi = PureState::basis(2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_trajectory(
            &psi,
            &model,
            &sched,
            &DissipationChannel::closed(2),
            false,
            &mut rng,
        )
        .unwrap();
        assert!(s.no_jump && s.jumps.is_empty());
        let nominal = evolve_nominal(&psi, &model, &sched).unwrap();
        assert!((s.state.inner(&nominal).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn large_step_rejected() {
        let model = HamiltonianModel::new(sigma_z(), vec![]).unwrap();
        let sched = ControlSchedule::constant(vec![], 1.0).unwrap();
        let ch = DissipationChannel::sigma_y(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sample_trajectory_with_step(
            &PureState::basis(2, 0),
            &model,
            &sched,
            &ch,
            false,
            0.5,
            &mut rng,
        );
        assert!(matches!(r, Err(Error::JumpStepTooLarge { .. })));
    }

    #[test]
    fn uniform_no_jump_probability_is_exact() {
        let model = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        let sched = ControlSchedule::constant(vec![0.5], 1.0).unwrap();
        let ch = DissipationChannel::sigma_y(0.1).unwrap();
        let path = no_jump_path(&PureState::basis(2, 0), &model, &sched, &ch, false, 1e-3).unwrap();
        let p = no_jump_probability(&ch, &path, (0.0, 1.0));
        assert!((p - (-0.1f64).exp()).abs() < 1e-12);
        assert_eq!(
            no_jump_probability(&DissipationChannel::closed(2), &path, (0.0, 1.0)),
            1.0
        );
    }

    #[test]
    fn jump_times_increase() {
        let model = HamiltonianModel::new(sigma_z(), vec![]).unwrap();
        let sched = ControlSchedule::constant(vec![], 2.0).unwrap();
        let ch = DissipationChannel::sigma_y(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_trajectory(
            &PureState::basis(2, 0),
            &model,
            &sched,
            &ch,
            false,
            &mut rng,
        )
        .unwrap();
        assert!(!s.jumps.is_empty());
        for w in s.jumps.windows(2) {
            assert!(w[1].time > w[0].time);
        }
        assert!(s
            .jumps
            .iter()
            .all(|j| j.time > 0.0 && j.time <= 2.0 + 1e-12));
    }
}
