// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, ci, CMatrix};
use crate::policy::NumericPolicy;
use crate::state::{validate_state_with, DensityMatrix};

use super::channel::DissipationChannel;
use super::model::HamiltonianModel;
use super::schedule::ControlSchedule;

/// Default RK4 step for a unit sampling period.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Integration scheme for [`evolve_master_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta; each segment uses the nearest
    /// step that divides it evenly.
    Rk4 { step: f64 },
    /// Exponential of the Liouvillian superoperator per segment.
    Exact,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Rk4 { step: DEFAULT_STEP }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `−i[H, ρ] + Σ γ_i (L_i ρ L_i† − ½{L_i†L_i, ρ})`.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h_total: &CMatrix,
    channel: &DissipationChannel,
) -> Result<CMatrix> {
    check_dim(rho.dim(), h_total.nrows())?;
    check_dim(rho.dim(), channel.dim())?;
    let gen = Generator::new(h_total, channel);
    Ok(gen.apply(rho.matrix()))
}

/// Precomputed pieces of the Lindblad generator, `ρ ↦ Gρ + ρG† + Σ γ LρL†`
/// with `G = −iH − ½ Σ γ L†L`.
struct Generator {
    g: CMatrix,
    g_adj: CMatrix,
    jumps: Vec<(CMatrix, CMatrix)>,
}

impl Generator {
    fn new(h: &CMatrix, channel: &DissipationChannel) -> Self {
        let g = h * ci(-1.0) - channel.decay_operator() * c(0.5);
        let g_adj = g.adjoint();
        let jumps = channel
            .active()
            .map(|(gamma, l)| {
                let scaled = l * c(gamma.sqrt());
                let adj = scaled.adjoint();
                (scaled, adj)
            })
            .collect();
        Self { g, g_adj, jumps }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = &self.g * rho + rho * &self.g_adj;
        for (l, l_adj) in &self.jumps {
            out += l * rho * l_adj;
        }
        out
    }

    fn rk4(&self, rho: &mut CMatrix, dt: f64, steps: usize) {
        let half = c(0.5 * dt);
        let full = c(dt);
        let sixth = c(dt / 6.0);
        for _ in 0..steps {
            let k1 = self.apply(rho);
            let k2 = self.apply(&(&*rho + &k1 * half));
            let k3 = self.apply(&(&*rho + &k2 * half));
            let k4 = self.apply(&(&*rho + &k3 * full));
            *rho += (k1 + (k2 + k3) * c(2.0) + k4) * sixth;
            let tr = rho.trace().re;
            *rho *= c(1.0 / tr);
        }
    }
}

/// Liouvillian superoperator acting on column-stacked `vec(ρ)`.
pub fn liouvillian(h: &CMatrix, channel: &DissipationChannel) -> CMatrix {
    let d = h.nrows();
    let id = linalg::identity(d);
    let g = h * ci(-1.0) - channel.decay_operator() * c(0.5);
    let mut sup = id.kronecker(&g) + g.map(|z| z.conj()).kronecker(&id);
    for (gamma, l) in channel.active() {
        sup += l.map(|z| z.conj()).kronecker(l) * c(gamma);
    }
    sup
}

/// `exp(𝓛 t)` for the Liouvillian of `(h, channel)`.
pub fn superoperator_propagator(h: &CMatrix, channel: &DissipationChannel, t: f64) -> CMatrix {
    linalg::expm(&(liouvillian(h, channel) * c(t)))
}

/// RK4 integration of the Lindblad equation at the default step.
pub fn evolve_master(
    rho0: &DensityMatrix,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    include_uncertainty: bool,
) -> Result<DensityMatrix> {
    evolve_master_with(
        rho0,
        model,
        schedule,
        channel,
        include_uncertainty,
        Integrator::default(),
    )
}

/// Lindblad evolution with an explicit integrator.
pub fn evolve_master_with(
    rho0: &DensityMatrix,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    channel: &DissipationChannel,
    include_uncertainty: bool,
    integrator: Integrator,
) -> Result<DensityMatrix> {
    let d = model.dim();
    check_dim(d, rho0.dim())?;
    check_dim(d, channel.dim())?;
    schedule.check_against(model)?;
    if schedule.is_empty() {
        return Ok(rho0.clone());
    }
    let mut rho = rho0.matrix().clone();
    match integrator {
        Integrator::Rk4 { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::param("step", "must be positive"));
            }
            let total = schedule.duration();
            if step > total * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge {
                    step,
                    duration: total,
                });
            }
            for seg in schedule.segments() {
                let h = model.hamiltonian(&seg.values, include_uncertainty);
                let gen = Generator::new(&h, channel);
                let n = ((seg.duration / step).round() as usize).max(1);
                gen.rk4(&mut rho, seg.duration / n as f64, n);
            }
        }
        Integrator::Exact => {
            let closed = channel.is_closed();
            for seg in schedule.segments() {
                let h = model.hamiltonian(&seg.values, include_uncertainty);
                if closed {
                    let u = linalg::unitary(&h, seg.duration);
                    rho = &u * &rho * u.adjoint();
                } else {
                    let p = superoperator_propagator(&h, channel, seg.duration);
                    rho = linalg::unvectorize(&(p * linalg::vectorize(&rho)), d);
                }
            }
        }
    }
    finish(rho)
}

/// Hermitises, renormalises and checks the integrated state.
pub(crate) fn finish(rho: CMatrix) -> Result<DensityMatrix> {
    let tol = NumericPolicy::DEFAULT.integration_tol;
    let policy = NumericPolicy {
        hermitian_tol: tol,
        trace_tol: tol,
        ..NumericPolicy::DEFAULT
    };
    let tr = rho.trace().re;
    let report = validate_state_with(&rho, &policy, tol);
    if !report.passed || !tr.is_finite() {
        return Err(Error::IntegrationDrift(report.describe()));
    }
    let rho = linalg::hermitian_part(&rho) * c(1.0 / tr);
    Ok(DensityMatrix::from_trusted(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{sigma_x, sigma_y, sigma_z};
    use crate::state::{trace_distance, PureState};

    fn rabi_model() -> HamiltonianModel {
        HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap()
    }

    #[test]
    fn rhs_matches_term_by_term_expansion() {
        let rho = DensityMatrix::basis(2, 0);
        let ch = DissipationChannel::sigma_y(0.1).unwrap();
        let out = lindblad_rhs(&rho, &sigma_z(), &ch).unwrap();
        let r = rho.matrix();
        let h = sigma_z();
        let l = sigma_y();
        let expected = (&h * r - r * &h) * ci(-1.0)
            + (&l * r * l.adjoint() - (l.adjoint() * &l * r + r * l.adjoint() * &l) * c(0.5))
                * c(0.1);
        assert!((out.clone() - expected).norm() < 1e-15);
        assert!(out.trace().norm() < 1e-12);
        // σy|0⟩⟨0|σy = |1⟩⟨1|, so the rhs is 0.1 (|1⟩⟨1| − |0⟩⟨0|).
        assert!((out[(0, 0)].re + 0.1).abs() < 1e-15 && (out[(1, 1)].re - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rhs_vanishes_for_stationary_states() {
        let rho = DensityMatrix::basis(2, 1);
        let out = lindblad_rhs(&rho, &sigma_z(), &DissipationChannel::closed(2)).unwrap();
        assert!(out.norm() < 1e-15);
        assert!(lindblad_rhs(&rho, &sigma_z(), &DissipationChannel::closed(3)).is_err());
    }

    #[test]
    fn depolarizing_scales_bloch_vector() {
        let plus = PureState::from_slice(&[c(1.0), c(1.0)])
            .unwrap()
            .to_density();
        let model = HamiltonianModel::new(CMatrix::zeros(2, 2), vec![]).unwrap();
        let sched = ControlSchedule::constant(vec![], 1.0).unwrap();
        let ch = DissipationChannel::depolarizing(2, 0.1).unwrap();
        let out = evolve_master(&plus, &model, &sched, &ch, false).unwrap();
        let bloch_x = 2.0 * out.matrix()[(0, 1)].re;
        assert!((bloch_x - (-0.1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn exact_and_rk4_agree() {
        let rho = DensityMatrix::basis(2, 0);
        let sched = ControlSchedule::constant(vec![1.0], 1.3).unwrap();
        let ch = DissipationChannel::sigma_y(0.2).unwrap();
        let a = evolve_master(&rho, &rabi_model(), &sched, &ch, false).unwrap();
        let b =
            evolve_master_with(&rho, &rabi_model(), &sched, &ch, false, Integrator::Exact).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn step_larger_than_schedule_is_rejected() {
        let rho = DensityMatrix::basis(2, 0);
        let sched = ControlSchedule::constant(vec![1.0], 0.01).unwrap();
        let err = evolve_master_with(
            &rho,
            &rabi_model(),
            &sched,
            &DissipationChannel::closed(2),
            false,
            Integrator::Rk4 { step: 0.1 },
        );
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }
}
