// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{DensityMatrix, PureState};

use super::model::HamiltonianModel;
use super::schedule::ControlSchedule;

/// Product of the segment unitaries, latest segment leftmost.
pub fn schedule_unitary(
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    include_uncertainty: bool,
) -> Result<CMatrix> {
    schedule.check_against(model)?;
    let mut u = linalg::identity(model.dim());
    for seg in schedule.segments() {
        let h = model.hamiltonian(&seg.values, include_uncertainty);
        u = linalg::unitary(&h, seg.duration) * u;
    }
    Ok(u)
}

/// Closed, uncertainty-free evolution of a pure state.
pub fn evolve_nominal(
    psi0: &PureState,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
) -> Result<PureState> {
    if psi0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: psi0.dim(),
        });
    }
    let u = schedule_unitary(model, schedule, false)?;
    PureState::normalized(u * psi0.amplitudes())
}

/// `U ρ U†` for the schedule unitary, optionally including the uncertainty.
pub fn evolve_unitary(
    rho0: &DensityMatrix,
    model: &HamiltonianModel,
    schedule: &ControlSchedule,
    include_uncertainty: bool,
) -> Result<DensityMatrix> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    let u = schedule_unitary(model, schedule, include_uncertainty)?;
    let rho = &u * rho0.matrix() * u.adjoint();
    Ok(DensityMatrix::from_trusted(linalg::hermitian_part(&rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Segment;
    use crate::linalg::c;
    use crate::operators::{sigma_x, sigma_z};
    use crate::state::overlap;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn model() -> HamiltonianModel {
        HamiltonianModel::single_control(CMatrix::zeros(2, 2), sigma_x(), 1.0).unwrap()
    }

    #[test]
    fn rabi_half_period_flips() {
        let out = evolve_nominal(
            &PureState::basis(2, 0),
            &model(),
            &ControlSchedule::constant(vec![1.0], FRAC_PI_2).unwrap(),
        )
        .unwrap();
        let ov = overlap(&DensityMatrix::basis(2, 1), &out.to_density()).unwrap();
        assert!((ov - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_only_picks_up_phase() {
        let m = HamiltonianModel::new(sigma_z(), vec![]).unwrap();
        let out = evolve_nominal(
            &PureState::basis(2, 0),
            &m,
            &ControlSchedule::constant(vec![], PI).unwrap(),
        )
        .unwrap();
        assert!((out.amplitudes()[0] + c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn two_segments_compose() {
        let m = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        let sched = ControlSchedule::new(vec![
            Segment {
                duration: 0.4,
                values: vec![1.0],
            },
            Segment {
                duration: 0.9,
                values: vec![-0.5],
            },
        ])
        .unwrap();
        let psi = PureState::from_slice(&[c(0.3), c(0.7)]).unwrap();
        let out = evolve_nominal(&psi, &m, &sched).unwrap();
        let u1 = linalg::unitary(&(sigma_z() + sigma_x()), 0.4);
        let u2 = linalg::unitary(&(sigma_z() - sigma_x() * c(0.5)), 0.9);
        let expected = u2 * u1 * psi.amplitudes();
        assert!((out.amplitudes() - expected).norm() < 1e-12);
        assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
    }
}
