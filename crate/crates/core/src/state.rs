// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum states and the distance measures used by the cost function.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::policy::NumericPolicy;

/// A unit vector in `C^d` with a canonical global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Accepts a vector whose norm is already within the pure-state tolerance.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NumericPolicy::DEFAULT.pure_norm_tol {
            return Err(Error::InvalidState(format!(
                "pure state norm {norm} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalises `amplitudes`; fails only for a zero or non-finite vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / c(norm),
        })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for d = {dim}"
        );
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }

    /// Rotates the global phase so the first non-negligible amplitude is real and positive.
    pub fn canonical(mut self) -> Self {
        if let Some(a) = self.amplitudes.iter().find(|a| a.norm() > 1e-12).copied() {
            let phase = a.conj() / c(a.norm());
            self.amplitudes *= phase;
            let first = self
                .amplitudes
                .iter()
                .position(|a| a.norm() > 1e-12)
                .unwrap();
            self.amplitudes[first] = c(self.amplitudes[first].re);
        }
        self
    }
}

/// A `d × d` Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the invariants in [`NumericPolicy::DEFAULT`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let report = validate_state(&matrix);
        if !report.passed {
            return Err(Error::InvalidState(report.describe()));
        }
        Ok(Self {
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    /// Skips validation. Callers must guarantee the invariants.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        PureState::basis(dim, index).to_density()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) * c(1.0 / dim as f64),
        }
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(linalg::real_diagonal(populations))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() < 1e-10
    }
}

impl Serialize for DensityMatrix {
    /// Row-major real and imaginary parts.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(self.matrix[(i, j)].re);
                im.push(self.matrix[(i, j)].im);
            }
        }
        let mut st = serializer.serialize_struct("DensityMatrix", 3)?;
        st.serialize_field("dim", &d)?;
        st.serialize_field("re", &re)?;
        st.serialize_field("im", &im)?;
        st.end()
    }
}

/// Diagnostic report produced by [`validate_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
    pub passed: bool,
}

impl StateReport {
    pub fn describe(&self) -> String {
        format!(
            "hermiticity defect {:.3e}, trace defect {:.3e}, min eigenvalue {:.3e}",
            self.hermiticity_defect, self.trace_defect, self.min_eigenvalue
        )
    }
}

/// Checks Hermiticity, unit trace and positivity of an arbitrary square matrix.
pub fn validate_state(m: &CMatrix) -> StateReport {
    validate_state_with(m, &NumericPolicy::DEFAULT, NumericPolicy::DEFAULT.psd_tol)
}

pub(crate) fn validate_state_with(
    m: &CMatrix,
    policy: &NumericPolicy,
    psd_tol: f64,
) -> StateReport {
    if m.nrows() != m.ncols() || m.is_empty() {
        return StateReport {
            hermiticity_defect: f64::INFINITY,
            trace_defect: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            hermitian: false,
            unit_trace: false,
            positive: false,
            passed: false,
        };
    }
    let hermiticity_defect = linalg::hermiticity_defect(m);
    let trace_defect = (m.trace() - c(1.0)).norm();
    let min_eigenvalue = linalg::min_eigenvalue(m);
    let hermitian = hermiticity_defect <= policy.hermitian_tol;
    let unit_trace = trace_defect <= policy.trace_tol;
    let positive = min_eigenvalue >= -psd_tol;
    StateReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermitian,
        unit_trace,
        positive,
        passed: hermitian && unit_trace && positive,
    }
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `½ Tr|a − b|`, computed from singular values.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok((0.5 * linalg::trace_norm(&(a.matrix() - b.matrix()))).clamp(0.0, 1.0))
}

/// `Tr(a b)`; the imaginary residue is discarded.
pub fn overlap(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(linalg::trace_product(a.matrix(), b.matrix())
        .re
        .clamp(0.0, 1.0))
}

/// Squared trace distance between the target and the final state.
pub fn terminal_error(target: &DensityMatrix, state: &DensityMatrix) -> Result<f64> {
    let d = trace_distance(target, state)?;
    Ok(d * d)
}

/// Fidelity against a pure reference, `√Tr(ρσ)`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok(overlap(a, b)?.sqrt())
}

/// Closest pure state in fidelity: the dominant eigenvector of `rho`.
///
/// When the largest eigenvalue is degenerate, the returned vector is the
/// normalised projection onto the dominant eigenspace of the lowest-index
/// computational basis state with a non-negligible projection.
pub fn nearest_pure_state(rho: &DensityMatrix) -> PureState {
    let (values, vectors) = linalg::hermitian_eigen(rho.matrix());
    let d = values.len();
    let lambda_max = values[d - 1];
    let tol = NumericPolicy::DEFAULT.degeneracy_tol;
    let dominant: Vec<usize> = (0..d).filter(|&k| values[k] >= lambda_max - tol).collect();

    let vector = if dominant.len() == 1 {
        vectors.column(d - 1).into_owned()
    } else {
        let basis = CMatrix::from_fn(d, dominant.len(), |i, j| vectors[(i, dominant[j])]);
        let projector = &basis * basis.adjoint();
        (0..d)
            .map(|i| projector.column(i).into_owned())
            .find(|p| p.norm() > 1e-8)
            .unwrap_or_else(|| vectors.column(d - 1).into_owned())
    };
    PureState::normalized(vector)
        .expect("eigenvectors are non-zero")
        .canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ci;

    fn plus() -> PureState {
        PureState::from_slice(&[c(1.0), c(1.0)]).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        let d = trace_distance(&zero, &plus().to_density()).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        assert!((overlap(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(overlap(&zero, &one).unwrap().abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((overlap(&mixed, &zero).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn terminal_error_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        assert!(terminal_error(&zero, &zero).unwrap() < 1e-24);
        assert!((terminal_error(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((terminal_error(&zero, &plus().to_density()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(3, 0);
        assert!(matches!(
            trace_distance(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(overlap(&a, &b).is_err());
        assert!(terminal_error(&a, &b).is_err());
    }

    #[test]
    fn nearest_pure_state_examples() {
        let psi = PureState::from_slice(&[c(0.6), ci(0.8)])
            .unwrap()
            .canonical();
        let back = nearest_pure_state(&psi.to_density());
        assert!((back.inner(&psi).norm() - 1.0).abs() < 1e-12);
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);

        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let dom = nearest_pure_state(&rho);
        assert!((dom.amplitudes()[0] - c(1.0)).norm() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(2);
        let tie = nearest_pure_state(&mixed);
        assert!((tie.amplitudes()[0] - c(1.0)).norm() < 1e-12);
        let (values, _) = linalg::hermitian_eigen(mixed.matrix());
        let achieved = linalg::trace_product(mixed.matrix(), &tie.projector()).re;
        assert!((achieved - values[1]).abs() < 1e-12);
    }

    #[test]
    fn degenerate_tie_break_uses_lowest_index_overlap() {
        // Dominant eigenspace spanned by |1> and |2>; |0> has no weight there.
        let rho = DensityMatrix::diagonal(&[0.2, 0.4, 0.4]).unwrap();
        let psi = nearest_pure_state(&rho);
        assert!((psi.amplitudes()[1] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn validate_state_examples() {
        assert!(validate_state(DensityMatrix::maximally_mixed(2).matrix()).passed);
        let negative = linalg::real_diagonal(&[1.5, -0.5]);
        let report = validate_state(&negative);
        assert!(!report.passed && !report.positive && report.hermitian);
        let mut skew = DensityMatrix::basis(2, 0).into_matrix();
        skew[(0, 1)] += c(1e-3);
        let report = validate_state(&skew);
        assert!(!report.passed && !report.hermitian);
    }

    #[test]
    fn canonical_phase_is_real_positive() {
        let psi = PureState::from_slice(&[c(0.0), ci(-1.0), c(0.0)])
            .unwrap()
            .canonical();
        assert!((psi.amplitudes()[1] - c(1.0)).norm() < 1e-15);
    }
}
