// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::state::{validate_state, DensityMatrix, PureState};

const EFFECT_PSD_TOL: f64 = 1e-10;
const EFFECT_SUM_TOL: f64 = 1e-9;
const RANK_ONE_TOL: f64 = 1e-10;
/// Largest probability drift that is silently renormalised away.
const PROBABILITY_DRIFT_TOL: f64 = 1e-8;
/// Outcomes below this probability are never selected.
const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// One POVM element, with its unit vector when it is a rank-1 projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
    vector: Option<PureState>,
}

impl Effect {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Some(|φ⟩)` when the effect equals `|φ⟩⟨φ|`.
    pub fn rank_one_vector(&self) -> Option<&PureState> {
        self.vector.as_ref()
    }

    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        linalg::trace_product(&self.matrix, rho.matrix()).re
    }
}

/// Positive-semidefinite effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
}

fn rank_one_vector(m: &CMatrix) -> Option<PureState> {
    let (values, vectors) = linalg::hermitian_eigen(m);
    let d = values.len();
    let top_is_one = (values[d - 1] - 1.0).abs() <= RANK_ONE_TOL;
    let rest_zero = values[..d - 1].iter().all(|v| v.abs() <= RANK_ONE_TOL);
    if top_is_one && rest_zero {
        PureState::normalized(vectors.column(d - 1).into_owned())
            .ok()
            .map(PureState::canonical)
    } else {
        None
    }
}

impl Povm {
    /// Validates positivity and completeness.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidOperator(
                "a POVM needs at least one effect".into(),
            ));
        };
        let d = first.nrows();
        let mut sum = CMatrix::zeros(d, d);
        let mut out = Vec::with_capacity(effects.len());
        for (i, e) in effects.into_iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.nrows(),
                });
            }
            if linalg::hermiticity_defect(&e) > EFFECT_SUM_TOL {
                return Err(Error::InvalidOperator(format!(
                    "effect {i} is not Hermitian"
                )));
            }
            let e = linalg::hermitian_part(&e);
            let min = linalg::min_eigenvalue(&e);
            if min < -EFFECT_PSD_TOL {
                return Err(Error::InvalidOperator(format!(
                    "effect {i} has eigenvalue {min:.3e}"
                )));
            }
            sum += &e;
            let vector = rank_one_vector(&e);
            out.push(Effect { matrix: e, vector });
        }
        let defect = (sum - linalg::identity(d))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if defect > EFFECT_SUM_TOL {
            return Err(Error::InvalidOperator(format!(
                "effects sum to the identity only within {defect:.3e}"
            )));
        }
        Ok(Self { effects: out })
    }

    /// Projective measurement onto the given orthonormal vectors.
    pub fn from_basis(vectors: &[PureState]) -> Result<Self> {
        let mut povm = Self::new(vectors.iter().map(PureState::projector).collect())?;
        for (e, v) in povm.effects.iter_mut().zip(vectors) {
            e.vector = Some(v.clone());
        }
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        self.effects[0].matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// Born-rule probabilities, clipped and renormalised when the drift is tiny.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let raw: Vec<f64> = self.effects.iter().map(|e| e.probability(rho)).collect();
        let total: f64 = raw.iter().sum();
        let worst = raw
            .iter()
            .map(|&p| (-p).max(p - 1.0).max(0.0))
            .fold((total - 1.0).abs(), f64::max);
        if !worst.is_finite() || worst > PROBABILITY_DRIFT_TOL {
            return Err(Error::InvalidState(format!(
                "outcome probabilities {raw:?} drift from a distribution by {worst:.3e}"
            )));
        }
        let clipped: Vec<f64> = raw.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let norm: f64 = clipped.iter().sum();
        Ok(clipped.into_iter().map(|p| p / norm).collect())
    }

    /// Lüders post-measurement state for `outcome`.
    pub fn post_state(&self, rho: &DensityMatrix, outcome: usize) -> Result<DensityMatrix> {
        let effect = self
            .effects
            .get(outcome)
            .ok_or_else(|| Error::param("outcome", format!("index {outcome} out of range")))?;
        if let Some(v) = &effect.vector {
            return Ok(v.to_density());
        }
        let p = effect.probability(rho);
        if !(p >= MIN_OUTCOME_PROBABILITY) {
            return Err(Error::DegenerateMeasurement);
        }
        let root = linalg::psd_sqrt(&effect.matrix);
        let post = linalg::hermitian_part(&(&root * rho.matrix() * &root)) / c(p);
        let report = validate_state(&post);
        if !report.passed {
            return Err(Error::InvalidState(report.describe()));
        }
        DensityMatrix::new(post)
    }
}

/// `{|ψ⟩⟨ψ|, I − |ψ⟩⟨ψ|}`.
pub fn build_step_povm(nominal: &PureState) -> Povm {
    let d = nominal.dim();
    let projector = nominal.projector();
    let complement = linalg::identity(d) - &projector;
    let complement_vector = if d == 2 {
        let a = nominal.amplitudes();
        PureState::normalized(CVector::from_column_slice(&[-a[1].conj(), a[0].conj()])).ok()
    } else {
        None
    };
    Povm {
        effects: vec![
            Effect {
                matrix: projector,
                vector: Some(nominal.clone()),
            },
            Effect {
                matrix: complement,
                vector: complement_vector,
            },
        ],
    }
}

/// Samples an outcome by the Born rule and returns it with the post-measurement state.
pub fn measure<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    povm: &Povm,
    rng: &mut R,
) -> Result<(usize, DensityMatrix)> {
    let mut probs = povm.probabilities(rho)?;
    for p in probs.iter_mut() {
        if *p < MIN_OUTCOME_PROBABILITY {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateMeasurement);
    }
    let draw = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("total is positive");
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if p > 0.0 && draw < acc {
            outcome = i;
            break;
        }
    }
    Ok((outcome, povm.post_state(rho, outcome)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{sigma_x, sigma_y};
    use crate::state::trace_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn step_povm_of_basis_state() {
        let povm = build_step_povm(&PureState::basis(2, 0));
        assert!(close(
            povm.effects()[0].matrix(),
            &linalg::real_diagonal(&[1.0, 0.0]),
            1e-15
        ));
        assert!(close(
            povm.effects()[1].matrix(),
            &linalg::real_diagonal(&[0.0, 1.0]),
            1e-15
        ));
    }

    #[test]
    fn step_povm_of_plus_state() {
        let plus = PureState::from_slice(&[c(1.0), c(1.0)]).unwrap();
        let povm = build_step_povm(&plus);
        let id = linalg::identity(2);
        assert!(close(
            povm.effects()[0].matrix(),
            &((&id + sigma_x()) * c(0.5)),
            1e-15
        ));
        assert!(close(
            povm.effects()[1].matrix(),
            &((&id - sigma_x()) * c(0.5)),
            1e-15
        ));
        let minus = povm.effects()[1].rank_one_vector().unwrap();
        assert!(plus.inner(minus).norm() < 1e-15);
    }

    #[test]
    fn step_povm_validates_and_complement_has_rank_two_in_three_levels() {
        let psi = PureState::from_slice(&[c(0.3), crate::linalg::ci(0.5), c(-0.2)]).unwrap();
        let povm = build_step_povm(&psi);
        let rebuilt =
            Povm::new(povm.effects().iter().map(|e| e.matrix().clone()).collect()).unwrap();
        assert!(rebuilt.effects()[0].rank_one_vector().is_some());
        assert!(rebuilt.effects()[1].rank_one_vector().is_none());
        let e1 = povm.effects()[1].matrix();
        assert!((linalg::trace(e1).re - 2.0).abs() < 1e-12);
        let (vals, _) = linalg::hermitian_eigen(e1);
        assert_eq!(vals.iter().filter(|v| **v > 0.5).count(), 2);
    }

    #[test]
    fn rejects_incomplete_or_negative_effects() {
        assert!(Povm::new(vec![linalg::real_diagonal(&[1.0, 0.0])]).is_err());
        assert!(Povm::new(vec![
            linalg::real_diagonal(&[1.2, 0.0]),
            linalg::real_diagonal(&[-0.2, 1.0]),
        ])
        .is_err());
        assert!(Povm::new(vec![sigma_y(), linalg::identity(2) - sigma_y()]).is_err());
    }

    #[test]
    fn certain_outcome() {
        let povm = build_step_povm(&PureState::basis(2, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (i, post) = measure(&DensityMatrix::basis(2, 0), &povm, &mut rng).unwrap();
            assert_eq!(i, 0);
            assert_eq!(post, DensityMatrix::basis(2, 0));
        }
    }

    #[test]
    fn lueders_post_state_for_rank_two_effect() {
        let psi = PureState::from_slice(&[c(1.0), c(1.0), c(1.0)]).unwrap();
        let povm = build_step_povm(&psi);
        let rho = DensityMatrix::maximally_mixed(3);
        let probs = povm.probabilities(&rho).unwrap();
        assert!((probs[1] - 2.0 / 3.0).abs() < 1e-12);
        let post = povm.post_state(&rho, 1).unwrap();
        let expected = (linalg::identity(3) - psi.projector()) * c(0.5);
        assert!(close(post.matrix(), &expected, 1e-12));
    }

    #[test]
    fn zero_probability_outcome_is_never_selected() {
        let povm = build_step_povm(&PureState::basis(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (i, post) = measure(&DensityMatrix::basis(2, 0), &povm, &mut rng).unwrap();
            assert_eq!(i, 1);
            assert!(trace_distance(&post, &DensityMatrix::basis(2, 0)).unwrap() < 1e-15);
        }
    }
}
