// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Randomised checks of every floor against simulated dynamics.
//!
//! Closed-system instances use closed-form two-level propagators; dissipative
//! instances use [`evolve_master`]; the trajectory suite averages quantum-jump
//! samples and allows a three-standard-error margin.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    evolve_master, evolve_nominal, sample_trajectory, stream, ControlChannel, ControlSchedule,
    DissipationChannel, HamiltonianModel, Segment, Uncertainty,
};
use crate::error::Result;
use crate::linalg::{self, c, CMatrix, CVector};
use crate::operators;
use crate::state::{overlap, PureState};

use super::floors::{
    success_floor, success_floor_appendix_a, success_floor_general,
    success_floor_two_level_variant, BoundKind, BoundSpec, Floor, TwoLevelVariant,
};

/// Tolerance for deterministic oracles.
pub const DETERMINISTIC_TOL: f64 = 1e-9;

/// Outcome of one randomised suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationReport {
    pub label: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest `simulated − floor` observed.
    pub min_slack: f64,
    pub tolerance: f64,
}

impl FalsificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn from_slacks(label: impl Into<String>, slacks: &[f64], tolerance: f64) -> Self {
        Self {
            label: label.into(),
            instances: slacks.len(),
            violations: slacks.iter().filter(|&&s| s < -tolerance).count(),
            min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
            tolerance,
        }
    }
}

fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v = CVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(v).expect("Gaussian vector is non-zero")
}

fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    crate::dynamics::random_unit_hermitian(d, rng)
}

fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let h = random_hermitian(d, rng) * c(std::f64::consts::PI * rng.random::<f64>());
    linalg::unitary(&h, 1.0)
}

/// Magnitude drawn at the bound half of the time, otherwise uniformly below it.
fn draw_magnitude<R: Rng + ?Sized>(bound: f64, rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        bound
    } else {
        bound * rng.random::<f64>()
    }
}

/// `e^{−iHt}` for a 2×2 Hermitian `H = a I + b·σ`, in closed form.
fn su2_exp(h: &CMatrix, t: f64) -> CMatrix {
    let a = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let bz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let bx = h[(1, 0)].re;
    let by = h[(1, 0)].im;
    let norm = (bx * bx + by * by + bz * bz).sqrt();
    let phase = Complex64::from_polar(1.0, -a * t);
    let (cos, sinc) = if norm == 0.0 {
        (1.0, t)
    } else {
        ((norm * t).cos(), (norm * t).sin() / norm)
    };
    let i = Complex64::i();
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(cos) - i * c(sinc * bz),
            -i * Complex64::new(bx, -by) * c(sinc),
            -i * Complex64::new(bx, by) * c(sinc),
            c(cos) + i * c(sinc * bz),
        ],
    );
    m * phase
}

/// A random driven system over `l` sampling periods.
struct Instance {
    nominal: HamiltonianModel,
    /// One model per period, each carrying that period's uncertainty.
    perturbed: Vec<HamiltonianModel>,
    schedules: Vec<ControlSchedule>,
    psi0: PureState,
}

impl Instance {
    fn random<R: Rng + ?Sized>(d: usize, delta: f64, ts: f64, l: u32, rng: &mut R) -> Result<Self> {
        let h0 = random_hermitian(d, rng) * c(2.0 * rng.random::<f64>());
        let h1 = if d == 2 {
            operators::sigma_x()
        } else {
            random_hermitian(d, rng)
        };
        let nominal = HamiltonianModel::new(
            h0,
            vec![ControlChannel {
                operator: h1,
                u_max: 1.0,
            }],
        )?;
        let mut perturbed = Vec::new();
        let mut schedules = Vec::new();
        for _ in 0..l {
            let direction = random_hermitian(d, rng);
            let unc = Uncertainty::new(delta, direction, delta)?;
            perturbed.push(nominal.clone().with_uncertainty(unc)?);
            let split = rng.random::<f64>();
            let mut segs = Vec::new();
            for dur in [split * ts, (1.0 - split) * ts] {
                if dur > 1e-9 {
                    segs.push(Segment {
                        duration: dur,
                        values: vec![2.0 * rng.random::<f64>() - 1.0],
                    });
                }
            }
            schedules.push(ControlSchedule::new(segs)?);
        }
        Ok(Self {
            nominal,
            perturbed,
            schedules,
            psi0: random_state(d, rng),
        })
    }

    fn prediction(&self) -> Result<PureState> {
        let mut psi = self.psi0.clone();
        for s in &self.schedules {
            psi = evolve_nominal(&psi, &self.nominal, s)?;
        }
        Ok(psi)
    }

    /// `Tr(ρ_pred ρ_true)` with the true state from the Lindblad equation.
    fn master_overlap(&self, channel: &DissipationChannel) -> Result<f64> {
        let mut rho = self.psi0.to_density();
        for (m, s) in self.perturbed.iter().zip(&self.schedules) {
            rho = evolve_master(&rho, m, s, channel, true)?;
        }
        overlap(&self.prediction()?.to_density(), &rho)
    }

    /// `|⟨ψ_pred|ψ_true⟩|²` from closed-form two-level propagators.
    fn closed_overlap_su2(&self) -> f64 {
        let mut nominal = self.psi0.amplitudes().clone();
        let mut perturbed = nominal.clone();
        for (m, s) in self.perturbed.iter().zip(&self.schedules) {
            for seg in s.segments() {
                nominal =
                    su2_exp(&self.nominal.hamiltonian(&seg.values, false), seg.duration) * nominal;
                perturbed = su2_exp(&m.hamiltonian(&seg.values, true), seg.duration) * perturbed;
            }
        }
        nominal.dotc(&perturbed).norm_sqr()
    }
}

/// Single-operator or depolarizing two-level channel whose decay operator has norm `gamma`.
fn random_channel<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> Result<DissipationChannel> {
    match rng.random_range(0..5) {
        0 => DissipationChannel::sigma_y(gamma),
        1 => DissipationChannel::phase_damping(gamma),
        2 => DissipationChannel::amplitude_damping(gamma),
        3 => DissipationChannel::depolarizing(2, 4.0 * gamma / 3.0),
        _ => {
            let raw = CMatrix::from_fn(2, 2, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            DissipationChannel::single(raw, gamma)
        }
    }
}

/// General floor `1 − (2Δ̄ + γ̄)Ts` on two-level instances with `Δ̄ ≤ 0.1`, `γ̄ ≤ 0.2`, `Ts = 1`.
///
/// `γ̄` bounds the operator norm of `Σ γ_i L_i†L_i`.
pub fn falsify_general(instances: usize, seed: u64) -> Result<FalsificationReport> {
    let slacks = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, i as u64);
            let delta_bar = 0.1 * rng.random::<f64>();
            let gamma_bar = 0.2 * rng.random::<f64>();
            let ts = 1.0;
            let delta = draw_magnitude(delta_bar, &mut rng);
            let gamma = draw_magnitude(gamma_bar, &mut rng);
            let channel = random_channel(gamma, &mut rng)?;
            let inst = Instance::random(2, delta, ts, 1, &mut rng)?;
            let floor = success_floor_general(delta_bar, gamma_bar, ts);
            Ok(inst.master_overlap(&channel)? - floor)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FalsificationReport::from_slacks(
        "general",
        &slacks,
        DETERMINISTIC_TOL,
    ))
}

/// General floor against quantum-jump averages of `samples` trajectories per instance.
pub fn falsify_general_trajectories(
    instances: usize,
    samples: usize,
    seed: u64,
) -> Result<FalsificationReport> {
    let mut slacks = Vec::with_capacity(instances);
    let mut worst_sigma = 0.0f64;
    for i in 0..instances {
        let mut rng = stream(seed, 1_000_000 + i as u64);
        let gamma_bar = 0.2 * (0.5 + 0.5 * rng.random::<f64>());
        let channel = random_channel(gamma_bar, &mut rng)?;
        let inst = Instance::random(2, 0.0, 1.0, 1, &mut rng)?;
        let pred = inst.prediction()?;
        let model = inst.nominal.clone();
        let sched = inst.schedules[0].clone();
        let values: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| -> Result<f64> {
                let mut r = stream(seed ^ 0x5eed, (i * samples + k) as u64);
                let s = sample_trajectory(&inst.psi0, &model, &sched, &channel, false, &mut r)?;
                Ok(pred.inner(&s.state).norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let sigma = (var / n).sqrt();
        worst_sigma = worst_sigma.max(sigma);
        let floor = success_floor_general(0.0, gamma_bar, 1.0);
        slacks.push(mean - floor + 3.0 * sigma);
    }
    let mut report = FalsificationReport::from_slacks("general/trajectories", &slacks, 0.0);
    report.tolerance = 3.0 * worst_sigma;
    Ok(report)
}

/// Perturbation (`Γ`) floor against exact two-level propagators `U = e^{−iHTs}`, `V = e^{−i(H+H_Δ)Ts}`.
pub fn falsify_appendix_a(instances: usize, seed: u64) -> Result<FalsificationReport> {
    let slacks = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 2_000_000 + i as u64);
            loop {
                let h = random_hermitian(2, &mut rng) * c(3.0 * rng.random::<f64>());
                let h_delta = random_hermitian(2, &mut rng) * c(1.5 * rng.random::<f64>());
                let ts = 0.1 + 1.9 * rng.random::<f64>();
                let Floor::Valid(floor) = success_floor_appendix_a(&h, &h_delta, ts) else {
                    continue;
                };
                let psi = random_state(2, &mut rng);
                let u = su2_exp(&h, ts);
                let v = su2_exp(&(&h + &h_delta), ts);
                let amp = psi.amplitudes().dotc(&(u.adjoint() * v * psi.amplitudes()));
                return amp.norm_sqr() - floor;
            }
        })
        .collect::<Vec<f64>>();
    Ok(FalsificationReport::from_slacks(
        "appendix-a",
        &slacks,
        DETERMINISTIC_TOL,
    ))
}

/// How the depolarizing rate bound is read against the simulated channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// `γ̄` bounds the decay rate of the Bloch vector, `p_D = 1 − e^{−γt}`.
    BlochDecay,
    /// `γ̄` bounds each Lindblad coefficient (`γ/4` per Pauli operator).
    PerOperator,
}

fn two_level_instance<R: Rng + ?Sized>(
    kind: BoundKind,
    rng: &mut R,
) -> Result<(BoundSpec, Instance, DissipationChannel, f64)> {
    loop {
        let l = rng.random_range(1..=3u32);
        let ts = 0.2 + 1.3 * rng.random::<f64>();
        let window = if kind == BoundKind::AmplitudeDamping2Lvl {
            FRAC_PI_4
        } else {
            FRAC_PI_2
        };
        let delta_bar = window / (l as f64 * ts) * rng.random::<f64>();
        let gamma_bar = match kind {
            BoundKind::Closed2Lvl => 0.0,
            _ => 0.5 * rng.random::<f64>(),
        };
        let spec = BoundSpec::new(kind, delta_bar, gamma_bar, ts).with_l(l);
        let Floor::Valid(floor) = success_floor(&spec) else {
            continue;
        };
        if kind == BoundKind::AmplitudeDamping2Lvl && floor <= 0.0 {
            continue;
        }
        let gamma = draw_magnitude(gamma_bar, rng);
        let channel = match kind {
            BoundKind::Closed2Lvl => DissipationChannel::closed(2),
            BoundKind::Depolarizing2Lvl => DissipationChannel::depolarizing(2, gamma)?,
            BoundKind::PhaseDamping2Lvl => DissipationChannel::phase_damping(gamma)?,
            BoundKind::AmplitudeDamping2Lvl => DissipationChannel::amplitude_damping(gamma)?,
            _ => unreachable!("two-level kinds only"),
        };
        let delta = draw_magnitude(delta_bar, rng);
        let inst = Instance::random(2, delta, ts, l, rng)?;
        return Ok((spec, inst, channel, gamma));
    }
}

/// Two-level floor of `kind` (derived form) on random admissible instances.
///
/// For the depolarizing kind `γ̄` bounds the Bloch-vector decay rate.
pub fn falsify_two_level(
    kind: BoundKind,
    instances: usize,
    seed: u64,
) -> Result<FalsificationReport> {
    falsify_two_level_variant(
        kind,
        TwoLevelVariant::Derived,
        RateConvention::BlochDecay,
        instances,
        seed,
    )
}

/// Two-level floor of `kind` in the given form and rate convention.
pub fn falsify_two_level_variant(
    kind: BoundKind,
    variant: TwoLevelVariant,
    convention: RateConvention,
    instances: usize,
    seed: u64,
) -> Result<FalsificationReport> {
    let salt = 3_000_000 + 100_000 * kind as u64;
    let results = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let mut rng = stream(seed, salt + i as u64);
            let (mut spec, inst, channel, _) = two_level_instance(kind, &mut rng)?;
            if kind == BoundKind::Depolarizing2Lvl && convention == RateConvention::PerOperator {
                spec.gamma_bar /= 4.0;
            }
            let Floor::Valid(floor) = success_floor_two_level_variant(&spec, variant) else {
                return Ok(None);
            };
            let simulated = if kind == BoundKind::Closed2Lvl {
                inst.closed_overlap_su2()
            } else {
                inst.master_overlap(&channel)?
            };
            Ok(Some(simulated - floor))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let slacks: Vec<f64> = results.into_iter().flatten().collect();
    let label = format!(
        "{}/{}/{}",
        kind.name(),
        match variant {
            TwoLevelVariant::Derived => "derived",
            TwoLevelVariant::Tabulated => "tabulated",
        },
        match convention {
            RateConvention::BlochDecay => "bloch-decay",
            RateConvention::PerOperator => "per-operator",
        }
    );
    Ok(FalsificationReport::from_slacks(
        label,
        &slacks,
        DETERMINISTIC_TOL,
    ))
}

/// Every combination of form and rate convention for the depolarizing floor.
pub fn depolarizing_variant_report(
    instances: usize,
    seed: u64,
) -> Result<Vec<FalsificationReport>> {
    let mut out = Vec::new();
    for variant in [TwoLevelVariant::Derived, TwoLevelVariant::Tabulated] {
        for convention in [RateConvention::BlochDecay, RateConvention::PerOperator] {
            out.push(falsify_two_level_variant(
                BoundKind::Depolarizing2Lvl,
                variant,
                convention,
                instances,
                seed,
            )?);
        }
    }
    Ok(out)
}

/// Uniform-dissipation floor `e^{−γ̄lTs}` with random unitary Lindblad operators in `d ∈ {2, 3}`.
pub fn falsify_uniform(instances: usize, seed: u64) -> Result<FalsificationReport> {
    let slacks = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, 4_000_000 + i as u64);
            let d = rng.random_range(2..=3usize);
            let l = rng.random_range(1..=3u32);
            let ts = 0.2 + 1.3 * rng.random::<f64>();
            let gamma_bar = 0.5 * rng.random::<f64>();
            let gamma = draw_magnitude(gamma_bar, &mut rng);
            let channel = DissipationChannel::single(random_unitary(d, &mut rng), gamma)?;
            let inst = Instance::random(d, 0.0, ts, l, &mut rng)?;
            let spec = BoundSpec::new(BoundKind::UniformDissipation, 0.0, gamma_bar, ts)
                .with_dim(d)
                .with_l(l);
            let floor = success_floor(&spec).value().expect("Δ̄ = 0 is admissible");
            Ok(inst.master_overlap(&channel)? - floor)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FalsificationReport::from_slacks(
        BoundKind::UniformDissipation.name(),
        &slacks,
        DETERMINISTIC_TOL,
    ))
}

/// `d`-level depolarizing floor `1 − p_D(1 − 1/d)` with `d ∈ {2, 3, 4}` and one sampling period.
pub fn falsify_depolarizing_n(instances: usize, seed: u64) -> Result<FalsificationReport> {
    let slacks = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, 5_000_000 + i as u64);
            let d = rng.random_range(2..=4usize);
            let ts = 0.2 + 1.3 * rng.random::<f64>();
            let gamma_bar = 0.5 * rng.random::<f64>();
            let gamma = draw_magnitude(gamma_bar, &mut rng);
            let channel = DissipationChannel::depolarizing(d, gamma)?;
            let inst = Instance::random(d, 0.0, ts, 1, &mut rng)?;
            let spec = BoundSpec::new(BoundKind::DepolarizingNLvl, 0.0, gamma_bar, ts).with_dim(d);
            let floor = success_floor(&spec).value().expect("Δ̄ = 0 is admissible");
            Ok(inst.master_overlap(&channel)? - floor)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FalsificationReport::from_slacks(
        BoundKind::DepolarizingNLvl.name(),
        &slacks,
        DETERMINISTIC_TOL,
    ))
}

/// All suites used by the bound-dominance check.
pub fn falsify_all(instances: usize, seed: u64) -> Result<Vec<FalsificationReport>> {
    let mut out = vec![
        falsify_general(instances, seed)?,
        falsify_appendix_a(instances, seed)?,
    ];
    for kind in [
        BoundKind::Closed2Lvl,
        BoundKind::Depolarizing2Lvl,
        BoundKind::PhaseDamping2Lvl,
        BoundKind::AmplitudeDamping2Lvl,
    ] {
        out.push(falsify_two_level(kind, instances, seed)?);
    }
    out.push(falsify_uniform(instances, seed)?);
    out.push(falsify_depolarizing_n(instances, seed)?);
    Ok(out)
}
