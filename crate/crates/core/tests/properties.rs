// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;
use qtopc::control::{evaluate_cost, solve_bangbang_two_level, ControlProblem};
use qtopc::dynamics::{
    evolve_master, stream, ControlSchedule, DissipationChannel, HamiltonianModel, Segment,
};
use qtopc::experiments::{run_campaign, run_experiment, ExperimentConfig, Mode, Preset, Stats};
use qtopc::feedback::{build_step_povm, measure, Povm};
use qtopc::operators::{sigma_x, sigma_z};
use qtopc::state::{validate_state, DensityMatrix, PureState};
use qtopc::CVector;

fn pure_state(parts: &[(f64, f64)]) -> PureState {
    let v = CVector::from_iterator(
        parts.len(),
        parts.iter().map(|&(re, im)| Complex64::new(re, im)),
    );
    PureState::normalized(v).unwrap()
}

fn amplitudes(d: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d).prop_filter("nonzero", |v| {
        v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3
    })
}

/// `Σ w_i |ψ_i⟩⟨ψ_i|` with weights normalised to one.
fn mixture(states: &[Vec<(f64, f64)>], weights: &[f64]) -> DensityMatrix {
    let total: f64 = weights.iter().sum();
    let d = states[0].len();
    let mut m = qtopc::CMatrix::zeros(d, d);
    for (s, &w) in states.iter().zip(weights) {
        m += pure_state(s).projector() * Complex64::new(w / total, 0.0);
    }
    DensityMatrix::new(m).unwrap()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn small_campaign(mode: Mode, runs: usize, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(Preset::TwoLevel);
    c.mode = mode;
    c.runs = runs;
    c.seed = seed;
    c.steps = 8;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn born_rule_frequencies(d in 2usize..=3, nominal in amplitudes(3), state in amplitudes(3), seed in any::<u64>()) {
        let povm = build_step_povm(&pure_state(&nominal[..d]));
        let rho = pure_state(&state[..d]).to_density();
        let probs = povm.probabilities(&rho).unwrap();
        let n = 10_000;
        let mut rng = stream(seed, 0);
        let mut hits = vec![0usize; povm.len()];
        for _ in 0..n {
            hits[measure(&rho, &povm, &mut rng).unwrap().0] += 1;
        }
        for (k, &p) in probs.iter().enumerate() {
            let freq = hits[k] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1e-4);
            prop_assert!((freq - p).abs() <= 4.0 * sigma, "outcome {k}: {freq} vs {p}");
        }
    }

    #[test]
    fn post_measurement_states_are_valid(
        states in prop::collection::vec(amplitudes(3), 3),
        weights in prop::collection::vec(0.01..1.0f64, 3),
        basis in prop::collection::vec(amplitudes(3), 1),
    ) {
        let rho = mixture(&states, &weights);
        let povm = build_step_povm(&pure_state(&basis[0]));
        let probs = povm.probabilities(&rho).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (k, &p) in probs.iter().enumerate() {
            if p > 1e-8 {
                let post = povm.post_state(&rho, k).unwrap();
                prop_assert!(validate_state(post.matrix()).passed);
            }
        }
    }

    #[test]
    fn lindblad_evolution_keeps_states_valid(
        states in prop::collection::vec(amplitudes(2), 2),
        weights in prop::collection::vec(0.01..1.0f64, 2),
        gamma in 0.0..0.5f64,
        kind in 0usize..3,
        controls in prop::collection::vec((-1.0..1.0f64, 0.05..0.7f64), 1..4),
    ) {
        let rho = mixture(&states, &weights);
        let model = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        let channel = match kind {
            0 => DissipationChannel::sigma_y(gamma),
            1 => DissipationChannel::amplitude_damping(gamma),
            _ => DissipationChannel::depolarizing(2, gamma),
        }
        .unwrap();
        let schedule = ControlSchedule::new(
            controls.iter().map(|&(u, t)| Segment { duration: t, values: vec![u] }).collect(),
        )
        .unwrap();
        let out = evolve_master(&rho, &model, &schedule, &channel, false).unwrap();
        prop_assert!(validate_state(out.matrix()).passed);
        prop_assert!(out.purity() <= rho.purity() + 1e-9 || kind == 1);
    }

    #[test]
    fn stderr_is_stddev_over_root_n(xs in prop::collection::vec(-10.0..10.0f64, 2..200)) {
        let s = Stats::from_samples(&xs);
        prop_assert_eq!(s.count, xs.len());
        prop_assert!((s.stderr - s.stddev / (xs.len() as f64).sqrt()).abs() < 1e-12);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((s.mean - mean).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solve_result_cost_re_evaluates(lambda0 in 0.02..0.2f64, target in amplitudes(2)) {
        let model = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        let p = ControlProblem::new(
            model,
            DensityMatrix::basis(2, 0),
            pure_state(&target).to_density(),
            lambda0,
            2.0 * std::f64::consts::PI,
        )
        .unwrap();
        let r = solve_bangbang_two_level(&p).unwrap();
        prop_assert!((evaluate_cost(&p, &r.schedule).unwrap() - r.cost).abs() <= 1e-8);
        prop_assert!(r.cost <= 1.0 - p.target.matrix()[(0, 0)].re + 1e-12);
        prop_assert!(r.schedule.segments().iter().all(|s| s.values[0].abs() <= 1.0));
    }

    #[test]
    fn logged_costs_replay(seed in any::<u64>(), fixed in any::<bool>()) {
        let mode = if fixed { Mode::FixedPovm } else { Mode::MonteCarlo };
        let campaign = run_campaign(&small_campaign(mode, 4, seed)).unwrap();
        for o in &campaign.outcomes {
            prop_assert!(o.replay_error <= 1e-6, "run {}: {}", o.index, o.replay_error);
            prop_assert!(o.true_gamma >= 0.0 && o.true_gamma <= 0.25);
            let times = o.record.times();
            prop_assert!(times.windows(2).all(|w| w[1] > w[0]));
        }
        prop_assert!(campaign.summary.bounds.floor_violation_runs <= campaign.summary.runs);
        prop_assert!(campaign.summary.bounds.cost_increase_runs <= campaign.summary.runs);
    }
}

#[test]
fn measurement_of_mixed_qutrit() {
    let psi = PureState::basis(3, 0);
    let povm = Povm::new(vec![
        psi.projector(),
        qtopc::operators::identity(3) - psi.projector(),
    ])
    .unwrap();
    let rho = DensityMatrix::maximally_mixed(3);
    let probs = povm.probabilities(&rho).unwrap();
    assert!((probs[1] - 2.0 / 3.0).abs() < 1e-12);
    let post = povm.post_state(&rho, 1).unwrap();
    let expected = DensityMatrix::diagonal(&[0.0, 0.5, 0.5]).unwrap();
    assert!((post.matrix() - expected.matrix()).norm() < 1e-12);
}

#[test]
fn stderr_scales_with_inverse_root_runs() {
    let errs: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&runs| {
            let c = small_campaign(Mode::OpenLoopBaseline, runs, 3);
            run_campaign(&c).unwrap().summary.final_infidelity.stderr
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (ratio / 2.0 - 1.0).abs() <= 0.25,
            "stderr ratio {ratio} from {errs:?}"
        );
    }
}

#[test]
fn campaign_files_are_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for mode in [Mode::MonteCarlo, Mode::FixedPovm] {
        let mut c = small_campaign(mode, 6, 11);
        c.out = dir.path().join(mode.name());
        run_experiment(&c).unwrap();
        let first = snapshot(&c.out);
        assert!(first.contains_key("summary.json") && first.contains_key("runs.csv"));
        run_experiment(&c).unwrap();
        assert_eq!(first, snapshot(&c.out));
    }
}

#[test]
fn different_seeds_give_different_runs() {
    let a = run_campaign(&small_campaign(Mode::MonteCarlo, 4, 1)).unwrap();
    let b = run_campaign(&small_campaign(Mode::MonteCarlo, 4, 2)).unwrap();
    let ga: Vec<f64> = a.outcomes.iter().map(|o| o.true_gamma).collect();
    let gb: Vec<f64> = b.outcomes.iter().map(|o| o.true_gamma).collect();
    assert_ne!(ga, gb);
}
