// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{solve, ControlProblem, SolveResult, SolverKind};
use crate::dynamics::{
    evolve_master_with, evolve_nominal, evolve_unitary, ControlSchedule, DissipationChannel,
    HamiltonianModel, Integrator, DEFAULT_STEP,
};
use crate::error::{Error, Result};
use crate::state::{
    fidelity, nearest_pure_state, overlap, terminal_error, DensityMatrix, PureState,
};

use super::povm::{build_step_povm, measure, Povm};

/// Durations at or below this are treated as zero.
const TINY: f64 = 1e-12;

/// How the measurement of each step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PovmMode {
    /// `{ρ_pred, I − ρ_pred}` built from the nominal prediction.
    Adaptive,
    /// A fixed list of bases with an adaptive sampling period.
    FixedBasis,
}

/// Whether outcomes are drawn by the Born rule or pinned to the nominal effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeMode {
    Sampled,
    ForcedNominal,
}

/// Nominal problem, true system and loop settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackConfig {
    /// Nominal model, nominal channel, initial state, target and `λ0`.
    pub problem: ControlProblem,
    /// Model driving the true system; its uncertainty, if any, is applied.
    pub true_model: HamiltonianModel,
    pub true_channel: DissipationChannel,
    pub ts: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub povm_mode: PovmMode,
    pub solver: SolverKind,
    pub outcome_mode: OutcomeMode,
    /// Measure after the final partial step as well.
    pub final_measurement: bool,
    /// RK4 step of the true-system integration.
    pub integration_step: f64,
}

impl FeedbackConfig {
    /// The true system defaults to the nominal one.
    pub fn new(problem: ControlProblem, ts: f64, max_steps: usize) -> Result<Self> {
        let solver = if problem.model.dim() == 2 && problem.model.n_controls() == 1 {
            SolverKind::BangBang
        } else {
            SolverKind::Gradient
        };
        let config = Self {
            true_model: problem.model.clone(),
            true_channel: problem.channel.clone(),
            problem,
            ts,
            max_steps,
            seed: 0,
            povm_mode: PovmMode::Adaptive,
            solver,
            outcome_mode: OutcomeMode::Sampled,
            final_measurement: true,
            integration_step: DEFAULT_STEP,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_true_system(
        mut self,
        model: HamiltonianModel,
        channel: DissipationChannel,
    ) -> Self {
        self.true_model = model;
        self.true_channel = channel;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_outcome_mode(mut self, mode: OutcomeMode) -> Self {
        self.outcome_mode = mode;
        self
    }

    pub fn with_final_measurement(mut self, on: bool) -> Self {
        self.final_measurement = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::param("ts", "must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be at least 1"));
        }
        if !(self.integration_step > 0.0 && self.integration_step.is_finite()) {
            return Err(Error::param("integration_step", "must be positive"));
        }
        let d = self.problem.model.dim();
        for found in [self.true_model.dim(), self.true_channel.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        if self.true_model.n_controls() != self.problem.model.n_controls() {
            return Err(Error::param(
                "true_model",
                "must have as many controls as the nominal model",
            ));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "reason")]
pub enum Termination {
    /// The optimal time fell below the sampling period and the remainder was applied.
    FinalStep,
    MaxSteps,
    Failed(String),
}

/// One loop iteration, or the closing entry of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// Optimal cost from the state at `time`.
    pub cost: f64,
    /// Fidelity `√Tr(ρ ρ_tar)` of the state at `time`.
    pub fidelity: f64,
    /// Time for which `schedule` was applied.
    pub duration: f64,
    /// Basis index for fixed-basis runs.
    pub basis: Option<usize>,
    pub outcome: Option<usize>,
    /// `Tr(E ρ)` of the nominal effect on the true pre-measurement state.
    pub nominal_probability: Option<f64>,
    pub post_state: Option<DensityMatrix>,
    /// Portion of `solution` actually applied.
    pub schedule: ControlSchedule,
    /// Optimal schedule from the state at `time`; `cost` is its `J`.
    pub solution: ControlSchedule,
}

/// Full history of one feedback run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub entries: Vec<StepRecord>,
    pub termination: Termination,
    pub final_state: DensityMatrix,
    /// `1 − Tr(ρ_tar ρ_final)`.
    pub final_infidelity: f64,
}

impl RunRecord {
    pub fn costs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.cost).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time).collect()
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.fidelity).collect()
    }

    /// `(J_{k+1} − J_k, t_{k+1} − t_k)` for consecutive entries.
    pub fn cost_decrements(&self) -> Vec<(f64, f64)> {
        self.entries
            .windows(2)
            .map(|w| (w[1].cost - w[0].cost, w[1].time - w[0].time))
            .collect()
    }

    /// Measured steps, excluding the closing entry.
    pub fn measured_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.entries.iter().filter(|e| e.outcome.is_some())
    }
}

/// Memoised solver results keyed on the exact start state and warm start.
///
/// A cache must only be shared between runs with the same nominal problem
/// (apart from the initial state) and solver.
#[derive(Debug, Default)]
pub struct SolveCache {
    map: Mutex<HashMap<Vec<u64>, SolveResult>>,
}

impl SolveCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(psi: &PureState, warm: Option<&ControlSchedule>) -> Vec<u64> {
        let mut key: Vec<u64> = psi
            .amplitudes()
            .iter()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect();
        if let Some(w) = warm {
            for s in w.segments() {
                key.push(s.duration.to_bits());
                key.extend(s.values.iter().map(|v| v.to_bits()));
            }
        }
        key
    }
}

struct Runner<'a> {
    config: &'a FeedbackConfig,
    cache: Option<&'a SolveCache>,
    include_uncertainty: bool,
}

impl Runner<'_> {
    fn solve(&self, psi: &PureState, warm: Option<&ControlSchedule>) -> Result<SolveResult> {
        let key = self.cache.map(|_| SolveCache::key(psi, warm));
        if let (Some(cache), Some(key)) = (self.cache, &key) {
            if let Some(hit) = cache.map.lock().ok().and_then(|m| m.get(key).cloned()) {
                return Ok(hit);
            }
        }
        let problem = self.config.problem.from_state(psi.to_density());
        let result = solve(&problem, self.config.solver, warm)?;
        if let (Some(cache), Some(key)) = (self.cache, key) {
            if let Ok(mut m) = cache.map.lock() {
                m.insert(key, result.clone());
            }
        }
        Ok(result)
    }

    fn evolve_true(
        &self,
        rho: &DensityMatrix,
        schedule: &ControlSchedule,
    ) -> Result<DensityMatrix> {
        let c = self.config;
        if c.true_channel.is_closed() {
            evolve_unitary(rho, &c.true_model, schedule, self.include_uncertainty)
        } else {
            let step = c.integration_step.min(schedule.duration());
            evolve_master_with(
                rho,
                &c.true_model,
                schedule,
                &c.true_channel,
                self.include_uncertainty,
                Integrator::Rk4 { step },
            )
        }
    }

    fn fidelity(&self, rho: &DensityMatrix) -> Result<f64> {
        fidelity(rho, &self.config.problem.target)
    }

    /// Measures `true_state` with `povm`, or pins the outcome to `forced`.
    fn outcome<R: Rng + ?Sized>(
        &self,
        true_state: &DensityMatrix,
        povm: &Povm,
        forced: usize,
        rng: &mut R,
    ) -> Result<(usize, DensityMatrix)> {
        match self.config.outcome_mode {
            OutcomeMode::Sampled => measure(true_state, povm, rng),
            OutcomeMode::ForcedNominal => {
                let post = match povm.effects()[forced].rank_one_vector() {
                    Some(v) => v.to_density(),
                    None => povm.post_state(true_state, forced)?,
                };
                Ok((forced, post))
            }
        }
    }

    /// Applies the remaining schedule, optionally measures, and closes the record.
    fn finish<R: Rng + ?Sized>(
        &self,
        entries: &mut Vec<StepRecord>,
        step: usize,
        time: f64,
        psi: &PureState,
        sol: SolveResult,
        rng: &mut R,
    ) -> Result<DensityMatrix> {
        let rho = psi.to_density();
        let tau = sol.t_f();
        let mut entry = StepRecord {
            step,
            time,
            cost: sol.cost,
            fidelity: self.fidelity(&rho)?,
            duration: tau,
            basis: None,
            outcome: None,
            nominal_probability: None,
            post_state: None,
            schedule: sol.schedule.clone(),
            solution: sol.schedule,
        };
        if tau <= TINY {
            entry.duration = 0.0;
            entries.push(entry);
            return Ok(rho);
        }
        let true_state = self.evolve_true(&rho, &entry.schedule)?;
        let final_state = if self.config.final_measurement {
            let pred = evolve_nominal(psi, &self.config.problem.model, &entry.schedule)?;
            let povm = build_step_povm(&pred);
            entry.nominal_probability = Some(povm.effects()[0].probability(&true_state));
            let (outcome, post) = self.outcome(&true_state, &povm, 0, rng)?;
            entry.outcome = Some(outcome);
            entry.post_state = Some(post.clone());
            post
        } else {
            true_state
        };
        entries.push(entry);
        let target = &self.config.problem.target;
        entries.push(StepRecord {
            step: step + 1,
            time: time + tau,
            cost: terminal_error(target, &final_state)?,
            fidelity: self.fidelity(&final_state)?,
            duration: 0.0,
            basis: None,
            outcome: None,
            nominal_probability: None,
            post_state: None,
            schedule: ControlSchedule::empty(),
            solution: ControlSchedule::empty(),
        });
        Ok(final_state)
    }

    /// Closing entry after the step cap, carrying the optimal cost from the last state.
    fn close_at_cap(
        &self,
        entries: &mut Vec<StepRecord>,
        step: usize,
        time: f64,
        psi: &PureState,
        warm: Option<&ControlSchedule>,
    ) -> Result<()> {
        let sol = self.solve(psi, warm)?;
        entries.push(StepRecord {
            step,
            time,
            cost: sol.cost,
            fidelity: self.fidelity(&psi.to_density())?,
            duration: 0.0,
            basis: None,
            outcome: None,
            nominal_probability: None,
            post_state: None,
            schedule: ControlSchedule::empty(),
            solution: sol.schedule,
        });
        Ok(())
    }
}

fn record(
    config: &FeedbackConfig,
    entries: Vec<StepRecord>,
    termination: Termination,
    final_state: DensityMatrix,
) -> Result<RunRecord> {
    let final_infidelity = 1.0 - overlap(&config.problem.target, &final_state)?;
    Ok(RunRecord {
        entries,
        termination,
        final_state,
        final_infidelity,
    })
}

/// Sampling-period grid `{0.1, 0.2, …, 2.0}·Ts`.
pub const FIXED_POVM_GRID: [f64; 20] = [
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9,
    2.0,
];

/// Runs the loop with the measurement selected by `config.povm_mode`.
///
/// The rng stream is seeded from `config.seed`.
pub fn run_qtopc(config: &FeedbackConfig) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match config.povm_mode {
        PovmMode::Adaptive => run_qtopc_with(config, &mut rng, None),
        PovmMode::FixedBasis => Err(Error::param(
            "povm_mode",
            "fixed-basis runs need bases; use run_qtopc_fixed_povm",
        )),
    }
}

/// As [`run_qtopc`] with the outcome pinned to the nominal effect at every step.
pub fn forced_outcome_mode(config: &FeedbackConfig) -> Result<RunRecord> {
    let config = config.clone().with_outcome_mode(OutcomeMode::ForcedNominal);
    run_qtopc(&config)
}

/// Adaptive-POVM loop on an explicit rng stream and optional solve cache.
///
/// Solver or measurement failures end the run with [`Termination::Failed`]
/// and a partial record; invalid configurations are returned as errors.
pub fn run_qtopc_with<R: Rng + ?Sized>(
    config: &FeedbackConfig,
    rng: &mut R,
    cache: Option<&SolveCache>,
) -> Result<RunRecord> {
    config.validate()?;
    let runner = Runner {
        config,
        cache,
        include_uncertainty: config.true_model.uncertainty().is_some(),
    };
    let mut psi = nearest_pure_state(&config.problem.initial);
    let mut warm: Option<ControlSchedule> = None;
    let mut entries = Vec::new();
    let mut time = 0.0;
    let mut final_state = psi.to_density();

    let mut step_once = |k: usize,
                         psi: &mut PureState,
                         warm: &mut Option<ControlSchedule>,
                         time: &mut f64,
                         entries: &mut Vec<StepRecord>,
                         final_state: &mut DensityMatrix|
     -> Result<bool> {
        let sol = runner.solve(psi, warm.as_ref())?;
        if sol.t_f() < config.ts {
            *final_state = runner.finish(entries, k, *time, psi, sol, rng)?;
            return Ok(true);
        }
        let rho = psi.to_density();
        let applied = sol.schedule.truncate(config.ts);
        let true_state = runner.evolve_true(&rho, &applied)?;
        let pred = evolve_nominal(psi, &config.problem.model, &applied)?;
        let povm = build_step_povm(&pred);
        let p_nominal = povm.effects()[0].probability(&true_state);
        let (outcome, post) = runner.outcome(&true_state, &povm, 0, rng)?;
        entries.push(StepRecord {
            step: k,
            time: *time,
            cost: sol.cost,
            fidelity: runner.fidelity(&rho)?,
            duration: config.ts,
            basis: None,
            outcome: Some(outcome),
            nominal_probability: Some(p_nominal),
            post_state: Some(post.clone()),
            schedule: applied,
            solution: sol.schedule.clone(),
        });
        *psi = nearest_pure_state(&post);
        *warm = Some(sol.schedule.shift(config.ts));
        *time = k as f64 * config.ts + config.ts;
        *final_state = psi.to_density();
        Ok(false)
    };

    let mut termination = None;
    for k in 0..config.max_steps {
        match step_once(
            k,
            &mut psi,
            &mut warm,
            &mut time,
            &mut entries,
            &mut final_state,
        ) {
            Ok(true) => {
                termination = Some(Termination::FinalStep);
                break;
            }
            Ok(false) => {}
            Err(e) => {
                termination = Some(Termination::Failed(e.to_string()));
                break;
            }
        }
    }
    let termination = match termination {
        Some(t) => t,
        None => {
            match runner.close_at_cap(&mut entries, config.max_steps, time, &psi, warm.as_ref()) {
                Ok(()) => Termination::MaxSteps,
                Err(e) => Termination::Failed(e.to_string()),
            }
        }
    };
    record(config, entries, termination, final_state)
}

/// Fixed-basis variant seeded from `config.seed`.
pub fn run_qtopc_fixed_povm(config: &FeedbackConfig, bases: &[Povm]) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_qtopc_fixed_povm_with(config, bases, &mut rng, None)
}

/// Fixed-basis loop: at each step the sampling period and the measured basis
/// are chosen to maximise the overlap between the nominal prediction and a
/// rank-1 effect that is closer to the target than the current state.
pub fn run_qtopc_fixed_povm_with<R: Rng + ?Sized>(
    config: &FeedbackConfig,
    bases: &[Povm],
    rng: &mut R,
    cache: Option<&SolveCache>,
) -> Result<RunRecord> {
    config.validate()?;
    if bases.is_empty() {
        return Err(Error::param("bases", "at least one basis is required"));
    }
    let d = config.problem.model.dim();
    if let Some(b) = bases.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.dim(),
        });
    }
    if !config.problem.channel.is_closed() {
        return Err(Error::param(
            "problem",
            "fixed-basis runs need a dissipation-free nominal model",
        ));
    }
    let runner = Runner {
        config,
        cache,
        include_uncertainty: config.true_model.uncertainty().is_some(),
    };
    let target = &config.problem.target;
    let mut psi = nearest_pure_state(&config.problem.initial);
    let mut warm: Option<ControlSchedule> = None;
    let mut entries = Vec::new();
    let mut time = 0.0;
    let mut final_state = psi.to_density();

    let mut step_once = |k: usize,
                         psi: &mut PureState,
                         warm: &mut Option<ControlSchedule>,
                         time: &mut f64,
                         entries: &mut Vec<StepRecord>,
                         final_state: &mut DensityMatrix|
     -> Result<bool> {
        let sol = runner.solve(psi, warm.as_ref())?;
        let tau = sol.t_f();
        let rho = psi.to_density();
        if tau <= TINY {
            *final_state = runner.finish(entries, k, *time, psi, sol, rng)?;
            return Ok(true);
        }
        let current = overlap(&rho, target)?;
        let mut periods: Vec<f64> = FIXED_POVM_GRID
            .iter()
            .map(|g| g * config.ts)
            .filter(|&p| p < tau - TINY)
            .collect();
        if tau <= FIXED_POVM_GRID[FIXED_POVM_GRID.len() - 1] * config.ts + TINY {
            periods.push(tau);
        }
        // (overlap, period, basis, effect)
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for &period in &periods {
            let pred = evolve_nominal(psi, &config.problem.model, &sol.schedule.truncate(period))?;
            for (b, povm) in bases.iter().enumerate() {
                for (i, e) in povm.effects().iter().enumerate() {
                    let Some(v) = e.rank_one_vector() else {
                        continue;
                    };
                    if overlap(&v.to_density(), target)? <= current + 1e-12 {
                        continue;
                    }
                    let ov = v.inner(&pred).norm_sqr();
                    if best.is_none_or(|(o, ..)| ov > o + 1e-12) {
                        best = Some((ov, period, b, i));
                    }
                }
            }
        }
        let Some((_, period, b, i)) = best else {
            *final_state = runner.finish(entries, k, *time, psi, sol, rng)?;
            return Ok(true);
        };
        let applied = sol.schedule.truncate(period);
        let true_state = runner.evolve_true(&rho, &applied)?;
        let povm = &bases[b];
        let p_nominal = povm.effects()[i].probability(&true_state);
        let (outcome, post) = runner.outcome(&true_state, povm, i, rng)?;
        entries.push(StepRecord {
            step: k,
            time: *time,
            cost: sol.cost,
            fidelity: runner.fidelity(&rho)?,
            duration: period,
            basis: Some(b),
            outcome: Some(outcome),
            nominal_probability: Some(p_nominal),
            post_state: Some(post.clone()),
            schedule: applied,
            solution: sol.schedule.clone(),
        });
        *psi = nearest_pure_state(&post);
        *warm = Some(sol.schedule.shift(period));
        *time += period;
        *final_state = psi.to_density();
        Ok(false)
    };

    let mut termination = None;
    for k in 0..config.max_steps {
        match step_once(
            k,
            &mut psi,
            &mut warm,
            &mut time,
            &mut entries,
            &mut final_state,
        ) {
            Ok(true) => {
                termination = Some(Termination::FinalStep);
                break;
            }
            Ok(false) => {}
            Err(e) => {
                termination = Some(Termination::Failed(e.to_string()));
                break;
            }
        }
    }
    let termination = match termination {
        Some(t) => t,
        None => {
            match runner.close_at_cap(&mut entries, config.max_steps, time, &psi, warm.as_ref()) {
                Ok(()) => Termination::MaxSteps,
                Err(e) => Termination::Failed(e.to_string()),
            }
        }
    };
    record(config, entries, termination, final_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::HamiltonianModel;
    use crate::operators::{sigma_x, sigma_z};

    fn two_level() -> ControlProblem {
        let model = HamiltonianModel::single_control(sigma_z(), sigma_x(), 1.0).unwrap();
        ControlProblem::new(
            model,
            DensityMatrix::basis(2, 0),
            DensityMatrix::basis(2, 1),
            0.04,
            2.0 * std::f64::consts::PI,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_config() {
        assert!(FeedbackConfig::new(two_level(), 0.0, 5).is_err());
        assert!(FeedbackConfig::new(two_level(), 1.0, 0).is_err());
    }

    #[test]
    fn initial_equal_to_target_stops_immediately() {
        let problem = two_level().from_state(DensityMatrix::basis(2, 1));
        let record = run_qtopc(&FeedbackConfig::new(problem, 1.0, 20).unwrap()).unwrap();
        assert_eq!(record.termination, Termination::FinalStep);
        assert_eq!(record.entries.len(), 1);
        assert_eq!(record.entries[0].duration, 0.0);
        assert!(record.final_infidelity < 1e-12);
    }

    #[test]
    fn forced_closed_run_decreases_cost_by_lambda_ts() {
        let config = FeedbackConfig::new(two_level(), 1.0, 20).unwrap();
        let record = forced_outcome_mode(&config).unwrap();
        assert_eq!(record.termination, Termination::FinalStep);
        assert!(record.entries.len() >= 3);
        for (dj, dt) in record.cost_decrements() {
            assert!(dj <= -0.04 * dt + 1e-8, "ΔJ = {dj}, Δt = {dt}");
        }
        for w in record.entries.windows(2) {
            assert!(w[1].time > w[0].time);
        }
        assert!(record.final_infidelity < 5e-3);
    }

    #[test]
    fn forced_mode_is_deterministic() {
        let config = FeedbackConfig::new(two_level(), 1.0, 20)
            .unwrap()
            .with_true_system(two_level().model, DissipationChannel::sigma_y(0.1).unwrap());
        let a = forced_outcome_mode(&config).unwrap();
        let b = forced_outcome_mode(&config).unwrap();
        assert_eq!(a, b);
        assert!(a.final_infidelity < 1e-2);
    }

    #[test]
    fn sampled_runs_repeat_for_a_seed_and_cache_is_transparent() {
        let config = FeedbackConfig::new(two_level(), 1.0, 20)
            .unwrap()
            .with_true_system(
                two_level().model,
                DissipationChannel::sigma_y(0.25).unwrap(),
            )
            .with_seed(11);
        let a = run_qtopc(&config).unwrap();
        let cache = SolveCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = run_qtopc_with(&config, &mut rng, Some(&cache)).unwrap();
        assert_eq!(a, b);
        assert!(!cache.is_empty());
        for e in a.entries.iter().filter_map(|e| e.post_state.as_ref()) {
            assert!(crate::state::validate_state(e.matrix()).passed);
        }
    }

    #[test]
    fn fixed_basis_run_reaches_target_without_noise() {
        let bases = [
            super::super::basis_m1().unwrap(),
            super::super::basis_m2().unwrap(),
        ];
        let mut config = FeedbackConfig::new(two_level(), 1.0, 20).unwrap();
        config.povm_mode = PovmMode::FixedBasis;
        let record = run_qtopc_fixed_povm(&config.clone().with_seed(3), &bases).unwrap();
        assert!(record.entries.iter().any(|e| e.basis.is_some()));
        assert!(
            record.final_infidelity < 5e-2,
            "{}",
            record.final_infidelity
        );
        assert!(run_qtopc(&config).is_err());
    }
}
