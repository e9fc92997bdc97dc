// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::success_floor_general;
use crate::control::{evaluate_cost, solve, ControlProblem};
use crate::dynamics::{
    evolve_master_with, evolve_unitary, sample_uncertainty, stream, ControlSchedule,
    DissipationChannel, HamiltonianModel, Integrator, DEFAULT_STEP,
};
use crate::error::{Error, Result};
use crate::feedback::{
    basis_m1, basis_m2, run_qtopc_fixed_povm_with, run_qtopc_with, FeedbackConfig, OutcomeMode,
    RunRecord, SolveCache, StepRecord, Termination,
};
use crate::state::{fidelity, nearest_pure_state, overlap, terminal_error, DensityMatrix};

use super::config::{ExperimentConfig, GammaSampling, Mode};

/// Largest tolerated difference between a logged cost and its replay.
pub const REPLAY_TOL: f64 = 1e-6;
/// Slack on the per-step success floor.
const FLOOR_TOL: f64 = 1e-9;
/// Slack on the per-step cost decrease `ΔJ ≤ −λ0 Δt`.
const DECREASE_TOL: f64 = 1e-8;

/// Sample mean, standard deviation (`n − 1` normalisation) and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
}

impl Stats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                count: 0,
                mean: f64::NAN,
                stddev: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let stddev = var.sqrt();
        Self {
            count: n,
            mean,
            stddev,
            stderr: stddev / (n as f64).sqrt(),
        }
    }
}

/// One run together with the rates it was simulated with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub index: usize,
    pub true_gamma: f64,
    pub nominal_gamma: f64,
    /// Largest `|logged cost − replayed cost|` over the run's entries.
    pub replay_error: f64,
    pub record: RunRecord,
}

/// Mean over runs at one step index; shorter runs repeat their last entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub step: usize,
    pub time: f64,
    pub cost: f64,
    pub fidelity: f64,
}

/// How often one sequence of (basis, outcome) pairs occurred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathCount {
    pub path: String,
    pub count: usize,
}

/// Number of entries sharing a rounded `(time, fidelity)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bubble {
    pub time: f64,
    pub fidelity: f64,
    pub count: usize,
}

/// Checks of the logged runs against the success floor and the cost decrease.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCounters {
    /// Measured steps whose nominal effect is the predicted state.
    pub checked_steps: usize,
    pub nominal_outcomes: usize,
    pub nominal_frequency: f64,
    /// Mean of `1 − (2Δ̄ + γ)·duration` over the checked steps.
    pub mean_success_floor: f64,
    /// The nominal frequency lies more than three standard errors below the mean floor.
    pub frequency_below_floor: bool,
    /// Runs with a step whose nominal probability falls below its floor.
    pub floor_violation_runs: usize,
    /// Runs with a step where `ΔJ > −λ0 Δt + 1e-8`.
    pub cost_increase_runs: usize,
    /// Runs whose replay disagrees with the logged costs by more than [`REPLAY_TOL`].
    pub replay_failure_runs: usize,
    pub max_replay_error: f64,
    /// `ΔJ` between consecutive entries, pooled over all runs.
    pub cost_change: Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TerminationCounts {
    pub final_step: usize,
    pub max_steps: usize,
    pub failed: usize,
}

/// Aggregate results of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub units: BTreeMap<&'static str, &'static str>,
    pub config: ExperimentConfig,
    pub runs: usize,
    /// `1 − Tr(ρ_tar ρ_final)` over runs.
    pub final_infidelity: Stats,
    pub series: Vec<SeriesPoint>,
    /// Fixed-POVM mode only, most frequent first.
    pub path_frequencies: Vec<PathCount>,
    pub bounds: BoundCounters,
    pub terminations: TerminationCounts,
}

impl CampaignSummary {
    /// Share of runs following the most frequent path, if any paths were recorded.
    pub fn dominant_path_share(&self) -> Option<f64> {
        self.path_frequencies
            .first()
            .map(|p| p.count as f64 / self.runs as f64)
    }
}

fn units() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("time", "1/energy, with hbar = 1 and H0 as the energy scale"),
        ("gamma", "1/time"),
        ("cost", "dimensionless, lambda0 * t_f + D^2"),
        ("fidelity", "dimensionless, sqrt(Tr(rho rho_tar))"),
        (
            "final_infidelity",
            "dimensionless, 1 - Tr(rho_tar rho_final)",
        ),
    ])
}

/// A campaign's runs in index order and their summary.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub outcomes: Vec<RunOutcome>,
    pub summary: CampaignSummary,
}

/// Runs the campaign described by `config` and writes its files under `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<CampaignSummary> {
    config.validate()?;
    prepare_output(&config.out)?;
    let campaign = run_campaign(config)?;
    emit(config, &campaign)?;
    Ok(campaign.summary)
}

/// Runs the campaign without writing anything.
pub fn run_campaign(config: &ExperimentConfig) -> Result<Campaign> {
    config.validate()?;
    let outcomes = simulate(config)?;
    let summary = summarize(config, &outcomes);
    Ok(Campaign { outcomes, summary })
}

/// Creates `dir` and checks that files can be written into it.
pub fn prepare_output(dir: &Path) -> Result<()> {
    let fail = |e: std::io::Error| {
        Error::Config(format!(
            "output path {} is not writable: {e}",
            dir.display()
        ))
    };
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".qtopc-write-probe");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

/// Worker count from `QTOPC_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var("QTOPC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

struct Draw {
    true_gamma: f64,
    nominal_gamma: f64,
    true_model: HamiltonianModel,
}

fn draw<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    model: &HamiltonianModel,
    rng: &mut R,
) -> Result<Draw> {
    let u: f64 = rng.random();
    let g = config.gamma_min + (config.gamma_max - config.gamma_min) * u;
    let (true_gamma, nominal_gamma) = match config.gamma_sampling {
        GammaSampling::True => (g, config.nominal_gamma),
        GammaSampling::Nominal => (config.gamma_max, g),
    };
    let true_model = if config.delta_bar > 0.0 {
        let unc = sample_uncertainty(config.delta_bar, config.dim, rng, config.uncertainty_mode);
        model.clone().with_uncertainty(unc)?
    } else {
        model.clone()
    };
    Ok(Draw {
        true_gamma,
        nominal_gamma,
        true_model,
    })
}

fn simulate(config: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    let model = config.model()?;
    let shared_problem = match config.gamma_sampling {
        GammaSampling::True => Some(config.problem(config.nominal_gamma)?),
        GammaSampling::Nominal => None,
    };
    let cache = SolveCache::new();
    let baseline = match (config.mode, &shared_problem) {
        (Mode::OpenLoopBaseline, Some(p)) => Some(solve(p, config.solver_kind(), None)?),
        _ => None,
    };
    let bases = match config.mode {
        Mode::FixedPovm => vec![basis_m1()?, basis_m2()?],
        _ => Vec::new(),
    };

    let run_one = |index: usize| -> Result<RunOutcome> {
        let mut rng = stream(config.seed, index as u64);
        let d = draw(config, &model, &mut rng)?;
        let problem = match &shared_problem {
            Some(p) => p.clone(),
            None => config.problem(d.nominal_gamma)?,
        };
        let cache = shared_problem.as_ref().map(|_| &cache);
        let true_channel = config.channel(&config.true_channel, d.true_gamma)?;
        let record = match config.mode {
            Mode::OpenLoopBaseline => {
                let sol = match &baseline {
                    Some(s) => s.clone(),
                    None => solve(&problem, config.solver_kind(), None)?,
                };
                open_loop_record(
                    &problem,
                    &sol.schedule,
                    sol.cost,
                    &d.true_model,
                    &true_channel,
                )?
            }
            Mode::ForcedNominal | Mode::MonteCarlo | Mode::FixedPovm => {
                let outcome_mode = if config.mode == Mode::ForcedNominal {
                    OutcomeMode::ForcedNominal
                } else {
                    OutcomeMode::Sampled
                };
                let fc = FeedbackConfig::new(problem.clone(), config.ts, config.steps)?
                    .with_true_system(d.true_model.clone(), true_channel)
                    .with_solver(config.solver_kind())
                    .with_outcome_mode(outcome_mode)
                    .with_final_measurement(config.final_measurement)
                    .with_seed(config.seed);
                if config.mode == Mode::FixedPovm {
                    run_qtopc_fixed_povm_with(&fc, &bases, &mut rng, cache)?
                } else {
                    run_qtopc_with(&fc, &mut rng, cache)?
                }
            }
        };
        let replay_error = replay_error(&problem, &record)?;
        Ok(RunOutcome {
            index,
            true_gamma: d.true_gamma,
            nominal_gamma: d.nominal_gamma,
            replay_error,
            record,
        })
    };

    let results: Vec<Result<RunOutcome>> =
        pool()?.install(|| (0..config.runs).into_par_iter().map(run_one).collect());
    results.into_iter().collect()
}

fn evolve_true(
    rho: &DensityMatrix,
    model: &HamiltonianModel,
    channel: &DissipationChannel,
    schedule: &ControlSchedule,
) -> Result<DensityMatrix> {
    let include = model.uncertainty().is_some();
    if channel.is_closed() {
        evolve_unitary(rho, model, schedule, include)
    } else {
        let step = DEFAULT_STEP.min(schedule.duration());
        evolve_master_with(
            rho,
            model,
            schedule,
            channel,
            include,
            Integrator::Rk4 { step },
        )
    }
}

/// The whole nominal optimum applied to the true system without measurement.
fn open_loop_record(
    problem: &ControlProblem,
    schedule: &ControlSchedule,
    cost: f64,
    true_model: &HamiltonianModel,
    true_channel: &DissipationChannel,
) -> Result<RunRecord> {
    let rho0 = &problem.initial;
    let final_state = if schedule.is_empty() {
        rho0.clone()
    } else {
        evolve_true(rho0, true_model, true_channel, schedule)?
    };
    let target = &problem.target;
    let entries = vec![
        StepRecord {
            step: 0,
            time: 0.0,
            cost,
            fidelity: fidelity(rho0, target)?,
            duration: schedule.duration(),
            basis: None,
            outcome: None,
            nominal_probability: None,
            post_state: None,
            schedule: schedule.clone(),
            solution: schedule.clone(),
        },
        StepRecord {
            step: 1,
            time: schedule.duration(),
            cost: terminal_error(target, &final_state)?,
            fidelity: fidelity(&final_state, target)?,
            duration: 0.0,
            basis: None,
            outcome: None,
            nominal_probability: None,
            post_state: None,
            schedule: ControlSchedule::empty(),
            solution: ControlSchedule::empty(),
        },
    ];
    Ok(RunRecord {
        entries,
        termination: Termination::FinalStep,
        final_infidelity: 1.0 - overlap(target, &final_state)?,
        final_state,
    })
}

/// Re-evaluates every logged cost from the state the loop held at that entry.
///
/// Entry `k > 0` starts from the nearest pure state of entry `k − 1`'s
/// post-measurement state, or from the run's final state when the previous
/// step was not measured.
pub fn replay_error(problem: &ControlProblem, record: &RunRecord) -> Result<f64> {
    let mut worst = 0.0f64;
    for (k, entry) in record.entries.iter().enumerate() {
        let state = if k == 0 {
            problem.initial.clone()
        } else {
            match &record.entries[k - 1].post_state {
                Some(post) => nearest_pure_state(post).to_density(),
                None => record.final_state.clone(),
            }
        };
        let replayed = evaluate_cost(&problem.from_state(state), &entry.solution)?;
        worst = worst.max((replayed - entry.cost).abs());
    }
    Ok(worst)
}

fn path_of(record: &RunRecord) -> String {
    record
        .entries
        .iter()
        .filter_map(|e| {
            e.outcome.map(|o| match e.basis {
                Some(b) => format!("M{}:{o}", b + 1),
                None => format!("P:{o}"),
            })
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Aggregates runs in index order.
pub fn summarize(config: &ExperimentConfig, outcomes: &[RunOutcome]) -> CampaignSummary {
    let infidelities: Vec<f64> = outcomes.iter().map(|o| o.record.final_infidelity).collect();

    let longest = outcomes
        .iter()
        .map(|o| o.record.entries.len())
        .max()
        .unwrap_or(0);
    let n = outcomes.len().max(1) as f64;
    let series = (0..longest)
        .map(|k| {
            let mut acc = SeriesPoint {
                step: k,
                time: 0.0,
                cost: 0.0,
                fidelity: 0.0,
            };
            for o in outcomes {
                let entries = &o.record.entries;
                let Some(e) = entries.get(k).or(entries.last()) else {
                    continue;
                };
                acc.time += e.time;
                acc.cost += e.cost;
                acc.fidelity += e.fidelity;
            }
            acc.time /= n;
            acc.cost /= n;
            acc.fidelity /= n;
            acc
        })
        .collect();

    let mut path_frequencies = Vec::new();
    if config.mode == Mode::FixedPovm {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for o in outcomes {
            *counts.entry(path_of(&o.record)).or_default() += 1;
        }
        path_frequencies = counts
            .into_iter()
            .map(|(path, count)| PathCount { path, count })
            .collect();
        path_frequencies.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.path.cmp(&b.path)));
    }

    let adaptive = matches!(config.mode, Mode::ForcedNominal | Mode::MonteCarlo);
    let mut checked_steps = 0;
    let mut nominal_outcomes = 0;
    let mut floor_sum = 0.0;
    let mut floor_violation_runs = 0;
    let mut cost_increase_runs = 0;
    let mut replay_failure_runs = 0;
    let mut max_replay_error = 0.0f64;
    let mut changes = Vec::new();
    let mut terminations = TerminationCounts {
        final_step: 0,
        max_steps: 0,
        failed: 0,
    };
    for o in outcomes {
        let r = &o.record;
        match r.termination {
            Termination::FinalStep => terminations.final_step += 1,
            Termination::MaxSteps => terminations.max_steps += 1,
            Termination::Failed(_) => terminations.failed += 1,
        }
        if adaptive {
            let mut violated = false;
            for e in r.measured_steps() {
                let Some(p) = e.nominal_probability else {
                    continue;
                };
                let floor = success_floor_general(config.delta_bar, o.true_gamma, e.duration);
                checked_steps += 1;
                floor_sum += floor;
                if e.outcome == Some(0) {
                    nominal_outcomes += 1;
                }
                violated |= p < floor - FLOOR_TOL;
            }
            floor_violation_runs += usize::from(violated);
        }
        let mut increased = false;
        for (dj, dt) in r.cost_decrements() {
            changes.push(dj);
            increased |= dj > -config.lambda0 * dt + DECREASE_TOL;
        }
        cost_increase_runs += usize::from(increased);
        replay_failure_runs += usize::from(!(o.replay_error <= REPLAY_TOL));
        max_replay_error = max_replay_error.max(o.replay_error);
    }
    let nominal_frequency = if checked_steps > 0 {
        nominal_outcomes as f64 / checked_steps as f64
    } else {
        f64::NAN
    };
    let mean_success_floor = if checked_steps > 0 {
        floor_sum / checked_steps as f64
    } else {
        f64::NAN
    };
    let frequency_below_floor = checked_steps > 0 && {
        let f = nominal_frequency;
        let se = (f * (1.0 - f) / checked_steps as f64).sqrt();
        f < mean_success_floor - 3.0 * se - FLOOR_TOL
    };

    CampaignSummary {
        units: units(),
        config: config.clone(),
        runs: outcomes.len(),
        final_infidelity: Stats::from_samples(&infidelities),
        series,
        path_frequencies,
        bounds: BoundCounters {
            checked_steps,
            nominal_outcomes,
            nominal_frequency,
            mean_success_floor,
            frequency_below_floor,
            floor_violation_runs,
            cost_increase_runs,
            replay_failure_runs,
            max_replay_error,
            cost_change: Stats::from_samples(&changes),
        },
        terminations,
    }
}

/// `(time, fidelity)` pairs over all entries, rounded to six decimals.
pub fn bubbles(outcomes: &[RunOutcome]) -> Vec<Bubble> {
    let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for o in outcomes {
        for e in &o.record.entries {
            let key = (
                (e.time * 1e6).round() as i64,
                (e.fidelity * 1e6).round() as i64,
            );
            *counts.entry(key).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((t, f), count)| Bubble {
            time: t as f64 / 1e6,
            fidelity: f as f64 / 1e6,
            count,
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-run CSV with header `step,time,cost,fidelity,outcome`.
pub fn run_csv(record: &RunRecord) -> String {
    let mut s = String::from("step,time,cost,fidelity,outcome\n");
    for e in &record.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.step,
            e.time,
            e.cost,
            e.fidelity,
            opt(e.outcome)
        );
    }
    s
}

fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::FinalStep => "final-step",
        Termination::MaxSteps => "max-steps",
        Termination::Failed(_) => "failed",
    }
}

/// Writes the summary, index, series, per-run and bubble files.
pub fn emit(config: &ExperimentConfig, campaign: &Campaign) -> Result<()> {
    let out = &config.out;
    prepare_output(out)?;
    let mut json = serde_json::to_string_pretty(&campaign.summary)?;
    json.push('\n');
    fs::write(out.join("summary.json"), json)?;
    fs::write(out.join("config.ini"), config.to_ini())?;

    let mut index = String::from(
        "run,true_gamma,nominal_gamma,final_infidelity,termination,entries,replay_error\n",
    );
    for o in &campaign.outcomes {
        let _ = writeln!(
            index,
            "{},{},{},{},{},{},{}",
            o.index,
            o.true_gamma,
            o.nominal_gamma,
            o.record.final_infidelity,
            termination_name(&o.record.termination),
            o.record.entries.len(),
            o.replay_error
        );
    }
    fs::write(out.join("runs.csv"), index)?;

    let mut series = String::from("step,time,cost,fidelity\n");
    for p in &campaign.summary.series {
        let _ = writeln!(series, "{},{},{},{}", p.step, p.time, p.cost, p.fidelity);
    }
    fs::write(out.join("series.csv"), series)?;

    if config.write_runs {
        let dir = out.join("runs");
        fs::create_dir_all(&dir)?;
        for o in &campaign.outcomes {
            fs::write(
                dir.join(format!("run_{:05}.csv", o.index)),
                run_csv(&o.record),
            )?;
        }
    }
    if config.mode == Mode::FixedPovm {
        let mut s = String::from("time,fidelity,count\n");
        for b in bubbles(&campaign.outcomes) {
            let _ = writeln!(s, "{},{},{}", b.time, b.fidelity, b.count);
        }
        fs::write(out.join("bubbles.csv"), s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Preset;

    fn small(mode: Mode, runs: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(Preset::TwoLevel);
        c.mode = mode;
        c.runs = runs;
        c
    }

    #[test]
    fn stats_of_known_samples() {
        let s = Stats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.stderr - s.stddev / 2.0).abs() < 1e-15);
        assert_eq!(Stats::from_samples(&[3.0]).stddev, 0.0);
    }

    #[test]
    fn forced_run_decreases_cost_and_replays() {
        let c = small(Mode::ForcedNominal, 1);
        let camp = run_campaign(&c).unwrap();
        let b = &camp.summary.bounds;
        assert_eq!(b.cost_increase_runs, 0);
        assert_eq!(b.replay_failure_runs, 0);
        assert_eq!(b.floor_violation_runs, 0);
        assert!(camp.summary.final_infidelity.mean < 5e-3);
    }

    #[test]
    fn baseline_is_worse_than_feedback() {
        let base = run_campaign(&small(Mode::OpenLoopBaseline, 40)).unwrap();
        let fb = run_campaign(&small(Mode::MonteCarlo, 40)).unwrap();
        assert!(base.summary.final_infidelity.mean > 2.0 * fb.summary.final_infidelity.mean);
        assert_eq!(fb.summary.bounds.replay_failure_runs, 0);
        assert!(base.summary.bounds.max_replay_error < REPLAY_TOL);
    }

    #[test]
    fn fixed_povm_counts_paths() {
        let camp = run_campaign(&small(Mode::FixedPovm, 30)).unwrap();
        let total: usize = camp.summary.path_frequencies.iter().map(|p| p.count).sum();
        assert_eq!(total, 30);
        assert!(!bubbles(&camp.outcomes).is_empty());
    }

    #[test]
    fn unwritable_output_fails_before_simulating() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        fs::write(&file, b"x").unwrap();
        let mut c = small(Mode::MonteCarlo, 1_000_000);
        c.out = file.join("sub");
        let t = std::time::Instant::now();
        assert!(run_experiment(&c).is_err());
        assert!(t.elapsed().as_secs_f64() < 1.0);
    }
}
