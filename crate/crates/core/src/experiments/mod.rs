// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! Presets, Monte-Carlo campaigns, file emission and table/figure reproduction.
//!
//! A campaign is described by an [`ExperimentConfig`], read from an INI file
//! whose keys can each be overridden by name. [`run_experiment`] executes the
//! runs on a worker pool (capped by `QTOPC_THREADS`), each on its own random
//! stream, and writes:
//!
//! - `summary.json`: the [`CampaignSummary`] with units,
//! - `runs.csv`: one line per run,
//! - `series.csv`: per-step means,
//! - `runs/run_NNNNN.csv`: `step,time,cost,fidelity,outcome` per run,
//! - `bubbles.csv`: `time,fidelity,count` in fixed-POVM mode.

mod campaign;
mod config;
mod reproduce;

pub use campaign::{
    bubbles, emit, prepare_output, replay_error, run_campaign, run_csv, run_experiment, summarize,
    thread_cap, BoundCounters, Bubble, Campaign, CampaignSummary, PathCount, RunOutcome,
    SeriesPoint, Stats, TerminationCounts, REPLAY_TOL,
};
pub use config::{all_keys, parse_operator, ExperimentConfig, GammaSampling, Mode, Preset, KEYS};
pub use reproduce::{
    reproduce, Comparison, ReproduceOptions, ReproductionReport, BASELINE_RATIO,
    FORCED_INFIDELITY_MAX, TARGETS, THREE_LEVEL_BASELINE, TWO_LEVEL_MC_BAND,
};
