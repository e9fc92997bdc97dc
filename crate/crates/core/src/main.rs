// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Map, Value};

use qtopc::bounds::{
    convergence_rate, depolarizing_variant_report, falsify_all, stability_report, success_floor,
    target_probability_floor, BoundKind, BoundSpec, Floor,
};
use qtopc::experiments::{
    all_keys, reproduce, run_experiment, CampaignSummary, ExperimentConfig, ReproduceOptions,
    TARGETS,
};
use qtopc::{Error, Result};

/// Exit code when a reproduction misses its acceptance thresholds.
const EXIT_COMPARISON_FAILED: u8 = 2;
const EXIT_ERROR: u8 = 1;

const BOUNDS_KEYS: [(&str, &str); 9] = [
    ("delta_bar", "0"),
    ("gamma_bar", "0"),
    ("ts", "1"),
    ("lambda0", "0.04"),
    ("n", "20"),
    ("dim", "2"),
    ("l", "1"),
    ("window", "1"),
    ("p_d", ""),
];

fn common_args() -> [Arg; 3] {
    [
        Arg::new("seed")
            .long("seed")
            .value_name("SEED")
            .help("Master seed"),
        Arg::new("out")
            .long("out")
            .value_name("DIR")
            .help("Output directory"),
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .value_parser(value_parser!(PathBuf))
            .help("INI configuration file"),
    ]
}

fn key_args() -> Vec<Arg> {
    all_keys()
        .filter(|k| *k != "seed" && *k != "out")
        .map(|k| {
            Arg::new(k)
                .long(k)
                .value_name("VALUE")
                .help(format!("Override configuration key `{k}`"))
        })
        .collect()
}

fn campaign_command(name: &'static str, about: &'static str) -> Command {
    Command::new(name)
        .about(about)
        .args(common_args())
        .args(key_args())
}

fn cli() -> Command {
    Command::new("qtopc")
        .about("Time-optimal predictive control of open quantum systems with POVM feedback")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(campaign_command(
            "simulate",
            "Run a campaign in the configured mode",
        ))
        .subcommand(campaign_command(
            "qtopc",
            "Run a single feedback loop and print its steps",
        ))
        .subcommand(campaign_command(
            "montecarlo",
            "Run a Monte-Carlo feedback campaign",
        ))
        .subcommand(
            Command::new("bounds")
                .about("Print stability predicates and success floors as JSON")
                .args(common_args())
                .args(
                    BOUNDS_KEYS
                        .iter()
                        .map(|(k, _)| Arg::new(*k).long(*k).value_name("VALUE")),
                )
                .arg(
                    Arg::new("falsify")
                        .long("falsify")
                        .value_name("INSTANCES")
                        .value_parser(value_parser!(usize))
                        .help("Also run the randomised falsification suites"),
                ),
        )
        .subcommand(
            Command::new("reproduce")
                .about("Regenerate a table or figure and compare it with the acceptance thresholds")
                .arg(
                    Arg::new("target")
                        .required(true)
                        .help(format!("One of: {}", TARGETS.join(", "))),
                )
                .args(common_args())
                .arg(
                    Arg::new("runs")
                        .long("runs")
                        .value_name("N")
                        .value_parser(value_parser!(usize))
                        .help("Monte-Carlo runs per campaign"),
                )
                .arg(
                    Arg::new("set")
                        .long("set")
                        .value_name("KEY=VALUE")
                        .action(ArgAction::Append)
                        .help("Configuration override applied to every campaign"),
                ),
        )
}

fn string(m: &ArgMatches, id: &str) -> Option<String> {
    m.try_get_one::<String>(id).ok().flatten().cloned()
}

fn overrides(m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for key in all_keys() {
        if let Some(v) = string(m, key) {
            out.push((key.to_string(), v));
        }
    }
    out
}

fn load_config(m: &ArgMatches, forced: &[(&str, &str)]) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(String, String)> = forced
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    pairs.extend(overrides(m));
    ExperimentConfig::load(m.get_one::<PathBuf>("config").map(PathBuf::as_path), &pairs)
}

fn print_summary(s: &CampaignSummary) {
    let inf = &s.final_infidelity;
    println!(
        "{} runs of {} ({}): final infidelity mean {:.4e}, stddev {:.4e}, stderr {:.4e}",
        s.runs,
        s.config.mode.name(),
        s.config.preset.name(),
        inf.mean,
        inf.stddev,
        inf.stderr
    );
    let b = &s.bounds;
    println!(
        "nominal outcome frequency {:.4} over {} steps (mean floor {:.4}); floor violations {}, cost increases {}, replay failures {}",
        b.nominal_frequency,
        b.checked_steps,
        b.mean_success_floor,
        b.floor_violation_runs,
        b.cost_increase_runs,
        b.replay_failure_runs
    );
    if let Some(p) = s.path_frequencies.first() {
        println!("dominant path ({} of {} runs): {}", p.count, s.runs, p.path);
    }
    println!("output written to {}", s.config.out.display());
}

fn cmd_campaign(m: &ArgMatches, forced: &[(&str, &str)]) -> Result<u8> {
    let config = load_config(m, forced)?;
    let summary = run_experiment(&config)?;
    print_summary(&summary);
    Ok(0)
}

fn cmd_qtopc(m: &ArgMatches) -> Result<u8> {
    let mut pairs = vec![("mode".to_string(), "monte-carlo".to_string())];
    pairs.extend(overrides(m));
    pairs.push(("runs".into(), "1".into()));
    let config =
        ExperimentConfig::load(m.get_one::<PathBuf>("config").map(PathBuf::as_path), &pairs)?;
    let summary = run_experiment(&config)?;
    let run = config.out.join("runs").join("run_00000.csv");
    if let Ok(text) = std::fs::read_to_string(&run) {
        print!("{text}");
    }
    print_summary(&summary);
    Ok(0)
}

fn floor_json(f: Floor) -> Value {
    match f {
        Floor::Valid(v) => json!({ "valid": true, "value": v }),
        Floor::Invalid(reason) => json!({ "valid": false, "reason": reason }),
    }
}

fn cmd_bounds(m: &ArgMatches) -> Result<u8> {
    let mut values: Map<String, Value> = Map::new();
    let mut raw: Vec<(String, String)> = BOUNDS_KEYS
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    if let Some(path) = m.get_one::<PathBuf>("config") {
        let ini = ini::Ini::load_from_file(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (_, props) in ini.iter() {
            for (k, v) in props.iter() {
                let Some(slot) = raw.iter_mut().find(|(key, _)| key == k) else {
                    return Err(Error::Config(format!("unknown bounds key `{k}`")));
                };
                slot.1 = v.to_string();
            }
        }
    }
    for slot in raw.iter_mut() {
        if let Some(v) = string(m, &slot.0) {
            slot.1 = v;
        }
    }
    let num = |key: &str| -> Result<Option<f64>> {
        let v = &raw.iter().find(|(k, _)| k == key).expect("known key").1;
        if v.trim().is_empty() {
            return Ok(None);
        }
        v.trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Config(format!("cannot parse `{v}` for `{key}`")))
    };
    let get = |key: &str| -> Result<f64> { Ok(num(key)?.unwrap_or(0.0)) };
    let count = |key: &str| -> Result<u32> {
        let v = get(key)?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            Err(Error::Config(format!(
                "`{key}` must be a nonnegative integer"
            )))
        }
    };
    let (delta_bar, gamma_bar, ts, lambda0) = (
        get("delta_bar")?,
        get("gamma_bar")?,
        get("ts")?,
        get("lambda0")?,
    );
    let (n, dim, l, window) = (
        count("n")?,
        count("dim")? as usize,
        count("l")?,
        count("window")?,
    );
    let mut spec = BoundSpec::new(BoundKind::General, delta_bar, gamma_bar, ts)
        .with_l(l)
        .with_dim(dim);
    spec.lambda0 = lambda0;
    spec.n = n;
    spec.window = window;
    spec.p_d = num("p_d")?;
    spec.validate()?;
    for (k, _) in BOUNDS_KEYS {
        values.insert(k.to_string(), json!(num(k)?));
    }

    let report = stability_report(
        delta_bar,
        gamma_bar,
        ts,
        lambda0,
        n,
        dim,
        spec.depolarizing_probability(),
    )?;
    let mut floors = Map::new();
    for kind in BoundKind::ALL {
        if kind == BoundKind::AppendixA {
            continue;
        }
        let s = BoundSpec {
            kind,
            ..spec.clone()
        };
        floors.insert(kind.name().to_string(), floor_json(success_floor(&s)));
    }
    let eps_ts = spec.epsilon_bar() * ts;
    let rate = convergence_rate(eps_ts, window.max(1)).ok();
    let target = target_probability_floor(eps_ts, n as usize, window.max(1), None).ok();
    let mut doc = json!({
        "parameters": values,
        "epsilon_bar": spec.epsilon_bar(),
        "depolarizing_probability": spec.depolarizing_probability(),
        "stability": report,
        "floors": floors,
        "convergence_rate": rate,
        "target_probability_floor": target,
    });
    if let Some(&instances) = m.get_one::<usize>("falsify") {
        let seed: u64 = match string(m, "seed") {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse seed `{s}`")))?,
            None => 1,
        };
        doc["falsification"] = json!(falsify_all(instances, seed)?);
        doc["depolarizing_variants"] = json!(depolarizing_variant_report(instances, seed)?);
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match string(m, "out") {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            qtopc::experiments::prepare_output(&dir)?;
            std::fs::write(dir.join("bounds.json"), &text)?;
            println!("wrote {}", dir.join("bounds.json").display());
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_reproduce(m: &ArgMatches) -> Result<u8> {
    let target = m.get_one::<String>("target").expect("required");
    let mut opts = ReproduceOptions::default();
    if let Some(path) = m.get_one::<PathBuf>("config") {
        ExperimentConfig::load(Some(path), &[])?;
        opts.overrides = read_pairs(path)?;
    }
    if let Some(s) = string(m, "seed") {
        opts.seed = s
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse seed `{s}`")))?;
    }
    if let Some(o) = string(m, "out") {
        opts.out = PathBuf::from(o);
    }
    if let Some(&n) = m.get_one::<usize>("runs") {
        opts.runs = n;
    }
    if let Some(sets) = m.get_many::<String>("set") {
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("`--set {s}` needs KEY=VALUE")))?;
            opts.overrides
                .push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let report = reproduce(target, &opts)?;
    print!("{}", report.render());
    Ok(if report.passed {
        0
    } else {
        EXIT_COMPARISON_FAILED
    })
}

/// Raw `(key, value)` pairs of an INI file, with preset-defining keys dropped.
fn read_pairs(path: &std::path::Path) -> Result<Vec<(String, String)>> {
    let ini = ini::Ini::load_from_file(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(ini
        .iter()
        .flat_map(|(_, props)| props.iter().map(|(k, v)| (k.to_string(), v.to_string())))
        .filter(|(k, _)| !matches!(k.as_str(), "preset" | "mode" | "runs" | "seed" | "out"))
        .collect())
}

fn run(m: &ArgMatches) -> Result<u8> {
    match m.subcommand() {
        Some(("simulate", sub)) => cmd_campaign(sub, &[]),
        Some(("montecarlo", sub)) => cmd_campaign(sub, &[("mode", "monte-carlo")]),
        Some(("qtopc", sub)) => cmd_qtopc(sub),
        Some(("bounds", sub)) => cmd_bounds(sub),
        Some(("reproduce", sub)) => cmd_reproduce(sub),
        _ => unreachable!("subcommand required"),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(&matches) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
