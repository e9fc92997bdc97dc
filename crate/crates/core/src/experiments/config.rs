// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ini::Ini;
use num_complex::Complex64;
use serde::Serialize;

use crate::control::{ControlProblem, SolverKind, SolverParams};
use crate::dynamics::{ControlChannel, DissipationChannel, HamiltonianModel, UncertaintyMode};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::operators;
use crate::state::DensityMatrix;

/// Built-in system definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `H0 = σz`, `Hu = u σx`, `|0⟩ → |1⟩`, true `L ∝ σy`.
    TwoLevel,
    /// `H0 = Jz`, `Hu = u Jx`, `diag(1,0,0) → diag(0,0,1)`, true `L ∝ Jy`.
    ThreeLevel,
    /// Two-level defaults with every matrix supplied by the caller.
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::TwoLevel, Preset::ThreeLevel, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TwoLevel => "two-level",
            Preset::ThreeLevel => "three-level",
            Preset::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| unknown(s, Self::ALL.iter().map(|p| p.name())))
    }
}

/// What a campaign does with each run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The nominal open-loop optimum applied to the true system, unmeasured.
    OpenLoopBaseline,
    /// Feedback loop with every outcome pinned to the nominal effect.
    ForcedNominal,
    /// Feedback loop with Born-rule outcomes.
    MonteCarlo,
    /// Feedback loop measuring in the fixed two-level bases `M1`, `M2`.
    FixedPovm,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::OpenLoopBaseline,
        Mode::ForcedNominal,
        Mode::MonteCarlo,
        Mode::FixedPovm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::OpenLoopBaseline => "open-loop-baseline",
            Mode::ForcedNominal => "forced-nominal",
            Mode::MonteCarlo => "monte-carlo",
            Mode::FixedPovm => "fixed-povm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| unknown(s, Self::ALL.iter().map(|m| m.name())))
    }
}

/// Which rate is drawn from `[gamma_min, gamma_max]` for each run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSampling {
    /// The true rate is drawn; the nominal model stays fixed.
    True,
    /// The nominal rate is drawn; the true rate is `gamma_max`.
    Nominal,
}

impl GammaSampling {
    pub fn name(self) -> &'static str {
        match self {
            GammaSampling::True => "true",
            GammaSampling::Nominal => "nominal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(GammaSampling::True),
            "nominal" => Ok(GammaSampling::Nominal),
            _ => Err(unknown(s, ["true", "nominal"].into_iter())),
        }
    }
}

fn unknown<'a>(given: &str, valid: impl Iterator<Item = &'a str>) -> Error {
    Error::UnknownIdentifier {
        given: given.to_string(),
        valid: valid.collect::<Vec<_>>().join(", "),
    }
}

fn uncertainty_name(m: UncertaintyMode) -> &'static str {
    match m {
        UncertaintyMode::FixedWorstCase => "fixed-worst-case",
        UncertaintyMode::UniformMagnitude => "uniform-magnitude",
    }
}

/// Every configuration key, grouped by INI section.
pub const KEYS: &[(&str, &[&str])] = &[
    (
        "system",
        &[
            "preset", "dim", "h0", "controls", "u_max", "initial", "target",
        ],
    ),
    (
        "noise",
        &[
            "true_channel",
            "gamma",
            "gamma_min",
            "gamma_max",
            "gamma_sampling",
            "nominal_channel",
            "nominal_gamma",
            "delta_bar",
            "uncertainty_mode",
        ],
    ),
    (
        "control",
        &[
            "lambda0",
            "t_max",
            "solver",
            "segments",
            "max_switches",
            "max_iterations",
            "improvement_tol",
            "tf_scan_points",
            "tf_tolerance",
        ],
    ),
    ("loop", &["ts", "steps", "final_measurement"]),
    ("campaign", &["mode", "runs", "seed", "out", "write_runs"]),
];

pub fn all_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().flat_map(|(_, keys)| keys.iter().copied())
}

/// Full description of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub dim: usize,
    /// Operator name (see [`operators::NAMES`]) or a JSON matrix.
    pub h0: String,
    pub controls: Vec<String>,
    pub u_max: f64,
    /// Basis index of the initial state.
    pub initial: usize,
    /// Basis index of the target state.
    pub target: usize,
    /// `closed`, `depolarizing`, `phase-damping`, `amplitude-damping`, or an operator.
    pub true_channel: String,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_sampling: GammaSampling,
    pub nominal_channel: String,
    pub nominal_gamma: f64,
    pub delta_bar: f64,
    #[serde(serialize_with = "ser_uncertainty")]
    pub uncertainty_mode: UncertaintyMode,
    pub lambda0: f64,
    pub t_max: f64,
    /// `None` selects bang-bang for single-control qubits and gradient otherwise.
    pub solver: Option<SolverKind>,
    pub params: SolverParams,
    pub ts: f64,
    pub steps: usize,
    pub final_measurement: bool,
    pub mode: Mode,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Emit one CSV per run in addition to the summary.
    pub write_runs: bool,
}

fn ser_uncertainty<S: serde::Serializer>(
    m: &UncertaintyMode,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(uncertainty_name(*m))
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            dim: 2,
            h0: "sz".into(),
            controls: vec!["sx".into()],
            u_max: 1.0,
            initial: 0,
            target: 1,
            true_channel: "sy".into(),
            gamma_min: 0.0,
            gamma_max: 0.25,
            gamma_sampling: GammaSampling::True,
            nominal_channel: "closed".into(),
            nominal_gamma: 0.0,
            delta_bar: 0.0,
            uncertainty_mode: UncertaintyMode::FixedWorstCase,
            lambda0: 0.04,
            t_max: 2.0 * PI,
            solver: None,
            params: SolverParams::default(),
            ts: 1.0,
            steps: 20,
            final_measurement: true,
            mode: Mode::MonteCarlo,
            runs: 1000,
            seed: 1,
            out: PathBuf::from("qtopc-out"),
            write_runs: true,
        };
        if preset == Preset::ThreeLevel {
            c.dim = 3;
            c.h0 = "jz".into();
            c.controls = vec!["jx".into()];
            c.target = 2;
            c.true_channel = "jy".into();
            c.gamma_min = 0.01;
            c.gamma_max = 0.01;
            c.solver = Some(SolverKind::Gradient);
            c.params = three_level_params();
        }
        c
    }

    /// Reads an INI file and applies `overrides` on top; later values win.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(path) = path {
            let ini = Ini::load_from_file(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            for (section, props) in ini.iter() {
                if let Some(section) = section {
                    if !KEYS.iter().any(|(s, _)| *s == section) {
                        return Err(Error::Config(format!("unknown section [{section}]")));
                    }
                }
                for (k, v) in props.iter() {
                    pairs.push((k.to_string(), v.to_string()));
                }
            }
        }
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(&pairs)
    }

    /// Builds from `(key, value)` pairs: the preset first, then every other key.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut latest: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in pairs {
            if !all_keys().any(|key| key == k) {
                return Err(Error::Config(format!(
                    "unknown key `{k}`; valid keys: {}",
                    all_keys().collect::<Vec<_>>().join(", ")
                )));
            }
            latest.insert(k.as_str(), v.as_str());
        }
        let preset = match latest.get("preset") {
            Some(p) => Preset::parse(p)?,
            None => Preset::TwoLevel,
        };
        let mut config = Self::preset(preset);
        for key in all_keys() {
            if key == "preset" {
                continue;
            }
            if let Some(v) = latest.get(key) {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "preset" => *self = Self::preset(Preset::parse(v)?),
            "dim" => self.dim = parse(key, v)?,
            "h0" => self.h0 = v.to_string(),
            "controls" => {
                self.controls = v
                    .split(';')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "u_max" => self.u_max = parse(key, v)?,
            "initial" => self.initial = parse(key, v)?,
            "target" => self.target = parse(key, v)?,
            "true_channel" => self.true_channel = v.to_string(),
            "gamma" => {
                let g = parse(key, v)?;
                self.gamma_min = g;
                self.gamma_max = g;
            }
            "gamma_min" => self.gamma_min = parse(key, v)?,
            "gamma_max" => self.gamma_max = parse(key, v)?,
            "gamma_sampling" => self.gamma_sampling = GammaSampling::parse(v)?,
            "nominal_channel" => self.nominal_channel = v.to_string(),
            "nominal_gamma" => self.nominal_gamma = parse(key, v)?,
            "delta_bar" => self.delta_bar = parse(key, v)?,
            "uncertainty_mode" => {
                self.uncertainty_mode = match v {
                    "fixed-worst-case" => UncertaintyMode::FixedWorstCase,
                    "uniform-magnitude" => UncertaintyMode::UniformMagnitude,
                    _ => {
                        return Err(unknown(
                            v,
                            ["fixed-worst-case", "uniform-magnitude"].into_iter(),
                        ))
                    }
                }
            }
            "lambda0" => self.lambda0 = parse(key, v)?,
            "t_max" => self.t_max = parse(key, v)?,
            "solver" => {
                self.solver = match v {
                    "auto" => None,
                    _ => Some(SolverKind::parse(v).ok_or_else(|| {
                        unknown(v, ["auto", "bang-bang", "gradient"].into_iter())
                    })?),
                }
            }
            "segments" => self.params.segments = parse(key, v)?,
            "max_switches" => self.params.max_switches = parse(key, v)?,
            "max_iterations" => self.params.max_iterations = parse(key, v)?,
            "improvement_tol" => self.params.improvement_tol = parse(key, v)?,
            "tf_scan_points" => self.params.tf_scan_points = parse(key, v)?,
            "tf_tolerance" => self.params.tf_tolerance = parse(key, v)?,
            "ts" => self.ts = parse(key, v)?,
            "steps" => self.steps = parse(key, v)?,
            "final_measurement" => self.final_measurement = parse_bool(key, v)?,
            "mode" => self.mode = Mode::parse(v)?,
            "runs" => self.runs = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "write_runs" => self.write_runs = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive, got {v}")))
            }
        };
        positive("lambda0", self.lambda0)?;
        positive("t_max", self.t_max)?;
        positive("ts", self.ts)?;
        positive("u_max", self.u_max)?;
        if self.runs == 0 {
            return Err(Error::Config("`runs` must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("`steps` must be at least 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::Config("`dim` must be at least 2".into()));
        }
        if self.initial >= self.dim || self.target >= self.dim {
            return Err(Error::Config(format!(
                "`initial` and `target` must be basis indices below {}",
                self.dim
            )));
        }
        for (name, v) in [
            ("gamma_min", self.gamma_min),
            ("gamma_max", self.gamma_max),
            ("nominal_gamma", self.nominal_gamma),
            ("delta_bar", self.delta_bar),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "`{name}` must be nonnegative, got {v}"
                )));
            }
        }
        if self.gamma_min > self.gamma_max {
            return Err(Error::Config("`gamma_min` exceeds `gamma_max`".into()));
        }
        if self.controls.is_empty() {
            return Err(Error::Config(
                "`controls` needs at least one operator".into(),
            ));
        }
        if self.params.segments == 0 || self.params.tf_scan_points < 2 {
            return Err(Error::Config(
                "`segments` ≥ 1 and `tf_scan_points` ≥ 2 are required".into(),
            ));
        }
        self.model()?;
        self.channel(&self.true_channel, self.gamma_max)?;
        self.channel(
            &self.nominal_channel,
            self.nominal_gamma.max(self.gamma_max),
        )?;
        if self.mode == Mode::FixedPovm && self.dim != 2 {
            return Err(Error::Config(
                "fixed-povm mode needs a two-level system".into(),
            ));
        }
        Ok(())
    }

    /// Nominal Hamiltonian model.
    pub fn model(&self) -> Result<HamiltonianModel> {
        let h0 = parse_operator(&self.h0, self.dim)?;
        let controls = self
            .controls
            .iter()
            .map(|s| {
                Ok(ControlChannel {
                    operator: parse_operator(s, self.dim)?,
                    u_max: self.u_max,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HamiltonianModel::new(h0, controls)
    }

    /// Dissipation channel named by `spec` at rate `gamma`.
    pub fn channel(&self, spec: &str, gamma: f64) -> Result<DissipationChannel> {
        if gamma == 0.0 {
            return Ok(DissipationChannel::closed(self.dim));
        }
        let ch = match spec {
            "closed" | "none" => return Ok(DissipationChannel::closed(self.dim)),
            "depolarizing" => DissipationChannel::depolarizing(self.dim, gamma)?,
            "phase-damping" if self.dim == 2 => DissipationChannel::phase_damping(gamma)?,
            "amplitude-damping" if self.dim == 2 => DissipationChannel::amplitude_damping(gamma)?,
            other => DissipationChannel::single(parse_operator(other, self.dim)?, gamma)?,
        };
        Ok(ch)
    }

    pub fn solver_kind(&self) -> SolverKind {
        self.solver
            .unwrap_or(if self.dim == 2 && self.controls.len() == 1 {
                SolverKind::BangBang
            } else {
                SolverKind::Gradient
            })
    }

    /// The optimal-control problem on the nominal model with rate `nominal_gamma`.
    pub fn problem(&self, nominal_gamma: f64) -> Result<ControlProblem> {
        let channel = self.channel(&self.nominal_channel, nominal_gamma)?;
        Ok(ControlProblem::with_channel(
            self.model()?,
            channel,
            DensityMatrix::basis(self.dim, self.initial),
            DensityMatrix::basis(self.dim, self.target),
            self.lambda0,
            self.t_max,
        )?
        .with_params(self.params.clone()))
    }

    /// Rendered as `key = value` lines grouped by section.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        for (section, keys) in KEYS {
            out.push_str(&format!("[{section}]\n"));
            for key in keys.iter() {
                if *key == "gamma" {
                    continue;
                }
                out.push_str(&format!("{key} = {}\n", self.get(key)));
            }
        }
        out
    }

    fn get(&self, key: &str) -> String {
        match key {
            "preset" => self.preset.name().into(),
            "dim" => self.dim.to_string(),
            "h0" => self.h0.clone(),
            "controls" => self.controls.join(";"),
            "u_max" => self.u_max.to_string(),
            "initial" => self.initial.to_string(),
            "target" => self.target.to_string(),
            "true_channel" => self.true_channel.clone(),
            "gamma_min" => self.gamma_min.to_string(),
            "gamma_max" => self.gamma_max.to_string(),
            "gamma_sampling" => self.gamma_sampling.name().into(),
            "nominal_channel" => self.nominal_channel.clone(),
            "nominal_gamma" => self.nominal_gamma.to_string(),
            "delta_bar" => self.delta_bar.to_string(),
            "uncertainty_mode" => uncertainty_name(self.uncertainty_mode).into(),
            "lambda0" => self.lambda0.to_string(),
            "t_max" => self.t_max.to_string(),
            "solver" => self.solver.map_or("auto", SolverKind::name).into(),
            "segments" => self.params.segments.to_string(),
            "max_switches" => self.params.max_switches.to_string(),
            "max_iterations" => self.params.max_iterations.to_string(),
            "improvement_tol" => self.params.improvement_tol.to_string(),
            "tf_scan_points" => self.params.tf_scan_points.to_string(),
            "tf_tolerance" => self.params.tf_tolerance.to_string(),
            "ts" => self.ts.to_string(),
            "steps" => self.steps.to_string(),
            "final_measurement" => self.final_measurement.to_string(),
            "mode" => self.mode.name().into(),
            "runs" => self.runs.to_string(),
            "seed" => self.seed.to_string(),
            "out" => self.out.display().to_string(),
            "write_runs" => self.write_runs.to_string(),
            _ => String::new(),
        }
    }
}

/// Solver settings of the three-level preset.
fn three_level_params() -> SolverParams {
    SolverParams {
        segments: 20,
        max_iterations: 300,
        improvement_tol: 1e-9,
        tf_scan_points: 10,
        ..SolverParams::default()
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "cannot parse `{v}` for `{key}` as a boolean"
        ))),
    }
}

/// An operator name, or a JSON array of rows whose entries are numbers or `[re, im]` pairs.
pub fn parse_operator(spec: &str, dim: usize) -> Result<CMatrix> {
    let spec = spec.trim();
    let m = if spec.starts_with('[') {
        let rows: Vec<Vec<serde_json::Value>> = serde_json::from_str(spec)
            .map_err(|e| Error::Config(format!("matrix `{spec}`: {e}")))?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("matrix `{spec}` is not square")));
        }
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                m[(i, j)] = parse_entry(entry)
                    .ok_or_else(|| Error::Config(format!("bad matrix entry `{entry}`")))?;
            }
        }
        m
    } else {
        operators::by_name(spec)?
    };
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(m)
}

fn parse_entry(v: &serde_json::Value) -> Option<Complex64> {
    match v {
        serde_json::Value::Number(n) => Some(Complex64::new(n.as_f64()?, 0.0)),
        serde_json::Value::Array(pair) if pair.len() == 2 => {
            Some(Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
        kv.iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn presets_expand_to_the_model_matrices() {
        let two = ExperimentConfig::preset(Preset::TwoLevel);
        let m = two.model().unwrap();
        assert_eq!(m.h0(), &operators::sigma_z());
        assert_eq!(m.controls()[0].operator, operators::sigma_x());
        assert_eq!(two.solver_kind(), SolverKind::BangBang);

        let three = ExperimentConfig::preset(Preset::ThreeLevel);
        let m = three.model().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(m.h0(), &crate::linalg::real_diagonal(&[1.0, 0.0, -1.0]));
        let jx = &m.controls()[0].operator;
        assert!((jx[(0, 1)] - c(s)).norm() < 1e-15 && (jx[(1, 2)] - c(s)).norm() < 1e-15);
        let p = three.problem(0.0).unwrap();
        assert_eq!(p.target, DensityMatrix::diagonal(&[0.0, 0.0, 1.0]).unwrap());
        assert_eq!(three.solver_kind(), SolverKind::Gradient);
    }

    #[test]
    fn overrides_apply_after_the_preset() {
        let c = ExperimentConfig::from_pairs(&pairs(&[
            ("runs", "7"),
            ("preset", "three-level"),
            ("gamma", "0.1"),
            ("solver", "auto"),
        ]))
        .unwrap();
        assert_eq!(c.dim, 3);
        assert_eq!(c.runs, 7);
        assert_eq!((c.gamma_min, c.gamma_max), (0.1, 0.1));
        assert_eq!(c.solver, None);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            [("runs", "0")],
            [("mode", "sometimes")],
            [("gamma_min", "-1")],
            [("unknown_key", "1")],
            [("h0", "jz")],
            [("target", "5")],
        ] {
            assert!(
                ExperimentConfig::from_pairs(&pairs(&bad)).is_err(),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn ini_round_trip() {
        let mut c = ExperimentConfig::preset(Preset::ThreeLevel);
        c.runs = 12;
        c.nominal_channel = "jy".into();
        c.nominal_gamma = 0.01;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ini");
        std::fs::write(&path, c.to_ini()).unwrap();
        let back = ExperimentConfig::load(Some(&path), &[]).unwrap();
        assert_eq!(back, c);
        let over = ExperimentConfig::load(Some(&path), &pairs(&[("runs", "3")])).unwrap();
        assert_eq!(over.runs, 3);
    }

    #[test]
    fn json_matrices() {
        let m = parse_operator("[[0, [0, -1]], [[0, 1], 0]]", 2).unwrap();
        assert_eq!(m, operators::sigma_y());
        assert!(parse_operator("[[1, 0, 0], [0, 1]]", 2).is_err());
    }
}
