// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ci, CMatrix};

/// A lower bound, or the reason it does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum Floor {
    Valid(f64),
    Invalid(&'static str),
}

impl Floor {
    pub fn value(self) -> Option<f64> {
        match self {
            Floor::Valid(v) => Some(v),
            Floor::Invalid(_) => None,
        }
    }

    pub fn is_valid(self) -> bool {
        matches!(self, Floor::Valid(_))
    }
}

/// Which bound a [`BoundSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    General,
    AppendixA,
    Closed2Lvl,
    Depolarizing2Lvl,
    PhaseDamping2Lvl,
    AmplitudeDamping2Lvl,
    UniformDissipation,
    DepolarizingNLvl,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::General,
        BoundKind::AppendixA,
        BoundKind::Closed2Lvl,
        BoundKind::Depolarizing2Lvl,
        BoundKind::PhaseDamping2Lvl,
        BoundKind::AmplitudeDamping2Lvl,
        BoundKind::UniformDissipation,
        BoundKind::DepolarizingNLvl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::General => "general",
            BoundKind::AppendixA => "appendix-a",
            BoundKind::Closed2Lvl => "closed-2lvl",
            BoundKind::Depolarizing2Lvl => "depolarizing-2lvl",
            BoundKind::PhaseDamping2Lvl => "phase-damping-2lvl",
            BoundKind::AmplitudeDamping2Lvl => "amplitude-damping-2lvl",
            BoundKind::UniformDissipation => "uniform-dissipation",
            BoundKind::DepolarizingNLvl => "depolarizing-nlvl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownIdentifier {
                given: s.to_string(),
                valid: Self::ALL
                    .iter()
                    .map(|k| k.name())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Which form of the two-level dissipative floors to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoLevelVariant {
    /// Single-step forms with explicit `Ts`, extended to `l` steps.
    Derived,
    /// Tabulated forms: depolarizing exponent `4γ̄lTs`, amplitude-damping
    /// trigonometric arguments without `Ts`.
    Tabulated,
}

/// Parameters of one bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub delta_bar: f64,
    pub gamma_bar: f64,
    pub ts: f64,
    /// Steps between measurements.
    pub l: u32,
    pub d: usize,
    pub lambda0: f64,
    /// Horizon used by the terminal-cost condition.
    pub n: u32,
    /// Window length of the convergence-rate analysis.
    pub window: u32,
    /// Depolarizing probability; `1 − e^{−γ̄Ts}` when absent.
    pub p_d: Option<f64>,
    /// Replaces `2Δ̄ + γ̄` when set.
    pub epsilon_override: Option<f64>,
}

impl BoundSpec {
    pub fn new(kind: BoundKind, delta_bar: f64, gamma_bar: f64, ts: f64) -> Self {
        Self {
            kind,
            delta_bar,
            gamma_bar,
            ts,
            l: 1,
            d: 2,
            lambda0: 0.04,
            n: 20,
            window: 1,
            p_d: None,
            epsilon_override: None,
        }
    }

    pub fn with_l(mut self, l: u32) -> Self {
        self.l = l;
        self
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    /// `ε̄`: the override if set, else `2Δ̄ + γ̄`.
    pub fn epsilon_bar(&self) -> f64 {
        self.epsilon_override
            .unwrap_or(2.0 * self.delta_bar + self.gamma_bar)
    }

    pub fn depolarizing_probability(&self) -> f64 {
        self.p_d
            .unwrap_or_else(|| 1.0 - (-self.gamma_bar * self.ts).exp())
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("delta_bar", self.delta_bar),
            ("gamma_bar", self.gamma_bar),
            ("ts", self.ts),
            ("lambda0", self.lambda0),
        ];
        for (name, v) in checks {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and nonnegative"));
            }
        }
        if let Some(p) = self.p_d {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("p_d", "must lie in [0, 1]"));
            }
        }
        if let Some(e) = self.epsilon_override {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::param(
                    "epsilon_override",
                    "must be finite and nonnegative",
                ));
            }
        }
        if self.d < 2 {
            return Err(Error::param("d", "must be at least 2"));
        }
        if self.l == 0 {
            return Err(Error::param("l", "must be at least 1"));
        }
        Ok(())
    }
}

/// `max(0, 1 − (2Δ̄ + γ̄) Ts)`.
pub fn success_floor_general(delta_bar: f64, gamma_bar: f64, ts: f64) -> f64 {
    (1.0 - (2.0 * delta_bar + gamma_bar) * ts).max(0.0)
}

/// `Γ = ‖I − e^{i H_Δ Ts}‖ + (Ts²/2) ‖[H, H_Δ]‖` for time-independent `H`, `H_Δ`.
pub fn appendix_a_gamma(h: &CMatrix, h_delta: &CMatrix, ts: f64) -> f64 {
    let d = h.nrows();
    let rotation = linalg::expm(&(h_delta * ci(ts)));
    linalg::operator_norm(&(linalg::identity(d) - rotation))
        + 0.5 * ts * ts * linalg::operator_norm(&linalg::commutator(h, h_delta))
}

/// `(1 − Γ²/2)²` when `Γ < √2`.
pub fn success_floor_appendix_a(h: &CMatrix, h_delta: &CMatrix, ts: f64) -> Floor {
    let gamma = appendix_a_gamma(h, h_delta, ts);
    if gamma < std::f64::consts::SQRT_2 {
        let a = 1.0 - 0.5 * gamma * gamma;
        Floor::Valid(a * a)
    } else {
        Floor::Invalid("Γ ≥ √2")
    }
}

/// Two-level floor in the derived form.
pub fn success_floor_two_level(spec: &BoundSpec) -> Floor {
    success_floor_two_level_variant(spec, TwoLevelVariant::Derived)
}

/// Two-level floor in the requested form.
pub fn success_floor_two_level_variant(spec: &BoundSpec, variant: TwoLevelVariant) -> Floor {
    if spec.validate().is_err() {
        return Floor::Invalid("parameters out of range");
    }
    if spec.d != 2 {
        return Floor::Invalid("two-level bound needs d = 2");
    }
    let l = spec.l as f64;
    let angle = l * spec.delta_bar * spec.ts;
    let decay = spec.gamma_bar * l * spec.ts;
    let cos2 = angle.cos().powi(2);
    match spec.kind {
        BoundKind::Closed2Lvl => {
            if angle > FRAC_PI_2 {
                return Floor::Invalid("lΔ̄Ts > π/2");
            }
            Floor::Valid(cos2)
        }
        BoundKind::Depolarizing2Lvl => {
            if angle > FRAC_PI_2 {
                return Floor::Invalid("lΔ̄Ts > π/2");
            }
            let rate = match variant {
                TwoLevelVariant::Derived => decay,
                TwoLevelVariant::Tabulated => 4.0 * decay,
            };
            Floor::Valid(0.5 * cos2 * (1.0 + (-rate).exp()))
        }
        BoundKind::PhaseDamping2Lvl => {
            if angle > FRAC_PI_2 {
                return Floor::Invalid("lΔ̄Ts > π/2");
            }
            Floor::Valid(cos2 * (-decay).exp())
        }
        BoundKind::AmplitudeDamping2Lvl => {
            if angle > FRAC_PI_4 {
                return Floor::Invalid("lΔ̄Ts > π/4");
            }
            let arg = match variant {
                TwoLevelVariant::Derived => angle,
                TwoLevelVariant::Tabulated => l * spec.delta_bar,
            };
            Floor::Valid(arg.cos().powi(2) * (1.0 - decay) - 0.5 * (2.0 * arg).sin())
        }
        _ => Floor::Invalid("not a two-level kind"),
    }
}

/// `e^{−γ̄Ts}` for `L†L ∝ I` without Hamiltonian uncertainty.
pub fn success_floor_uniform(gamma_bar: f64, ts: f64) -> f64 {
    (-gamma_bar * ts).exp()
}

/// `1 − p_D (1 − 1/d)` for a depolarizing channel commuting with the dynamics.
pub fn success_floor_depolarizing(p_d: f64, d: usize) -> f64 {
    1.0 - p_d * (1.0 - 1.0 / d as f64)
}

/// Evaluates the floor named by `spec.kind`. The `Γ` floor needs matrices and is
/// reported invalid here.
pub fn success_floor(spec: &BoundSpec) -> Floor {
    if spec.validate().is_err() {
        return Floor::Invalid("parameters out of range");
    }
    match spec.kind {
        BoundKind::General => Floor::Valid((1.0 - spec.epsilon_bar() * spec.ts).max(0.0)),
        BoundKind::AppendixA => Floor::Invalid("needs H and H_Δ; use success_floor_appendix_a"),
        BoundKind::UniformDissipation => {
            if spec.delta_bar > 0.0 {
                return Floor::Invalid("uniform-dissipation floor assumes Δ̄ = 0");
            }
            Floor::Valid(success_floor_uniform(
                spec.gamma_bar * spec.l as f64,
                spec.ts,
            ))
        }
        BoundKind::DepolarizingNLvl => {
            if spec.delta_bar > 0.0 {
                return Floor::Invalid("depolarizing floor assumes Δ̄ = 0");
            }
            Floor::Valid(success_floor_depolarizing(
                spec.depolarizing_probability(),
                spec.d,
            ))
        }
        _ => success_floor_two_level(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::operators::{sigma_x, sigma_z};

    #[test]
    fn general_floor_values() {
        assert_eq!(success_floor_general(0.0, 0.0, 3.0), 1.0);
        assert!((success_floor_general(0.1, 0.2, 1.0) - 0.6).abs() < 1e-15);
        assert_eq!(success_floor_general(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn appendix_a_without_perturbation() {
        let f = success_floor_appendix_a(&sigma_z(), &CMatrix::zeros(2, 2), 1.0);
        assert_eq!(f, Floor::Valid(1.0));
    }

    #[test]
    fn appendix_a_commuting_gamma_is_chord_length() {
        let theta = 0.3;
        let h_delta = sigma_z() * c(theta);
        let g = appendix_a_gamma(&(sigma_z() * c(2.0)), &h_delta, 1.0);
        assert!((g - 2.0 * (theta / 2.0).sin()).abs() < 1e-12);
        let h_big = sigma_z() * c(3.0);
        assert!(appendix_a_gamma(&sigma_x(), &h_big, 1.0) >= 2f64.sqrt());
        assert!(!success_floor_appendix_a(&sigma_x(), &h_big, 1.0).is_valid());
    }

    #[test]
    fn two_level_examples() {
        let closed = BoundSpec::new(BoundKind::Closed2Lvl, 0.0, 0.0, 1.0);
        assert_eq!(success_floor_two_level(&closed), Floor::Valid(1.0));
        let pd = BoundSpec::new(BoundKind::PhaseDamping2Lvl, 0.0, 0.1, 1.0);
        let v = success_floor_two_level(&pd).value().unwrap();
        assert!((v - 0.904837418).abs() < 1e-9);
        let outside = BoundSpec::new(BoundKind::AmplitudeDamping2Lvl, 1.0, 0.0, 1.0);
        assert!(!success_floor_two_level(&outside).is_valid());
        let wide = BoundSpec::new(BoundKind::Closed2Lvl, 1.0, 0.0, 1.0).with_l(2);
        assert!(!success_floor_two_level(&wide).is_valid());
    }

    #[test]
    fn variants_differ_only_where_expected() {
        let dd = BoundSpec::new(BoundKind::Depolarizing2Lvl, 0.1, 0.2, 1.0);
        let a = success_floor_two_level_variant(&dd, TwoLevelVariant::Derived)
            .value()
            .unwrap();
        let b = success_floor_two_level_variant(&dd, TwoLevelVariant::Tabulated)
            .value()
            .unwrap();
        assert!(b < a);
        let pd = BoundSpec::new(BoundKind::PhaseDamping2Lvl, 0.1, 0.2, 1.0);
        assert_eq!(
            success_floor_two_level_variant(&pd, TwoLevelVariant::Derived),
            success_floor_two_level_variant(&pd, TwoLevelVariant::Tabulated)
        );
    }

    #[test]
    fn all_floors_are_one_without_noise() {
        for kind in BoundKind::ALL {
            if kind == BoundKind::AppendixA {
                continue;
            }
            for d in [2, 3] {
                let spec = BoundSpec::new(kind, 0.0, 0.0, 0.7).with_dim(d).with_l(2);
                if let Floor::Valid(v) = success_floor(&spec) {
                    assert!((v - 1.0).abs() < 1e-15, "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn floors_are_monotone_on_a_grid() {
        let kinds = [
            BoundKind::General,
            BoundKind::Closed2Lvl,
            BoundKind::Depolarizing2Lvl,
            BoundKind::PhaseDamping2Lvl,
            BoundKind::AmplitudeDamping2Lvl,
            BoundKind::UniformDissipation,
            BoundKind::DepolarizingNLvl,
        ];
        let grid: Vec<f64> = (0..12).map(|i| i as f64 * 0.05).collect();
        for kind in kinds {
            let uses_delta = !matches!(
                kind,
                BoundKind::UniformDissipation | BoundKind::DepolarizingNLvl
            );
            for &a in &grid {
                for w in grid.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let mut checks = vec![
                        (
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, lo, 1.0),
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, hi, 1.0),
                        ),
                        (
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, 0.1, 0.5 + lo),
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, 0.1, 0.5 + hi),
                        ),
                        (
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, 0.1, 0.5)
                                .with_l(1),
                            BoundSpec::new(kind, if uses_delta { a } else { 0.0 }, 0.1, 0.5)
                                .with_l(2),
                        ),
                    ];
                    if uses_delta {
                        checks.push((
                            BoundSpec::new(kind, lo, a, 1.0),
                            BoundSpec::new(kind, hi, a, 1.0),
                        ));
                    }
                    for (s_lo, s_hi) in checks {
                        if let (Floor::Valid(f_lo), Floor::Valid(f_hi)) =
                            (success_floor(&s_lo), success_floor(&s_hi))
                        {
                            assert!(f_hi <= f_lo + 1e-15, "{kind:?}: {s_lo:?} vs {s_hi:?}");
                        }
                    }
                }
            }
        }
    }
}
