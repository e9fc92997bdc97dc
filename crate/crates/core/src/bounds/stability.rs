// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margins smaller than this in magnitude are reported as zero.
const MARGIN_SNAP: f64 = 1e-14;

/// One stability predicate; satisfied exactly when `margin ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub satisfied: bool,
    pub margin: f64,
}

impl Condition {
    fn from_margin(margin: f64) -> Self {
        let margin = if margin.abs() < MARGIN_SNAP {
            0.0
        } else {
            margin
        };
        Self {
            satisfied: margin >= 0.0,
            margin,
        }
    }
}

/// Stability predicates evaluated for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon_bar: f64,
    /// `ε̄ ≤ λ0² Ts / 4`.
    pub lyapunov: Condition,
    /// `ε̄ ≤ λ0 / (2√N)`.
    pub terminal_cost: Condition,
    /// `ε̄Ts + 2√(ε̄Ts) − λ0Ts ≤ 0`.
    pub expectation: Condition,
    /// `√(2 p_D (1 − 1/d)) ≤ λ0 Ts`.
    pub depolarizing: Condition,
    /// `√(2 p_D (1 − 1/d)) + (1 − 1/d) p_D ≤ λ0 Ts`.
    pub depolarizing_expectation: Condition,
    /// `2√(1 − e^{−γ̄Ts}) ≤ λ0 Ts`.
    pub uniform: Condition,
    /// `2√(1 − e^{−γ̄Ts}) + 1 − e^{−γ̄Ts} ≤ λ0 Ts`.
    pub uniform_expectation: Condition,
}

impl StabilityReport {
    pub fn conditions(&self) -> [(&'static str, Condition); 7] {
        [
            ("lyapunov", self.lyapunov),
            ("terminal-cost", self.terminal_cost),
            ("expectation", self.expectation),
            ("depolarizing", self.depolarizing),
            ("depolarizing-expectation", self.depolarizing_expectation),
            ("uniform", self.uniform),
            ("uniform-expectation", self.uniform_expectation),
        ]
    }
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite and nonnegative"))
    }
}

/// Stability predicates with `ε̄ = 2Δ̄ + γ̄`.
pub fn stability_report(
    delta_bar: f64,
    gamma_bar: f64,
    ts: f64,
    lambda0: f64,
    n: u32,
    d: usize,
    p_d: f64,
) -> Result<StabilityReport> {
    check_nonnegative("delta_bar", delta_bar)?;
    stability_report_with_epsilon(
        2.0 * delta_bar + gamma_bar,
        gamma_bar,
        ts,
        lambda0,
        n,
        d,
        p_d,
    )
}

/// Stability predicates for an explicit `ε̄`.
pub fn stability_report_with_epsilon(
    epsilon_bar: f64,
    gamma_bar: f64,
    ts: f64,
    lambda0: f64,
    n: u32,
    d: usize,
    p_d: f64,
) -> Result<StabilityReport> {
    check_nonnegative("epsilon_bar", epsilon_bar)?;
    check_nonnegative("gamma_bar", gamma_bar)?;
    check_nonnegative("ts", ts)?;
    check_nonnegative("lambda0", lambda0)?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if d < 2 {
        return Err(Error::param("d", "must be at least 2"));
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::param("p_d", "must lie in [0, 1]"));
    }
    let e = epsilon_bar;
    let ets = e * ts;
    let budget = lambda0 * ts;
    let mix = 1.0 - 1.0 / d as f64;
    let depol = (2.0 * p_d * mix).sqrt();
    let leak = 1.0 - (-gamma_bar * ts).exp();
    Ok(StabilityReport {
        epsilon_bar: e,
        lyapunov: Condition::from_margin(lambda0 * lambda0 * ts / 4.0 - e),
        terminal_cost: Condition::from_margin(lambda0 / (2.0 * (n as f64).sqrt()) - e),
        expectation: Condition::from_margin(budget - ets - 2.0 * ets.sqrt()),
        depolarizing: Condition::from_margin(budget - depol),
        depolarizing_expectation: Condition::from_margin(budget - depol - mix * p_d),
        uniform: Condition::from_margin(budget - 2.0 * leak.sqrt()),
        uniform_expectation: Condition::from_margin(budget - 2.0 * leak.sqrt() - leak),
    })
}

/// Convergence rate `η` of the failure probability for window length `L`.
pub fn convergence_rate(eps_ts: f64, window: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps_ts) {
        return Err(Error::param("eps_ts", "must lie in [0, 1]"));
    }
    if window == 0 {
        return Err(Error::param("window", "must be at least 1"));
    }
    let l = window as f64;
    let q = 1.0 - eps_ts;
    let pivot = l / (l + 1.0);
    let upper = 2.0 * l / (l + 1.0) - q;
    if (q - pivot).abs() <= 1e-12 {
        Ok(q)
    } else if q < pivot {
        let alpha = eps_ts * q.powi(window as i32);
        Ok((1.0 - alpha).min(upper))
    } else {
        Ok(upper)
    }
}

/// `F_0, …, F_{n_max}` from `F_k = min(1, ε̄Ts Σ_{l=1..L} (1 − ε̄Ts)^{l−1} F_{k−l})`
/// with `F_0 = 1` and `F_{k<0} = 1`.
pub fn failure_sequence(eps_ts: f64, window: u32, n_max: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&eps_ts) {
        return Err(Error::param("eps_ts", "must lie in [0, 1]"));
    }
    if window == 0 {
        return Err(Error::param("window", "must be at least 1"));
    }
    let q = 1.0 - eps_ts;
    let mut f = vec![1.0];
    for k in 1..=n_max {
        let mut sum = 0.0;
        let mut w = 1.0;
        for l in 1..=window as usize {
            let prev = if k >= l { f[k - l] } else { 1.0 };
            sum += w * prev;
            w *= q;
        }
        f.push((eps_ts * sum).min(1.0));
    }
    Ok(f)
}

/// `1 − ε̄Ts Σ_{l=1..L} (1 − ε̄Ts)^{l−1} F_{N−l}`.
///
/// `failures` holds `F_0, F_1, …`; when absent it is generated by
/// [`failure_sequence`]. Terms with a negative index count as `F = 1`.
pub fn target_probability_floor(
    eps_ts: f64,
    n: usize,
    window: u32,
    failures: Option<&[f64]>,
) -> Result<f64> {
    let generated;
    let f = match failures {
        Some(f) => {
            if f.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::param("failures", "entries must lie in [0, 1]"));
            }
            f
        }
        None => {
            generated = failure_sequence(eps_ts, window, n)?;
            &generated[..]
        }
    };
    if !(0.0..=1.0).contains(&eps_ts) {
        return Err(Error::param("eps_ts", "must lie in [0, 1]"));
    }
    if window == 0 {
        return Err(Error::param("window", "must be at least 1"));
    }
    let q = 1.0 - eps_ts;
    let mut sum = 0.0;
    let mut w = 1.0;
    for l in 1..=window as usize {
        let fk = if n >= l {
            *f.get(n - l)
                .ok_or_else(|| Error::param("failures", format!("needs F_{} for N = {n}", n - l)))?
        } else {
            1.0
        };
        sum += w * fk;
        w *= q;
    }
    Ok(1.0 - eps_ts * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_parameters_satisfy_everything() {
        let r = stability_report(0.0, 0.0, 1.0, 0.04, 20, 2, 0.0).unwrap();
        for (name, c) in r.conditions() {
            assert!(c.satisfied, "{name}");
        }
    }

    #[test]
    fn lyapunov_boundary_has_zero_margin() {
        let r = stability_report_with_epsilon(0.0004, 0.0, 1.0, 0.04, 20, 2, 0.0).unwrap();
        assert!(r.lyapunov.satisfied);
        assert_eq!(r.lyapunov.margin, 0.0);
    }

    #[test]
    fn expectation_violation_margin() {
        let r = stability_report_with_epsilon(0.01, 0.0, 1.0, 0.04, 20, 2, 0.0).unwrap();
        assert!(!r.expectation.satisfied);
        assert!((r.expectation.margin + 0.17).abs() < 1e-12);
    }

    #[test]
    fn margin_sign_matches_flag() {
        for e in [0.0, 1e-5, 3e-4, 1e-3, 0.05] {
            for g in [0.0, 1e-4, 0.1] {
                let r = stability_report_with_epsilon(e, g, 1.0, 0.04, 20, 3, 0.01).unwrap();
                for (_, c) in r.conditions() {
                    assert_eq!(c.satisfied, c.margin >= 0.0);
                }
            }
        }
    }

    #[test]
    fn convergence_rate_cases() {
        assert!((convergence_rate(0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((convergence_rate(0.1, 1).unwrap() - 0.1).abs() < 1e-12);
        let expected = (1.0f64 - 0.7 * 0.09).min(4.0 / 3.0 - 0.3);
        assert!((convergence_rate(0.7, 2).unwrap() - expected).abs() < 1e-12);
        assert!(convergence_rate(1.5, 1).is_err());
        assert!(convergence_rate(0.5, 0).is_err());
    }

    #[test]
    fn target_floor_edge_cases() {
        for n in 0..10 {
            assert_eq!(target_probability_floor(0.0, n, 3, None).unwrap(), 1.0);
        }
        let f = [1.0, 0.4, 0.2, 0.1];
        for n in 1..=4 {
            let v = target_probability_floor(1.0, n, 3, Some(&f)).unwrap();
            assert!((v - (1.0 - f[n - 1])).abs() < 1e-15);
        }
        assert!(target_probability_floor(0.1, 10, 3, Some(&f)).is_err());
    }

    #[test]
    fn target_floor_increases_to_one() {
        let mut prev = f64::NEG_INFINITY;
        for n in 0..200 {
            let v = target_probability_floor(0.1, n, 3, None).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(1.0 - prev < 1e-6);
    }
}
