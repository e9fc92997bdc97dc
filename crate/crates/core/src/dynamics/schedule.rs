// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::HamiltonianModel;

/// Durations shorter than this are dropped when cutting schedules.
const MIN_SEGMENT: f64 = 1e-12;

/// One constant-control piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub values: Vec<f64>,
}

/// Piecewise-constant controls; the final time is the sum of the durations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let width = segments.first().map(|s| s.values.len());
        for s in &segments {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::param(
                    "duration",
                    format!("segment duration must be positive, got {}", s.duration),
                ));
            }
            if Some(s.values.len()) != width {
                return Err(Error::param("values", "segments disagree on control count"));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("values", "non-finite control value"));
            }
        }
        Ok(Self { segments })
    }

    /// The empty schedule, `t_f = 0`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Constant controls for `duration`; empty when `duration` is zero.
    pub fn constant(values: Vec<f64>, duration: f64) -> Result<Self> {
        if duration <= MIN_SEGMENT {
            return Ok(Self::empty());
        }
        Self::new(vec![Segment { duration, values }])
    }

    /// `values.len()` equal segments spanning `t_f`.
    pub fn uniform(t_f: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if t_f <= MIN_SEGMENT || values.is_empty() {
            return Ok(Self::empty());
        }
        let dt = t_f / values.len() as f64;
        Self::new(
            values
                .into_iter()
                .map(|values| Segment {
                    duration: dt,
                    values,
                })
                .collect(),
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `t_f`.
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Checks dimensions and amplitude bounds against `model`.
    pub fn check_against(&self, model: &HamiltonianModel) -> Result<()> {
        for s in &self.segments {
            if s.values.len() != model.n_controls() {
                return Err(Error::DimensionMismatch {
                    expected: model.n_controls(),
                    found: s.values.len(),
                });
            }
            for (v, ch) in s.values.iter().zip(model.controls()) {
                if v.abs() > ch.u_max * (1.0 + 1e-12) {
                    return Err(Error::param(
                        "values",
                        format!("control value {v} exceeds bound {}", ch.u_max),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The first `t` time units.
    pub fn truncate(&self, t: f64) -> Self {
        let mut out = Vec::new();
        let mut remaining = t;
        for s in &self.segments {
            if remaining <= MIN_SEGMENT {
                break;
            }
            let d = s.duration.min(remaining);
            out.push(Segment {
                duration: d,
                values: s.values.clone(),
            });
            remaining -= d;
        }
        Self { segments: out }
    }

    /// Everything after the first `t` time units.
    pub fn shift(&self, t: f64) -> Self {
        let mut out = Vec::new();
        let mut skip = t;
        for s in &self.segments {
            if skip >= s.duration - MIN_SEGMENT {
                skip -= s.duration;
                continue;
            }
            out.push(Segment {
                duration: s.duration - skip.max(0.0),
                values: s.values.clone(),
            });
            skip = 0.0;
        }
        Self { segments: out }
    }

    /// Merges adjacent segments with identical values.
    pub fn coalesced(&self) -> Self {
        let mut out: Vec<Segment> = Vec::new();
        for s in &self.segments {
            match out.last_mut() {
                Some(last) if last.values == s.values => last.duration += s.duration,
                _ => out.push(s.clone()),
            }
        }
        Self { segments: out }
    }

    /// Control values active at time `t` (last segment for `t ≥ t_f`).
    pub fn value_at(&self, t: f64) -> Option<&[f64]> {
        let mut acc = 0.0;
        for s in &self.segments {
            acc += s.duration;
            if t < acc {
                return Some(&s.values);
            }
        }
        self.segments.last().map(|s| s.values.as_slice())
    }

    /// Compact description used in error messages.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|s| format!("{:.6}@{:?}", s.duration, s.values))
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ControlSchedule {
        ControlSchedule::new(vec![
            Segment {
                duration: 0.5,
                values: vec![1.0],
            },
            Segment {
                duration: 1.0,
                values: vec![-1.0],
            },
            Segment {
                duration: 0.25,
                values: vec![1.0],
            },
        ])
        .unwrap()
    }

    #[test]
    fn duration_and_cuts() {
        let s = sample();
        assert!((s.duration() - 1.75).abs() < 1e-15);
        let head = s.truncate(1.0);
        assert!((head.duration() - 1.0).abs() < 1e-15);
        assert_eq!(head.segments().len(), 2);
        let tail = s.shift(1.0);
        assert!((tail.duration() - 0.75).abs() < 1e-15);
        assert_eq!(tail.segments()[0].values, vec![-1.0]);
        assert!(s.shift(5.0).is_empty());
        assert!((s.truncate(5.0).duration() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_segments() {
        assert!(ControlSchedule::new(vec![Segment {
            duration: 0.0,
            values: vec![]
        }])
        .is_err());
        assert!(ControlSchedule::new(vec![
            Segment {
                duration: 1.0,
                values: vec![0.0]
            },
            Segment {
                duration: 1.0,
                values: vec![0.0, 1.0]
            },
        ])
        .is_err());
    }

    #[test]
    fn value_lookup_and_coalesce() {
        let s = sample();
        assert_eq!(s.value_at(0.2), Some(&[1.0][..]));
        assert_eq!(s.value_at(1.0), Some(&[-1.0][..]));
        let u = ControlSchedule::uniform(1.0, vec![vec![1.0], vec![1.0], vec![0.0]]).unwrap();
        assert_eq!(u.coalesced().segments().len(), 2);
    }
}
