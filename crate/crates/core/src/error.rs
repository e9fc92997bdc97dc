// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integration step {step} exceeds schedule duration {duration}")]
    StepTooLarge { step: f64, duration: f64 },

    #[error(
        "jump probability {dp:.4} in one step at t = {time:.6} exceeds 0.1; use a smaller step"
    )]
    JumpStepTooLarge { dp: f64, time: f64 },

    #[error("state invariants violated after integration: {0}")]
    IntegrationDrift(String),

    #[error("non-finite cost for schedule {schedule}")]
    NonFiniteCost { schedule: String },

    #[error("no measurement outcome has non-negligible probability")]
    DegenerateMeasurement,

    #[error("unknown identifier `{given}`; valid identifiers: {valid}")]
    UnknownIdentifier { given: String, valid: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
