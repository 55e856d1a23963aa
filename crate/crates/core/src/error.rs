// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("circuit error: {0}")]
    Circuit(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("singular term: {0}")]
    Singular(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
