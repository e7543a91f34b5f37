// Copyright 2026 The lattice-forge authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate basis: |det| = {det:e} is below {threshold:e}")]
    DegenerateBasis { det: f64, threshold: f64 },

    /// A lattice enumeration would produce more points than allowed.
    #[error("enumeration of radius {radius} would yield about {estimate} points (cap {cap})")]
    Resource {
        radius: f64,
        estimate: usize,
        cap: usize,
    },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("unsupported potential/measure pair: {0}")]
    UnsupportedPair(String),

    #[error("measure has divergent radial moment of order {order}")]
    DivergentMoment { order: u32 },

    #[error("no convergence after {iterations} iterations")]
    MaxIterations { iterations: usize },

    #[error("finite-difference stencil leaves the domain at ({x}, {y})")]
    Boundary { x: f64, y: f64 },

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed user input.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }

    /// True for errors that signal a numerical procedure gave up.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_) | Error::MaxIterations { .. } | Error::Resource { .. }
        )
    }
}
