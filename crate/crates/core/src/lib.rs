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

//! Interaction energies of radially symmetric, spatially extended particles
//! placed on two-dimensional Bravais lattices.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: unit-density lattices parameterised by the fundamental
//!   domain `D`, duals, Lagrange–Gauss reduction, shell enumeration.
//! - [`potential`]: completely monotone potentials `F(r²)` stored as
//!   Laplace–Stieltjes measures, with exact Fourier transforms.
//! - [`measure`]: rotationally symmetric mass distributions and their
//!   Hankel transforms, plus the Bessel functions behind them.
//! - [`energy`]: theta functions, point energies and the diffuse energy in
//!   its dual-lattice representation, with certified truncation.
//! - [`stability`]: the Hessian coefficient `T` at the triangular lattice
//!   and finite-difference diagnostics.
//! - [`optimize`]: landscape scans and bounded Nelder–Mead over `D`.

pub mod energy;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod optimize;
pub mod potential;
pub mod quadrature;
pub mod stability;
pub mod tail;

pub use error::{Error, Result};
pub use lattice::{Basis2D, LatticeParams};
pub use measure::RadialMeasure;
pub use potential::RadialPotential;
