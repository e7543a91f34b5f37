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

//! Lattice sums: theta functions, point energies and diffuse energies.
//!
//! Every sum is truncated at a radius chosen from a pointwise envelope of
//! the summand, so that the neglected tail is certified to be at most
//! `rtol` times the sum of absolute values of the retained terms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dot, enumerate_points, Basis2D, LatticeParams, DEFAULT_POINT_CAP};
use crate::measure::{HankelProfile, MeasureKind, RadialMeasure};
use crate::potential::{PotentialKind, RadialPotential};
use crate::tail::{CompensatedSum, DecayEnvelope};

/// Result of one certified lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub value: f64,
    /// `Σ |h(p)|` over the retained terms.
    pub abs_sum: f64,
    pub cutoff_radius: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    /// `E_h[L*]`
    pub lattice_part: f64,
    /// `f̂(0) − (f∗μ∗μ)(0)`
    pub constant_part: f64,
    pub cutoff_radius: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// `Σ h(p + shift)` over the points of `basis`, truncated where the
/// envelope tail is below `rtol` times the absolute sum.
pub fn lattice_sum<H: Fn([f64; 2]) -> f64>(
    basis: &Basis2D,
    h: H,
    envelope: &DecayEnvelope,
    rtol: f64,
    shift: [f64; 2],
    include_origin: bool,
) -> Result<LatticeSum> {
    if !(rtol > 0.0) {
        return Err(Error::Domain(format!("rtol must be positive, got {rtol}")));
    }
    let cell = basis.cell_radius();
    let covolume = basis.covolume();
    let max_radius = (DEFAULT_POINT_CAP as f64 * covolume / PI).sqrt() - cell;

    let sum_to = |radius: f64| -> Result<LatticeSum> {
        let pts = enumerate_points(basis, radius, shift, include_origin, DEFAULT_POINT_CAP)?;
        let mut value = CompensatedSum::default();
        let mut abs_sum = CompensatedSum::default();
        for p in &pts.points {
            let v = h(*p);
            value.add(v);
            abs_sum.add(v.abs());
        }
        Ok(LatticeSum {
            value: value.value(),
            abs_sum: abs_sum.value(),
            cutoff_radius: radius,
            tail_bound: envelope.lattice_tail(radius, cell, covolume),
            terms_used: pts.count,
        })
    };

    // The pilot sum only grows with the radius, so a target relative to it
    // stays valid for the final sum.
    let pilot = sum_to(3.0 * cell + envelope.valid_from())?;
    if pilot.tail_bound <= rtol * pilot.abs_sum || envelope.is_zero() {
        return Ok(LatticeSum {
            tail_bound: if envelope.is_zero() { 0.0 } else { pilot.tail_bound },
            ..pilot
        });
    }
    let target = rtol * pilot.abs_sum.max(f64::MIN_POSITIVE);
    let radius = envelope
        .radius_for(target, cell, covolume, max_radius)
        .ok_or_else(|| {
            Error::NonConvergence(format!(
                "no truncation radius below {max_radius:.3} meets tail target {target:e}"
            ))
        })?;
    sum_to(radius.max(pilot.cutoff_radius))
}

/// `θ_L(t) = Σ_{x ∈ L} e^{-π t |x|²}`, origin included.
pub fn theta(l: &LatticeParams, t: f64, rtol: f64) -> Result<f64> {
    theta_basis(&l.basis(), t, rtol)
}

pub fn theta_basis(basis: &Basis2D, t: f64, rtol: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("theta needs t > 0, got {t}")));
    }
    let a = PI * t;
    let env = DecayEnvelope::gaussian_mixture([(1.0, a)]);
    let s = lattice_sum(basis, |p| (-a * dot(p, p)).exp(), &env, rtol, [0.0; 2], true)?;
    Ok(s.value)
}

/// `E_h[L] = Σ'_{p ∈ L} h(p)`. The envelope must dominate `|h|`; without
/// one the tail cannot be controlled.
pub fn point_energy<H: Fn([f64; 2]) -> f64>(
    h: H,
    envelope: Option<&DecayEnvelope>,
    l: &LatticeParams,
    rtol: f64,
) -> Result<LatticeSum> {
    let envelope = envelope
        .ok_or_else(|| Error::NonConvergence("no decay envelope for the summand".into()))?;
    lattice_sum(&l.basis(), h, envelope, rtol, [0.0; 2], false)
}

/// Point energy `Σ'_{x ∈ L} F(|x|²)` of a potential.
pub fn potential_energy(p: &RadialPotential, l: &LatticeParams, rtol: f64) -> Result<LatticeSum> {
    point_energy(|x| p.eval(dot(x, x)), Some(&p.envelope()), l, rtol)
}

/// Diffuse energy of a fixed `(f, μ)` pair with the lattice-independent
/// part computed once.
#[derive(Debug, Clone)]
pub struct DiffuseEnergy {
    phi: RadialPotential,
    g: HankelProfile,
    envelope: DecayEnvelope,
    constant_part: f64,
}

impl DiffuseEnergy {
    pub fn new(potential: &RadialPotential, measure: &RadialMeasure) -> Result<Self> {
        let phi = potential.fourier();
        let envelope = phi.envelope();
        let constant_part =
            potential.fourier_at_zero() - measure.self_convolution_at_zero(potential)?;
        Ok(Self {
            phi,
            g: measure.hankel_profile(),
            envelope,
            constant_part,
        })
    }

    pub fn constant_part(&self) -> f64 {
        self.constant_part
    }

    /// `h(p) = Φ(|p|²) g(|p|)²`
    pub fn h(&self, p: [f64; 2]) -> f64 {
        let r2 = dot(p, p);
        let g = self.g.eval(r2.sqrt());
        self.phi.eval(r2) * g * g
    }

    /// `E_h` summed over the points of `basis`.
    pub fn sum_over(&self, basis: &Basis2D, rtol: f64) -> Result<LatticeSum> {
        lattice_sum(basis, |p| self.h(p), &self.envelope, rtol, [0.0; 2], false)
    }

    /// `E_h[L*]`; for unit density `L*` is isometric to `L`, so this is also
    /// `E_h[L]`.
    pub fn lattice_part(&self, l: &LatticeParams, rtol: f64) -> Result<LatticeSum> {
        require_unit_density(l)?;
        self.sum_over(&l.basis().dual(), rtol)
    }

    pub fn energy(&self, l: &LatticeParams, rtol: f64) -> Result<EnergyReport> {
        let s = self.lattice_part(l, rtol)?;
        Ok(EnergyReport {
            value: s.value + self.constant_part,
            lattice_part: s.value,
            constant_part: self.constant_part,
            cutoff_radius: s.cutoff_radius,
            tail_bound: s.tail_bound,
            terms_used: s.terms_used,
        })
    }
}

fn require_unit_density(l: &LatticeParams) -> Result<()> {
    if (l.scale - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "diffuse energies need unit density, got covolume {}",
            l.scale
        )));
    }
    Ok(())
}

/// `E_{f,μ}[L]` through its Fourier representation.
pub fn diffuse_energy(
    potential: &RadialPotential,
    measure: &RadialMeasure,
    l: &LatticeParams,
    rtol: f64,
) -> Result<EnergyReport> {
    DiffuseEnergy::new(potential, measure)?.energy(l, rtol)
}

/// `Σ'_{x ∈ L} (f∗μ∗μ)(x)` in direct space. Needs a Gaussian-mixture `f`
/// and a Gaussian or point measure so that the summand is explicit:
/// each atom `w e^{-t|x|²}` becomes `w c e^{-tc|x|²}` with
/// `c = 1 / (1 + 2tσ²/π)`.
pub fn diffuse_energy_direct(
    potential: &RadialPotential,
    measure: &RadialMeasure,
    l: &LatticeParams,
    rtol: f64,
) -> Result<f64> {
    match potential.kind {
        PotentialKind::Gaussian { .. } | PotentialKind::Laplace => {}
        _ => {
            return Err(Error::UnsupportedPair(format!(
                "direct summation needs a gaussian or laplace potential, got {potential}"
            )))
        }
    }
    let sigma2 = match measure.kind {
        MeasureKind::Dirac => 0.0,
        MeasureKind::RadialGaussian { sigma } => sigma * sigma,
        _ => {
            return Err(Error::UnsupportedPair(format!(
                "direct summation needs a dirac or gaussian measure, got {measure}"
            )))
        }
    };
    require_unit_density(l)?;
    let atoms: Vec<(f64, f64)> = potential
        .rep
        .nodes()
        .map(|n| {
            let c = 1.0 / (1.0 + 2.0 * n.t * sigma2 / PI);
            (n.w * c, n.t * c)
        })
        .collect();
    let env = DecayEnvelope::gaussian_mixture(atoms.iter().copied());
    let s = lattice_sum(
        &l.basis(),
        |x| {
            let r2 = dot(x, x);
            atoms.iter().map(|&(w, b)| w * (-b * r2).exp()).sum()
        },
        &env,
        rtol,
        [0.0; 2],
        false,
    )?;
    Ok(s.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

/// Both sides of `Σ_{x∈L} f(x+z) = (1/A) Σ_{p∈L*} e^{2πi p·z} f̂(p)`.
pub fn poisson_check(
    potential: &RadialPotential,
    l: &LatticeParams,
    z: [f64; 2],
    rtol: f64,
) -> Result<PoissonCheck> {
    let basis = l.basis();
    let lhs = lattice_sum(
        &basis,
        |x| potential.eval(dot(x, x)),
        &potential.envelope(),
        rtol,
        z,
        true,
    )?
    .value;
    let phi = potential.fourier();
    let rhs = lattice_sum(
        &basis.dual(),
        |p| (2.0 * PI * dot(p, z)).cos() * phi.eval(dot(p, p)),
        &phi.envelope(),
        rtol,
        [0.0; 2],
        true,
    )?
    .value
        / basis.covolume();
    Ok(PoissonCheck {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
    })
}
