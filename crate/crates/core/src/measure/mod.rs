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

//! Rotationally symmetric probability measures and their Hankel transforms.
//!
//! A measure `μ` on R² is stored through its radial distribution `ψ`, the
//! Lebesgue–Stieltjes measure of `t ↦ μ(B_t)`. Its Fourier transform is the
//! order-0 Hankel transform `g(t) = ∫ J₀(2π s t) dψ(s)`.

pub mod bessel;

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use libm::tgamma as gamma;

use crate::error::{Error, Result};
use crate::potential::{parse_key_values, RadialPotential};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre, integrate};

pub use bessel::{bessel_j, bessel_j_scaled};

/// Tolerance on `ψ([0, ∞)) = 1`.
pub const MASS_TOL: f64 = 1e-12;

/// Gaussian densities are cut where `π s² / σ² = 45`.
const GAUSS_CUTOFF: f64 = 45.0;

/// Gauss–Legendre panels across the support of a sampled profile.
const PROFILE_PANELS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Dirac,
    UniformDisk { radius: f64 },
    /// Density `e^{-π|x|²/σ²} / σ²` on R².
    RadialGaussian { sigma: f64 },
    /// Piecewise-linear `ψ` density through `(s, dψ/ds)` samples.
    Profile { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMeasure {
    pub kind: MeasureKind,
    /// Point masses `(s, w)` of `ψ`.
    pub psi_atoms: Vec<(f64, f64)>,
    /// Quadrature nodes `(s, w)` of the absolutely continuous part of `ψ`.
    pub psi_nodes: Vec<(f64, f64)>,
}

/// Tag for Hankel transforms known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedForm {
    Dirac,
    Disk { radius: f64 },
    Gaussian { sigma: f64 },
}

/// The Hankel transform `g` of a measure, detached from the measure.
#[derive(Debug, Clone)]
pub struct HankelProfile {
    pub closed_form: Option<ClosedForm>,
    atoms: Vec<(f64, f64)>,
    nodes: Vec<(f64, f64)>,
}

impl HankelProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self.closed_form {
            Some(ClosedForm::Dirac) => 1.0,
            Some(ClosedForm::Disk { radius }) => bessel_j_scaled(1, 2.0 * PI * radius * t),
            Some(ClosedForm::Gaussian { sigma }) => (-PI * sigma * sigma * t * t).exp(),
            None => hankel_sum(&self.atoms, &self.nodes, t),
        }
    }
}

fn hankel_sum(atoms: &[(f64, f64)], nodes: &[(f64, f64)], t: f64) -> f64 {
    atoms
        .iter()
        .chain(nodes)
        .map(|&(s, w)| w * bessel_j(0, 2.0 * PI * s * t))
        .sum()
}

impl RadialMeasure {
    pub fn dirac() -> Self {
        Self {
            kind: MeasureKind::Dirac,
            psi_atoms: vec![(0.0, 1.0)],
            psi_nodes: Vec::new(),
        }
    }

    /// Normalised indicator of the disk of the given radius.
    pub fn uniform_disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("disk radius must be positive, got {radius}")));
        }
        // dψ = 2 s / R² ds on [0, R]
        let nodes = composite_gauss_legendre(0.0, radius, 16, 16)
            .into_iter()
            .map(|(s, w)| (s, w * 2.0 * s / (radius * radius)))
            .collect();
        Ok(Self {
            kind: MeasureKind::UniformDisk { radius },
            psi_atoms: Vec::new(),
            psi_nodes: normalized(nodes),
        })
    }

    /// Density `e^{-π|x|²/σ²} / σ²`, whose Hankel transform is `e^{-πσ²t²}`.
    pub fn radial_gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("gaussian sigma must be positive, got {sigma}")));
        }
        let s_max = sigma * (GAUSS_CUTOFF / PI).sqrt();
        let nodes = composite_gauss_legendre(0.0, s_max, 32, 16)
            .into_iter()
            .map(|(s, w)| {
                let d = 2.0 * PI * s / (sigma * sigma) * (-PI * s * s / (sigma * sigma)).exp();
                (s, w * d)
            })
            .collect();
        Ok(Self {
            kind: MeasureKind::RadialGaussian { sigma },
            psi_atoms: Vec::new(),
            psi_nodes: normalized(nodes),
        })
    }

    /// Measure with `dψ/ds` interpolated linearly between samples, rescaled
    /// to total mass one.
    pub fn profile(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("a profile needs at least two samples".into()));
        }
        if samples[0].0 < 0.0 || !samples[0].0.is_finite() {
            return Err(Error::Domain(format!("profile radius {} must be nonnegative", samples[0].0)));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::Domain(format!(
                    "profile radii must be strictly increasing ({} after {})",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some(&(s, d)) = samples.iter().find(|(_, d)| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::Domain(format!("profile density {d} at s = {s} must be nonnegative")));
        }
        let rule = gauss_legendre(16);
        let span = samples[samples.len() - 1].0 - samples[0].0;
        let mut nodes = Vec::new();
        for w in samples.windows(2) {
            let ((s0, d0), (s1, d1)) = (w[0], w[1]);
            let panels = (PROFILE_PANELS as f64 * (s1 - s0) / span).ceil().max(1.0) as usize;
            let width = (s1 - s0) / panels as f64;
            for k in 0..panels {
                let a = s0 + width * k as f64;
                for &(x, wt) in &rule {
                    let s = a + 0.5 * width * (x + 1.0);
                    let d = d0 + (d1 - d0) * (s - s0) / (s1 - s0);
                    if d > 0.0 {
                        nodes.push((s, 0.5 * width * wt * d));
                    }
                }
            }
        }
        let mass: f64 = nodes.iter().map(|n| n.1).sum();
        if !(mass > 0.0) {
            return Err(Error::Domain("profile has zero total mass".into()));
        }
        Ok(Self {
            kind: MeasureKind::Profile { samples },
            psi_atoms: Vec::new(),
            psi_nodes: normalized(nodes),
        })
    }

    /// Reads `s,density` rows; `#` lines and a leading header row are skipped.
    pub fn from_profile_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let mut samples = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::parse(
                    record.iter().collect::<Vec<_>>().join(","),
                    "expected two columns `s,density`",
                ));
            }
            let s = record[0].parse::<f64>();
            let d = record[1].parse::<f64>();
            match (s, d) {
                (Ok(s), Ok(d)) => samples.push((s, d)),
                _ if i == 0 => continue,
                (Err(_), _) => return Err(Error::parse(&record[0], "not a number")),
                (_, Err(_)) => return Err(Error::parse(&record[1], "not a number")),
            }
        }
        Self::profile(samples)
    }

    pub fn total_mass(&self) -> f64 {
        self.psi_atoms.iter().chain(&self.psi_nodes).map(|n| n.1).sum()
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        match self.kind {
            MeasureKind::Dirac => Some(ClosedForm::Dirac),
            MeasureKind::UniformDisk { radius } => Some(ClosedForm::Disk { radius }),
            MeasureKind::RadialGaussian { sigma } => Some(ClosedForm::Gaussian { sigma }),
            MeasureKind::Profile { .. } => None,
        }
    }

    pub fn is_dirac(&self) -> bool {
        self.kind == MeasureKind::Dirac
    }

    /// `g(t)`, in closed form when one is known.
    pub fn hankel(&self, t: f64) -> f64 {
        match self.closed_form() {
            Some(_) => self.hankel_profile().eval(t),
            None => self.hankel_quadrature(t),
        }
    }

    /// `g(t)` summed over the stored `ψ` atoms and nodes.
    pub fn hankel_quadrature(&self, t: f64) -> f64 {
        hankel_sum(&self.psi_atoms, &self.psi_nodes, t)
    }

    pub fn hankel_profile(&self) -> HankelProfile {
        let closed_form = self.closed_form();
        let (atoms, nodes) = if closed_form.is_some() {
            (Vec::new(), Vec::new())
        } else {
            (self.psi_atoms.clone(), self.psi_nodes.clone())
        };
        HankelProfile {
            closed_form,
            atoms,
            nodes,
        }
    }

    /// `μ_ε` with `g_ε(t) = g(εt)`; radii shrink by `ε`, and `ε = 0` gives
    /// the point mass.
    pub fn scale(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("scale factor must be nonnegative, got {eps}")));
        }
        if eps == 0.0 || self.is_dirac() {
            return Ok(Self::dirac());
        }
        let kind = match &self.kind {
            MeasureKind::Dirac => MeasureKind::Dirac,
            MeasureKind::UniformDisk { radius } => MeasureKind::UniformDisk {
                radius: radius * eps,
            },
            MeasureKind::RadialGaussian { sigma } => MeasureKind::RadialGaussian {
                sigma: sigma * eps,
            },
            MeasureKind::Profile { samples } => MeasureKind::Profile {
                samples: samples.iter().map(|&(s, d)| (s * eps, d / eps)).collect(),
            },
        };
        let dilate = |v: &Vec<(f64, f64)>| v.iter().map(|&(s, w)| (s * eps, w)).collect();
        Ok(Self {
            kind,
            psi_atoms: dilate(&self.psi_atoms),
            psi_nodes: dilate(&self.psi_nodes),
        })
    }

    /// `∫ s^k dψ(s)`
    pub fn radial_moment(&self, k: u32) -> f64 {
        let k_f = k as f64;
        match self.kind {
            MeasureKind::Dirac => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            MeasureKind::UniformDisk { radius } => 2.0 * radius.powi(k as i32) / (k_f + 2.0),
            MeasureKind::RadialGaussian { sigma } => {
                (sigma / PI.sqrt()).powi(k as i32) * gamma(1.0 + 0.5 * k_f)
            }
            MeasureKind::Profile { .. } => self
                .psi_atoms
                .iter()
                .chain(&self.psi_nodes)
                .map(|&(s, w)| w * s.powi(k as i32))
                .sum(),
        }
    }

    /// `(A0, A1, A2) = (∫J₀(ks) dψ, ∫s J₁(ks) dψ, ∫s² (J₂ − J₀)(ks) dψ)`
    /// with `k = 2π ε √r`.
    pub fn hankel_moments(&self, eps: f64, r: f64) -> Result<[f64; 3]> {
        if !(r > 0.0) || !(eps >= 0.0) {
            return Err(Error::Domain(format!(
                "moments need r > 0 and eps ≥ 0, got r = {r}, eps = {eps}"
            )));
        }
        let k = 2.0 * PI * eps * r.sqrt();
        Ok(match self.kind {
            MeasureKind::Dirac => [1.0, 0.0, 0.0],
            MeasureKind::UniformDisk { radius } => {
                let z = k * radius;
                let s1 = bessel_j_scaled(1, z);
                let s2 = bessel_j_scaled(2, z);
                [s1, 0.5 * s2 * k * radius * radius, 2.0 * radius * radius * (1.5 * s2 - s1)]
            }
            MeasureKind::RadialGaussian { sigma } => {
                let c = sigma * sigma / (4.0 * PI);
                let e = (-c * k * k).exp();
                [e, 2.0 * c * k * e, 2.0 * (4.0 * c * c * k * k - 2.0 * c) * e]
            }
            MeasureKind::Profile { .. } => {
                let mut out = [0.0; 3];
                for &(s, w) in self.psi_atoms.iter().chain(&self.psi_nodes) {
                    if !s.is_finite() {
                        return Err(Error::DivergentMoment { order: 2 });
                    }
                    let z = k * s;
                    let j0 = bessel_j(0, z);
                    out[0] += w * j0;
                    out[1] += w * s * bessel_j(1, z);
                    out[2] += w * s * s * (bessel_j(2, z) - j0);
                }
                out
            }
        })
    }

    /// `(f ∗ μ ∗ μ)(0) = π ∫₀^∞ Φ(r) g(√r)² dr` with `Φ` the Fourier
    /// transform of `f` as a function of `|p|²`.
    pub fn self_convolution_at_zero(&self, potential: &RadialPotential) -> Result<f64> {
        match self.kind {
            MeasureKind::Dirac => Ok(potential.eval(0.0)),
            MeasureKind::RadialGaussian { sigma } => Ok(potential
                .rep
                .nodes()
                .map(|n| n.w / (1.0 + 2.0 * n.t * sigma * sigma / PI))
                .sum()),
            _ => self.self_convolution_quadrature(potential),
        }
    }

    /// Quadrature evaluation of [`Self::self_convolution_at_zero`] valid for
    /// every measure.
    pub fn self_convolution_quadrature(&self, potential: &RadialPotential) -> Result<f64> {
        let phi = potential.fourier();
        let total: f64 = phi.rep.nodes().map(|n| n.w / n.t).sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let t_max = phi.rep.max_rate();
        let t_min = phi.rep.min_rate();
        // ∫_{r_hi}^∞ Φ ≤ Σ (W/T) e^{-T r_hi}
        let mut r_hi = 1.0 / t_min;
        while phi
            .rep
            .nodes()
            .map(|n| n.w / n.t * (-n.t * r_hi).exp())
            .sum::<f64>()
            > 1e-17 * total
        {
            r_hi *= 1.5;
        }
        let v_min = -(t_max.max(1.0)).ln() - 40.0;
        let v_max = r_hi.ln();
        let g = self.hankel_profile();
        let integrand = |v: f64| {
            let r = v.exp();
            let gv = g.eval(r.sqrt());
            PI * phi.eval(r) * gv * gv * r
        };
        // split at the Φ scale so the kink region of the log map is resolved
        let mut breaks = vec![v_min];
        let mut v = -(t_max.max(1e-300)).ln() - 5.0;
        while v < v_max {
            if v > v_min {
                breaks.push(v);
            }
            v += 1.0;
        }
        breaks.push(v_max);
        let mut sum = 0.0;
        for w in breaks.windows(2) {
            sum += integrate(integrand, w[0], w[1], 1e-16 * total, 1e-12)?.value;
        }
        Ok(sum)
    }
}

fn normalized(mut nodes: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mass: f64 = nodes.iter().map(|n| n.1).sum();
    for n in &mut nodes {
        n.1 /= mass;
    }
    nodes
}

impl FromStr for RadialMeasure {
    type Err = Error;

    /// `dirac`, `disk:r=<f>`, `gauss:sigma=<f>`, `profile:file=<path>`
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        match name {
            "dirac" if args.is_empty() => Ok(Self::dirac()),
            "dirac" => Err(Error::parse(args, "dirac takes no parameters")),
            "disk" => Self::uniform_disk(parse_key_values(args, &["r"])?[0]),
            "gauss" => Self::radial_gaussian(parse_key_values(args, &["sigma"])?[0]),
            "profile" => {
                let path = args
                    .strip_prefix("file=")
                    .ok_or_else(|| Error::parse(args, "expected `file=<path>`"))?;
                Self::from_profile_csv(Path::new(path))
            }
            other => Err(Error::parse(
                other,
                "unknown measure (expected dirac, disk, gauss or profile)",
            )),
        }
    }
}

impl fmt::Display for RadialMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MeasureKind::Dirac => write!(f, "dirac"),
            MeasureKind::UniformDisk { radius } => write!(f, "disk:r={radius}"),
            MeasureKind::RadialGaussian { sigma } => write!(f, "gauss:sigma={sigma}"),
            MeasureKind::Profile { samples } => write!(f, "profile({} samples)", samples.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::io::Write;

    fn disk_oracle(radius: f64, t: f64) -> f64 {
        integrate(
            |s| bessel_j(0, 2.0 * PI * s * t) * 2.0 * s / (radius * radius),
            0.0,
            radius,
            1e-14,
            1e-13,
        )
        .unwrap()
        .value
    }

    fn samples() -> Vec<RadialMeasure> {
        vec![
            RadialMeasure::dirac(),
            RadialMeasure::uniform_disk(1.0).unwrap(),
            RadialMeasure::uniform_disk(0.3).unwrap(),
            RadialMeasure::radial_gaussian(1.0).unwrap(),
            RadialMeasure::radial_gaussian(0.5).unwrap(),
            RadialMeasure::profile(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap(),
        ]
    }

    #[test]
    fn masses_are_one() {
        for m in samples() {
            assert!((m.total_mass() - 1.0).abs() < MASS_TOL, "{m}");
        }
    }

    #[test]
    fn dirac_is_flat() {
        let d = RadialMeasure::dirac();
        for t in [0.0, 0.5, 10.0, 1e3] {
            assert_eq!(d.hankel(t), 1.0);
            assert_eq!(d.hankel_quadrature(t), 1.0);
        }
        assert_eq!(d.hankel_moments(0.7, 2.0).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn g_is_normalized_and_bounded() {
        for m in samples() {
            assert_relative_eq!(m.hankel(0.0), 1.0, max_relative = 1e-12);
            for i in 0..=500 {
                let t = 0.02 * i as f64;
                assert!(m.hankel(t).abs() <= 1.0 + 1e-12);
                assert!(m.hankel_quadrature(t).abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let disk = RadialMeasure::uniform_disk(1.0).unwrap();
        let gauss = RadialMeasure::radial_gaussian(1.0).unwrap();
        for i in 1..=200 {
            let t = 0.05 * i as f64;
            let closed = bessel_j(1, 2.0 * PI * t) / (PI * t);
            assert!((disk.hankel(t) - closed).abs() < 1e-14);
            assert!((disk.hankel_quadrature(t) - closed).abs() < 1e-8);
            assert!((gauss.hankel_quadrature(t) - (-PI * t * t).exp()).abs() < 1e-8);
            assert!((gauss.hankel(t) - (-PI * t * t).exp()).abs() < 1e-15);
        }
        for t in [0.1, 0.77, 2.5, 6.0, 10.0] {
            assert!((disk.hankel(t) - disk_oracle(1.0, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn scaling() {
        let disk = RadialMeasure::uniform_disk(1.0).unwrap();
        assert!(disk.scale(0.0).unwrap().is_dirac());
        for eps in [0.1, 0.6, 2.0] {
            let scaled = disk.scale(eps).unwrap();
            for t in [0.3, 1.0, 4.0] {
                let x = 2.0 * PI * eps * t;
                assert_relative_eq!(scaled.hankel(t), 2.0 * bessel_j(1, x) / x, max_relative = 1e-12);
                assert!((scaled.hankel_quadrature(t) - disk.hankel_quadrature(eps * t)).abs() < 1e-13);
            }
        }
        for m in samples() {
            let ab = m.scale(0.7).unwrap().scale(1.3).unwrap();
            let direct = m.scale(0.7 * 1.3).unwrap();
            for t in [0.2, 1.1, 3.0] {
                assert!((ab.hankel(t) - direct.hankel(t)).abs() < 1e-12);
            }
        }
        assert!(disk.scale(-1.0).is_err());
    }

    fn moments_oracle(m: &RadialMeasure, eps: f64, r: f64) -> [f64; 3] {
        let k = 2.0 * PI * eps * r.sqrt();
        let (radius, density): (f64, Box<dyn Fn(f64) -> f64>) = match m.kind {
            MeasureKind::UniformDisk { radius } => (radius, Box::new(move |s| 2.0 * s / (radius * radius))),
            MeasureKind::RadialGaussian { sigma } => (
                sigma * 8.0,
                Box::new(move |s| 2.0 * PI * s / (sigma * sigma) * (-PI * s * s / (sigma * sigma)).exp()),
            ),
            _ => unreachable!(),
        };
        let q = |f: &dyn Fn(f64) -> f64| integrate(|s| f(s) * density(s), 0.0, radius, 1e-15, 1e-13).unwrap().value;
        [
            q(&|s| bessel_j(0, k * s)),
            q(&|s| s * bessel_j(1, k * s)),
            q(&|s| s * s * (bessel_j(2, k * s) - bessel_j(0, k * s))),
        ]
    }

    #[test]
    fn moments_match_quadrature() {
        let disk = RadialMeasure::uniform_disk(1.0).unwrap();
        let gauss = RadialMeasure::radial_gaussian(1.0).unwrap();
        for m in [&disk, &gauss] {
            for (eps, r) in [(1.0, 1.0), (0.3, 2.0), (2.0, 0.5), (1e-3, 1.0), (4.0, 3.0)] {
                let a = m.hankel_moments(eps, r).unwrap();
                let o = moments_oracle(m, eps, r);
                for i in 0..3 {
                    assert!((a[i] - o[i]).abs() < 1e-9, "{m} {eps} {r} {i}: {} vs {}", a[i], o[i]);
                }
            }
        }
        // the profile route uses the stored nodes
        let p = RadialMeasure::profile(vec![(0.0, 0.0), (1.0, 2.0)]).unwrap();
        let a = p.hankel_moments(1.0, 1.0).unwrap();
        let o = disk.hankel_moments(1.0, 1.0).unwrap();
        for i in 0..3 {
            assert!((a[i] - o[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_moments_small_argument() {
        let disk = RadialMeasure::uniform_disk(1.0).unwrap();
        for eps in [1e-3, 1e-5, 1e-8] {
            let a = disk.hankel_moments(eps, 1.0).unwrap();
            let k = 2.0 * PI * eps;
            assert!((a[0] - 1.0).abs() < 1e-5);
            // ∫₀¹ s (k s / 2) 2 s ds = k / 4
            assert_relative_eq!(a[1], k / 4.0, max_relative = 1e-5);
            assert_relative_eq!(a[2], -0.5, max_relative = 1e-5);
        }
    }

    #[test]
    fn derivative_of_g_squared() {
        for m in samples() {
            for eps in [0.4, 1.0, 2.2] {
                let f = |r: f64| {
                    let g = m.hankel(eps * r.sqrt());
                    g * g
                };
                for r in [0.3, 1.0, 2.7] {
                    let a = m.hankel_moments(eps, r).unwrap();
                    let d1 = -(2.0 * PI * eps / r.sqrt()) * a[0] * a[1];
                    let h = 1e-5 * r;
                    let fd = (f(r + h) - f(r - h)) / (2.0 * h);
                    assert!((d1 - fd).abs() <= 1e-5 * fd.abs().max(1e-6), "{m} {eps} {r}: {d1} vs {fd}");
                    let d2 = PI * eps / r.powf(1.5) * a[0] * a[1]
                        + 2.0 * PI * PI * eps * eps / r * a[1] * a[1]
                        + PI * PI * eps * eps / r * a[0] * a[2];
                    let h = 1e-3 * r;
                    let fd2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
                    assert!((d2 - fd2).abs() <= 1e-4 * fd2.abs().max(1e-3), "{m} {eps} {r}: {d2} vs {fd2}");
                }
            }
        }
    }

    #[test]
    fn radial_moments() {
        let disk = RadialMeasure::uniform_disk(2.0).unwrap();
        let gauss = RadialMeasure::radial_gaussian(1.5).unwrap();
        for k in 0..4 {
            let q = |m: &RadialMeasure| m.psi_nodes.iter().map(|&(s, w)| w * s.powi(k as i32)).sum::<f64>();
            assert_relative_eq!(disk.radial_moment(k), q(&disk), max_relative = 1e-12);
            assert_relative_eq!(gauss.radial_moment(k), q(&gauss), max_relative = 1e-12);
        }
        assert_relative_eq!(gauss.radial_moment(1), 0.75, max_relative = 1e-14);
        assert_relative_eq!(gauss.radial_moment(2), 2.25 / PI, max_relative = 1e-14);
    }

    #[test]
    fn self_convolution_examples() {
        let f = RadialPotential::gaussian(PI).unwrap();
        assert_eq!(RadialMeasure::dirac().self_convolution_at_zero(&f).unwrap(), 1.0);
        for sigma in [0.3, 1.0, 2.0] {
            let m = RadialMeasure::radial_gaussian(sigma).unwrap();
            let closed = m.self_convolution_at_zero(&f).unwrap();
            assert_relative_eq!(closed, 1.0 / (1.0 + 2.0 * sigma * sigma), max_relative = 1e-15);
            let quad = m.self_convolution_quadrature(&f).unwrap();
            assert!((quad - closed).abs() < 1e-8, "{quad} vs {closed}");
        }
        let p = RadialPotential::inverse_power(1.0, 2.0).unwrap();
        let d = RadialMeasure::dirac();
        assert!((d.self_convolution_quadrature(&p).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn self_convolution_disk_by_direct_integration() {
        // (f∗μ∗μ)(0) = ∫∫ f(u - v) for u, v uniform on the unit disk; for a
        // Gaussian f the angular integral is a Bessel I0, done here by
        // Monte-Carlo-free polar quadrature on a fine grid.
        let f = RadialPotential::gaussian(2.0).unwrap();
        let disk = RadialMeasure::uniform_disk(1.0).unwrap();
        let rule = composite_gauss_legendre(0.0, 1.0, 8, 16);
        let angles = composite_gauss_legendre(0.0, PI, 8, 16);
        let mut direct = 0.0;
        for &(a, wa) in &rule {
            for &(b, wb) in &rule {
                let ang: f64 = angles
                    .iter()
                    .map(|&(th, w)| w * (-2.0 * (a * a + b * b - 2.0 * a * b * th.cos())).exp())
                    .sum::<f64>()
                    / PI;
                direct += wa * 2.0 * a * wb * 2.0 * b * ang;
            }
        }
        let value = disk.self_convolution_at_zero(&f).unwrap();
        assert!((value - direct).abs() < 1e-9, "{value} vs {direct}");
    }

    #[test]
    fn spec_strings() {
        assert!("dirac".parse::<RadialMeasure>().unwrap().is_dirac());
        let d: RadialMeasure = "disk:r=1".parse().unwrap();
        assert_eq!(d.kind, MeasureKind::UniformDisk { radius: 1.0 });
        let g: RadialMeasure = "gauss:sigma=0.5".parse().unwrap();
        assert_eq!(g.kind, MeasureKind::RadialGaussian { sigma: 0.5 });
        let err = "disk:r=x1".parse::<RadialMeasure>().unwrap_err();
        assert!(matches!(err, Error::Parse { ref token, .. } if token == "x1"));
        let err = "ring:r=1".parse::<RadialMeasure>().unwrap_err();
        assert!(matches!(err, Error::Parse { ref token, .. } if token == "ring"));
        assert!("disk:r=-1".parse::<RadialMeasure>().is_err());
    }

    #[test]
    fn profile_from_csv() {
        let mut file = tempfile_path("profile_ok.csv");
        writeln!(file.1, "s,density\n0,0\n0.5,1\n# comment\n1,0").unwrap();
        drop(file.1);
        let m: RadialMeasure = format!("profile:file={}", file.0.display()).parse().unwrap();
        assert!((m.total_mass() - 1.0).abs() < MASS_TOL);
        assert_eq!(m.radial_moment(0), m.total_mass());

        file = tempfile_path("profile_bad.csv");
        writeln!(file.1, "0,0\n0.5,abc\n1,0").unwrap();
        drop(file.1);
        let err = RadialMeasure::from_profile_csv(&file.0).unwrap_err();
        assert!(matches!(err, Error::Parse { ref token, .. } if token == "abc"));

        file = tempfile_path("profile_order.csv");
        writeln!(file.1, "0,0\n1,1\n0.5,0").unwrap();
        drop(file.1);
        assert!(RadialMeasure::from_profile_csv(&file.0).is_err());
    }

    fn tempfile_path(name: &str) -> (std::path::PathBuf, std::fs::File) {
        let dir = std::env::temp_dir().join(format!("lattice-forge-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let file = std::fs::File::create(&path).unwrap();
        (path, file)
    }

    proptest! {
        #[test]
        fn self_convolution_below_f0(alpha in 0.2..8.0f64, sigma in 0.1..2.0f64, r in 0.1..2.0f64) {
            let f = RadialPotential::gaussian(alpha).unwrap();
            for m in [RadialMeasure::radial_gaussian(sigma).unwrap(), RadialMeasure::uniform_disk(r).unwrap()] {
                let v = m.self_convolution_at_zero(&f).unwrap();
                prop_assert!(v > 0.0 && v <= f.eval(0.0) + 1e-12);
            }
        }

        #[test]
        fn hankel_bounded_for_profiles(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, t in 0.0..10.0f64) {
            prop_assume!(a + b + c > 0.1);
            let m = RadialMeasure::profile(vec![(0.0, a), (0.5, b), (1.2, c)]).unwrap();
            prop_assert!(m.hankel(t).abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn scale_composes(a in 0.0..3.0f64, b in 0.0..3.0f64, t in 0.0..4.0f64) {
            for m in [RadialMeasure::uniform_disk(0.7).unwrap(), RadialMeasure::radial_gaussian(0.4).unwrap()] {
                let twice = m.scale(a).unwrap().scale(b).unwrap();
                let once = m.scale(a * b).unwrap();
                prop_assert!((twice.hankel(t) - once.hankel(t)).abs() < 1e-12);
            }
        }
    }
}
