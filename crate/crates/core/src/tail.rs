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

//! Radial decay envelopes and certified bounds on lattice-sum tails.
//!
//! A lattice point `p` with `|p| > R` owns the translated centred cell
//! `p + C`, every point of which lies within `ρ_c` (half the longer cell
//! diagonal) of `p`. For an envelope `B` that is nonincreasing beyond some
//! radius this gives
//!
//! ```text
//! Σ_{|p|>R} B(|p|) ≤ (2π / A) ∫_{R-2ρ_c}^∞ B(u) (u + ρ_c) du
//! ```
//!
//! for any translate of a lattice with covolume `A`.

use std::f64::consts::PI;

use libm::erfc;

/// `coef · ρ^(2·power) · exp(-rate · ρ²)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    pub coef: f64,
    pub power: u32,
    pub rate: f64,
}

impl GaussTerm {
    fn eval(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        self.coef * r2.powi(self.power as i32) * (-self.rate * r2).exp()
    }

    fn peak_radius(&self) -> f64 {
        (self.power as f64 / self.rate).sqrt()
    }

    /// `∫_a^∞ M(u) (u + shift) du` where `M` is the nonincreasing majorant.
    fn weighted_tail(&self, a: f64, shift: f64) -> f64 {
        let m = 2 * self.power;
        let peak = self.peak_radius();
        let body = if a >= peak {
            gauss_moment_tail(m + 1, self.rate, a) + shift * gauss_moment_tail(m, self.rate, a)
        } else {
            let top = self.eval(peak) / self.coef;
            top * (0.5 * (peak * peak - a * a) + shift * (peak - a))
                + gauss_moment_tail(m + 1, self.rate, peak)
                + shift * gauss_moment_tail(m, self.rate, peak)
        };
        self.coef * body
    }
}

/// `∫_a^∞ u^m exp(-λ u²) du` for `a ≥ 0`.
pub fn gauss_moment_tail(m: u32, lambda: f64, a: f64) -> f64 {
    let e = (-lambda * a * a).exp();
    let mut prev = if m % 2 == 0 {
        0.5 * (PI / lambda).sqrt() * erfc(lambda.sqrt() * a)
    } else {
        e / (2.0 * lambda)
    };
    let mut k = if m % 2 == 0 { 0 } else { 1 };
    while k < m {
        k += 2;
        prev = a.powi(k as i32 - 1) * e / (2.0 * lambda) + (k as f64 - 1.0) / (2.0 * lambda) * prev;
    }
    prev
}

/// `coef · (1 + ρ)^(-exponent)`, `exponent > 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

/// Pointwise upper bound `B(ρ) ≥ |h(p)|` for `|p| = ρ ≥ valid_from`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayEnvelope {
    gauss: Vec<GaussTerm>,
    power: Vec<PowerTerm>,
    valid_from: f64,
}

impl DecayEnvelope {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Envelope of a Gaussian mixture `Σ w·exp(-t ρ²)`; exact, not just a bound.
    pub fn gaussian_mixture<I: IntoIterator<Item = (f64, f64)>>(weighted_rates: I) -> Self {
        let gauss = weighted_rates
            .into_iter()
            .filter(|&(w, _)| w != 0.0)
            .map(|(w, t)| GaussTerm {
                coef: w.abs(),
                power: 0,
                rate: t,
            })
            .collect();
        Self {
            gauss,
            ..Self::default()
        }
    }

    /// The class-F bound `C (1 + ρ)^(-2-η)`.
    pub fn power_law(c: f64, eta: f64) -> Self {
        assert!(eta > 0.0, "power-law envelope needs η > 0");
        Self {
            power: vec![PowerTerm {
                coef: c.abs(),
                exponent: 2.0 + eta,
            }],
            ..Self::default()
        }
    }

    pub fn from_terms(gauss: Vec<GaussTerm>, valid_from: f64) -> Self {
        Self {
            gauss,
            power: Vec::new(),
            valid_from,
        }
    }

    pub fn with_valid_from(mut self, radius: f64) -> Self {
        self.valid_from = radius;
        self
    }

    pub fn valid_from(&self) -> f64 {
        self.valid_from
    }

    pub fn is_zero(&self) -> bool {
        self.gauss.iter().all(|g| g.coef == 0.0) && self.power.iter().all(|p| p.coef == 0.0)
    }

    pub fn gauss_terms(&self) -> &[GaussTerm] {
        &self.gauss
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let g: f64 = self.gauss.iter().map(|g| g.eval(rho)).sum();
        let p: f64 = self
            .power
            .iter()
            .map(|p| p.coef * (1.0 + rho).powf(-p.exponent))
            .sum();
        g + p
    }

    /// Pointwise sum of two envelopes, valid where both are.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.gauss.extend_from_slice(&other.gauss);
        out.power.extend_from_slice(&other.power);
        out.valid_from = self.valid_from.max(other.valid_from);
        out
    }

    /// Multiplies by the polynomial `Σ c_j ρ^(2 k_j)` with `c_j ≥ 0`.
    pub fn times_polynomial(&self, poly: &[(f64, u32)]) -> Self {
        let mut gauss = Vec::with_capacity(self.gauss.len() * poly.len());
        for g in &self.gauss {
            for &(c, k) in poly {
                gauss.push(GaussTerm {
                    coef: g.coef * c,
                    power: g.power + k,
                    rate: g.rate,
                });
            }
        }
        // ρ^(2k) ≤ (1 + ρ)^(2k)
        let mut power = Vec::new();
        for p in &self.power {
            for &(c, k) in poly {
                power.push(PowerTerm {
                    coef: p.coef * c,
                    exponent: p.exponent - 2.0 * k as f64,
                });
            }
        }
        Self {
            gauss,
            power,
            valid_from: self.valid_from,
        }
    }

    /// Upper bound on `Σ B(|p|)` over points `|p| > radius` of any translate
    /// of a lattice with the given covolume and cell radius. Infinite when the
    /// bound is not available at this radius.
    pub fn lattice_tail(&self, radius: f64, cell_radius: f64, covolume: f64) -> f64 {
        let a = radius - 2.0 * cell_radius;
        if a < self.valid_from.max(0.0) {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for g in &self.gauss {
            total += g.weighted_tail(a, cell_radius);
        }
        for p in &self.power {
            if p.exponent <= 2.0 {
                return f64::INFINITY;
            }
            total += p.coef * cell_radius.max(1.0) * (1.0 + a).powf(2.0 - p.exponent)
                / (p.exponent - 2.0);
        }
        2.0 * PI / covolume * total
    }

    /// Smallest radius (to bisection accuracy) whose tail bound is at most
    /// `target`, or `None` if no radius below `max_radius` achieves it.
    pub fn radius_for(
        &self,
        target: f64,
        cell_radius: f64,
        covolume: f64,
        max_radius: f64,
    ) -> Option<f64> {
        let lo0 = 2.0 * cell_radius + self.valid_from.max(0.0);
        if self.lattice_tail(lo0, cell_radius, covolume) <= target {
            return Some(lo0);
        }
        let mut lo = lo0;
        let mut hi = lo0.max(1.0) * 2.0;
        while self.lattice_tail(hi, cell_radius, covolume) > target {
            lo = hi;
            hi *= 2.0;
            if hi > max_radius {
                return None;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.lattice_tail(mid, cell_radius, covolume) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-9 * hi {
                break;
            }
        }
        Some(hi)
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
