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

//! Completely monotone radial potentials `f(x) = F(|x|²)`.
//!
//! A potential is stored through its Laplace–Stieltjes representation
//! `F(r) = ∫ e^{-r t} dμ_f(t)`, discretised as a finite list of nonnegative
//! weights on positive rates. Every operation here (evaluation, derivatives,
//! Fourier transform, decay bounds) acts node by node on that list.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::tail::DecayEnvelope;

/// Step of the trapezoid rule in `u = ln t` used for continuous densities.
pub const LOG_TRAPEZOID_STEP: f64 = 0.25;

/// Largest `r²` at which continuous densities are resolved to full relative
/// precision (`r = 100`).
const RESOLVED_R2: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceNode {
    pub t: f64,
    pub w: f64,
}

/// Nonnegative measure on `(0, ∞)`: point masses plus quadrature nodes of a
/// continuous part.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LaplaceMeasure {
    pub atoms: Vec<LaplaceNode>,
    pub density_nodes: Vec<LaplaceNode>,
}

impl LaplaceMeasure {
    pub fn new(atoms: Vec<LaplaceNode>, density_nodes: Vec<LaplaceNode>) -> Result<Self> {
        for n in atoms.iter().chain(&density_nodes) {
            if !(n.t > 0.0) || !n.t.is_finite() {
                return Err(Error::Domain(format!("Laplace node at t = {} must be positive", n.t)));
            }
            if !(n.w >= 0.0) || !n.w.is_finite() {
                return Err(Error::Domain(format!("Laplace weight {} must be nonnegative", n.w)));
            }
        }
        Ok(Self {
            atoms,
            density_nodes,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LaplaceNode> + '_ {
        self.atoms.iter().chain(&self.density_nodes)
    }

    pub fn total_mass(&self) -> f64 {
        self.nodes().map(|n| n.w).sum()
    }

    /// `Σ w t^k`
    pub fn moment(&self, k: i32) -> f64 {
        self.nodes().map(|n| n.w * n.t.powi(k)).sum()
    }

    pub fn min_rate(&self) -> f64 {
        self.nodes().map(|n| n.t).fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.nodes().map(|n| n.t).fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(&LaplaceNode) -> LaplaceNode) -> Self {
        Self {
            atoms: self.atoms.iter().map(&f).collect(),
            density_nodes: self.density_nodes.iter().map(&f).collect(),
        }
    }
}

/// Constants of the decay condition `|f(x)| + |f̂(x)| ≤ C (1 + |x|)^(-2-η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub c: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Gaussian { alpha: f64 },
    InversePower { a: f64, s: f64 },
    Laplace,
    Fourier(Box<PotentialKind>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub kind: PotentialKind,
    pub rep: LaplaceMeasure,
    pub decay: DecayConstants,
}

impl RadialPotential {
    /// `e^{-α |x|²}`
    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("gaussian needs alpha > 0, got {alpha}")));
        }
        let rep = LaplaceMeasure::new(vec![LaplaceNode { t: alpha, w: 1.0 }], vec![])?;
        Ok(Self::with_rep(PotentialKind::Gaussian { alpha }, rep, 1.0, None))
    }

    /// `(a + |x|²)^(-s)` from its Laplace density `t^(s-1) e^{-at} / Γ(s)`.
    pub fn inverse_power(a: f64, s: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !(s > 1.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "inverse power needs a > 0 and s > 1, got a = {a}, s = {s}"
            )));
        }
        let nodes = log_trapezoid_gamma_density(a, s);
        let rep = LaplaceMeasure::new(vec![], nodes)?;
        let eta = (2.0 * s - 2.0).min(1.0);
        // (1+r)² ≤ 2 max(1, 1/a) (a + r²)
        let direct = (2.0 * (1.0f64).max(1.0 / a)).powf(s);
        Ok(Self::with_rep(
            PotentialKind::InversePower { a, s },
            rep,
            eta,
            Some(direct),
        ))
    }

    /// Arbitrary finite combination of Gaussians `Σ w e^{-t|x|²}`.
    pub fn laplace(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("laplace potential needs at least one atom".into()));
        }
        let atoms = atoms
            .into_iter()
            .map(|(t, w)| LaplaceNode { t, w })
            .collect();
        let rep = LaplaceMeasure::new(atoms, vec![])?;
        Ok(Self::with_rep(PotentialKind::Laplace, rep, 1.0, None))
    }

    fn with_rep(kind: PotentialKind, rep: LaplaceMeasure, eta: f64, direct_c: Option<f64>) -> Self {
        let k = 2.0 + eta;
        let c_direct =
            direct_c.unwrap_or_else(|| rep.nodes().map(|n| n.w * power_peak(n.t, k)).sum());
        let c_fourier: f64 = rep
            .nodes()
            .map(|n| n.w * PI / n.t * power_peak(PI * PI / n.t, k))
            .sum();
        Self {
            kind,
            rep,
            decay: DecayConstants {
                c: c_direct + c_fourier,
                eta,
            },
        }
    }

    /// `F(r2) = Σ w e^{-r2 t}`
    pub fn eval(&self, r2: f64) -> f64 {
        self.rep.nodes().map(|n| n.w * (-r2 * n.t).exp()).sum()
    }

    /// k-th derivative `F^(k)(r2) = Σ w (-t)^k e^{-r2 t}`.
    pub fn eval_derivative(&self, r2: f64, order: u32) -> f64 {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        sign * self
            .rep
            .nodes()
            .map(|n| n.w * n.t.powi(order as i32) * (-r2 * n.t).exp())
            .sum::<f64>()
    }

    /// Value and first two derivatives at once.
    pub fn eval_with_derivatives(&self, r2: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for n in self.rep.nodes() {
            let e = n.w * (-r2 * n.t).exp();
            out[0] += e;
            out[1] -= n.t * e;
            out[2] += n.t * n.t * e;
        }
        out
    }

    /// Exact 2D Fourier transform, `e^{-t|x|²} ↦ (π/t) e^{-π²|p|²/t}` per node.
    pub fn fourier(&self) -> Self {
        let kind = match &self.kind {
            PotentialKind::Fourier(inner) => (**inner).clone(),
            other => PotentialKind::Fourier(Box::new(other.clone())),
        };
        Self {
            kind,
            rep: self.rep.map(|n| LaplaceNode {
                t: PI * PI / n.t,
                w: n.w * PI / n.t,
            }),
            decay: self.decay,
        }
    }

    /// `f̂(0) = ∫ f = Σ w π / t`
    pub fn fourier_at_zero(&self) -> f64 {
        PI * self.rep.moment(-1)
    }

    pub fn decay_constants(&self) -> DecayConstants {
        self.decay
    }

    /// Exact envelope of `|f(p)|` as a Gaussian mixture in `ρ = |p|`.
    pub fn envelope(&self) -> DecayEnvelope {
        DecayEnvelope::gaussian_mixture(self.rep.nodes().map(|n| (n.w, n.t)))
    }

    /// `Σ w t^k e^{-t ρ²}` bounds `|F^(k)(ρ²)|`.
    pub fn derivative_envelope(&self, order: u32) -> DecayEnvelope {
        DecayEnvelope::gaussian_mixture(
            self.rep
                .nodes()
                .map(|n| (n.w * n.t.powi(order as i32), n.t)),
        )
    }
}

/// `sup_{r ≥ 0} (1 + r)^k e^{-t r²}`
fn power_peak(t: f64, k: f64) -> f64 {
    let r = (-t + (t * t + 2.0 * t * k).sqrt()) / (2.0 * t);
    (k * (1.0 + r).ln() - t * r * r).exp()
}

/// Nodes of `∫ e^{-rt} t^(s-1) e^{-at} dt / Γ(s)` by the trapezoid rule in
/// `u = ln t`. The integrand `exp(s u - (a + r) e^u)` is analytic in the strip
/// `|Im u| < π/2`, so the rule converges like `exp(-π²/h)`.
fn log_trapezoid_gamma_density(a: f64, s: f64) -> Vec<LaplaceNode> {
    const CUT: f64 = 39.0; // e^-39 ≈ 1e-17
    let h = LOG_TRAPEZOID_STEP;
    let lg = ln_gamma(s);
    // left end: capture f at r² up to RESOLVED_R2 and f̂(0) ∝ ∫ t^(s-2) e^{-at}
    let c = a + RESOLVED_R2;
    let left_f = (s * (s / c).ln() - s - CUT) / s;
    let sm1 = s - 1.0;
    let left_hat = (sm1 * (sm1 / a).ln() - sm1 - CUT) / sm1;
    let u_min = left_f.min(left_hat).max(-400.0);
    // right end: the e^{-at} factor has killed the integrand
    let peak = s * (s / a).ln() - s;
    let mut u_max = (s / a).ln();
    while s * u_max - a * u_max.exp() > peak - CUT {
        u_max += h;
    }
    let count = ((u_max - u_min) / h).ceil() as usize + 1;
    (0..count)
        .map(|k| {
            let u = u_min + h * k as f64;
            let t = u.exp();
            LaplaceNode {
                t,
                w: h * (s * u - a * t - lg).exp(),
            }
        })
        .filter(|n| n.w > 0.0)
        .collect()
}

/// Checks complete monotonicity on a sample grid: the divided differences
/// of order `k` must carry the sign `(-1)^k` for every `k ≤ max_order`,
/// up to an absolute slack of 1e-12.
pub fn check_completely_monotone<F: Fn(f64) -> f64>(f: F, samples: &[f64], max_order: usize) -> bool {
    const SLACK: f64 = 1e-12;
    if samples.windows(2).any(|w| !(w[1] > w[0])) {
        return false;
    }
    let mut table: Vec<f64> = samples.iter().map(|&r| f(r)).collect();
    if table.iter().any(|v| !v.is_finite() || *v < -SLACK) {
        return false;
    }
    for k in 1..=max_order {
        if table.len() < 2 {
            break;
        }
        let next: Vec<f64> = (0..table.len() - 1)
            .map(|i| (table[i + 1] - table[i]) / (samples[i + k] - samples[i]))
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if next.iter().any(|d| sign * d < -SLACK) {
            return false;
        }
        table = next;
    }
    true
}

impl FromStr for RadialPotential {
    type Err = Error;

    /// `gaussian:alpha=<f>`, `invpower:a=<f>,s=<f>`, `laplace:atoms=[(t,w),...]`
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        match name {
            "gaussian" => {
                let kv = parse_key_values(args, &["alpha"])?;
                Self::gaussian(kv[0])
            }
            "invpower" => {
                let kv = parse_key_values(args, &["a", "s"])?;
                Self::inverse_power(kv[0], kv[1])
            }
            "laplace" => {
                let list = args
                    .strip_prefix("atoms=")
                    .ok_or_else(|| Error::parse(args, "expected `atoms=[(t,w),...]`"))?;
                Self::laplace(parse_pairs(list)?)
            }
            other => Err(Error::parse(
                other,
                "unknown potential (expected gaussian, invpower or laplace)",
            )),
        }
    }
}

impl fmt::Display for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PotentialKind::Gaussian { alpha } => write!(f, "gaussian:alpha={alpha}"),
            PotentialKind::InversePower { a, s } => write!(f, "invpower:a={a},s={s}"),
            PotentialKind::Laplace => {
                let atoms: Vec<String> = self
                    .rep
                    .atoms
                    .iter()
                    .map(|n| format!("({},{})", n.t, n.w))
                    .collect();
                write!(f, "laplace:atoms=[{}]", atoms.join(","))
            }
            PotentialKind::Fourier(inner) => write!(f, "fourier({inner:?})"),
        }
    }
}

/// Parses `k1=v1,k2=v2` requiring exactly the listed keys, in any order.
pub(crate) fn parse_key_values(args: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut values = vec![None; keys.len()];
    for item in args.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(item, "expected key=value"))?;
        let k = k.trim();
        let slot = keys
            .iter()
            .position(|&key| key == k)
            .ok_or_else(|| Error::parse(k, format!("unknown key (expected {})", keys.join(", "))))?;
        let v = v.trim();
        let x: f64 = v
            .parse()
            .map_err(|_| Error::parse(v, "not a number"))?;
        values[slot] = Some(x);
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::parse(*k, "missing key")))
        .collect()
}

fn parse_pairs(list: &str) -> Result<Vec<(f64, f64)>> {
    let inner = list
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::parse(list, "expected a bracketed list"))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(rest, "expected `(`"))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::parse(rest, "unclosed `(`"))?;
        let pair = &open[..close];
        let (t, w) = pair
            .split_once(',')
            .ok_or_else(|| Error::parse(pair, "expected `t,w`"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(s.trim(), "not a number"))
        };
        out.push((parse(t)?, parse(w)?));
        rest = open[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(out)
}
