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

//! Second-order behaviour of lattice energies at the triangular lattice.
//!
//! At `Λ` the Hessian of `L ↦ E_f[L]` in the `(x, y)` chart is `T · I` with
//!
//! ```text
//! T = 4/√3 Σ' n² F'(q) + 4/3 Σ' n⁴ F''(q),   q = 2/√3 (m² + mn + n²),
//! ```
//!
//! so the sign of `T` decides local minimality. For diffuse energies the
//! same formula is applied to `H_ε = Φ · G_ε²`, `G_ε(r) = g(ε√r)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::lattice_sum;
use crate::error::{Error, Result};
use crate::lattice::LatticeParams;
use crate::measure::RadialMeasure;
use crate::potential::RadialPotential;
use crate::tail::DecayEnvelope;

/// `|T| ≤ CLASSIFY_TOL` counts as marginal.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Default finite-difference steps, multiplied by `1 + |y|`.
pub const GRAD_STEP: f64 = 1e-5;
pub const HESS_STEP: f64 = 1e-4;

/// Width to which sign changes of `T` are bisected.
pub const SIGN_CHANGE_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl Classification {
    pub fn of(t: f64) -> Self {
        if t > CLASSIFY_TOL {
            Classification::Stable
        } else if t < -CLASSIFY_TOL {
            Classification::Unstable
        } else {
            Classification::Marginal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub t_analytic: f64,
    pub grad_fd: [f64; 2],
    pub hessian_fd: [[f64; 2]; 2],
    pub classification: Classification,
}

impl StabilityReport {
    pub fn new(t_analytic: f64, fd: FiniteDifferences) -> Self {
        Self {
            t_analytic,
            grad_fd: fd.grad,
            hessian_fd: fd.hessian,
            classification: Classification::of(t_analytic),
        }
    }
}

/// `T` for a radial profile with derivatives `f1 = F'`, `f2 = F''`.
/// `b1`, `b2` bound `|F'(ρ²)|`, `|F''(ρ²)|` as functions of `ρ`.
pub fn t_coefficient<F1, F2>(
    f1: F1,
    f2: F2,
    b1: &DecayEnvelope,
    b2: &DecayEnvelope,
    rtol: f64,
) -> Result<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let tri = LatticeParams::triangular().basis();
    let sqrt_y = tri.u2[1];
    let c1 = 4.0 / 3f64.sqrt();
    // n² ≤ 2/√3 q and n⁴ ≤ 4/3 q², with q = ρ²
    let envelope = b1
        .times_polynomial(&[(c1 * 2.0 / 3f64.sqrt(), 1)])
        .plus(&b2.times_polynomial(&[(4.0 / 3.0 * 4.0 / 3.0, 2)]));
    let s = lattice_sum(
        &tri,
        |p| {
            let n = p[1] / sqrt_y;
            let n2 = n * n;
            let q = p[0] * p[0] + p[1] * p[1];
            c1 * n2 * f1(q) + 4.0 / 3.0 * n2 * n2 * f2(q)
        },
        &envelope,
        rtol,
        [0.0; 2],
        false,
    )?;
    Ok(s.value)
}

/// `T_f` of the point energy `E_f`.
pub fn t_point(potential: &RadialPotential, rtol: f64) -> Result<f64> {
    t_coefficient(
        |r| potential.eval_derivative(r, 1),
        |r| potential.eval_derivative(r, 2),
        &potential.derivative_envelope(1),
        &potential.derivative_envelope(2),
        rtol,
    )
}

/// Derivatives of `H_ε = Φ · G_ε²` for a fixed `(f, μ)` pair.
#[derive(Debug, Clone)]
pub struct DiffuseStability {
    phi: RadialPotential,
    measure: RadialMeasure,
    m1: f64,
    m2: f64,
}

impl DiffuseStability {
    pub fn new(potential: &RadialPotential, measure: &RadialMeasure) -> Self {
        Self {
            phi: potential.fourier(),
            measure: measure.clone(),
            m1: measure.radial_moment(1),
            m2: measure.radial_moment(2),
        }
    }

    /// `(H', H'')` at `r > 0`.
    pub fn h_derivatives(&self, eps: f64, r: f64) -> Result<[f64; 2]> {
        let [a0, a1, a2] = self.measure.hankel_moments(eps, r)?;
        let [p0, p1, p2] = self.phi.eval_with_derivatives(r);
        let g2 = a0 * a0;
        let sr = r.sqrt();
        let g2_1 = -(2.0 * PI * eps / sr) * a0 * a1;
        let pe2 = PI * PI * eps * eps / r;
        let g2_2 = PI * eps / (r * sr) * a0 * a1 + 2.0 * pe2 * a1 * a1 + pe2 * a0 * a2;
        Ok([
            p1 * g2 + p0 * g2_1,
            p2 * g2 + 2.0 * p1 * g2_1 + p0 * g2_2,
        ])
    }

    /// Envelopes of `|H'|`, `|H''|` valid for `ρ ≥ 1`, from `|A0| ≤ 1`,
    /// `|A1| ≤ ∫s dψ`, `|A2| ≤ 2∫s² dψ`.
    fn envelopes(&self, eps: f64) -> (DecayEnvelope, DecayEnvelope) {
        let d1 = 2.0 * PI * eps * self.m1;
        let d2 = PI * eps * self.m1
            + 2.0 * PI * PI * eps * eps * (self.m1 * self.m1 + self.m2);
        let nodes: Vec<_> = self.phi.rep.nodes().copied().collect();
        let b1 = DecayEnvelope::gaussian_mixture(nodes.iter().map(|n| (n.w * (n.t + d1), n.t)));
        let b2 = DecayEnvelope::gaussian_mixture(
            nodes
                .iter()
                .map(|n| (n.w * (n.t * n.t + 2.0 * d1 * n.t + d2), n.t)),
        );
        (b1.with_valid_from(1.0), b2.with_valid_from(1.0))
    }

    /// `T_{h_ε}`
    pub fn t_coefficient(&self, eps: f64, rtol: f64) -> Result<f64> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be nonnegative, got {eps}")));
        }
        let (b1, b2) = self.envelopes(eps);
        let err = std::sync::Mutex::new(None);
        let eval = |r: f64, k: usize| match self.h_derivatives(eps, r) {
            Ok(d) => d[k],
            Err(e) => {
                *err.lock().unwrap() = Some(e);
                f64::NAN
            }
        };
        let t = t_coefficient(|r| eval(r, 0), |r| eval(r, 1), &b1, &b2, rtol)?;
        match err.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(t),
        }
    }
}

/// `(H', H'')` of `H_ε = Φ · G_ε²` at `r`.
pub fn diffuse_h_derivatives(
    potential: &RadialPotential,
    measure: &RadialMeasure,
    eps: f64,
    r: f64,
) -> Result<[f64; 2]> {
    DiffuseStability::new(potential, measure).h_derivatives(eps, r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCurve {
    /// `(ε, T_{h_ε})` in grid order.
    pub points: Vec<(f64, f64)>,
    /// Zeros of `T` bisected to [`SIGN_CHANGE_WIDTH`], ascending.
    pub sign_changes: Vec<f64>,
}

impl StabilityCurve {
    pub fn first_sign_change(&self) -> Option<f64> {
        self.sign_changes.first().copied()
    }
}

/// `T_{h_ε}` over a grid of `ε`, with every sign change between adjacent
/// grid points refined by bisection.
pub fn stability_curve(
    potential: &RadialPotential,
    measure: &RadialMeasure,
    eps_grid: &[f64],
    rtol: f64,
) -> Result<StabilityCurve> {
    let ds = DiffuseStability::new(potential, measure);
    let points = eps_grid
        .par_iter()
        .map(|&eps| ds.t_coefficient(eps, rtol).map(|t| (eps, t)))
        .collect::<Result<Vec<_>>>()?;
    let brackets: Vec<_> = points
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| (w[0], w[1]))
        .collect();
    let sign_changes = brackets
        .par_iter()
        .map(|&((mut lo, mut t_lo), (mut hi, _))| {
            while hi - lo > SIGN_CHANGE_WIDTH {
                let mid = 0.5 * (lo + hi);
                let t_mid = ds.t_coefficient(mid, rtol)?;
                if t_mid * t_lo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    t_lo = t_mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityCurve {
        points,
        sign_changes,
    })
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn eps_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!(
            "bad grid {start}:{stop}:{step} (need step > 0, stop ≥ start)"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    /// Central differences; stencil points may leave the fundamental
    /// domain (the energy is smooth on the whole upper half-plane).
    Central,
    /// Central where possible, one-sided where a central stencil would
    /// leave the fundamental domain.
    InDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifferences {
    pub grad: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

/// Offsets and weights of first- and second-derivative stencils.
#[derive(Clone, Copy)]
enum Side {
    Central,
    Forward,
    Backward,
}

impl Side {
    fn first(self) -> &'static [(f64, f64)] {
        match self {
            Side::Central => &[(-1.0, -0.5), (1.0, 0.5)],
            Side::Forward => &[(0.0, -1.5), (1.0, 2.0), (2.0, -0.5)],
            Side::Backward => &[(0.0, 1.5), (-1.0, -2.0), (-2.0, 0.5)],
        }
    }

    fn second(self) -> &'static [(f64, f64)] {
        match self {
            Side::Central => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
            Side::Forward => &[(0.0, 2.0), (1.0, -5.0), (2.0, 4.0), (3.0, -1.0)],
            Side::Backward => &[(0.0, 2.0), (-1.0, -5.0), (-2.0, 4.0), (-3.0, -1.0)],
        }
    }
}

/// Gradient and Hessian of `E` in the `(x, y)` chart.
pub fn fd_gradient_hessian<E>(
    energy: E,
    l: &LatticeParams,
    steps: (f64, f64),
    stencil: Stencil,
) -> Result<FiniteDifferences>
where
    E: Fn(&LatticeParams) -> Result<f64>,
{
    let (x0, y0) = l.xy();
    let scale = 1.0 + y0.abs();
    let (hg, hh) = (steps.0 * scale, steps.1 * scale);
    let at = |x: f64, y: f64| -> Result<f64> {
        let p = match stencil {
            Stencil::Central => LatticeParams::unreduced(x, y)?,
            Stencil::InDomain => LatticeParams::new(x, y).map_err(|_| Error::Boundary { x, y })?,
        };
        energy(&p)
    };
    let inside = |x: f64, y: f64| {
        stencil == Stencil::Central || LatticeParams::new(x, y).is_ok()
    };
    // pick one stencil per axis that fits for every offset used with it
    let choose = |h: f64, reach: f64, axis: usize| -> Result<Side> {
        for side in [Side::Central, Side::Forward, Side::Backward] {
            let offsets: &[f64] = match side {
                Side::Central => &[-1.0, 1.0],
                Side::Forward => &[1.0, 2.0, reach],
                Side::Backward => &[-1.0, -2.0, -reach],
            };
            let ok = offsets.iter().all(|&o| {
                let (x, y) = if axis == 0 { (x0 + o * h, y0) } else { (x0, y0 + o * h) };
                inside(x, y)
            });
            if ok {
                return Ok(side);
            }
        }
        Err(Error::Boundary { x: x0, y: y0 })
    };
    let e0 = at(x0, y0)?;
    let mut grad = [0.0; 2];
    let mut hess = [[0.0; 2]; 2];
    for axis in 0..2 {
        let point = |o: f64, h: f64| if axis == 0 { (x0 + o * h, y0) } else { (x0, y0 + o * h) };
        let side = choose(hg, 2.0, axis)?;
        for &(o, w) in side.first() {
            let (x, y) = point(o, hg);
            grad[axis] += w * if o == 0.0 { e0 } else { at(x, y)? };
        }
        grad[axis] /= hg;
        let side = choose(hh, 3.0, axis)?;
        for &(o, w) in side.second() {
            let (x, y) = point(o, hh);
            hess[axis][axis] += w * if o == 0.0 { e0 } else { at(x, y)? };
        }
        hess[axis][axis] /= hh * hh;
    }
    let sx = choose(hh, 2.0, 0)?;
    let sy = choose(hh, 2.0, 1)?;
    let mut mixed = 0.0;
    for &(ox, wx) in sx.first() {
        for &(oy, wy) in sy.first() {
            let (x, y) = (x0 + ox * hh, y0 + oy * hh);
            if !inside(x, y) {
                return Err(Error::Boundary { x, y });
            }
            mixed += wx * wy * if ox == 0.0 && oy == 0.0 { e0 } else { at(x, y)? };
        }
    }
    mixed /= hh * hh;
    hess[0][1] = mixed;
    hess[1][0] = mixed;
    Ok(FiniteDifferences {
        grad,
        hessian: hess,
    })
}

/// Finite differences with the default steps.
pub fn fd_default<E>(energy: E, l: &LatticeParams, stencil: Stencil) -> Result<FiniteDifferences>
where
    E: Fn(&LatticeParams) -> Result<f64>,
{
    fd_gradient_hessian(energy, l, (GRAD_STEP, HESS_STEP), stencil)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{potential_energy, theta, DiffuseEnergy};
    use approx::assert_relative_eq;

    const RTOL: f64 = 1e-15;

    fn gaussian_t_direct(a: f64) -> f64 {
        // F(r) = e^{-a r}; brute force over a box
        let mut t = 0.0;
        for m in -30i64..=30 {
            for n in -30i64..=30 {
                if (m, n) == (0, 0) {
                    continue;
                }
                let q = 2.0 / 3f64.sqrt() * (m * m + m * n + n * n) as f64;
                let n2 = (n * n) as f64;
                t += 4.0 / 3f64.sqrt() * n2 * (-a * (-a * q).exp()) + 4.0 / 3.0 * n2 * n2 * a * a * (-a * q).exp();
            }
        }
        t
    }

    #[test]
    fn constant_profile_has_zero_t() {
        let z = DecayEnvelope::zero();
        assert_eq!(t_coefficient(|_| 0.0, |_| 0.0, &z, &z, RTOL).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_t_is_positive_and_matches_box_sum() {
        for alpha in [0.5 * PI, PI, 2.0 * PI, 3.0] {
            let p = RadialPotential::gaussian(alpha).unwrap();
            let t = t_point(&p, RTOL).unwrap();
            assert!(t > 0.0);
            assert_relative_eq!(t, gaussian_t_direct(alpha), max_relative = 1e-12);
        }
    }

    #[test]
    fn t_matches_fd_hessian_of_theta() {
        for t in [0.5, 1.0, 2.0] {
            let p = RadialPotential::gaussian(PI * t).unwrap();
            let tc = t_point(&p, RTOL).unwrap();
            let fd = fd_default(|l| theta(l, t, RTOL), &LatticeParams::triangular(), Stencil::Central).unwrap();
            assert!(fd.grad[0].abs() < 1e-7 && fd.grad[1].abs() < 1e-7, "{fd:?}");
            for i in 0..2 {
                assert_relative_eq!(fd.hessian[i][i], tc, max_relative = 1e-4);
            }
            assert!(fd.hessian[0][1].abs() <= 1e-6 * tc.abs());
        }
    }

    #[test]
    fn h_derivatives_reduce_for_dirac() {
        let p = RadialPotential::gaussian(PI).unwrap();
        let phi = p.fourier();
        for eps in [0.0, 0.5, 3.0] {
            for r in [0.2, 1.0, 4.0] {
                let d = diffuse_h_derivatives(&p, &RadialMeasure::dirac(), eps, r).unwrap();
                assert_eq!(d, [phi.eval_derivative(r, 1), phi.eval_derivative(r, 2)]);
            }
        }
    }

    #[test]
    fn h_derivatives_match_finite_differences() {
        let p = RadialPotential::gaussian(PI).unwrap();
        let phi = p.fourier();
        for m in [RadialMeasure::uniform_disk(1.0).unwrap(), RadialMeasure::radial_gaussian(0.7).unwrap()] {
            for (eps, r) in [(0.5, 1.0), (1.3, 0.4), (2.0, 2.0)] {
                let h = |r: f64| {
                    let g = m.hankel(eps * r.sqrt());
                    phi.eval(r) * g * g
                };
                let d = diffuse_h_derivatives(&p, &m, eps, r).unwrap();
                let s = 1e-3 * r;
                let d1 = (h(r - 2.0 * s) - 8.0 * h(r - s) + 8.0 * h(r + s) - h(r + 2.0 * s)) / (12.0 * s);
                let d2 = (-h(r - 2.0 * s) + 16.0 * h(r - s) - 30.0 * h(r) + 16.0 * h(r + s) - h(r + 2.0 * s)) / (12.0 * s * s);
                assert_relative_eq!(d[0], d1, max_relative = 1e-5);
                assert_relative_eq!(d[1], d2, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn h_derivatives_converge_as_eps_vanishes() {
        let p = RadialPotential::gaussian(PI).unwrap();
        let phi = p.fourier();
        let m = RadialMeasure::uniform_disk(1.0).unwrap();
        let r = 1.0;
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let d = diffuse_h_derivatives(&p, &m, eps, r).unwrap();
            let gap = (d[1] - phi.eval_derivative(r, 2)).abs() / phi.eval_derivative(r, 2);
            assert!(gap < last && gap <= 5.0 * eps);
            last = gap;
        }
    }

    #[test]
    fn envelopes_dominate() {
        let p = RadialPotential::inverse_power(1.0, 1.5).unwrap();
        for m in [RadialMeasure::uniform_disk(1.0).unwrap(), RadialMeasure::radial_gaussian(1.0).unwrap()] {
            let ds = DiffuseStability::new(&p, &m);
            for eps in [0.3, 1.0, 2.5] {
                let (b1, b2) = ds.envelopes(eps);
                for i in 0..200 {
                    let rho = 1.0 + 0.05 * i as f64;
                    let d = ds.h_derivatives(eps, rho * rho).unwrap();
                    assert!(d[0].abs() <= b1.eval(rho) * (1.0 + 1e-12));
                    assert!(d[1].abs() <= b2.eval(rho) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn dirac_curve_is_flat() {
        let p = RadialPotential::gaussian(PI).unwrap();
        let curve = stability_curve(&p, &RadialMeasure::dirac(), &eps_grid(0.0, 2.0, 0.5).unwrap(), RTOL).unwrap();
        let t_hat = t_point(&p.fourier(), RTOL).unwrap();
        for (_, t) in &curve.points {
            assert_relative_eq!(*t, t_hat, max_relative = 1e-14);
        }
        assert!(curve.sign_changes.is_empty());
    }

    #[test]
    fn sign_of_t_ignores_mass_normalization() {
        // T is quadratic in the mass, so scaling μ by π scales T by π²
        let p = RadialPotential::gaussian(PI).unwrap();
        let m = RadialMeasure::uniform_disk(1.0).unwrap();
        let ds = DiffuseStability::new(&p, &m);
        for eps in [0.3, 0.7, 1.2] {
            let t = ds.t_coefficient(eps, RTOL).unwrap();
            let heavy = t_coefficient(
                |r| PI * PI * ds.h_derivatives(eps, r).unwrap()[0],
                |r| PI * PI * ds.h_derivatives(eps, r).unwrap()[1],
                &ds.envelopes(eps).0.times_polynomial(&[(PI * PI, 0)]),
                &ds.envelopes(eps).1.times_polynomial(&[(PI * PI, 0)]),
                RTOL,
            )
            .unwrap();
            assert_eq!(t.signum(), heavy.signum());
            assert_relative_eq!(heavy, PI * PI * t, max_relative = 1e-12);
        }
    }

    #[test]
    fn small_eps_recovers_fourier_t() {
        let p = RadialPotential::gaussian(PI).unwrap();
        let ds = DiffuseStability::new(&p, &RadialMeasure::uniform_disk(1.0).unwrap());
        let t_hat = t_point(&p.fourier(), RTOL).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let gap = (ds.t_coefficient(eps, RTOL).unwrap() - t_hat).abs();
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn diffuse_t_matches_fd_hessian() {
        let p = RadialPotential::gaussian(PI).unwrap();
        for eps in [0.3, 1.0] {
            let m = RadialMeasure::uniform_disk(1.0).unwrap().scale(eps).unwrap();
            let e = DiffuseEnergy::new(&p, &m).unwrap();
            let t = DiffuseStability::new(&p, &RadialMeasure::uniform_disk(1.0).unwrap())
                .t_coefficient(eps, RTOL)
                .unwrap();
            let fd = fd_default(|l| e.sum_over(&l.basis(), RTOL).map(|s| s.value), &LatticeParams::triangular(), Stencil::Central).unwrap();
            assert_relative_eq!(fd.hessian[0][0], t, max_relative = 1e-4);
            assert_relative_eq!(fd.hessian[1][1], t, max_relative = 1e-4);
        }
    }

    #[test]
    fn classification() {
        assert_eq!(Classification::of(1.0), Classification::Stable);
        assert_eq!(Classification::of(-1e-3), Classification::Unstable);
        assert_eq!(Classification::of(1e-10), Classification::Marginal);
    }

    #[test]
    fn fd_of_constant_and_quadratic() {
        let l = LatticeParams::new(0.2, 1.3).unwrap();
        let fd = fd_default(|_| Ok(3.0), &l, Stencil::InDomain).unwrap();
        assert_eq!(fd.grad, [0.0, 0.0]);
        assert_eq!(fd.hessian, [[0.0; 2]; 2]);
        let q = |p: &LatticeParams| Ok(2.0 * p.x * p.x + p.x * p.y + 3.0 * p.y * p.y);
        for l in [l, LatticeParams::new(0.5, 1.2).unwrap(), LatticeParams::new(0.0, 1.0).unwrap()] {
            let fd = fd_default(q, &l, Stencil::InDomain).unwrap();
            assert!((fd.grad[0] - (4.0 * l.x + l.y)).abs() < 1e-8);
            assert!((fd.grad[1] - (l.x + 6.0 * l.y)).abs() < 1e-8);
            assert!((fd.hessian[0][0] - 4.0).abs() < 1e-5);
            assert!((fd.hessian[1][1] - 6.0).abs() < 1e-5);
            assert!((fd.hessian[0][1] - 1.0).abs() < 1e-5);
        }
        // at the corner no one-sided stencil stays inside
        let err = fd_default(q, &LatticeParams::triangular(), Stencil::InDomain).unwrap_err();
        assert!(matches!(err, Error::Boundary { .. }));
    }

    #[test]
    fn theta_gradient_vanishes_at_triangle() {
        let fd = fd_default(|l| theta(l, 1.0, RTOL), &LatticeParams::triangular(), Stencil::Central).unwrap();
        assert!(fd.grad[0].abs() <= 1e-7 && fd.grad[1].abs() <= 1e-7);
        let p = RadialPotential::gaussian(PI).unwrap();
        let t = t_point(&p, RTOL).unwrap();
        let fd2 = fd_default(|l| potential_energy(&p, l, RTOL).map(|s| s.value), &LatticeParams::triangular(), Stencil::Central).unwrap();
        assert_relative_eq!(fd2.hessian[0][0], t, max_relative = 1e-4);
        let report = StabilityReport::new(t, fd2);
        assert_eq!(report.classification, Classification::Stable);
    }

    #[test]
    fn grid_parsing() {
        let g = eps_grid(0.0, 5.0, 0.01).unwrap();
        assert_eq!(g.len(), 501);
        assert!((g[500] - 5.0).abs() < 1e-12);
        assert!(eps_grid(0.0, 1.0, 0.0).is_err());
    }
}
