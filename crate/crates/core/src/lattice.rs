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

//! Unit-density Bravais lattices in the plane.
//!
//! Every lattice of unit covolume is, up to rotation and reflection,
//! `L(x, y) = Z(1/√y, 0) ⊕ Z(x/√y, √y)` for a unique `(x, y)` in the
//! fundamental domain `D = {0 ≤ x ≤ 1/2, y > 0, x² + y² ≥ 1}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when testing membership of `D`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Relative determinant threshold below which a basis counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Default upper limit on the number of points a shell enumeration may hold.
pub const DEFAULT_POINT_CAP: usize = 10_000_000;

pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis2D {
    pub u1: [f64; 2],
    pub u2: [f64; 2],
}

impl Basis2D {
    /// Builds a basis, rejecting (numerically) linearly dependent vectors.
    pub fn new(u1: [f64; 2], u2: [f64; 2]) -> Result<Self> {
        let b = Self { u1, u2 };
        let det = b.det();
        let threshold = DEGENERACY_TOL * norm(u1) * norm(u2);
        if !det.is_finite() || det.abs() <= threshold || threshold == 0.0 {
            return Err(Error::DegenerateBasis { det, threshold });
        }
        Ok(b)
    }

    pub fn det(&self) -> f64 {
        self.u1[0] * self.u2[1] - self.u1[1] * self.u2[0]
    }

    pub fn covolume(&self) -> f64 {
        self.det().abs()
    }

    pub fn gram(&self) -> [[f64; 2]; 2] {
        let g12 = dot(self.u1, self.u2);
        [[dot(self.u1, self.u1), g12], [g12, dot(self.u2, self.u2)]]
    }

    /// Lattice vector `m·u1 + n·u2`.
    pub fn point(&self, m: i64, n: i64) -> [f64; 2] {
        let (m, n) = (m as f64, n as f64);
        [
            m * self.u1[0] + n * self.u2[0],
            m * self.u1[1] + n * self.u2[1],
        ]
    }

    /// Inverse-transpose basis: `u_i · v_j = δ_ij`.
    pub fn dual(&self) -> Basis2D {
        let d = self.det();
        Basis2D {
            u1: [self.u2[1] / d, -self.u2[0] / d],
            u2: [-self.u1[1] / d, self.u1[0] / d],
        }
    }

    pub fn rotated(&self, angle: f64) -> Basis2D {
        Basis2D {
            u1: rotate(self.u1, angle),
            u2: rotate(self.u2, angle),
        }
    }

    pub fn scaled(&self, factor: f64) -> Basis2D {
        Basis2D {
            u1: [factor * self.u1[0], factor * self.u1[1]],
            u2: [factor * self.u2[0], factor * self.u2[1]],
        }
    }

    /// Half the longer diagonal of the fundamental parallelogram: every point
    /// of the centred cell lies within this distance of its lattice point.
    pub fn cell_radius(&self) -> f64 {
        let s = [self.u1[0] + self.u2[0], self.u1[1] + self.u2[1]];
        let d = [self.u1[0] - self.u2[0], self.u1[1] - self.u2[1]];
        0.5 * norm(s).max(norm(d))
    }

    /// Integer coordinates of `v` in this basis, if it is a lattice vector.
    pub fn coordinates(&self, v: [f64; 2], tol: f64) -> Option<[i64; 2]> {
        let dual = self.dual();
        let m = dot(v, dual.u1);
        let n = dot(v, dual.u2);
        let (mr, nr) = (m.round(), n.round());
        ((m - mr).abs() <= tol && (n - nr).abs() <= tol).then_some([mr as i64, nr as i64])
    }
}

/// A lattice `√scale · L(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
}

impl LatticeParams {
    /// Unit-density lattice with `(x, y) ∈ D`.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !in_domain(x, y) {
            return Err(Error::Domain(format!(
                "({x}, {y}) is outside the fundamental domain"
            )));
        }
        Ok(Self { x, y, scale: 1.0 })
    }

    /// Same formula as [`LatticeParams::new`] without the `D` check; only
    /// `y > 0` is required. Used for finite-difference stencils that step
    /// across the boundary of `D`, where `L(x, y)` is still a valid lattice.
    pub fn unreduced(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("({x}, {y}) needs finite x and y > 0")));
        }
        Ok(Self { x, y, scale: 1.0 })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("scale {scale} must be positive")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn square() -> Self {
        Self {
            x: 0.0,
            y: 1.0,
            scale: 1.0,
        }
    }

    /// The triangular lattice at `(1/2, √3/2)`.
    pub fn triangular() -> Self {
        Self {
            x: 0.5,
            y: 3f64.sqrt() / 2.0,
            scale: 1.0,
        }
    }

    pub fn in_domain(&self) -> bool {
        in_domain(self.x, self.y)
    }

    /// Basis `√scale · ((1/√y, 0), (x/√y, √y))`.
    pub fn basis(&self) -> Basis2D {
        let sy = self.y.sqrt();
        let b = Basis2D {
            u1: [1.0 / sy, 0.0],
            u2: [self.x / sy, sy],
        };
        if self.scale == 1.0 {
            b
        } else {
            b.scaled(self.scale.sqrt())
        }
    }

    pub fn xy(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

fn in_domain(x: f64, y: f64) -> bool {
    x.is_finite()
        && y.is_finite()
        && y > 0.0
        && x >= -DOMAIN_TOL
        && x <= 0.5 + DOMAIN_TOL
        && x * x + y * y >= 1.0 - DOMAIN_TOL
}

/// Unit-covolume basis `((1/√y, 0), (x/√y, √y))` for `(x, y) ∈ D`.
pub fn from_params(x: f64, y: f64) -> Result<Basis2D> {
    Ok(LatticeParams::new(x, y)?.basis())
}

/// Outcome of [`reduce`]: the input lattice equals
/// `rotate(rotation) ∘ [reflect y ↦ -y if reflected] (params.basis())`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub params: LatticeParams,
    pub rotation: f64,
    pub reflected: bool,
}

impl Reduction {
    /// A basis of the original lattice rebuilt from the normal form.
    pub fn reconstruct(&self) -> Basis2D {
        let mut b = self.params.basis();
        if self.reflected {
            b.u1[1] = -b.u1[1];
            b.u2[1] = -b.u2[1];
        }
        b.rotated(self.rotation)
    }
}

/// Lagrange–Gauss reduction followed by normalisation into `D`.
pub fn reduce(b: &Basis2D) -> Result<Reduction> {
    let b = Basis2D::new(b.u1, b.u2)?;
    let (mut b1, mut b2) = (b.u1, b.u2);
    if dot(b1, b1) > dot(b2, b2) {
        std::mem::swap(&mut b1, &mut b2);
    }
    for _ in 0..10_000 {
        let mu = (dot(b1, b2) / dot(b1, b1)).round();
        b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
        if dot(b2, b2) < dot(b1, b1) {
            std::mem::swap(&mut b1, &mut b2);
        } else {
            break;
        }
    }
    // Equal lengths: prefer the vector with the smaller polar angle so the
    // choice does not depend on input order.
    let (n1, n2) = (dot(b1, b1), dot(b2, b2));
    if (n1 - n2).abs() <= 4.0 * f64::EPSILON * n1 && angle_key(b2) < angle_key(b1) {
        std::mem::swap(&mut b1, &mut b2);
    }

    let mut rotation = b1[1].atan2(b1[0]);
    let a = norm(b1);
    let r2 = rotate(b2, -rotation);
    let (mut p, mut q) = (r2[0], r2[1]);
    let mut reflected = false;
    match (p < 0.0, q < 0.0) {
        (false, false) => {}
        (true, true) => {
            rotation += PI;
            p = -p;
            q = -q;
        }
        (false, true) => {
            reflected = true;
            q = -q;
        }
        (true, false) => {
            // diag(-1, 1) = rot(π) ∘ diag(1, -1)
            rotation += PI;
            reflected = true;
            p = -p;
        }
    }
    let rotation = rotation.rem_euclid(2.0 * PI);
    let covolume = a * q;
    let mut x = p / a;
    let y = q / a;
    if x > 0.5 {
        x = 0.5;
    }
    if !in_domain(x, y) {
        return Err(Error::Domain(format!(
            "reduction produced ({x}, {y}) outside the fundamental domain"
        )));
    }
    Ok(Reduction {
        params: LatticeParams {
            x,
            y,
            scale: covolume,
        },
        rotation,
        reflected,
    })
}

fn angle_key(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]).rem_euclid(2.0 * PI)
}

/// The dual lattice, reduced back into `D`.
pub fn dual(l: &LatticeParams) -> Result<LatticeParams> {
    Ok(reduce(&l.basis().dual())?.params)
}

/// Distance of two lattices in `D`, identifying `x` with `x + k` and with
/// `-x + k` (translation and reflection of the parameter).
pub fn metric(l1: &LatticeParams, l2: &LatticeParams) -> f64 {
    let dx = [-1.0, 0.0, 1.0]
        .into_iter()
        .flat_map(|k| [(l1.x - l2.x - k).abs(), (l1.x + l2.x - k).abs()])
        .fold(f64::INFINITY, f64::min);
    dx.hypot(l1.y - l2.y)
}

/// Distance with period 1/2 in `x`, i.e. `inf_k |x1 − x2 − k/2|`.
pub fn metric_paper(l1: &LatticeParams, l2: &LatticeParams) -> f64 {
    let d = l1.x - l2.x;
    let dx = (d - 0.5 * (2.0 * d).round()).abs();
    dx.hypot(l1.y - l2.y)
}

/// Lattice vectors with norm at most `cutoff`, sorted by norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellEnumeration {
    pub points: Vec<[f64; 2]>,
    /// Integer coordinates of each point in the generating basis.
    pub coeffs: Vec<[i64; 2]>,
    pub cutoff: f64,
    pub count: usize,
}

/// All nonzero vectors of `l` with `|p| ≤ radius`.
pub fn enumerate_shells(l: &LatticeParams, radius: f64) -> Result<ShellEnumeration> {
    enumerate_points(&l.basis(), radius, [0.0, 0.0], false, DEFAULT_POINT_CAP)
}

/// Points `m·u1 + n·u2 + shift` with norm at most `radius`. With
/// `include_origin = false` the unshifted origin term is dropped.
pub fn enumerate_points(
    basis: &Basis2D,
    radius: f64,
    shift: [f64; 2],
    include_origin: bool,
    cap: usize,
) -> Result<ShellEnumeration> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("cutoff radius {radius} must be positive")));
    }
    let covolume = basis.covolume();
    let reach = radius + basis.cell_radius();
    let estimate = PI * reach * reach / covolume;
    if estimate > cap as f64 {
        return Err(Error::Resource {
            radius,
            estimate: estimate.min(usize::MAX as f64) as usize,
            cap,
        });
    }
    let dual = basis.dual();
    let range = |d: [f64; 2]| {
        let centre = -dot(shift, d);
        let half = radius * norm(d);
        ((centre - half).ceil() as i64, (centre + half).floor() as i64)
    };
    let (m_lo, m_hi) = range(dual.u1);
    let (n_lo, n_hi) = range(dual.u2);
    let r2max = radius * radius;
    let mut found: Vec<(f64, [i64; 2], [f64; 2])> = Vec::new();
    for m in m_lo..=m_hi {
        for n in n_lo..=n_hi {
            if !include_origin && m == 0 && n == 0 && shift == [0.0, 0.0] {
                continue;
            }
            let v = basis.point(m, n);
            let p = [v[0] + shift[0], v[1] + shift[1]];
            let r2 = dot(p, p);
            if r2 <= r2max {
                found.push((r2, [m, n], p));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let count = found.len();
    let (coeffs, points) = found.into_iter().map(|(_, c, p)| (c, p)).unzip();
    Ok(ShellEnumeration {
        points,
        coeffs,
        cutoff: radius,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SQRT3_2: f64 = 0.866_025_403_784_438_6;

    fn gram_of_triangle() -> [[f64; 2]; 2] {
        let c = 2.0 / 3f64.sqrt();
        [[c, 0.5 * c], [0.5 * c, c]]
    }

    fn brute_force(b: &Basis2D, radius: f64, k: i64) -> Vec<[i64; 2]> {
        let mut out = Vec::new();
        for m in -k..=k {
            for n in -k..=k {
                if (m, n) != (0, 0) && norm(b.point(m, n)) <= radius {
                    out.push([m, n]);
                }
            }
        }
        out.sort();
        out
    }

    /// Shortest nonzero vector by scanning a box.
    fn shortest(b: &Basis2D) -> f64 {
        let mut best = f64::INFINITY;
        for m in -20..=20 {
            for n in -20..=20 {
                if (m, n) != (0, 0) {
                    best = best.min(norm(b.point(m, n)));
                }
            }
        }
        best
    }

    #[test]
    fn from_params_examples() {
        let b = from_params(0.0, 1.0).unwrap();
        assert_eq!(b.u1, [1.0, 0.0]);
        assert_eq!(b.u2, [0.0, 1.0]);

        let b = from_params(0.5, 2.0).unwrap();
        let s2 = 2f64.sqrt();
        assert_relative_eq!(b.u1[0], 1.0 / s2, epsilon = 1e-15);
        assert_relative_eq!(b.u2[0], 1.0 / (2.0 * s2), epsilon = 1e-15);
        assert_relative_eq!(b.u2[1], s2, epsilon = 1e-15);
        assert_relative_eq!(b.covolume(), 1.0, epsilon = 1e-15);

        // Gram matrix of the triangular basis ((1,0),(1/2,√3/2))·√(2/√3)
        let g = from_params(0.5, SQRT3_2).unwrap().gram();
        let t = gram_of_triangle();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(g[i][j], t[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn from_params_rejects_outside_domain() {
        assert!(from_params(0.6, 1.0).is_err());
        assert!(from_params(0.2, 0.5).is_err());
        assert!(from_params(-0.1, 2.0).is_err());
        // boundary is inclusive
        assert!(from_params(0.5, SQRT3_2).is_ok());
        assert!(from_params(0.0, 1.0).is_ok());
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(&Basis2D::new([1.0, 0.0], [0.0, 1.0]).unwrap()).unwrap();
        assert_eq!((r.params.x, r.params.y, r.params.scale), (0.0, 1.0, 1.0));

        let b = Basis2D::new([2.0, 0.0], [0.0, 0.5]).unwrap();
        let r = reduce(&b).unwrap();
        assert_relative_eq!(r.params.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.params.y, 4.0, epsilon = 1e-14);
        assert_relative_eq!(r.params.scale, 1.0, epsilon = 1e-15);
        // shortest vector 1/2 = 1/√y
        assert_relative_eq!(shortest(&b), 1.0 / r.params.y.sqrt(), epsilon = 1e-14);

        let c = (2.0 / 3f64.sqrt()).sqrt();
        let tri = Basis2D::new([c, 0.0], [0.5 * c, SQRT3_2 * c]).unwrap();
        let r = reduce(&tri).unwrap();
        assert_relative_eq!(r.params.x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.params.y, SQRT3_2, epsilon = 1e-14);
        assert_relative_eq!(r.params.scale, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reduce_rejects_degenerate() {
        assert!(matches!(
            reduce(&Basis2D {
                u1: [1.0, 2.0],
                u2: [2.0, 4.0 + 1e-14]
            }),
            Err(Error::DegenerateBasis { .. })
        ));
    }

    #[test]
    fn dual_examples() {
        let sq = dual(&LatticeParams::square()).unwrap();
        assert_relative_eq!(sq.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(sq.y, 1.0, epsilon = 1e-15);
        let t = dual(&LatticeParams::triangular()).unwrap();
        assert_relative_eq!(t.x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(t.y, SQRT3_2, epsilon = 1e-14);
        assert_relative_eq!(t.scale, 1.0, epsilon = 1e-14);
        let r = dual(&LatticeParams::new(0.0, 4.0).unwrap()).unwrap();
        assert_relative_eq!(r.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.y, 4.0, epsilon = 1e-13);
    }

    #[test]
    fn metric_examples() {
        let a = LatticeParams::new(0.0, 1.0).unwrap();
        let b = LatticeParams::new(0.0, 2.0).unwrap();
        assert_eq!(metric_paper(&a, &b), 1.0);
        assert_eq!(metric(&a, &a), 0.0);
        let c = LatticeParams::new(0.1, 1.0).unwrap();
        let d = LatticeParams::new(0.45, 1.0).unwrap();
        assert_relative_eq!(metric_paper(&c, &d), 0.15, epsilon = 1e-15);
        assert_relative_eq!(metric(&c, &d), 0.35, epsilon = 1e-15);
        // the period-1/2 variant cannot tell the square lattice from (1/2, 1)
        let e = LatticeParams::new(0.5, 1.0).unwrap();
        assert_eq!(metric_paper(&a, &e), 0.0);
        assert_eq!(metric(&a, &e), 0.5);
    }

    #[test]
    fn shell_examples() {
        let sq = LatticeParams::square();
        assert_eq!(enumerate_shells(&sq, 1.0).unwrap().count, 4);
        let s = enumerate_shells(&sq, 1.5).unwrap();
        assert_eq!(s.count, 8);
        assert_eq!(s.count, brute_force(&sq.basis(), 1.5, 2).len());

        let t = enumerate_shells(&LatticeParams::triangular(), 1.1).unwrap();
        assert_eq!(t.count, 6);
        let first = (2.0 / 3f64.sqrt()).sqrt();
        for p in &t.points {
            assert_relative_eq!(norm(*p), first, epsilon = 1e-14);
        }
    }

    #[test]
    fn shell_cap_is_enforced() {
        let b = LatticeParams::square().basis();
        assert!(matches!(
            enumerate_points(&b, 100.0, [0.0, 0.0], false, 1000),
            Err(Error::Resource { .. })
        ));
    }

    fn domain_point() -> impl Strategy<Value = (f64, f64)> {
        (0.0..=0.5f64, 0.0..3.0f64).prop_map(|(x, t)| (x, (1.0 - x * x).sqrt() + t))
    }

    proptest! {
        #[test]
        fn reduce_inverts_from_params((x, y) in domain_point(), angle in 0.0..std::f64::consts::TAU, s in 0.2..5.0f64) {
            let b = from_params(x, y).unwrap().scaled(s.sqrt()).rotated(angle);
            let r = reduce(&b).unwrap();
            // points on the arc or on x = 1/2 have exact duplicates; their
            // normal form is still the same point of D
            prop_assert!((r.params.x - x).abs() < 1e-10);
            prop_assert!((r.params.y - y).abs() < 1e-10);
            prop_assert!((r.params.scale - s).abs() < 1e-12 * s);
        }

        #[test]
        fn reduce_preserves_lattice(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, d in -3.0..3.0f64) {
            prop_assume!((a * d - b * c).abs() > 0.05);
            let basis = Basis2D::new([a, b], [c, d]).unwrap();
            let r = reduce(&basis).unwrap();
            prop_assert!(r.params.in_domain());
            let rebuilt = r.reconstruct();
            // each basis expresses the other with integer coefficients
            for v in [rebuilt.u1, rebuilt.u2] {
                prop_assert!(basis.coordinates(v, 1e-8).is_some());
            }
            for v in [basis.u1, basis.u2] {
                prop_assert!(rebuilt.coordinates(v, 1e-8).is_some());
            }
            prop_assert!((rebuilt.covolume() - basis.covolume()).abs() < 1e-9 * basis.covolume());
        }

        #[test]
        fn dual_is_an_involution((x, y) in domain_point()) {
            let l = LatticeParams::new(x, y).unwrap();
            let back = dual(&dual(&l).unwrap()).unwrap();
            prop_assert!(metric(&l, &back) < 1e-12);
            prop_assert!((back.scale - 1.0).abs() < 1e-12);
        }

        #[test]
        fn covolume_is_one((x, y) in domain_point()) {
            prop_assert!((from_params(x, y).unwrap().covolume() - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn metric_axioms(p in domain_point(), q in domain_point(), r in domain_point()) {
            let a = LatticeParams::new(p.0, p.1).unwrap();
            let b = LatticeParams::new(q.0, q.1).unwrap();
            let c = LatticeParams::new(r.0, r.1).unwrap();
            prop_assert_eq!(metric(&a, &b), metric(&b, &a));
            prop_assert!(metric(&a, &c) <= metric(&a, &b) + metric(&b, &c) + 1e-15);
            prop_assert!(metric(&a, &b) > 0.0 || (p.0 - q.0).abs() < 1e-15 && p.1 == q.1);
        }

        #[test]
        fn shells_match_brute_force((x, y) in domain_point(), radius in 0.3..5.0f64) {
            let l = LatticeParams::new(x, y).unwrap();
            let s = enumerate_shells(&l, radius).unwrap();
            let mut got = s.coeffs.clone();
            got.sort();
            prop_assert_eq!(&got, &brute_force(&l.basis(), radius, 40));
            // closed under negation
            for c in &s.coeffs {
                prop_assert!(s.coeffs.contains(&[-c[0], -c[1]]));
            }
        }
    }
}
