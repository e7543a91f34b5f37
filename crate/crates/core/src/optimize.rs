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

//! Minimisation of lattice energies over the fundamental domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{metric, LatticeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub energy: f64,
}

impl GridPoint {
    /// Lower energy first, then lexicographic `(x, y)`.
    fn better_than(&self, other: &GridPoint) -> bool {
        self.energy
            .total_cmp(&other.energy)
            .then(self.x.total_cmp(&other.x))
            .then(self.y.total_cmp(&other.y))
            .is_lt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    /// Row-major: one row per `x`, `y` increasing within a row.
    pub grid: Vec<GridPoint>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: (usize, usize),
    pub argmin: GridPoint,
    /// `y_max − argmin.y`; small values mean the cut at `y_max` matters.
    pub boundary_margin: f64,
}

/// Evaluates `E` on `x_i` uniform in `[0, 1/2]` and, for each `x_i`, `y_j`
/// uniform in `[√(1 − x_i²), y_max]`.
pub fn grid_scan<E>(energy: E, x_steps: usize, y_steps: usize, y_max: f64) -> Result<Landscape>
where
    E: Fn(&LatticeParams) -> Result<f64> + Sync,
{
    if x_steps < 2 || y_steps < 2 {
        return Err(Error::Domain("grid needs at least 2 steps per axis".into()));
    }
    if !(y_max > 1.0) {
        return Err(Error::Domain(format!("y_max must exceed 1, got {y_max}")));
    }
    let cells: Vec<(f64, f64)> = (0..x_steps)
        .flat_map(|i| {
            let x = 0.5 * i as f64 / (x_steps - 1) as f64;
            let y_min = y_floor(x);
            (0..y_steps).map(move |j| (x, y_min + (y_max - y_min) * j as f64 / (y_steps - 1) as f64))
        })
        .collect();
    let grid = cells
        .par_iter()
        .map(|&(x, y)| {
            let l = LatticeParams::new(x, y)?;
            Ok(GridPoint {
                x,
                y,
                energy: energy(&l)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmin = grid
        .iter()
        .copied()
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
        .expect("grid is nonempty");
    Ok(Landscape {
        x_range: (0.0, 0.5),
        y_range: (1.0, y_max),
        resolution: (x_steps, y_steps),
        boundary_margin: y_max - argmin.y,
        argmin,
        grid,
    })
}

/// Lower edge `√(1 − x²)` of the domain.
fn y_floor(x: f64) -> f64 {
    (1.0 - x * x).sqrt()
}

/// Nearest point of the fundamental domain.
pub fn project(x: f64, y: f64) -> (f64, f64) {
    let x = x.clamp(0.0, 0.5);
    (x, y.max(y_floor(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    /// Convergence threshold on the simplex diameter.
    pub tol: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 2000,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub point: (f64, f64),
    pub energy: f64,
    /// Distance to the triangular lattice in the lattice metric.
    pub dist_to_triangular: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead on the fundamental domain; every trial point is projected
/// back onto the domain. After convergence the search restarts from the
/// best vertex with a small simplex until a restart no longer moves it.
pub fn local_minimize<E>(energy: E, start: (f64, f64), config: &LocalConfig) -> Result<MinimizeResult>
where
    E: Fn(&LatticeParams) -> Result<f64>,
{
    let start_l = LatticeParams::new(start.0, start.1)?;
    let f = |p: (f64, f64)| -> Result<f64> { energy(&LatticeParams::new(p.0, p.1)?) };
    let mut best = (start, energy(&start_l)?);
    let mut iterations = 0;
    let mut step = config.initial_step;
    loop {
        let (point, value, used) = nelder_mead(&f, best.0, best.1, step, config, iterations)?;
        iterations += used;
        let moved = dist(point, best.0);
        let improved = value < best.1;
        if improved {
            best = (point, value);
        }
        if !improved || moved <= config.tol {
            break;
        }
        step = (10.0 * config.tol).max(moved);
    }
    let l = LatticeParams::new(best.0 .0, best.0 .1)?;
    Ok(MinimizeResult {
        point: best.0,
        energy: best.1,
        dist_to_triangular: metric(&l, &LatticeParams::triangular()),
        iterations,
        converged: true,
    })
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

type Vertex = ((f64, f64), f64);

fn nelder_mead<F>(
    f: &F,
    start: (f64, f64),
    f_start: f64,
    step: f64,
    config: &LocalConfig,
    used_before: usize,
) -> Result<((f64, f64), f64, usize)>
where
    F: Fn((f64, f64)) -> Result<f64>,
{
    let mut simplex: Vec<Vertex> = vec![(start, f_start)];
    for dir in [(1.0, 0.0), (0.0, 1.0)] {
        let mut p = project(start.0 + step * dir.0, start.1 + step * dir.1);
        if dist(p, start) < 0.5 * step || simplex.iter().any(|v| dist(v.0, p) < 0.5 * step) {
            p = project(start.0 - step * dir.0, start.1 - step * dir.1);
        }
        simplex.push((p, f(p)?));
    }
    let mut iterations = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0 .0.total_cmp(&b.0 .0)).then(a.0 .1.total_cmp(&b.0 .1)));
        let diameter = dist(simplex[0].0, simplex[1].0)
            .max(dist(simplex[0].0, simplex[2].0))
            .max(dist(simplex[1].0, simplex[2].0));
        if diameter < config.tol {
            return Ok((simplex[0].0, simplex[0].1, iterations));
        }
        if used_before + iterations >= config.max_iterations {
            return Err(Error::MaxIterations {
                iterations: used_before + iterations,
            });
        }
        iterations += 1;
        let c = (
            0.5 * (simplex[0].0 .0 + simplex[1].0 .0),
            0.5 * (simplex[0].0 .1 + simplex[1].0 .1),
        );
        let worst = simplex[2];
        let along = |t: f64| project(c.0 + t * (c.0 - worst.0 .0), c.1 + t * (c.1 - worst.0 .1));
        let r = along(1.0);
        let fr = f(r)?;
        if fr < simplex[0].1 {
            let e = along(2.0);
            let fe = f(e)?;
            simplex[2] = if fe < fr { (e, fe) } else { (r, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (r, fr);
            continue;
        }
        let (k, fk_target) = if fr < worst.1 { (along(0.5), fr) } else { (along(-0.5), worst.1) };
        let fk = f(k)?;
        if fk < fk_target {
            simplex[2] = (k, fk);
            continue;
        }
        let b = simplex[0].0;
        for v in simplex.iter_mut().skip(1) {
            let p = project(b.0 + 0.5 * (v.0 .0 - b.0), b.1 + 0.5 * (v.0 .1 - b.1));
            *v = (p, f(p)?);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    pub x_steps: usize,
    pub y_steps: usize,
    pub y_max: f64,
    /// Number of best grid cells refined locally.
    pub seeds: usize,
    pub local: LocalConfig,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            x_steps: 21,
            y_steps: 21,
            y_max: 4.0,
            seeds: 5,
            local: LocalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub best: MinimizeResult,
    /// Refined result of every seed, in seed order.
    pub candidates: Vec<MinimizeResult>,
    pub landscape: Landscape,
}

/// Grid scan followed by local refinement of the best cells.
pub fn global_minimize<E>(energy: E, config: &GlobalConfig) -> Result<GlobalResult>
where
    E: Fn(&LatticeParams) -> Result<f64> + Sync,
{
    let landscape = grid_scan(&energy, config.x_steps, config.y_steps, config.y_max)?;
    let mut ranked = landscape.grid.clone();
    ranked.sort_by(|a, b| {
        if a.better_than(b) {
            std::cmp::Ordering::Less
        } else if b.better_than(a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    ranked.truncate(config.seeds.max(1));
    let candidates = ranked
        .par_iter()
        .map(|seed| local_minimize(&energy, (seed.x, seed.y), &config.local))
        .collect::<Result<Vec<_>>>()?;
    let best = candidates
        .iter()
        .copied()
        .reduce(|a, b| {
            let key = |r: &MinimizeResult| GridPoint {
                x: r.point.0,
                y: r.point.1,
                energy: r.energy,
            };
            if key(&b).better_than(&key(&a)) {
                b
            } else {
                a
            }
        })
        .expect("at least one seed");
    Ok(GlobalResult {
        best,
        candidates,
        landscape,
    })
}
