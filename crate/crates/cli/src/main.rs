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

//! `lattice-forge`: energies, theta functions, landscape scans, stability
//! curves and minimisation from the command line.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid input, 3 numerical
//! nonconvergence. `LATTICE_FORGE_THREADS` caps the worker pool.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lattice_forge::energy::{poisson_check, theta, DiffuseEnergy, EnergyReport, PoissonCheck};
use lattice_forge::lattice::{reduce, LatticeParams};
use lattice_forge::optimize::{
    global_minimize, grid_scan, GlobalConfig, Landscape, LocalConfig, MinimizeResult,
};
use lattice_forge::stability::{
    eps_grid, fd_default, stability_curve, DiffuseStability, StabilityReport, Stencil,
};
use lattice_forge::{Error, RadialMeasure, RadialPotential};

#[derive(Parser, Debug)]
#[command(name = "lattice-forge", version, about = "Lattice energies of extended particles in 2D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(clap::Args, Debug, Clone)]
struct Out {
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
struct Pair {
    /// `gaussian:alpha=<f>`, `invpower:a=<f>,s=<f>` or `laplace:atoms=[(t,w),...]`
    #[arg(long, value_parser = parse_potential)]
    potential: RadialPotential,
    /// `dirac`, `disk:r=<f>`, `gauss:sigma=<f>` or `profile:file=<path>`
    #[arg(long, value_parser = parse_measure, default_value = "dirac")]
    measure: RadialMeasure,
}

#[derive(clap::Args, Debug, Clone)]
struct Grid {
    #[arg(long, default_value_t = 21, value_parser = positive_count)]
    x_steps: usize,
    #[arg(long, default_value_t = 21, value_parser = positive_count)]
    y_steps: usize,
    #[arg(long, default_value_t = 4.0, value_parser = positive_real)]
    y_max: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diffuse energy of one lattice
    Energy {
        #[command(flatten)]
        pair: Pair,
        /// Lattice parameters `x,y`
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        lattice: (f64, f64),
        #[arg(long, default_value_t = 1e-14, value_parser = positive_real)]
        rtol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Lattice theta function θ_L(t)
    Theta {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        lattice: (f64, f64),
        #[arg(long, value_parser = positive_real)]
        t: f64,
        #[arg(long, default_value_t = 1e-14, value_parser = positive_real)]
        rtol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Energy landscape over the fundamental domain
    Scan {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1e-12, value_parser = positive_real)]
        rtol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Hessian coefficient T at the triangular lattice over a range of eps
    Stability {
        #[command(flatten)]
        pair: Pair,
        /// `start:stop:step`
        #[arg(long, value_parser = parse_range)]
        eps: (f64, f64, f64),
        #[arg(long, default_value_t = 1e-13, value_parser = positive_real)]
        rtol: f64,
        /// Also write the curve as SVG to this file
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Global minimisation over the fundamental domain
    Minimize {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        grid: Grid,
        /// Number of grid cells refined locally
        #[arg(long, default_value_t = 5, value_parser = positive_count)]
        seeds: usize,
        /// Simplex diameter at convergence
        #[arg(long, default_value_t = 1e-8, value_parser = positive_real)]
        tol: f64,
        #[arg(long, default_value_t = 2000, value_parser = positive_count)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-14, value_parser = positive_real)]
        rtol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Both sides of the Poisson summation formula
    PoissonCheck {
        #[arg(long, value_parser = parse_potential)]
        potential: RadialPotential,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        lattice: (f64, f64),
        /// Shift `u,v`
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,0")]
        z: (f64, f64),
        #[arg(long, default_value_t = 1e-14, value_parser = positive_real)]
        rtol: f64,
        #[command(flatten)]
        out: Out,
    },
}

fn parse_potential(s: &str) -> Result<RadialPotential, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_measure(s: &str) -> Result<RadialMeasure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_real(token: &str) -> Result<f64, String> {
    let token = token.trim();
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("cannot parse `{token}`: not a finite number"))
}

fn positive_real(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{}` must be positive", s.trim()))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("cannot parse `{}`: expected a positive integer", s.trim())),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("cannot parse `{s}`: expected `a,b`"))?;
    Ok((parse_real(a)?, parse_real(b)?))
}

fn parse_range(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("cannot parse `{s}`: expected `start:stop:step`"));
    }
    let (a, b, c) = (parse_real(parts[0])?, parse_real(parts[1])?, parse_real(parts[2])?);
    if !(c > 0.0) || b < a || a < 0.0 {
        return Err(format!("`{s}` needs 0 ≤ start ≤ stop and step > 0"));
    }
    Ok((a, b, c))
}

/// Maps `(x, y)` with `y > 0` to its reduced form in the fundamental domain.
fn lattice_from(xy: (f64, f64)) -> Result<LatticeParams, Error> {
    if let Ok(l) = LatticeParams::new(xy.0, xy.1) {
        return Ok(l);
    }
    let raw = LatticeParams::unreduced(xy.0, xy.1)?;
    Ok(reduce(&raw.basis())?.params)
}

#[derive(Serialize)]
struct LatticeOut {
    x: f64,
    y: f64,
}

impl From<&LatticeParams> for LatticeOut {
    fn from(l: &LatticeParams) -> Self {
        Self { x: l.x, y: l.y }
    }
}

#[derive(Serialize)]
struct EnergyOut {
    command: &'static str,
    potential: String,
    measure: String,
    lattice: LatticeOut,
    report: EnergyReport,
}

#[derive(Serialize)]
struct ThetaOut {
    command: &'static str,
    lattice: LatticeOut,
    t: f64,
    value: f64,
}

#[derive(Serialize)]
struct ScanOut<'a> {
    command: &'static str,
    potential: String,
    measure: String,
    landscape: &'a Landscape,
}

#[derive(Serialize)]
struct CurvePoint {
    eps: f64,
    t: f64,
}

#[derive(Serialize)]
struct StabilityOut {
    command: &'static str,
    potential: String,
    measure: String,
    points: Vec<CurvePoint>,
    sign_changes: Vec<f64>,
    /// Full report at the first grid point.
    at_start: StabilityReport,
}

#[derive(Serialize)]
struct MinimizeOut {
    command: &'static str,
    potential: String,
    measure: String,
    best: MinimizeResult,
    candidates: Vec<MinimizeResult>,
    grid_argmin: (f64, f64, f64),
    boundary_margin: f64,
}

#[derive(Serialize)]
struct PoissonOut {
    command: &'static str,
    potential: String,
    lattice: LatticeOut,
    z: (f64, f64),
    check: PoissonCheck,
}

enum Failure {
    Input(String),
    Numeric(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse() || matches!(e, Error::Domain(_) | Error::DegenerateBasis { .. }) {
            Failure::Input(e.to_string())
        } else if e.is_nonconvergence() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn unsupported(format: Format, command: &str) -> Failure {
    Failure::Input(format!("{command} cannot write {format:?} output"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Energy {
            pair,
            lattice,
            rtol,
            out,
        } => {
            let l = lattice_from(lattice)?;
            let report = DiffuseEnergy::new(&pair.potential, &pair.measure)?.energy(&l, rtol)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => output::json(&EnergyOut {
                    command: "energy",
                    potential: pair.potential.to_string(),
                    measure: pair.measure.to_string(),
                    lattice: (&l).into(),
                    report,
                }),
                Format::Csv => output::csv(
                    &["x", "y", "value", "lattice_part", "constant_part", "cutoff_radius", "tail_bound", "terms_used"],
                    &[vec![
                        l.x,
                        l.y,
                        report.value,
                        report.lattice_part,
                        report.constant_part,
                        report.cutoff_radius,
                        report.tail_bound,
                        report.terms_used as f64,
                    ]],
                ),
                f => return Err(unsupported(f, "energy")),
            };
            emit(&text, &out.output)
        }
        Command::Theta {
            lattice,
            t,
            rtol,
            out,
        } => {
            let l = lattice_from(lattice)?;
            let value = theta(&l, t, rtol)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => output::json(&ThetaOut {
                    command: "theta",
                    lattice: (&l).into(),
                    t,
                    value,
                }),
                Format::Csv => output::csv(&["x", "y", "t", "value"], &[vec![l.x, l.y, t, value]]),
                f => return Err(unsupported(f, "theta")),
            };
            emit(&text, &out.output)
        }
        Command::Scan {
            pair,
            grid,
            rtol,
            out,
        } => {
            let e = DiffuseEnergy::new(&pair.potential, &pair.measure)?;
            let c = e.constant_part();
            let land = grid_scan(
                |l| e.lattice_part(l, rtol).map(|s| s.value + c),
                grid.x_steps,
                grid.y_steps,
                grid.y_max,
            )?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => output::csv(
                    &["x", "y", "energy"],
                    &land.grid.iter().map(|p| vec![p.x, p.y, p.energy]).collect::<Vec<_>>(),
                ),
                Format::Json => output::json(&ScanOut {
                    command: "scan",
                    potential: pair.potential.to_string(),
                    measure: pair.measure.to_string(),
                    landscape: &land,
                }),
                f => return Err(unsupported(f, "scan")),
            };
            emit(&text, &out.output)
        }
        Command::Stability {
            pair,
            eps,
            rtol,
            svg,
            out,
        } => {
            let grid = eps_grid(eps.0, eps.1, eps.2)?;
            let curve = stability_curve(&pair.potential, &pair.measure, &grid, rtol)?;
            let points: Vec<(f64, f64)> = curve.points.clone();
            if let Some(path) = &svg {
                emit(&output::svg_line_chart(&points, "eps", "T"), &Some(path.clone()))?;
            }
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => output::csv(
                    &["eps", "T"],
                    &points.iter().map(|&(e, t)| vec![e, t]).collect::<Vec<_>>(),
                ),
                Format::Svg => output::svg_line_chart(&points, "eps", "T"),
                Format::Json => {
                    let eps0 = grid[0];
                    let e = DiffuseEnergy::new(&pair.potential, &pair.measure.scale(eps0)?)?;
                    let fd = fd_default(
                        |l| e.sum_over(&l.basis(), rtol.min(1e-14)).map(|s| s.value),
                        &LatticeParams::triangular(),
                        Stencil::Central,
                    )?;
                    let t0 = DiffuseStability::new(&pair.potential, &pair.measure).t_coefficient(eps0, rtol)?;
                    output::json(&StabilityOut {
                        command: "stability",
                        potential: pair.potential.to_string(),
                        measure: pair.measure.to_string(),
                        points: points.iter().map(|&(eps, t)| CurvePoint { eps, t }).collect(),
                        sign_changes: curve.sign_changes.clone(),
                        at_start: StabilityReport::new(t0, fd),
                    })
                }
            };
            for e in &curve.sign_changes {
                eprintln!("sign change of T at eps ≈ {e:.4}");
            }
            emit(&text, &out.output)
        }
        Command::Minimize {
            pair,
            grid,
            seeds,
            tol,
            max_iterations,
            rtol,
            out,
        } => {
            let e = DiffuseEnergy::new(&pair.potential, &pair.measure)?;
            let c = e.constant_part();
            let config = GlobalConfig {
                x_steps: grid.x_steps.max(2),
                y_steps: grid.y_steps.max(2),
                y_max: grid.y_max,
                seeds,
                local: LocalConfig {
                    tol,
                    max_iterations,
                    ..LocalConfig::default()
                },
            };
            let r = global_minimize(|l| e.lattice_part(l, rtol).map(|s| s.value), &config)?;
            let shift = |m: MinimizeResult| MinimizeResult {
                energy: m.energy + c,
                ..m
            };
            let best = shift(r.best);
            let candidates: Vec<MinimizeResult> = r.candidates.iter().copied().map(shift).collect();
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => output::json(&MinimizeOut {
                    command: "minimize",
                    potential: pair.potential.to_string(),
                    measure: pair.measure.to_string(),
                    best,
                    candidates,
                    grid_argmin: (r.landscape.argmin.x, r.landscape.argmin.y, r.landscape.argmin.energy + c),
                    boundary_margin: r.landscape.boundary_margin,
                }),
                Format::Csv => output::csv(
                    &["x", "y", "energy", "dist_to_triangular", "iterations", "converged"],
                    &std::iter::once(best)
                        .chain(candidates)
                        .map(|m| {
                            vec![
                                m.point.0,
                                m.point.1,
                                m.energy,
                                m.dist_to_triangular,
                                m.iterations as f64,
                                if m.converged { 1.0 } else { 0.0 },
                            ]
                        })
                        .collect::<Vec<_>>(),
                ),
                f => return Err(unsupported(f, "minimize")),
            };
            emit(&text, &out.output)
        }
        Command::PoissonCheck {
            potential,
            lattice,
            z,
            rtol,
            out,
        } => {
            let l = lattice_from(lattice)?;
            let check = poisson_check(&potential, &l, [z.0, z.1], rtol)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => output::json(&PoissonOut {
                    command: "poisson-check",
                    potential: potential.to_string(),
                    lattice: (&l).into(),
                    z,
                    check,
                }),
                Format::Csv => output::csv(&["lhs", "rhs", "diff"], &[vec![check.lhs, check.rhs, check.diff]]),
                f => return Err(unsupported(f, "poisson-check")),
            };
            emit(&text, &out.output)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LATTICE_FORGE_THREADS") else {
        return Ok(());
    };
    let n = positive_count(&raw).map_err(|e| Failure::Input(format!("LATTICE_FORGE_THREADS: {e}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
