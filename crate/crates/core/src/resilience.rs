//! Border errors of rectangular loops: the exact area shift, the sensitivity
//! surface, and Monte Carlo gate errors under random vertex noise.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controls::ControlPoint;
use crate::error::{Error, Result};
use crate::holonomy::{sigma_area, transport, CalibrationRecord, ConnectionSource, Loop, Plane, POINT_TOL};
use crate::linalg::{self, linear_fit};

/// Smallest Monte Carlo run accepted.
pub const MIN_TRIALS: usize = 100;
/// Largest fraction of clamped trials before a run is rejected.
pub const MAX_CLAMP_RATE: f64 = 0.1;

/// `Σ(x + ε₁, r1 + ε₂) − Σ(x, r1)` for the rectangle `[0, x] × [0, r1]`; exact.
pub fn delta_sigma(x: f64, r1: f64, eps1: f64, eps2: f64) -> f64 {
    eps1 * (1.0 - (-2.0 * (r1 + eps2)).exp()) - x * (-2.0 * r1).exp() * (-2.0 * eps2).exp_m1()
}

/// `∂ΔΣ/∂ε₁` at zero error.
pub fn d_eps1(r1: f64) -> f64 {
    -(-2.0 * r1).exp_m1()
}

/// `∂ΔΣ/∂ε₂` at zero error.
pub fn d_eps2(x: f64, r1: f64) -> f64 {
    2.0 * x * (-2.0 * r1).exp()
}

/// `(∂ΔΣ/∂ε₁) / (∂ΔΣ/∂ε₂) = (e^{2r1} − 1) / 2x`.
pub fn derivative_ratio(x: f64, r1: f64) -> f64 {
    (2.0 * r1).exp_m1() / (2.0 * x)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub eps1: f64,
    pub eps2: f64,
    pub delta_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySurface {
    pub x: f64,
    pub r1: f64,
    /// Row-major over `eps1`, then `eps2`.
    pub points: Vec<SurfacePoint>,
    pub d_eps1: f64,
    pub d_eps2: f64,
    pub derivative_ratio: f64,
    /// Smallest spread of `ΔΣ` along `ε₁` over the `ε₂` columns.
    pub eps1_influence: f64,
    /// Largest spread of `ΔΣ` along `ε₂` over the `ε₁` rows.
    pub eps2_influence: f64,
}

impl SensitivitySurface {
    pub fn influence_ratio(&self) -> f64 {
        self.eps1_influence / self.eps2_influence
    }
}

pub fn sensitivity_surface(x: f64, r1: f64, eps1_grid: &[f64], eps2_grid: &[f64]) -> Result<SensitivitySurface> {
    if eps1_grid.is_empty() || eps2_grid.is_empty() {
        return Err(Error::InvalidArgument("sensitivity grids must be nonempty".into()));
    }
    let mut points = Vec::with_capacity(eps1_grid.len() * eps2_grid.len());
    for &e1 in eps1_grid {
        for &e2 in eps2_grid {
            points.push(SurfacePoint { eps1: e1, eps2: e2, delta_sigma: delta_sigma(x, r1, e1, e2) });
        }
    }
    let spread = |it: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let n2 = eps2_grid.len();
    let eps1_influence = (0..n2)
        .map(|j| spread(&mut (0..eps1_grid.len()).map(|i| points[i * n2 + j].delta_sigma)))
        .fold(f64::INFINITY, f64::min);
    let eps2_influence = (0..eps1_grid.len())
        .map(|i| spread(&mut points[i * n2..(i + 1) * n2].iter().map(|p| p.delta_sigma)))
        .fold(0.0, f64::max);
    Ok(SensitivitySurface {
        x,
        r1,
        points,
        d_eps1: d_eps1(r1),
        d_eps2: d_eps2(x, r1),
        derivative_ratio: derivative_ratio(x, r1),
        eps1_influence,
        eps2_influence,
    })
}

/// Border errors: `ε₁` acts on the plane's first axis, `ε₂` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ErrorModel {
    /// Far borders shifted by `(eps1, eps2)`.
    Deterministic { eps1: f64, eps2: f64 },
    /// Independent normal noise on every nonzero in-plane vertex coordinate.
    Gaussian { sigma1: f64, sigma2: f64, seed: u64 },
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ErrorModel::Deterministic { eps1, eps2 } => eps1.is_finite() && eps2.is_finite(),
            ErrorModel::Gaussian { sigma1, sigma2, .. } => {
                sigma1.is_finite() && sigma2.is_finite() && sigma1 >= 0.0 && sigma2 >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("{self:?}")))
        }
    }
}

/// A perturbed loop and how many coordinates were clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub path: Loop,
    pub clamped: usize,
}

/// Squeezing coordinates cannot go negative; other axes are unconstrained.
fn clamps(plane: Plane, axis: usize) -> bool {
    match plane {
        Plane::CI | Plane::CII => axis == 1,
        _ => true,
    }
}

fn axis_aligned_extent(lp: &Loop) -> Result<((f64, f64), (f64, f64))> {
    let pts = lp.plane_coords()?;
    let (mut u, mut v) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
    for p in &pts {
        u = (u.0.min(p.0), u.1.max(p.0));
        v = (v.0.min(p.1), v.1.max(p.1));
    }
    let on_edge = |x: f64, lo: f64, hi: f64| (x - lo).abs() <= POINT_TOL || (x - hi).abs() <= POINT_TOL;
    if !pts.iter().all(|p| on_edge(p.0, u.0, u.1) && on_edge(p.1, v.0, v.1)) || pts.len() != 5 {
        return Err(Error::InvalidArgument("deterministic border errors need an axis-aligned rectangle".into()));
    }
    Ok((u, v))
}

/// Applies `model` to `lp`. The Gaussian draw uses stream `trial` of the seeded generator.
pub fn perturbed_loop(lp: &Loop, model: &ErrorModel, trial: u64) -> Result<Perturbed> {
    model.validate()?;
    let plane = lp.plane();
    let pts = lp.plane_coords()?;
    let mut clamped = 0;
    let mut clamp = |value: f64, axis: usize| {
        if clamps(plane, axis) && value < 0.0 {
            clamped += 1;
            0.0
        } else {
            value
        }
    };
    let moved: Vec<(f64, f64)> = match *model {
        ErrorModel::Deterministic { eps1, eps2 } => {
            let (u, v) = axis_aligned_extent(lp)?;
            pts.iter()
                .map(|p| {
                    let a = if (p.0 - u.1).abs() <= POINT_TOL { p.0 + eps1 } else { p.0 };
                    let b = if (p.1 - v.1).abs() <= POINT_TOL { p.1 + eps2 } else { p.1 };
                    (clamp(a, 0), clamp(b, 1))
                })
                .collect()
        }
        ErrorModel::Gaussian { sigma1, sigma2, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let n1 = Normal::new(0.0, sigma1).map_err(|e| Error::InvalidModel(format!("{e}")))?;
            let n2 = Normal::new(0.0, sigma2).map_err(|e| Error::InvalidModel(format!("{e}")))?;
            let mut out: Vec<(f64, f64)> = pts[..pts.len() - 1]
                .iter()
                .map(|p| {
                    let (d1, d2) = (n1.sample(&mut rng), n2.sample(&mut rng));
                    let a = if p.0 != 0.0 { p.0 + d1 } else { p.0 };
                    let b = if p.1 != 0.0 { p.1 + d2 } else { p.1 };
                    (clamp(a, 0), clamp(b, 1))
                })
                .collect();
            out.push(out[0]);
            out
        }
    };
    let vertices: Vec<ControlPoint> = moved.iter().map(|&(a, b)| plane.lift(a, b)).collect::<Result<_>>()?;
    Ok(Perturbed { path: Loop::new(vertices, plane)?, clamped })
}

/// How gates of perturbed loops are obtained.
#[derive(Debug, Clone, Copy)]
pub enum GatePath<'a> {
    /// Area law from a calibration record.
    Fast(&'a CalibrationRecord),
    /// Full transport with the given step count.
    Slow { steps: usize },
}

/// Gate distance between the perturbed and nominal loop for one trial.
/// Returns the distance and whether any coordinate was clamped.
pub fn trial_distance(lp: &Loop, model: &ErrorModel, trial: u64, path: GatePath<'_>) -> Result<(f64, bool)> {
    let p = perturbed_loop(lp, model, trial)?;
    let d = match path {
        GatePath::Fast(cal) => {
            if cal.plane != lp.plane() {
                return Err(Error::InvalidArgument(format!(
                    "calibration for {} used on a {} loop",
                    cal.plane,
                    lp.plane()
                )));
            }
            let (a, b) = (cal.gate(sigma_area(lp)?), cal.gate(sigma_area(&p.path)?));
            linalg::gate_distance(&a.unitary, &b.unitary)
        }
        GatePath::Slow { steps } => {
            let a = transport(lp, steps, ConnectionSource::Analytic)?;
            let b = transport(&p.path, steps, ConnectionSource::Analytic)?;
            linalg::gate_distance(&a.unitary, &b.unitary)
        }
    };
    Ok((d, p.clamped > 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub clamp_rate: f64,
}

impl MonteCarloStats {
    /// Summarizes per-trial `(distance, clamped)` results.
    pub fn from_trials(results: &[(f64, bool)]) -> Result<Self> {
        let n = results.len();
        if n < MIN_TRIALS {
            return Err(Error::InvalidArgument(format!("{n} trials, at least {MIN_TRIALS} needed")));
        }
        let clamp_rate = results.iter().filter(|r| r.1).count() as f64 / n as f64;
        if clamp_rate > MAX_CLAMP_RATE {
            return Err(Error::ClampRate { rate: clamp_rate });
        }
        let mean = results.iter().map(|r| r.0).sum::<f64>() / n as f64;
        let var = results.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(MonteCarloStats { mean, std: var.sqrt(), trials: n, clamp_rate })
    }
}

/// Runs `trials` seeded trials sequentially.
pub fn monte_carlo_gate_error(lp: &Loop, model: &ErrorModel, trials: usize, path: GatePath<'_>) -> Result<MonteCarloStats> {
    if !matches!(model, ErrorModel::Gaussian { .. }) {
        return Err(Error::InvalidModel("Monte Carlo needs a gaussian error model".into()));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("{trials} trials, at least {MIN_TRIALS} needed")));
    }
    let results = (0..trials as u64).map(|t| trial_distance(lp, model, t, path)).collect::<Result<Vec<_>>>()?;
    MonteCarloStats::from_trials(&results)
}

/// Mean gate error against the squeezing edge, with its log-linear fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub edges: Vec<f64>,
    pub stats: Vec<MonteCarloStats>,
    /// Slope of `ln(mean)` against the edge.
    pub slope: f64,
    pub monotone: bool,
}

impl DecayFit {
    pub fn new(edges: Vec<f64>, stats: Vec<MonteCarloStats>) -> Result<Self> {
        if edges.len() != stats.len() || edges.len() < 2 {
            return Err(Error::InvalidArgument("decay fit needs matching edges and stats, at least two".into()));
        }
        if stats.iter().any(|s| s.mean <= 0.0) {
            return Err(Error::Numerical("zero mean gate error has no logarithm".into()));
        }
        let y: Vec<f64> = stats.iter().map(|s| s.mean.ln()).collect();
        let slope = linear_fit(&edges, &y).0;
        let monotone = stats.windows(2).all(|w| w[1].mean < w[0].mean);
        Ok(DecayFit { edges, stats, slope, monotone })
    }
}

/// Rectangle `[0, x] × [0, edge]` on the first plane.
pub fn rectangle(x: f64, edge: f64) -> Result<Loop> {
    Loop::rectangle(Plane::CI, (0.0, x), (0.0, edge))
}
