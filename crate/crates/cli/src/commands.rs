//! The experiment commands behind the CLI subcommands.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use holonomy_core::adiabatic::{evolve, Ramp, ScalingRow, ScalingStudy, Schedule};
use holonomy_core::controls::{ControlPoint, Coord};
use holonomy_core::conventions::{matrix_rows, MatrixRows};
use holonomy_core::fock::FockSpace;
use holonomy_core::geometry::{one_qubit_truncation, two_qubit_truncation, ConnectionOracle};
use holonomy_core::holonomy::{
    calibrate, closed_form_gate, sigma_area, transport, ConnectionSource, HolonomyResult, Loop, Method, Plane,
};
use holonomy_core::jc::{measurement_pulse, readout_phase, readout_probabilities, JcParams, PairParams, TrapModel};
use holonomy_core::linalg::{c, gate_distance, C64};
use holonomy_core::resilience::{
    derivative_ratio, rectangle, sensitivity_surface, trial_distance, DecayFit, ErrorModel, GatePath,
    MonteCarloStats,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{logical_state, probe_loops};
use crate::config::{AdiabaticConfig, Config, GateConfig, Rectangle, Source};
use crate::loopfile::LoopFile;
use crate::output::write_csv;
use crate::UNITS;

/// Bad input from the user, as opposed to a failed computation.
#[derive(Debug, thiserror::Error)]
#[error("{0:#}")]
pub struct UsageError(pub anyhow::Error);

pub fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    UsageError(e.into()).into()
}

fn rectangle_loop(r: &Rectangle) -> anyhow::Result<Loop> {
    Loop::rectangle(r.plane, (r.u[0], r.u[1]), (r.v[0], r.v[1])).map_err(usage)
}

fn read_loop(path: &std::path::Path) -> anyhow::Result<Loop> {
    LoopFile::read(path).and_then(|f| f.to_loop()).map_err(usage)
}

/// Largest squeezing magnitude visited by `lp`.
fn squeeze_cap(lp: &Loop) -> f64 {
    let coords: &[Coord] = if lp.qubits() == 1 { &[Coord::R1] } else { &[Coord::R2, Coord::R3] };
    lp.vertices()
        .iter()
        .flat_map(|p| coords.iter().map(move |&k| p.get(k).unwrap_or(0.0).abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateMatrix {
    pub method: Method,
    pub unitary: MatrixRows,
    pub residual_nonunitarity: f64,
    pub leakage: f64,
}

impl From<&HolonomyResult> for GateMatrix {
    fn from(h: &HolonomyResult) -> Self {
        GateMatrix {
            method: h.method,
            unitary: matrix_rows(&h.unitary),
            residual_nonunitarity: h.residual_nonunitarity,
            leakage: h.leakage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutput {
    pub units: String,
    pub plane: Plane,
    pub sigma: Option<f64>,
    /// The gate reported as the answer.
    pub primary: GateMatrix,
    pub transport: Option<GateMatrix>,
    pub calibrated: Option<GateMatrix>,
    /// Published closed form.
    pub closed_form: Option<GateMatrix>,
    pub generator_label: Option<String>,
    pub kappa: Option<f64>,
    pub transport_vs_calibrated: Option<f64>,
    pub closed_form_vs_calibrated: Option<f64>,
}

pub fn run_gate(cfg: &GateConfig) -> anyhow::Result<GateOutput> {
    let lp = match (&cfg.loop_file, &cfg.rectangle) {
        (Some(p), _) => Some(read_loop(p)?),
        (None, Some(r)) => Some(rectangle_loop(r)?),
        (None, None) => None,
    };
    let (plane, sigma) = match &lp {
        Some(l) if l.plane() == Plane::Free => (Plane::Free, None),
        Some(l) => (l.plane(), Some(sigma_area(l)?)),
        None => {
            let plane = cfg.plane.ok_or_else(|| usage(anyhow!("gate needs --loop, a rectangle, or --plane with --sigma")))?;
            if plane == Plane::Free {
                return Err(usage(anyhow!("--plane must be one of C_I, C_II, C_III, C_IV")));
            }
            let sigma = cfg.sigma.ok_or_else(|| usage(anyhow!("--plane {plane} needs --sigma")))?;
            if !sigma.is_finite() {
                return Err(usage(anyhow!("--sigma must be finite")));
            }
            (plane, Some(sigma))
        }
    };

    let transported = match &lp {
        Some(l) => Some(match cfg.source {
            Source::Analytic => transport(l, cfg.steps, ConnectionSource::Analytic)?,
            Source::Numeric => {
                let cap = squeeze_cap(l);
                let n = if l.qubits() == 1 { one_qubit_truncation(cap) } else { two_qubit_truncation(cap) };
                let oracle = ConnectionOracle::new(l.qubits(), n, holonomy_core::geometry::DEFAULT_STEP)?;
                transport(l, cfg.steps, ConnectionSource::Numeric(&oracle))?
            }
        }),
        None => None,
    };
    let (calibrated, record) = match sigma {
        Some(s) => {
            let rec = calibrate(plane, &probe_loops(plane), cfg.calibration_steps, ConnectionSource::Analytic)?;
            (Some(rec.gate(s)), Some(rec))
        }
        None => (None, None),
    };
    let closed = match sigma {
        Some(s) => Some(closed_form_gate(plane, s)?),
        None => None,
    };
    let primary = if cfg.closed_form {
        closed.as_ref().ok_or_else(|| usage(anyhow!("--closed-form needs a tagged plane")))?
    } else {
        transported.as_ref().or(calibrated.as_ref()).expect("a loop or a plane was given")
    };
    let dist = |a: &Option<HolonomyResult>, b: &Option<HolonomyResult>| match (a, b) {
        (Some(a), Some(b)) => Some(gate_distance(&a.unitary, &b.unitary)),
        _ => None,
    };
    Ok(GateOutput {
        units: UNITS.into(),
        plane,
        sigma,
        primary: primary.into(),
        transport_vs_calibrated: dist(&transported, &calibrated),
        closed_form_vs_calibrated: dist(&closed, &calibrated),
        transport: transported.as_ref().map(Into::into),
        calibrated: calibrated.as_ref().map(Into::into),
        closed_form: closed.as_ref().map(Into::into),
        generator_label: record.as_ref().map(|r| r.generator_label.clone()),
        kappa: record.as_ref().map(|r| r.kappa),
    })
}

fn format_matrix(m: &MatrixRows) -> String {
    m.iter()
        .map(|row| {
            row.iter().map(|z| format!("{:>+.10}{:+.10}i", z[0], z[1])).collect::<Vec<_>>().join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

impl GateOutput {
    pub fn text(&self) -> String {
        let mut s = format!("# units: {UNITS}\nplane: {}\n", self.plane);
        if let Some(sig) = self.sigma {
            s += &format!("sigma: {sig:.12}\n");
        }
        if let (Some(g), Some(k)) = (&self.generator_label, self.kappa) {
            s += &format!("calibrated law: exp(({g}) * {k:.12} * sigma)\n");
        }
        s += &format!("gate ({:?}):\n{}\n", self.primary.method, format_matrix(&self.primary.unitary));
        for (name, g) in [("transport", &self.transport), ("calibrated", &self.calibrated), ("closed form", &self.closed_form)]
        {
            if let Some(g) = g {
                s += &format!("{name}:\n{}\n", format_matrix(&g.unitary));
            }
        }
        if let Some(d) = self.transport_vs_calibrated {
            s += &format!("distance transport vs calibrated: {d:.3e}\n");
        }
        if let Some(d) = self.closed_form_vs_calibrated {
            s += &format!("distance closed form vs calibrated: {d:.3e}\n");
        }
        s += &format!("leakage: {:.3e}\n", self.primary.leakage);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticRow {
    pub total_time: f64,
    pub ramp: Ramp,
    pub n_max: usize,
    pub steps: usize,
    pub leakage: f64,
    pub distance: f64,
    pub norm_drift: f64,
    pub energy_deviation: f64,
    pub truncation_population: f64,
    pub over_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticOutput {
    pub units: String,
    pub plane: Plane,
    pub static_loop: bool,
    pub rows: Vec<AdiabaticRow>,
    pub slope: Option<f64>,
    pub monotone: bool,
    pub max_slope: f64,
    pub leakage_budget: f64,
    pub passed: bool,
    pub csv: PathBuf,
}

/// Distance below which the static loop counts as the identity.
pub const STATIC_TOL: f64 = 1e-10;

pub fn adiabatic_loop(cfg: &AdiabaticConfig) -> anyhow::Result<Loop> {
    let lp = match &cfg.loop_file {
        Some(p) => read_loop(p)?,
        None => rectangle_loop(&cfg.rectangle)?,
    };
    if cfg.static_loop {
        return Ok(Loop::stationary(ControlPoint::origin(lp.qubits()), 2)?);
    }
    Ok(lp)
}

pub fn run_adiabatic(cfg: &Config) -> anyhow::Result<AdiabaticOutput> {
    let a = &cfg.adiabatic;
    let lp = adiabatic_loop(a)?;
    let (model, n_max) = match lp.qubits() {
        1 => (TrapModel::Single(JcParams::resonant(cfg.nu)), a.n_max),
        _ => (TrapModel::Pair(PairParams::resonant(cfg.nu)), a.n_max_pair),
    };
    let reports = a
        .times
        .par_iter()
        .map(|&t| {
            let s = Schedule::new(lp.clone(), t, a.ramp)?;
            // per-row budget check below; evolve itself never aborts
            evolve(&s, &model, n_max, 1.0)
        })
        .collect::<holonomy_core::Result<Vec<_>>>()?;
    let mut rows: Vec<AdiabaticRow> = reports
        .iter()
        .map(|r| AdiabaticRow {
            total_time: r.total_time,
            ramp: a.ramp,
            n_max,
            steps: r.steps,
            leakage: r.leakage,
            distance: r.distance_to_transport,
            norm_drift: r.norm_drift,
            energy_deviation: r.energy_deviation,
            truncation_population: r.truncation_population,
            over_budget: r.leakage > a.leakage_budget,
        })
        .collect();
    rows.sort_by(|x, y| x.total_time.total_cmp(&y.total_time));
    let (slope, monotone) = if rows.len() >= 3 {
        let study = ScalingStudy::from_rows(a.ramp, reports.iter().map(ScalingRow::from).collect())?;
        (study.slope, study.monotone)
    } else {
        (None, rows.windows(2).all(|w| w[1].distance < w[0].distance))
    };
    let passed = if a.static_loop {
        rows.iter().all(|r| r.distance < STATIC_TOL)
    } else {
        monotone
            && slope.is_some_and(|s| s <= a.max_slope)
            && rows.last().is_some_and(|r| !r.over_budget)
    };
    let csv = cfg.output_path(&a.csv_file);
    let header = vec![format!(
        "plane={} static={} ramp={:?} budget={}",
        lp.plane(),
        a.static_loop,
        a.ramp,
        a.leakage_budget
    )];
    let slope_text = slope.map_or("none".to_string(), |s| format!("{s:.6}"));
    let footer = vec![format!("slope={slope_text} monotone={monotone} pass={passed}")];
    write_csv(&csv, &rows, &header, &footer)?;
    Ok(AdiabaticOutput {
        units: UNITS.into(),
        plane: lp.plane(),
        static_loop: a.static_loop,
        rows,
        slope,
        monotone,
        max_slope: a.max_slope,
        leakage_budget: a.leakage_budget,
        passed,
        csv,
    })
}

impl AdiabaticOutput {
    pub fn text(&self) -> String {
        let mut s = format!("# units: {UNITS}\n{:>8} {:>12} {:>12} {:>12}\n", "T", "distance", "leakage", "budget");
        for r in &self.rows {
            let flag = if r.over_budget { "EXCEEDED" } else { "ok" };
            s += &format!("{:>8} {:>12.4e} {:>12.4e} {:>12}\n", r.total_time, r.distance, r.leakage, flag);
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.static_loop {
            s += &format!("{verdict}: static loop, distance < {STATIC_TOL:e}\n");
        } else {
            let slope = self.slope.map_or("none".into(), |v| format!("{v:.4}"));
            s += &format!(
                "slope: {slope} (required <= {})\nmonotone: {}\n{verdict}: monotone improvement\n",
                self.max_slope, self.monotone
            );
        }
        s += &format!("csv: {}\n", self.csv.display());
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub r1_edge: f64,
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub seed: u64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub clamp_rate: f64,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceOutput {
    pub units: String,
    pub x: f64,
    pub r1: f64,
    pub derivative_ratio: f64,
    pub influence_ratio: f64,
    pub monte_carlo: Vec<MonteCarloRow>,
    pub decay_slope: Option<f64>,
    pub decay_monotone: Option<bool>,
    pub warnings: Vec<String>,
    pub surface_csv: PathBuf,
    pub monte_carlo_csv: PathBuf,
}

/// Summary statistics that tolerate a high clamp rate, with a warning.
fn lenient_stats(results: &[(f64, bool)], warnings: &mut Vec<String>, edge: f64) -> anyhow::Result<MonteCarloStats> {
    match MonteCarloStats::from_trials(results) {
        Ok(s) => Ok(s),
        Err(holonomy_core::Error::ClampRate { rate }) => {
            warnings.push(format!("edge {edge}: clamp rate {rate:.3} above 0.1"));
            let n = results.len() as f64;
            let mean = results.iter().map(|r| r.0).sum::<f64>() / n;
            let var = results.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(MonteCarloStats { mean, std: var.sqrt(), trials: results.len(), clamp_rate: rate })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run_resilience(cfg: &Config) -> anyhow::Result<ResilienceOutput> {
    let r = &cfg.resilience;
    let surface = sensitivity_surface(r.x, r.r1, &r.eps1_grid.values(), &r.eps2_grid.values()).map_err(usage)?;
    let surface_csv = cfg.output_path(&r.surface_file);
    let ratio = derivative_ratio(r.x, r.r1);
    write_csv(
        &surface_csv,
        &surface.points,
        &[format!("x={} r1={} derivative_ratio={ratio:.12}", r.x, r.r1)],
        &[],
    )?;

    let model = ErrorModel::Gaussian { sigma1: r.sigma1, sigma2: r.sigma2, seed: r.seed };
    model.validate().map_err(usage)?;
    let record = if r.slow {
        None
    } else {
        Some(calibrate(Plane::CI, &probe_loops(Plane::CI), 400, ConnectionSource::Analytic)?)
    };
    let path = match &record {
        Some(rec) => GatePath::Fast(rec),
        None => GatePath::Slow { steps: r.slow_steps },
    };
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    let mut stats = Vec::new();
    for &edge in &r.edges {
        let lp = rectangle(r.x, edge).map_err(usage)?;
        let results = (0..r.trials as u64)
            .into_par_iter()
            .map(|t| trial_distance(&lp, &model, t, path))
            .collect::<holonomy_core::Result<Vec<_>>>()?;
        let s = lenient_stats(&results, &mut warnings, edge)?;
        rows.push(MonteCarloRow {
            r1_edge: edge,
            x: r.x,
            mean: s.mean,
            std: s.std,
            trials: s.trials,
            seed: r.seed,
            sigma1: r.sigma1,
            sigma2: r.sigma2,
            clamp_rate: s.clamp_rate,
            path: if r.slow { "transport".into() } else { "calibrated".into() },
        });
        stats.push(s);
    }
    let fit = if r.edges.len() >= 2 { DecayFit::new(r.edges.clone(), stats).ok() } else { None };
    let monte_carlo_csv = cfg.output_path(&r.monte_carlo_file);
    let footer = match &fit {
        Some(f) => vec![format!("slope={:.6} monotone={}", f.slope, f.monotone)],
        None => vec!["slope=none".into()],
    };
    write_csv(&monte_carlo_csv, &rows, &[], &footer)?;
    Ok(ResilienceOutput {
        units: UNITS.into(),
        x: r.x,
        r1: r.r1,
        derivative_ratio: ratio,
        influence_ratio: surface.influence_ratio(),
        monte_carlo: rows,
        decay_slope: fit.as_ref().map(|f| f.slope),
        decay_monotone: fit.as_ref().map(|f| f.monotone),
        warnings,
        surface_csv,
        monte_carlo_csv,
    })
}

impl ResilienceOutput {
    pub fn text(&self) -> String {
        let mut s = format!(
            "# units: {UNITS}\nderivative ratio at x={}, r1={}: {:.6}\ninfluence ratio: {:.3}\n",
            self.x, self.r1, self.derivative_ratio, self.influence_ratio
        );
        s += &format!("{:>8} {:>12} {:>12} {:>8}\n", "r1_edge", "mean", "std", "clamp");
        for r in &self.monte_carlo {
            s += &format!("{:>8} {:>12.4e} {:>12.4e} {:>8.3}\n", r.r1_edge, r.mean, r.std, r.clamp_rate);
        }
        if let Some(k) = self.decay_slope {
            s += &format!("decay slope: {k:.4}\n");
        }
        for w in &self.warnings {
            s += &format!("warning: {w}\n");
        }
        s += &format!("csv: {}, {}\n", self.surface_csv.display(), self.monte_carlo_csv.display());
        s
    }
}

/// Logical state named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Logical0,
    Logical1,
    /// Unnormalized amplitudes on `|g,0⟩` and `|0,−⟩`.
    Superposition(f64, f64),
}

fn parse_amplitude(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        return Some(parse_amplitude(n)? / parse_amplitude(d)?);
    }
    let root = s.strip_prefix('√').or_else(|| s.strip_prefix("sqrt"));
    match root {
        Some(r) => {
            let r = r.trim().trim_start_matches('(').trim_end_matches(')');
            r.parse::<f64>().ok().filter(|v| *v >= 0.0).map(f64::sqrt)
        }
        None => s.parse().ok(),
    }
}

impl std::str::FromStr for StateSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let t = s.trim();
        match t {
            "logical0" => return Ok(StateSpec::Logical0),
            "logical1" => return Ok(StateSpec::Logical1),
            _ => {}
        }
        let inner = t
            .strip_prefix("superposition(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| anyhow!("unknown state {s:?}; use logical0, logical1 or superposition(a, b)"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        let [a, b] = parts.as_slice() else {
            bail!("superposition takes two amplitudes, got {:?}", inner);
        };
        let a = parse_amplitude(a).ok_or_else(|| anyhow!("bad amplitude {a:?}"))?;
        let b = parse_amplitude(b).ok_or_else(|| anyhow!("bad amplitude {b:?}"))?;
        if !(a.is_finite() && b.is_finite()) || a.hypot(b) == 0.0 {
            bail!("superposition amplitudes must be finite and not both zero");
        }
        Ok(StateSpec::Superposition(a, b))
    }
}

impl StateSpec {
    /// Normalized amplitudes.
    pub fn amplitudes(self) -> (C64, C64) {
        let (a, b) = match self {
            StateSpec::Logical0 => (1.0, 0.0),
            StateSpec::Logical1 => (0.0, 1.0),
            StateSpec::Superposition(a, b) => (a, b),
        };
        let n = a.hypot(b);
        (c(a / n, 0.0), c(b / n, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOutput {
    pub units: String,
    pub state: String,
    pub phi: f64,
    pub before: (f64, f64),
    pub after: (f64, f64),
}

pub fn run_measure(state: &str, n_max: usize) -> anyhow::Result<MeasureOutput> {
    let spec: StateSpec = state.parse().map_err(usage)?;
    let space = FockSpace::single_ion(n_max).map_err(usage)?;
    let (a, b) = spec.amplitudes();
    let psi = logical_state(&space, a, b)?;
    let phi = readout_phase();
    let after = measurement_pulse(phi, &space)?.apply(&psi);
    Ok(MeasureOutput {
        units: UNITS.into(),
        state: state.into(),
        phi,
        before: readout_probabilities(&space, &psi)?,
        after: readout_probabilities(&space, &after).context("after pulse")?,
    })
}

impl MeasureOutput {
    pub fn text(&self) -> String {
        format!(
            "# units: {UNITS}\nstate: {}\nphi*: {:.12}\nbefore: p_g = {:.12}, p_e = {:.12}\nafter:  p_g = {:.12}, p_e = {:.12}\n",
            self.state, self.phi, self.before.0, self.before.1, self.after.0, self.after.1
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_specs() {
        assert_eq!("logical0".parse::<StateSpec>().unwrap(), StateSpec::Logical0);
        let StateSpec::Superposition(a, b) = "superposition(1/√2, 1/sqrt(2))".parse().unwrap() else { panic!() };
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && (a - b).abs() < 1e-15);
        assert!("superposition(0,0)".parse::<StateSpec>().is_err());
        assert!("plus".parse::<StateSpec>().is_err());
    }
}
