//! Time-dependent Schrödinger evolution along a slowly traversed loop.
//!
//! Each step applies `U(σ_mid) exp(−i(H − E)dt) U(σ_mid)†`, exact for the
//! frozen midpoint Hamiltonian and therefore unitary.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::controls::{ControlFrame, ControlPoint};
use crate::error::{Error, Result};
use crate::fock::top_level_population;
use crate::holonomy::{transport, ConnectionSource, HolonomyResult, Loop, Method};
use crate::jc::{logical_basis, TrapModel};
use crate::linalg::{self, linear_fit, CMatrix, CVector};

/// Largest `r1` reached by a one-qubit schedule.
pub const R1_CAP: f64 = 1.0;
/// Fewest Fock levels for one-qubit evolution.
pub const MIN_LEVELS_ONE: usize = 150;
/// Largest `r2`, `r3` reached by a two-qubit schedule.
pub const R2_CAP: f64 = 0.5;
/// Fewest Fock levels per mode for two-qubit evolution.
pub const MIN_LEVELS_TWO: usize = 25;
/// Steps per unit time below which a schedule is rejected.
pub const MIN_STEPS_PER_TIME: f64 = 10.0;
/// Steps per unit time used by [`Schedule::new`].
pub const DEFAULT_STEPS_PER_TIME: f64 = 20.0;
/// Largest norm drift of a propagated state.
pub const NORM_TOL: f64 = 1e-8;
/// Default leakage budget.
pub const LEAKAGE_BUDGET: f64 = 0.02;

/// Speed profile along each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Uniform,
    /// `sin²` speed profile, at rest at every vertex.
    #[default]
    Smooth,
}

impl Ramp {
    /// Fraction of a segment covered after a fraction `tau` of its time.
    pub fn progress(self, tau: f64) -> f64 {
        match self {
            Ramp::Uniform => tau,
            Ramp::Smooth => {
                let w = 2.0 * core::f64::consts::PI;
                tau - (w * tau).sin() / w
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    lp: Loop,
    total_time: f64,
    steps: usize,
    ramp: Ramp,
    /// Time allotted to each segment, proportional to its length.
    segment_times: Vec<f64>,
}

impl Schedule {
    /// `DEFAULT_STEPS_PER_TIME · T` steps.
    pub fn new(lp: Loop, total_time: f64, ramp: Ramp) -> Result<Self> {
        let steps = (DEFAULT_STEPS_PER_TIME * total_time).ceil().max(1.0) as usize;
        Self::with_steps(lp, total_time, steps, ramp)
    }

    pub fn with_steps(lp: Loop, total_time: f64, steps: usize, ramp: Ramp) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidSchedule(format!("total time must be positive, got {total_time}")));
        }
        if (steps as f64) < MIN_STEPS_PER_TIME * total_time {
            return Err(Error::InvalidSchedule(format!(
                "{steps} steps cannot resolve T = {total_time}; need at least {}",
                (MIN_STEPS_PER_TIME * total_time).ceil()
            )));
        }
        let lens: Vec<f64> = lp
            .segments()
            .map(|(a, b)| a.delta(&b).map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt()))
            .collect::<Result<_>>()?;
        let total: f64 = lens.iter().sum();
        let segment_times = if total == 0.0 {
            let n = lens.len() as f64;
            lens.iter().map(|_| total_time / n).collect()
        } else {
            lens.iter().map(|l| total_time * l / total).collect()
        };
        Ok(Schedule { lp, total_time, steps, ramp, segment_times })
    }

    pub fn path(&self) -> &Loop {
        &self.lp
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn ramp(&self) -> Ramp {
        self.ramp
    }

    /// Control point at time `t ∈ [0, T]`.
    pub fn position(&self, t: f64) -> Result<ControlPoint> {
        let mut start = 0.0;
        let verts = self.lp.vertices();
        for (k, dt) in self.segment_times.iter().enumerate() {
            if t <= start + dt || k + 1 == self.segment_times.len() {
                let tau = if *dt > 0.0 { ((t - start) / dt).clamp(0.0, 1.0) } else { 1.0 };
                return verts[k].lerp(&verts[k + 1], self.ramp.progress(tau));
            }
            start += dt;
        }
        Ok(verts[0])
    }

    fn caps(&self) -> Result<()> {
        for v in self.lp.vertices() {
            match v {
                ControlPoint::One(p) if p.r1.abs() > R1_CAP => {
                    return Err(Error::InvalidSchedule(format!("r1 = {} above the cap {R1_CAP}", p.r1)))
                }
                ControlPoint::Two(p) if p.r2.abs().max(p.r3.abs()) > R2_CAP => {
                    return Err(Error::InvalidSchedule(format!(
                        "two-mode amplitudes ({}, {}) above the cap {R2_CAP}",
                        p.r2, p.r3
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Outcome of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticReport {
    /// Overlaps `⟨U(σ_end) i | ψ_j(T)⟩`.
    pub holonomy: HolonomyResult,
    /// `1 − min_j ‖P ψ_j(T)‖²`.
    pub leakage: f64,
    pub distance_to_transport: f64,
    pub norm_drift: f64,
    /// Largest `|⟨ψ|H(σ(t)) − E|ψ⟩|` over sampled times.
    pub energy_deviation: f64,
    /// Largest population on the two highest Fock levels over sampled times.
    pub truncation_population: f64,
    pub total_time: f64,
    pub steps: usize,
}

/// Evolves every logical ket of `model` along `schedule` with `n_max` Fock
/// levels per mode. Fails when leakage exceeds `budget`.
pub fn evolve(schedule: &Schedule, model: &TrapModel, n_max: usize, budget: f64) -> Result<AdiabaticReport> {
    model.require_degeneracy()?;
    if schedule.path().qubits() != model.qubits() {
        return Err(Error::SpaceMismatch("loop and model disagree on the number of qubits".into()));
    }
    schedule.caps()?;
    let min_levels = if model.qubits() == 1 { MIN_LEVELS_ONE } else { MIN_LEVELS_TWO };
    if n_max < min_levels {
        return Err(Error::Truncation(format!("{n_max} Fock levels, at least {min_levels} needed")));
    }
    let space = model.space(n_max)?;
    let frame = ControlFrame::for_space(&space)?;
    let basis = logical_basis(model, &space)?;
    let h = model.spectrum(&space, basis.energy())?;

    let steps = schedule.steps();
    let dt = schedule.total_time() / steps as f64;
    let sample_every = (steps / 200).max(1);
    let start = schedule.position(0.0)?;
    let end = schedule.position(schedule.total_time())?;
    let midpoints: Vec<ControlPoint> =
        (0..steps).map(|s| schedule.position((s as f64 + 0.5) * dt)).collect::<Result<_>>()?;

    let k = basis.dim();
    let mut overlaps = CMatrix::zeros(k, k);
    let mut norm_drift: f64 = 0.0;
    let mut energy_deviation: f64 = 0.0;
    let mut truncation_population: f64 = 0.0;
    for (j, ket) in basis.kets().iter().enumerate() {
        let mut psi: CVector = frame.transformed(&start, ket)?;
        for (s, mid) in midpoints.iter().enumerate() {
            frame.apply_adjoint(mid, psi.as_mut_slice())?;
            if s % sample_every == 0 {
                energy_deviation = energy_deviation.max(h.expectation(psi.as_slice()).abs());
            }
            h.apply_exp_minus_i(dt, psi.as_mut_slice());
            frame.apply(mid, psi.as_mut_slice())?;
            if s % sample_every == 0 {
                truncation_population = truncation_population.max(top_level_population(&space, &psi));
            }
        }
        norm_drift = norm_drift.max((psi.norm() - 1.0).abs());
        frame.apply_adjoint(&end, psi.as_mut_slice())?;
        let col = basis.project(&psi);
        overlaps.set_column(j, &col);
    }
    if norm_drift > NORM_TOL {
        return Err(Error::StepInstability { drift: norm_drift });
    }
    let leakage = (0..k)
        .map(|j| 1.0 - overlaps.column(j).norm_squared())
        .fold(0.0f64, f64::max)
        .max(0.0);
    if leakage > budget {
        return Err(Error::LeakageExceeded { leakage, budget });
    }
    let reference = transport(schedule.path(), transport_steps(schedule.path()), ConnectionSource::Analytic)?;
    let distance_to_transport = linalg::gate_distance(&overlaps, &reference.unitary);
    let residual_nonunitarity = linalg::unitarity_defect(&overlaps);
    let holonomy = HolonomyResult {
        unitary: overlaps,
        method: Method::Adiabatic,
        steps,
        calibration: 1.0,
        residual_nonunitarity,
        leakage,
    };
    Ok(AdiabaticReport {
        holonomy,
        leakage,
        distance_to_transport,
        norm_drift,
        energy_deviation,
        truncation_population,
        total_time: schedule.total_time(),
        steps,
    })
}

fn transport_steps(lp: &Loop) -> usize {
    (lp.vertices().len() * 500).max(2000)
}

/// One row of a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub total_time: f64,
    pub leakage: f64,
    pub distance: f64,
    pub norm_drift: f64,
    pub energy_deviation: f64,
    pub truncation_population: f64,
}

impl From<&AdiabaticReport> for ScalingRow {
    fn from(r: &AdiabaticReport) -> Self {
        ScalingRow {
            total_time: r.total_time,
            leakage: r.leakage,
            distance: r.distance_to_transport,
            norm_drift: r.norm_drift,
            energy_deviation: r.energy_deviation,
            truncation_population: r.truncation_population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub ramp: Ramp,
    pub rows: Vec<ScalingRow>,
    /// Log-log slope of distance against `T`; `None` when a distance vanishes.
    pub slope: Option<f64>,
    /// Distances strictly decrease with `T`.
    pub monotone: bool,
}

impl ScalingStudy {
    /// Assembles a study from rows computed elsewhere, sorted by `T`.
    pub fn from_rows(ramp: Ramp, mut rows: Vec<ScalingRow>) -> Result<Self> {
        if rows.len() < 3 {
            return Err(Error::InvalidSchedule(format!("a scaling study needs 3 durations, got {}", rows.len())));
        }
        rows.sort_by(|a, b| a.total_time.total_cmp(&b.total_time));
        let monotone = rows.windows(2).all(|w| w[1].distance < w[0].distance);
        let slope = if rows.iter().all(|r| r.distance > 0.0) {
            let x: Vec<f64> = rows.iter().map(|r| r.total_time.ln()).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.distance.ln()).collect();
            Some(linear_fit(&x, &y).0)
        } else {
            None
        };
        Ok(ScalingStudy { ramp, rows, slope, monotone })
    }

    pub fn final_leakage(&self) -> f64 {
        self.rows.last().map(|r| r.leakage).unwrap_or(0.0)
    }
}

/// Runs [`evolve`] once per duration.
pub fn adiabatic_scaling_study(
    lp: &Loop,
    times: &[f64],
    ramp: Ramp,
    model: &TrapModel,
    n_max: usize,
    budget: f64,
) -> Result<ScalingStudy> {
    if times.len() < 3 {
        return Err(Error::InvalidSchedule(format!("a scaling study needs 3 durations, got {}", times.len())));
    }
    let rows = times
        .iter()
        .map(|&t| {
            let s = Schedule::new(lp.clone(), t, ramp)?;
            evolve(&s, model, n_max, budget).map(|r| ScalingRow::from(&r))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalingStudy::from_rows(ramp, rows)
}

/// Loop used by default: `x ∈ [0, 0.5]`, `r1 ∈ [0, 0.8]` on the first plane.
pub fn default_loop() -> Loop {
    Loop::rectangle(crate::holonomy::Plane::CI, (0.0, 0.5), (0.0, 0.8)).expect("static rectangle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jc::JcParams;

    #[test]
    fn smooth_ramp_is_monotone_and_pinned() {
        assert_eq!(Ramp::Smooth.progress(0.0), 0.0);
        assert!((Ramp::Smooth.progress(1.0) - 1.0).abs() < 1e-15);
        assert!((Ramp::Smooth.progress(0.5) - 0.5).abs() < 1e-15);
        let mut last = 0.0;
        for i in 1..=100 {
            let p = Ramp::Smooth.progress(i as f64 / 100.0);
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn schedule_checks() {
        let lp = default_loop();
        assert!(matches!(Schedule::new(lp.clone(), 0.0, Ramp::Uniform), Err(Error::InvalidSchedule(_))));
        assert!(matches!(Schedule::with_steps(lp.clone(), 10.0, 50, Ramp::Uniform), Err(Error::InvalidSchedule(_))));
        let s = Schedule::new(lp, 10.0, Ramp::Smooth).unwrap();
        let p = s.position(10.0).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-15));
        // corners are reached at times proportional to edge length
        let q = s.position(10.0 * 0.5 / 2.6).unwrap();
        assert!((q.values()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn static_loop_is_identity() {
        let model = TrapModel::Single(JcParams::resonant(1.0));
        let lp = Loop::stationary(ControlPoint::origin(1), 3).unwrap();
        let s = Schedule::new(lp, 5.0, Ramp::Uniform).unwrap();
        let r = evolve(&s, &model, MIN_LEVELS_ONE, LEAKAGE_BUDGET).unwrap();
        assert!(r.distance_to_transport < 1e-10);
        assert!(r.leakage < 1e-12);
        assert!(r.norm_drift < 1e-12);
    }
}
