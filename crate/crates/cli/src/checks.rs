//! The invariant suite behind `holonomy verify`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use holonomy_core::controls::{ControlPoint, Coord, OneQubitPoint, TwoQubitPoint};
use holonomy_core::conventions::{CalibrationEntry, ConventionsLedger};
use holonomy_core::fock::{BasisLabel, FockSpace, Level};
use holonomy_core::geometry::{
    connection_analytic, curvature_analytic, curvature_from_analytic, one_qubit_truncation, two_qubit_truncation,
    ConnectionOracle,
};
use holonomy_core::holonomy::{
    calibrate, closed_form_gate, convergence, sigma_area, CalibrationRecord, ConnectionSource, Loop, Plane,
};
use holonomy_core::jc::{
    gap_above, logical_basis, measurement_pulse, multiplicity, readout_phase, readout_probabilities, spectrum,
    Branch, JcParams, TrapModel,
};
use holonomy_core::linalg::{c, max_abs, CMatrix, CVector, C64, ONE, ZERO};
use holonomy_core::resilience::{delta_sigma, derivative_ratio, linspace, rectangle, sensitivity_surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::VerifyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    /// The formula under test.
    pub formula: String,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, formula: &str, value: f64, tolerance: f64) -> Self {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, value, tolerance, formula: formula.into(), detail: String::new() }
    }

    /// Passes when `value ≥ tolerance`.
    pub fn at_least(name: &str, formula: &str, value: f64, tolerance: f64) -> Self {
        let status = if value >= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, value, tolerance, formula: formula.into(), detail: String::new() }
    }

    pub fn failed(name: &str, formula: &str, detail: String) -> Self {
        Check {
            name: name.into(),
            status: Status::Fail,
            value: f64::NAN,
            tolerance: f64::NAN,
            formula: formula.into(),
            detail,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub units: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
    pub calibrations: Vec<CalibrationEntry>,
}

fn guard(name: &str, formula: &str, f: impl FnOnce() -> anyhow::Result<Vec<Check>>) -> Vec<Check> {
    match f() {
        Ok(v) => v,
        Err(e) => vec![Check::failed(name, formula, format!("{e:#}"))],
    }
}

/// Dressed levels, degeneracy and gap of the single-ion model.
pub fn spectrum_checks(cfg: &VerifyConfig, nu: f64) -> Vec<Check> {
    const LEVELS: &str = "E_n± = ω₁ + ν(n+1) ± ν√(n+1)";
    guard("spectrum", LEVELS, || {
        let p = JcParams::new(nu, nu, -0.5 * nu)?;
        let model = TrapModel::Single(p);
        let space = model.space(cfg.spectrum_n_max)?;
        let eig = spectrum(&model, &space)?;
        let nearest = |e: f64| eig.iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min);
        let mut worst: f64 = 0.0;
        for n in 0..=cfg.spectrum_levels {
            let m = (n + 1) as f64;
            for sign in [1.0, -1.0] {
                let formula = p.omega1 + nu * m + sign * nu * m.sqrt();
                worst = worst.max(nearest(formula));
                let branch = if sign > 0.0 { Branch::Plus } else { Branch::Minus };
                worst = worst.max((p.dressed_energy(n, branch) - formula).abs());
            }
        }
        let e_deg = p.degenerate_energy();
        let mult = multiplicity(&eig, e_deg);
        let gap = gap_above(&eig, e_deg).unwrap_or(f64::NAN);
        Ok(vec![
            Check::at_most("spectrum_dressed_levels", LEVELS, worst, 1e-8),
            Check::at_most("spectrum_degenerate_energy", "E_deg = ω₁", nearest(-0.5 * nu), 1e-8),
            Check::at_most("spectrum_degeneracy", "multiplicity of E_deg = 2", (mult as f64 - 2.0).abs(), 0.0)
                .with_detail(format!("multiplicity {mult}")),
            Check::at_most("spectrum_gap", "gap = (2 − √2)ν", (gap - (2.0 - 2f64.sqrt()) * nu).abs(), 1e-10),
        ])
    })
}

/// Uniform random one-qubit point with `|α| ≤ alpha_cap`, `0 ≤ r1 ≤ r1_cap`.
pub fn random_one_qubit(rng: &mut ChaCha8Rng, alpha_cap: f64, r1_cap: f64) -> ControlPoint {
    let rho = alpha_cap * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    let r1 = r1_cap * rng.random::<f64>();
    let theta = 2.0 * PI * rng.random::<f64>();
    OneQubitPoint::new(rho * phi.cos(), rho * phi.sin(), r1, theta).into()
}

pub fn random_two_qubit(rng: &mut ChaCha8Rng, r_cap: f64) -> ControlPoint {
    let r2 = r_cap * rng.random::<f64>();
    let t2 = 2.0 * PI * rng.random::<f64>();
    let r3 = r_cap * rng.random::<f64>();
    let t3 = 2.0 * PI * rng.random::<f64>();
    TwoQubitPoint::new(r2, t2, r3, t3).into()
}

/// Largest entry gap between numeric and closed-form connections, per coordinate.
pub fn connection_gaps(oracle: &ConnectionOracle, points: &[ControlPoint], coords: &[Coord]) -> anyhow::Result<Vec<f64>> {
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            coords
                .iter()
                .map(|&k| {
                    let n = oracle.connection(p, k)?.matrix;
                    let a = connection_analytic(p, k)?.matrix;
                    Ok(max_abs(&(n - a)))
                })
                .collect::<holonomy_core::Result<Vec<f64>>>()
        })
        .collect::<holonomy_core::Result<_>>()?;
    Ok((0..coords.len()).map(|i| per_point.iter().map(|v| v[i]).fold(0.0, f64::max)).collect())
}

/// Numeric connection against the closed forms at random points.
pub fn connection_checks(cfg: &VerifyConfig) -> Vec<Check> {
    const DEF: &str = "A_σ = ⟨i|U†∂_σU|j⟩";
    let mut out = guard("connection_one_qubit", DEF, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let points: Vec<ControlPoint> =
            (0..cfg.points).map(|_| random_one_qubit(&mut rng, cfg.alpha_cap, cfg.r1_cap)).collect();
        let oracle = ConnectionOracle::new(1, one_qubit_truncation(cfg.r1_cap), cfg.h)?;
        let coords = Coord::ONE_QUBIT;
        let gaps = connection_gaps(&oracle, &points, &coords)?;
        let mut v: Vec<Check> = coords
            .iter()
            .zip(&gaps)
            .map(|(k, g)| Check::at_most(&format!("connection_A_{}", k.name()), DEF, *g, cfg.connection_tol))
            .collect();
        v.push(Check::at_most("A_r1_zero", "A_r1 = 0", gaps[2], 1e-6));
        Ok(v)
    });
    out.extend(guard("connection_two_qubit", DEF, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let points: Vec<ControlPoint> = (0..cfg.points).map(|_| random_two_qubit(&mut rng, cfg.r2_cap)).collect();
        let oracle = ConnectionOracle::new(2, two_qubit_truncation(cfg.r2_cap), cfg.h)?;
        let coords = [Coord::R2, Coord::R3];
        let gaps = connection_gaps(&oracle, &points, &coords)?;
        Ok(coords
            .iter()
            .zip(&gaps)
            .map(|(k, g)| Check::at_most(&format!("connection_A_{}", k.name()), DEF, *g, cfg.connection_tol))
            .collect())
    }));
    out.extend(guard("connection_analytic", "A anti-Hermitian", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.points {
            let p = random_one_qubit(&mut rng, cfg.alpha_cap, cfg.r1_cap_analytic);
            for k in Coord::ONE_QUBIT {
                let a = connection_analytic(&p, k)?.matrix;
                worst = worst.max(max_abs(&(&a + a.adjoint())));
            }
        }
        Ok(vec![Check::at_most("connection_anti_hermitian", "A† = −A", worst, 0.0)])
    }));
    out
}

/// Plaquette oracle, finite-difference curvature and the exponential law.
pub fn curvature_checks(cfg: &VerifyConfig) -> Vec<Check> {
    const DEF: &str = "F_ab = ∂_aA_b − ∂_bA_a + [A_a, A_b]";
    let mut out = guard("curvature_plaquette", DEF, || {
        let one = ConnectionOracle::new(1, one_qubit_truncation(0.6), cfg.h)?;
        let two = ConnectionOracle::new(2, two_qubit_truncation(0.6), cfg.h)?;
        let cases: [(&str, &ConnectionOracle, ControlPoint, Coord, Coord); 3] = [
            ("F_r1x", &one, OneQubitPoint::new(0.0, 0.0, 0.5, 0.0).into(), Coord::R1, Coord::X),
            ("F_r1y", &one, OneQubitPoint::new(0.0, 0.0, 0.5, PI).into(), Coord::R1, Coord::Y),
            ("F_r2r3", &two, TwoQubitPoint::new(0.5, 0.0, 0.3, 0.0).into(), Coord::R2, Coord::R3),
        ];
        cases
            .par_iter()
            .map(|(name, oracle, p, a, b)| {
                let side = cfg.plaquette;
                let corner = p.shifted(*a, -side / 2.0)?.shifted(*b, -side / 2.0)?;
                let f = oracle.plaquette(&corner, *a, *b, side, 4)?.matrix;
                let want = curvature_analytic(p, *a, *b)?.matrix;
                let rel = max_abs(&(f - &want)) / max_abs(&want);
                Ok(Check::at_most(&format!("curvature_plaquette_{name}"), DEF, rel, cfg.curvature_rel_tol))
            })
            .collect()
    });
    out.extend(guard("curvature_law", "|F_r1x| = √2 e^{−2r1}", || {
        let mut worst: f64 = 0.0;
        for r in [0.0, 1.0, 2.0, 3.0] {
            let f = curvature_analytic(&OneQubitPoint::new(0.0, 0.0, r, 0.0).into(), Coord::R1, Coord::X)?;
            worst = worst.max((f.off_diagonal_magnitude() - 2f64.sqrt() * (-2.0 * r).exp()).abs());
        }
        let mut fd: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
        for _ in 0..cfg.points {
            let ControlPoint::One(mut p) = random_one_qubit(&mut rng, cfg.alpha_cap, cfg.r1_cap_analytic) else {
                unreachable!()
            };
            p.theta1 = 0.0;
            let pt: ControlPoint = p.into();
            let a = curvature_from_analytic(&pt, Coord::R1, Coord::X, 1e-5)?.matrix;
            let b = curvature_analytic(&pt, Coord::R1, Coord::X)?.matrix;
            fd = fd.max(max_abs(&(a - b)));
        }
        Ok(vec![
            Check::at_most("F_r1x_exponential_law", "|F_r1x| = √2 e^{−2r1}", worst, 1e-8),
            Check::at_most("F_r1x_from_connection", DEF, fd, 1e-6),
        ])
    }));
    out
}

/// Probe rectangles for calibrating `plane`.
pub fn probe_loops(plane: Plane) -> Vec<Loop> {
    let rects: [((f64, f64), (f64, f64)); 3] = match plane.qubits() {
        Some(1) => [((0.0, 0.5), (0.0, 1.0)), ((0.0, 1.0), (0.0, 1.0)), ((0.0, 1.0), (0.0, 2.0))],
        _ => [((0.0, 0.3), (0.0, 0.5)), ((0.0, 0.5), (0.0, 1.0)), ((0.0, 0.8), (0.0, 0.7))],
    };
    rects.iter().map(|&(u, v)| Loop::rectangle(plane, u, v).expect("static probe")).collect()
}

/// Calibrations of all four planes.
pub fn calibrate_all(steps: usize) -> holonomy_core::Result<Vec<CalibrationRecord>> {
    Plane::TAGGED
        .par_iter()
        .map(|&p| calibrate(p, &probe_loops(p), steps, ConnectionSource::Analytic))
        .collect()
}

/// Non-abelian loop used for the convergence order.
pub fn convergence_loop() -> Loop {
    let v: Vec<ControlPoint> = [
        (0.0, 0.0, 0.0, 0.0),
        (0.5, 0.0, 0.3, 0.5),
        (0.2, 0.4, 0.6, 1.2),
        (-0.3, 0.2, 0.2, 2.0),
        (0.0, 0.0, 0.0, 0.0),
    ]
    .iter()
    .map(|&(a, b, c, d)| OneQubitPoint::new(a, b, c, d).into())
    .collect();
    Loop::new(v, Plane::Free).expect("static loop")
}

pub fn area_law_checks(cfg: &VerifyConfig, records: &[CalibrationRecord]) -> Vec<Check> {
    let mut out: Vec<Check> = records
        .iter()
        .map(|r| {
            Check::at_most(&format!("area_law_{}", r.plane), "Γ = exp(G κ Σ)", r.residual, cfg.area_law_tol)
                .with_detail(format!(
                    "G = {}, kappa = {:.12}; published {} with kappa = 1",
                    r.generator_label, r.kappa, r.published_generator_label
                ))
        })
        .collect();
    out.extend(guard("transport_convergence", "O(N⁻²) midpoint transport", || {
        let c = convergence(&convergence_loop(), 100, ConnectionSource::Analytic)?;
        Ok(vec![Check::at_least("transport_convergence_order", "O(N⁻²) midpoint transport", c.order, 1.9)])
    }));
    out.extend(guard("sigma_area", "Σ_I = X(1 − e^{−2R})", || {
        let a = sigma_area(&Loop::rectangle(Plane::CI, (0.0, 1.0), (0.0, 2.0))?)?;
        let b = sigma_area(&Loop::rectangle(Plane::CIII, (0.0, 0.5), (0.0, 1.0))?)?;
        Ok(vec![
            Check::at_most("sigma_area_C_I", "Σ_I = X(1 − e^{−2R})", (a - (1.0 - (-4.0f64).exp())).abs(), 1e-12),
            Check::at_most("sigma_area_C_III", "Σ_III = R3(cosh 2R2 − 1)", (b - (1f64.cosh() - 1.0)).abs(), 1e-12),
        ])
    }));
    out
}

/// The published two-qubit gate at `Σ = π/4`.
pub fn published_gate_matrix() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let mi = c(0.0, -h);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        ONE,  ZERO,       ZERO,       ZERO,
        ZERO, c(h, 0.0),  mi,         ZERO,
        ZERO, mi,         c(h, 0.0),  ZERO,
        ZERO, ZERO,       ZERO,       ONE,
    ]);
    m
}

pub fn published_gate_checks() -> Vec<Check> {
    const U: &str = "U = exp(−iσ̂₁^{(12)} π/4)";
    guard("published_gate", U, || {
        let g = closed_form_gate(Plane::CIV, PI / 4.0)?;
        Ok(vec![Check::at_most("published_gate_C_IV", U, max_abs(&(g.unitary - published_gate_matrix())), 1e-12)])
    })
}

/// `|g,0⟩`, `|0,−⟩` and a state built from them.
pub fn logical_state(space: &FockSpace, a: C64, b: C64) -> anyhow::Result<CVector> {
    let model = TrapModel::Single(JcParams::resonant(1.0));
    let basis = logical_basis(&model, space)?;
    Ok(&basis.kets()[0] * a + &basis.kets()[1] * b)
}

pub fn measurement_checks(n_max: usize) -> Vec<Check> {
    const PULSE: &str = "U(φ) = exp[−i(π/4)(σ₊a e^{−iφ} + σ₋a† e^{iφ})]";
    guard("measurement", PULSE, || {
        let space = FockSpace::single_ion(n_max)?;
        let phi = readout_phase();
        let u = measurement_pulse(phi, &space)?;
        let zero = logical_state(&space, ONE, ZERO)?;
        let one = logical_state(&space, ZERO, ONE)?;
        let after0 = u.apply(&zero);
        let after1 = u.apply(&one);
        let fidelity = zero.dotc(&after0).norm_sqr();
        let e0 = space.ket(&BasisLabel::single(Level::Excited, 0))?;
        let transferred = e0.dotc(&after1).norm_sqr();
        let (pg0, pe0) = readout_probabilities(&space, &after0)?;
        let (pg1, pe1) = readout_probabilities(&space, &after1)?;
        let readout = (pg0 - 1.0).abs().max(pe0).max(pg1).max((pe1 - 1.0).abs());
        Ok(vec![
            Check::at_most("measurement_ground_fixed", PULSE, (1.0 - fidelity).abs(), 1e-12),
            Check::at_most("measurement_transfer", PULSE, (1.0 - transferred).abs(), 1e-10)
                .with_detail(format!("phi* = {phi:.12}")),
            Check::at_most("measurement_readout", "p_e after pulse", readout, 1e-10),
        ])
    })
}

pub fn resilience_checks(cfg: &VerifyConfig) -> Vec<Check> {
    const DS: &str = "ΔΣ = ε₁(1 − e^{−2(r1+ε₂)}) + x e^{−2r1}(1 − e^{−2ε₂})";
    guard("resilience", DS, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(4));
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = rng.random_range(0.05..3.0);
            let r = rng.random_range(0.05..3.0);
            let e1 = rng.random_range(-0.05..0.05);
            let e2 = rng.random_range(-0.05..0.05);
            let a = sigma_area(&rectangle(x, r)?)?;
            let b = sigma_area(&rectangle(x + e1, r + e2)?)?;
            worst = worst.max((b - a - delta_sigma(x, r, e1, e2)).abs());
        }
        let grid = linspace(-0.05, 0.05, 21);
        let s = sensitivity_surface(1.0, 2.0, &grid, &grid)?;
        Ok(vec![
            Check::at_most("delta_sigma_exact", DS, worst, 1e-12),
            Check::at_most(
                "derivative_ratio",
                "(e^{2r1} − 1)/(2x)",
                (derivative_ratio(1.0, 2.0) - ((4f64).exp() - 1.0) / 2.0).abs(),
                1e-9,
            )
            .with_detail(format!("ratio {:.6}", derivative_ratio(1.0, 2.0))),
            Check::at_least("eps2_suppression", "ε₂ influence ≪ ε₁ influence", s.influence_ratio(), 10.0),
        ])
    })
}

/// Runs every check, calibrating the four planes along the way.
pub fn run_all(cfg: &VerifyConfig, nu: f64) -> (VerifyReport, ConventionsLedger) {
    let mut checks = spectrum_checks(cfg, nu);
    checks.extend(connection_checks(cfg));
    checks.extend(curvature_checks(cfg));
    let records = match calibrate_all(cfg.transport_steps) {
        Ok(r) => r,
        Err(e) => {
            checks.push(Check::failed("calibration", "Γ = exp(G κ Σ)", e.to_string()));
            Vec::new()
        }
    };
    checks.extend(area_law_checks(cfg, &records));
    checks.extend(published_gate_checks());
    checks.extend(measurement_checks(12));
    checks.extend(resilience_checks(cfg));
    let ledger = match ConventionsLedger::new(&records) {
        Ok(l) => l,
        Err(e) => {
            checks.push(Check::failed("conventions_ledger", "ledger audit", e.to_string()));
            ConventionsLedger {
                units: crate::UNITS.into(),
                basis: String::new(),
                formulas: Vec::new(),
                calibrations: Vec::new(),
            }
        }
    };
    let first = checks.iter().find(|c| !c.passed()).map(|c| format!("{}: {}", c.name, c.formula));
    let report = VerifyReport {
        units: crate::UNITS.into(),
        passed: first.is_none(),
        first_failure: first,
        checks,
        calibrations: ledger.calibrations.clone(),
    };
    (report, ledger)
}
