//! Loops on the control manifold, path-ordered transport and the area law.
//!
//! Transport follows the Schrödinger equation in the moving frame: logical
//! amplitudes obey `ċ = −A(σ) σ̇ c`, so a loop yields
//! `Γ = ∏ exp(−A(σ_mid)·Δσ)` with later segments on the left.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::controls::{ControlPoint, Coord, OneQubitPoint, TwoQubitPoint};
use crate::error::{Error, Result};
use crate::geometry::{analytic_one_form, connection_analytic, ConnectionOracle};
use crate::linalg::{self, c, CMatrix, I, ONE, ZERO};

/// Coordinates closer than this are the same point.
pub const POINT_TOL: f64 = 1e-12;

/// Fewest transport steps accepted.
pub const MIN_STEPS: usize = 100;

/// Largest fit residual accepted by [`calibrate`].
pub const CALIBRATION_TOL: f64 = 1e-6;

/// Largest commutator between sampled connection values for a plane to count as abelian.
pub const ABELIAN_TOL: f64 = 1e-10;

/// Two-dimensional slices of the control manifold with a known area weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    /// `(x, r1)` at `y = 0`, `θ1 = 0`
    #[serde(rename = "C_I")]
    CI,
    /// `(y, r1)` at `x = 0`, `θ1 = π`
    #[serde(rename = "C_II")]
    CII,
    /// `(r2, r3)` at `θ2 = θ3 = 0`
    #[serde(rename = "C_III")]
    CIII,
    /// `(r2, r3)` at `θ2 = 0`, `θ3 = 3π/2`
    #[serde(rename = "C_IV")]
    CIV,
    #[serde(rename = "free")]
    Free,
}

impl Plane {
    pub const TAGGED: [Plane; 4] = [Plane::CI, Plane::CII, Plane::CIII, Plane::CIV];

    pub fn name(self) -> &'static str {
        match self {
            Plane::CI => "C_I",
            Plane::CII => "C_II",
            Plane::CIII => "C_III",
            Plane::CIV => "C_IV",
            Plane::Free => "free",
        }
    }

    pub fn parse(s: &str) -> Option<Plane> {
        [Plane::CI, Plane::CII, Plane::CIII, Plane::CIV, Plane::Free]
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
    }

    pub fn qubits(self) -> Option<usize> {
        match self {
            Plane::CI | Plane::CII => Some(1),
            Plane::CIII | Plane::CIV => Some(2),
            Plane::Free => None,
        }
    }

    /// In-plane coordinates `(u, v)`, in the order that fixes orientation.
    pub fn axes(self) -> Result<(Coord, Coord)> {
        match self {
            Plane::CI => Ok((Coord::X, Coord::R1)),
            Plane::CII => Ok((Coord::Y, Coord::R1)),
            Plane::CIII | Plane::CIV => Ok((Coord::R2, Coord::R3)),
            Plane::Free => Err(Error::UntaggedPlane),
        }
    }

    /// The point with in-plane coordinates `(u, v)`.
    pub fn lift(self, u: f64, v: f64) -> Result<ControlPoint> {
        use core::f64::consts::PI;
        Ok(match self {
            Plane::CI => OneQubitPoint::new(u, 0.0, v, 0.0).into(),
            Plane::CII => OneQubitPoint::new(0.0, u, v, PI).into(),
            Plane::CIII => TwoQubitPoint::new(u, 0.0, v, 0.0).into(),
            Plane::CIV => TwoQubitPoint::new(u, 0.0, v, 1.5 * PI).into(),
            Plane::Free => return Err(Error::UntaggedPlane),
        })
    }

    pub fn contains(self, p: &ControlPoint) -> bool {
        let Ok((a, b)) = self.axes() else {
            return true;
        };
        let (Ok(u), Ok(v)) = (p.get(a), p.get(b)) else {
            return false;
        };
        match self.lift(u, v) {
            Ok(q) => p
                .values()
                .iter()
                .zip(q.values())
                .all(|(x, y)| (x - y).abs() <= POINT_TOL),
            Err(_) => false,
        }
    }

    pub fn project(self, p: &ControlPoint) -> Result<(f64, f64)> {
        let (a, b) = self.axes()?;
        Ok((p.get(a)?, p.get(b)?))
    }

    /// Area density: `2e^{−2r1}` on the one-qubit planes, `2 sinh 2r2` on the two-qubit ones.
    pub fn weight(self, u: f64, v: f64) -> Result<f64> {
        match self {
            Plane::CI | Plane::CII => Ok(2.0 * (-2.0 * v).exp()),
            Plane::CIII | Plane::CIV => Ok(2.0 * (2.0 * u).sinh()),
            Plane::Free => Err(Error::UntaggedPlane),
        }
    }

    /// `∫ P du + Q dv` along the straight segment, with `(P, Q)` a potential
    /// whose curl is the weight: `(e^{−2v}, 0)` or `(0, cosh 2u)`.
    fn segment_area(self, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
        let (du, dv) = (b.0 - a.0, b.1 - a.1);
        match self {
            Plane::CI | Plane::CII => Ok(du * (-(a.1 + b.1)).exp() * sinhc(dv)),
            Plane::CIII | Plane::CIV => Ok(dv * (a.0 + b.0).cosh() * sinhc(du)),
            Plane::Free => Err(Error::UntaggedPlane),
        }
    }

    /// Generator `G` of the published gate `exp(G Σ)`.
    pub fn published_generator(self) -> Result<CMatrix> {
        Ok(match self {
            Plane::CI => pauli_x() * c(0.0, -1.0),
            Plane::CII => pauli_y() * I,
            Plane::CIII => embed_middle(&pauli_y()) * c(0.0, -1.0),
            Plane::CIV => embed_middle(&pauli_x()) * c(0.0, -1.0),
            Plane::Free => return Err(Error::UntaggedPlane),
        })
    }
}

impl core::fmt::Display for Plane {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// A 2×2 matrix placed on the `|01⟩, |10⟩` block of a 4×4 one.
pub fn embed_middle(m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(4, 4);
    out.view_mut((1, 1), (2, 2)).copy_from(m);
    out
}

/// Closed, piecewise-linear loop with an optional plane tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    vertices: Vec<ControlPoint>,
    plane: Plane,
}

impl Loop {
    /// Vertices must be closed (first equals last) and lie on `plane`.
    pub fn new(vertices: Vec<ControlPoint>, plane: Plane) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::OpenPath);
        }
        let q = vertices[0].qubits();
        if vertices.iter().any(|v| v.qubits() != q) {
            return Err(Error::SpaceMismatch("loop mixes one- and two-qubit points".into()));
        }
        if let Some(pq) = plane.qubits() {
            if pq != q {
                return Err(Error::SpaceMismatch(format!("plane {plane} needs {pq}-qubit points")));
            }
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("loop has non-finite coordinates".into()));
        }
        let d = vertices[0].delta(vertices.last().expect("nonempty"))?;
        if d.iter().any(|x| x.abs() > POINT_TOL) {
            return Err(Error::OpenPath);
        }
        for (index, v) in vertices.iter().enumerate() {
            if !plane.contains(v) {
                return Err(Error::VertexOffPlane { index, plane: plane.name() });
            }
        }
        Ok(Loop { vertices, plane })
    }

    /// Loop through in-plane points `(u, v)`; closes itself if needed.
    pub fn on_plane(plane: Plane, points: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<ControlPoint> =
            points.iter().map(|&(a, b)| plane.lift(a, b)).collect::<Result<_>>()?;
        if let (Some(first), Some(last)) = (v.first().copied(), v.last()) {
            if first.delta(last)?.iter().any(|x| x.abs() > POINT_TOL) {
                v.push(first);
            }
        }
        Self::new(v, plane)
    }

    /// Counter-clockwise rectangle `[u0, u1] × [v0, v1]` starting at `(u0, v0)`.
    pub fn rectangle(plane: Plane, u: (f64, f64), v: (f64, f64)) -> Result<Self> {
        Self::on_plane(plane, &[(u.0, v.0), (u.1, v.0), (u.1, v.1), (u.0, v.1)])
    }

    /// Constant loop at one point.
    pub fn stationary(point: ControlPoint, steps: usize) -> Result<Self> {
        Self::new(alloc::vec![point; steps.max(2)], Plane::Free)
    }

    pub fn vertices(&self) -> &[ControlPoint] {
        &self.vertices
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn qubits(&self) -> usize {
        self.vertices[0].qubits()
    }

    pub fn with_plane(&self, plane: Plane) -> Result<Self> {
        Self::new(self.vertices.clone(), plane)
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Loop { vertices: v, plane: self.plane }
    }

    /// Same loop started at vertex `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.vertices.len() - 1;
        let k = k % n.max(1);
        let mut v: Vec<ControlPoint> = (0..n).map(|i| self.vertices[(i + k) % n]).collect();
        v.push(v[0]);
        Loop { vertices: v, plane: self.plane }
    }

    /// Segments as `(start, end)` pairs.
    pub fn segments(&self) -> impl Iterator<Item = (ControlPoint, ControlPoint)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Euclidean length in coordinate space.
    pub fn length(&self) -> f64 {
        self.segments()
            .map(|(a, b)| a.delta(&b).map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt()).unwrap_or(0.0))
            .sum()
    }

    pub fn plane_coords(&self) -> Result<Vec<(f64, f64)>> {
        self.vertices.iter().map(|v| self.plane.project(v)).collect()
    }

    /// Sign of the unweighted enclosed area: `+1` counter-clockwise.
    pub fn orientation(&self) -> Result<f64> {
        let pts = self.plane_coords()?;
        let twice: f64 = pts.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum();
        Ok(if twice >= 0.0 { 1.0 } else { -1.0 })
    }

    /// No two non-adjacent edges touch. Zero-length edges are ignored.
    pub fn is_simple(&self) -> Result<bool> {
        let mut pts = self.plane_coords()?;
        pts.dedup_by(|a, b| (a.0 - b.0).abs() <= POINT_TOL && (a.1 - b.1).abs() <= POINT_TOL);
        let n = pts.len() - 1;
        if n < 3 {
            return Ok(true);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_touch(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) - POINT_TOL
        && p.0 <= a.0.max(b.0) + POINT_TOL
        && p.1 >= a.1.min(b.1) - POINT_TOL
        && p.1 <= a.1.max(b.1) + POINT_TOL
}

fn segments_touch(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1.abs() <= POINT_TOL && on_segment(p1, q1, q2))
        || (d2.abs() <= POINT_TOL && on_segment(p2, q1, q2))
        || (d3.abs() <= POINT_TOL && on_segment(q1, p1, p2))
        || (d4.abs() <= POINT_TOL && on_segment(q2, p1, p2))
}

/// Signed weighted area enclosed by a tagged loop, by Green's theorem with
/// exact segment integrals. Counter-clockwise in the plane's `(u, v)` order is positive.
pub fn sigma_area(lp: &Loop) -> Result<f64> {
    let plane = lp.plane();
    if plane == Plane::Free {
        return Err(Error::UntaggedPlane);
    }
    if !lp.is_simple()? {
        return Err(Error::SelfIntersecting);
    }
    let pts = lp.plane_coords()?;
    pts.windows(2).map(|w| plane.segment_area(w[0], w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Transport,
    ClosedForm,
    Calibrated,
    Adiabatic,
    Sequence,
}

/// A logical gate with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub unitary: CMatrix,
    pub method: Method,
    pub steps: usize,
    /// Constant multiplying `Σ`; `1.0` for the published convention.
    pub calibration: f64,
    pub residual_nonunitarity: f64,
    /// `1 − smallest singular value²` of the logical block; zero for transport.
    pub leakage: f64,
}

impl HolonomyResult {
    fn from_unitary(unitary: CMatrix, method: Method, steps: usize, calibration: f64) -> Self {
        let residual_nonunitarity = linalg::unitarity_defect(&unitary);
        HolonomyResult { unitary, method, steps, calibration, residual_nonunitarity, leakage: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn adjoint(&self) -> Self {
        HolonomyResult { unitary: self.unitary.adjoint(), ..self.clone() }
    }

    pub fn distance(&self, other: &HolonomyResult) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(linalg::gate_distance(&self.unitary, &other.unitary))
    }

    pub fn determinant_modulus(&self) -> f64 {
        self.unitary.determinant().norm()
    }
}

/// Where connection values come from during transport.
#[derive(Debug, Clone, Copy)]
pub enum ConnectionSource<'a> {
    Analytic,
    Numeric(&'a ConnectionOracle),
}

impl ConnectionSource<'_> {
    /// `Σ_c A_c δ_c` at `point`.
    pub fn one_form(&self, point: &ControlPoint, delta: &[f64; 4]) -> Result<CMatrix> {
        match self {
            ConnectionSource::Analytic => analytic_one_form(point, delta),
            ConnectionSource::Numeric(oracle) => {
                let k = if point.qubits() == 1 { 2 } else { 4 };
                let mut out = CMatrix::zeros(k, k);
                for (coord, d) in point.coords().iter().zip(delta) {
                    if *d != 0.0 {
                        out += oracle.connection(point, *coord)?.matrix * c(*d, 0.0);
                    }
                }
                Ok((&out - out.adjoint()) * c(0.5, 0.0))
            }
        }
    }

    /// A single connection component.
    pub fn component(&self, point: &ControlPoint, coord: Coord) -> Result<CMatrix> {
        match self {
            ConnectionSource::Analytic => Ok(connection_analytic(point, coord)?.matrix),
            ConnectionSource::Numeric(oracle) => Ok(oracle.connection(point, coord)?.matrix),
        }
    }
}

/// Steps per segment, proportional to segment length.
fn distribute(lp: &Loop, steps: usize) -> Vec<usize> {
    let lens: Vec<f64> = lp
        .segments()
        .map(|(a, b)| a.delta(&b).map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt()).unwrap_or(0.0))
        .collect();
    let total: f64 = lens.iter().sum();
    lens.iter()
        .map(|l| {
            if *l == 0.0 || total == 0.0 {
                0
            } else {
                ((steps as f64 * l / total).round() as usize).max(1)
            }
        })
        .collect()
}

/// Path-ordered `Γ = ∏ exp(−A(σ_mid)·Δσ)`, midpoint rule, about `steps`
/// sub-steps shared among segments by length.
pub fn transport(lp: &Loop, steps: usize, source: ConnectionSource<'_>) -> Result<HolonomyResult> {
    if steps < MIN_STEPS {
        return Err(Error::StepUnderflow { steps, min: MIN_STEPS });
    }
    let k = if lp.qubits() == 1 { 2 } else { 4 };
    let mut gamma = CMatrix::identity(k, k);
    let mut taken = 0;
    for ((a, b), n) in lp.segments().zip(distribute(lp, steps)) {
        if n == 0 {
            continue;
        }
        let d = a.delta(&b)?;
        let step = d.map(|x| x / n as f64);
        for j in 0..n {
            let mid = a.lerp(&b, (j as f64 + 0.5) / n as f64)?;
            let omega = source.one_form(&mid, &step)?;
            gamma = linalg::expm_antihermitian_dense(&(-omega)) * gamma;
        }
        taken += n;
    }
    Ok(HolonomyResult::from_unitary(gamma, Method::Transport, taken, 1.0))
}

/// Differences between transports at `n`, `4n` and `16n` steps, and the
/// observed order `log₄(d₁/d₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub steps: usize,
    pub coarse_gap: f64,
    pub fine_gap: f64,
    pub order: f64,
}

pub fn convergence(lp: &Loop, steps: usize, source: ConnectionSource<'_>) -> Result<Convergence> {
    let g1 = transport(lp, steps, source)?;
    let g4 = transport(lp, 4 * steps, source)?;
    let g16 = transport(lp, 16 * steps, source)?;
    let coarse_gap = g1.distance(&g4)?;
    let fine_gap = g4.distance(&g16)?;
    let order = (coarse_gap / fine_gap).ln() / 4f64.ln();
    Ok(Convergence { steps, coarse_gap, fine_gap, order })
}

/// `(I − P) + cos Σ P − i sin Σ σ` for a Pauli-type `σ` with `σ² = P`.
fn pauli_exponential(sigma_matrix: &CMatrix, angle: f64) -> CMatrix {
    let n = sigma_matrix.nrows();
    let p = sigma_matrix * sigma_matrix;
    let id = CMatrix::identity(n, n);
    (&id - &p) + &p * c(angle.cos(), 0.0) + sigma_matrix * c(0.0, -angle.sin())
}

/// The published gate for each plane, exactly as written:
/// `exp(−iσ̂₁Σ)`, `exp(iσ̂₂Σ)`, `exp(−iσ̂₂^{(12)}Σ)`, `exp(−iσ̂₁^{(12)}Σ)`.
pub fn closed_form_gate(plane: Plane, sigma: f64) -> Result<HolonomyResult> {
    let u = match plane {
        Plane::CI => pauli_exponential(&pauli_x(), sigma),
        Plane::CII => pauli_exponential(&pauli_y(), -sigma),
        Plane::CIII => pauli_exponential(&embed_middle(&pauli_y()), sigma),
        Plane::CIV => pauli_exponential(&embed_middle(&pauli_x()), sigma),
        Plane::Free => return Err(Error::UntaggedPlane),
    };
    Ok(HolonomyResult::from_unitary(u, Method::ClosedForm, 0, 1.0))
}

/// Fitted area law `Γ = exp(G κ Σ)` on one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub plane: Plane,
    /// Unit-norm anti-Hermitian generator.
    pub generator: CMatrix,
    pub kappa: f64,
    /// Largest gate distance between transport and the fitted law.
    pub residual: f64,
    /// Largest commutator among sampled connection values on the probes.
    pub abelian_defect: f64,
    pub probe_sigmas: Vec<f64>,
    pub steps: usize,
    /// Readable form of `generator`, e.g. `+i sigma_y`.
    pub generator_label: String,
    pub published_generator_label: String,
    pub matches_published_generator: bool,
    pub matches_published_kappa: bool,
}

impl CalibrationRecord {
    /// The calibrated gate for area `sigma`.
    pub fn gate(&self, sigma: f64) -> HolonomyResult {
        let u = linalg::expm_antihermitian_dense(&(&self.generator * c(self.kappa * sigma, 0.0)));
        HolonomyResult::from_unitary(u, Method::Calibrated, 0, self.kappa)
    }
}

/// Names a unit generator as `±i` times a Pauli matrix (on the `|01⟩, |10⟩`
/// or `|00⟩, |11⟩` block for two qubits) when it is one.
pub fn generator_label(g: &CMatrix) -> String {
    let candidates: [(&str, CMatrix); 3] = [("sigma_x", pauli_x()), ("sigma_y", pauli_y()), ("sigma_z", pauli_z())];
    let blocks: Vec<(&str, Vec<usize>)> = if g.nrows() == 2 {
        alloc::vec![("", alloc::vec![0, 1])]
    } else {
        alloc::vec![("^(12)", alloc::vec![1, 2]), ("^(03)", alloc::vec![0, 3])]
    };
    for (suffix, idx) in &blocks {
        for (name, s) in &candidates {
            let mut full = CMatrix::zeros(g.nrows(), g.ncols());
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    full[(i, j)] = s[(a, b)];
                }
            }
            for sign in [1.0, -1.0] {
                if linalg::max_abs(&(g - &full * c(0.0, sign))) < 1e-6 {
                    let s = if sign > 0.0 { '+' } else { '-' };
                    return format!("{s}i {name}{suffix}");
                }
            }
        }
    }
    String::from("not a Pauli generator")
}

/// Fits `Γ(loop) = exp(G κ Σ(loop))` over probe loops on one plane.
pub fn calibrate(plane: Plane, probes: &[Loop], steps: usize, source: ConnectionSource<'_>) -> Result<CalibrationRecord> {
    if plane == Plane::Free {
        return Err(Error::UntaggedPlane);
    }
    if probes.len() < 3 {
        return Err(Error::InvalidArgument(format!("calibration needs 3 probe loops, got {}", probes.len())));
    }
    let mut sigmas = Vec::new();
    for lp in probes {
        if lp.plane() != plane {
            return Err(Error::InvalidArgument(format!("probe on {} given for {plane}", lp.plane())));
        }
        sigmas.push(sigma_area(lp)?);
    }
    for i in 0..sigmas.len() {
        for j in 0..i {
            if (sigmas[i] - sigmas[j]).abs() < 1e-9 {
                return Err(Error::InvalidArgument("probe loops need distinct areas".into()));
            }
        }
    }
    let abelian_defect = abelian_defect(plane, probes, source)?;
    if abelian_defect > ABELIAN_TOL {
        return Err(Error::NonAbelian { defect: abelian_defect });
    }
    let mut gates = Vec::new();
    let mut taken = 0;
    for lp in probes {
        let g = transport(lp, steps, source)?;
        taken = taken.max(g.steps);
        gates.push(g);
    }
    let k = gates[0].dim();
    let mut num = CMatrix::zeros(k, k);
    let mut den = 0.0;
    for (g, s) in gates.iter().zip(&sigmas) {
        num += linalg::log_unitary(&g.unitary)? * c(*s, 0.0);
        den += s * s;
    }
    let fitted = num * c(1.0 / den, 0.0);
    let fitted = (&fitted - fitted.adjoint()) * c(0.5, 0.0);
    let kappa = linalg::spectral_norm(&fitted);
    let generator = if kappa > 0.0 { &fitted * c(1.0 / kappa, 0.0) } else { fitted.clone() };
    let mut residual: f64 = 0.0;
    for (g, s) in gates.iter().zip(&sigmas) {
        let law = linalg::expm_antihermitian_dense(&(&fitted * c(*s, 0.0)));
        residual = residual.max(linalg::gate_distance(&law, &g.unitary));
    }
    if residual > CALIBRATION_TOL {
        return Err(Error::Nonlinear { residual, tolerance: CALIBRATION_TOL });
    }
    let published = plane.published_generator()?;
    Ok(CalibrationRecord {
        plane,
        generator_label: generator_label(&generator),
        published_generator_label: generator_label(&published),
        matches_published_generator: linalg::max_abs(&(&generator - &published)) < 1e-6,
        matches_published_kappa: (kappa - 1.0).abs() < 1e-6,
        generator,
        kappa,
        residual,
        abelian_defect,
        probe_sigmas: sigmas,
        steps: taken,
    })
}

/// Largest commutator among the in-plane connection components sampled at
/// the vertices and edge midpoints of the probes.
fn abelian_defect(plane: Plane, probes: &[Loop], source: ConnectionSource<'_>) -> Result<f64> {
    let (a, b) = plane.axes()?;
    let mut samples: Vec<CMatrix> = Vec::new();
    for lp in probes {
        for (p, q) in lp.segments() {
            for point in [p, p.lerp(&q, 0.5)?] {
                samples.push(source.component(&point, a)?);
                samples.push(source.component(&point, b)?);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..samples.len() {
        for j in 0..i {
            worst = worst.max(linalg::max_abs(&linalg::commutator(&samples[i], &samples[j])));
        }
    }
    Ok(worst)
}

/// Product of gates in application order (first element acts first).
pub fn gate_sequence(gates: &[HolonomyResult]) -> Result<HolonomyResult> {
    let first = gates.first().ok_or_else(|| Error::InvalidArgument("empty gate sequence".into()))?;
    let k = first.dim();
    let mut u = CMatrix::identity(k, k);
    let mut steps = 0;
    for g in gates {
        if g.dim() != k {
            return Err(Error::DimensionMismatch { expected: k, found: g.dim() });
        }
        u = &g.unitary * u;
        steps += g.steps;
    }
    Ok(HolonomyResult::from_unitary(u, Method::Sequence, steps, 1.0))
}

/// One-qubit gate on one factor of the two-qubit basis `|q₁q₂⟩`:
/// index `0` gives `g ⊗ I`, index `1` gives `I ⊗ g`.
pub fn embed(gate: &HolonomyResult, qubit: usize) -> Result<HolonomyResult> {
    if gate.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: gate.dim() });
    }
    let id = CMatrix::identity(2, 2);
    let u = match qubit {
        0 => gate.unitary.kronecker(&id),
        1 => id.kronecker(&gate.unitary),
        _ => return Err(Error::InvalidArgument(format!("qubit index {qubit} out of range"))),
    };
    Ok(HolonomyResult { unitary: u, ..gate.clone() })
}

/// Entry-wise comparison helper for complex matrices.
pub fn max_entry_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_areas() {
        let a = sigma_area(&Loop::rectangle(Plane::CI, (0.0, 1.0), (0.0, 2.0)).unwrap()).unwrap();
        assert!((a - 0.981_684_361_111_265_8).abs() < 1e-14);
        let b = sigma_area(&Loop::rectangle(Plane::CIII, (0.0, 0.5), (0.0, 1.0)).unwrap()).unwrap();
        assert!((b - 0.543_080_634_815_243_7).abs() < 1e-14);
        let r = Loop::rectangle(Plane::CI, (0.0, 1.0), (0.0, 2.0)).unwrap().reversed();
        assert!((sigma_area(&r).unwrap() + a).abs() < 1e-14);
        let flat = Loop::on_plane(Plane::CII, &[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(sigma_area(&flat).unwrap(), 0.0);
    }

    #[test]
    fn area_matches_midpoint_quadrature_for_a_triangle() {
        let lp = Loop::on_plane(Plane::CI, &[(0.0, 0.0), (1.0, 0.5), (0.2, 1.1)]).unwrap();
        let exact = sigma_area(&lp).unwrap();
        // the same area by brute-force double integration over the triangle
        let n = 2000;
        let mut acc = 0.0;
        let (a, b, cc) = ((0.0, 0.0), (1.0, 0.5), (0.2, 1.1));
        for i in 0..n {
            for j in 0..(n - i) {
                let (s, t) = ((i as f64 + 1.0 / 3.0) / n as f64, (j as f64 + 1.0 / 3.0) / n as f64);
                let p: (f64, f64) = (a.0 + s * (b.0 - a.0) + t * (cc.0 - a.0), a.1 + s * (b.1 - a.1) + t * (cc.1 - a.1));
                acc += 2.0 * (-2.0 * p.1).exp();
            }
        }
        let jac = ((b.0 - a.0) * (cc.1 - a.1) - (cc.0 - a.0) * (b.1 - a.1)) / (n * n) as f64;
        assert!((exact - acc * jac).abs() < 1e-3, "{exact} vs {}", acc * jac);
    }

    #[test]
    fn loop_validation() {
        let open = alloc::vec![Plane::CI.lift(0.0, 0.0).unwrap(), Plane::CI.lift(1.0, 0.0).unwrap()];
        assert!(matches!(Loop::new(open, Plane::CI), Err(Error::OpenPath)));
        let off = alloc::vec![
            OneQubitPoint::new(0.0, 0.1, 0.0, 0.0).into(),
            OneQubitPoint::new(0.0, 0.1, 0.0, 0.0).into()
        ];
        assert!(matches!(Loop::new(off, Plane::CI), Err(Error::VertexOffPlane { .. })));
        let bow = Loop::on_plane(Plane::CI, &[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert!(matches!(sigma_area(&bow), Err(Error::SelfIntersecting)));
        let free = Loop::stationary(ControlPoint::origin(1), 3).unwrap();
        assert!(matches!(sigma_area(&free), Err(Error::UntaggedPlane)));
    }

    #[test]
    fn transport_basics() {
        let lp = Loop::rectangle(Plane::CI, (0.0, 1.0), (0.0, 2.0)).unwrap();
        assert!(matches!(transport(&lp, 10, ConnectionSource::Analytic), Err(Error::StepUnderflow { .. })));
        let g = transport(&lp, 400, ConnectionSource::Analytic).unwrap();
        assert!(g.residual_nonunitarity < 1e-12);
        let back = transport(&lp.reversed(), 400, ConnectionSource::Analytic).unwrap();
        assert!(linalg::max_abs(&(&g.unitary * &back.unitary - CMatrix::identity(2, 2))) < 1e-12);
        let sigma = sigma_area(&lp).unwrap();
        // abelian reduction: exp(+i σ_y Σ/√2)
        let want = pauli_exponential(&pauli_y(), -sigma / 2f64.sqrt());
        assert!(linalg::gate_distance(&g.unitary, &want) < 1e-12);
        let still = Loop::stationary(ControlPoint::origin(1), 5).unwrap();
        let id = transport(&still, 100, ConnectionSource::Analytic).unwrap();
        assert!(linalg::max_abs(&(id.unitary - CMatrix::identity(2, 2))) == 0.0);
    }

    #[test]
    fn published_gate_at_quarter_pi() {
        let u = closed_form_gate(Plane::CIV, core::f64::consts::FRAC_PI_4).unwrap().unitary;
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((u[(0, 0)] - ONE).norm() < 1e-15);
        assert!((u[(1, 1)] - c(h, 0.0)).norm() < 1e-15);
        assert!((u[(1, 2)] - c(0.0, -h)).norm() < 1e-15);
        let pi = closed_form_gate(Plane::CI, core::f64::consts::PI).unwrap().unitary;
        assert!(linalg::max_abs(&(pi + CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn calibration_on_first_plane() {
        let probes: Vec<Loop> = [(0.5, 1.0), (1.0, 1.0), (1.0, 2.0)]
            .iter()
            .map(|&(x, r)| Loop::rectangle(Plane::CI, (0.0, x), (0.0, r)).unwrap())
            .collect();
        let rec = calibrate(Plane::CI, &probes, 200, ConnectionSource::Analytic).unwrap();
        assert!((rec.kappa - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert_eq!(rec.generator_label, "+i sigma_y");
        assert_eq!(rec.published_generator_label, "-i sigma_x");
        assert!(!rec.matches_published_kappa);
    }

    #[test]
    fn sequences_and_embedding() {
        let a = closed_form_gate(Plane::CI, 0.7).unwrap();
        let id = gate_sequence(&[a.clone(), a.adjoint()]).unwrap();
        assert!(linalg::max_abs(&(id.unitary - CMatrix::identity(2, 2))) < 1e-15);
        let e = embed(&a, 1).unwrap();
        assert!((e.unitary[(0, 1)] - a.unitary[(0, 1)]).norm() < 1e-15);
        assert!(e.unitary[(0, 2)].norm() == 0.0);
        let four = closed_form_gate(Plane::CIV, 0.2).unwrap();
        assert!(matches!(gate_sequence(&[a, four]), Err(Error::DimensionMismatch { .. })));
    }
}
