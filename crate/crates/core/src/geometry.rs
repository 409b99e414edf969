//! Wilczek-Zee connection `A_σ^{ij} = ⟨i|U†∂_σU|j⟩` and its field strength
//! `F_ab = ∂_a A_b − ∂_b A_a + [A_a, A_b]` in the unrotated logical basis.
//!
//! Three sources for every object:
//!
//! * `*_analytic`: closed forms checked against the numeric oracle,
//! * `*_printed`: the published matrices as written, kept for the ledger,
//! * [`ConnectionOracle`]: finite differences of `U(σ)` applied to the
//!   logical kets in a truncated space, plus a Wilson-loop plaquette.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::controls::{ControlFrame, ControlPoint, Coord};
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::jc::{logical_basis, JcParams, LogicalBasis, PairParams, TrapModel};
use crate::linalg::{self, c, cis, CMatrix, CVector, C64, I, ZERO};

const SQRT_HALF: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    pub coord: Coord,
    pub at: ControlPoint,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrix {
    pub coords: (Coord, Coord),
    pub at: ControlPoint,
    pub matrix: CMatrix,
}

impl CurvatureMatrix {
    /// Largest off-diagonal modulus.
    pub fn off_diagonal_magnitude(&self) -> f64 {
        let m = &self.matrix;
        let mut best: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    best = best.max(m[(i, j)].norm());
                }
            }
        }
        best
    }
}

fn mat2(a: C64, b: C64, cc: C64, d: C64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// 4×4 matrix with `upper` at `(i, j)` and `lower` at `(j, i)`.
fn pair4(i: usize, j: usize, upper: C64, lower: C64) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(i, j)] = upper;
    m[(j, i)] = lower;
    m
}

fn wrong_manifold(coord: Coord) -> Error {
    Error::UnknownCoordinate(coord.name())
}

/// Closed-form connection component.
///
/// One qubit, with `c = cosh 2r1`, `s = sinh 2r1`, `θ = θ1`:
///
/// ```text
/// A_x  = [[−iy, −(c − e^{−iθ}s)/√2], [(c − e^{iθ}s)/√2, −iy]]
/// A_y  = [[ ix,  i(c + e^{−iθ}s)/√2], [i(c + e^{iθ}s)/√2,  ix]]
/// A_r1 = 0
/// A_θ1 = (i/4)(cosh 4r1 − 1) diag(1, 2)
/// ```
///
/// Two qubits: `A_r2` couples `|00⟩, |11⟩` with `(e^{iθ2}/2)` below the
/// diagonal, `A_r3` couples `|01⟩, |10⟩` with `(e^{iθ3} cosh 2r2)/2`.
/// `θ2`, `θ3` have no closed form here.
pub fn connection_analytic(point: &ControlPoint, coord: Coord) -> Result<ConnectionMatrix> {
    let matrix = match (point, coord) {
        (ControlPoint::One(p), _) => {
            let (cc, s) = ((2.0 * p.r1).cosh(), (2.0 * p.r1).sinh());
            let e = cis(p.theta1);
            match coord {
                Coord::X => mat2(
                    c(0.0, -p.y),
                    -(cc - e.conj() * s) * SQRT_HALF,
                    (cc - e * s) * SQRT_HALF,
                    c(0.0, -p.y),
                ),
                Coord::Y => mat2(
                    c(0.0, p.x),
                    I * (cc + e.conj() * s) * SQRT_HALF,
                    I * (cc + e * s) * SQRT_HALF,
                    c(0.0, p.x),
                ),
                Coord::R1 => CMatrix::zeros(2, 2),
                Coord::Theta1 => {
                    let k = ((4.0 * p.r1).cosh() - 1.0) / 4.0;
                    mat2(c(0.0, k), ZERO, ZERO, c(0.0, 2.0 * k))
                }
                _ => return Err(wrong_manifold(coord)),
            }
        }
        (ControlPoint::Two(p), Coord::R2) => {
            let e = cis(p.theta2) * 0.5;
            pair4(0, 3, -e.conj(), e)
        }
        (ControlPoint::Two(p), Coord::R3) => {
            let e = cis(p.theta3) * ((2.0 * p.r2).cosh() / 2.0);
            pair4(1, 2, -e.conj(), e)
        }
        (ControlPoint::Two(_), Coord::Theta2 | Coord::Theta3) => {
            return Err(Error::InvalidArgument(format!("no closed form for A_{coord}")))
        }
        (ControlPoint::Two(_), _) => return Err(wrong_manifold(coord)),
    };
    Ok(ConnectionMatrix { coord, at: *point, matrix })
}

/// The published connection matrices, transcribed without correction.
pub fn connection_printed(point: &ControlPoint, coord: Coord) -> Result<ConnectionMatrix> {
    let matrix = match (point, coord) {
        (ControlPoint::One(p), _) => {
            let (cc, s) = ((2.0 * p.r1).cosh(), (2.0 * p.r1).sinh());
            let e = cis(p.theta1);
            match coord {
                Coord::X => mat2(
                    c(0.0, -p.y),
                    -(cc - e * s) * SQRT_HALF,
                    (cc - e.conj() * s) * SQRT_HALF,
                    c(0.0, -p.y),
                ),
                Coord::Y => mat2(
                    c(0.0, p.x),
                    I * (cc + e * s) * SQRT_HALF,
                    I * (cc + e.conj() * s) * SQRT_HALF,
                    c(0.0, p.x),
                ),
                Coord::R1 => CMatrix::zeros(2, 2),
                Coord::Theta1 => {
                    let k = ((4.0 * p.r1).cosh() - 1.0) / 4.0;
                    mat2(c(0.0, k), ZERO, ZERO, c(0.0, 1.5 * k))
                }
                _ => return Err(wrong_manifold(coord)),
            }
        }
        (ControlPoint::Two(p), Coord::R2) => {
            let e = cis(p.theta2) * SQRT_HALF;
            pair4(0, 3, -e.conj(), e)
        }
        (ControlPoint::Two(p), Coord::R3) => {
            let ch = p.r2.cosh();
            let e = cis(p.theta3) * (SQRT_HALF * (2.0 * ch * ch - 1.0));
            pair4(1, 2, -e.conj(), e)
        }
        (ControlPoint::Two(_), Coord::Theta2 | Coord::Theta3) => {
            return Err(Error::InvalidArgument(format!("no printed form for A_{coord}")))
        }
        (ControlPoint::Two(_), _) => return Err(wrong_manifold(coord)),
    };
    Ok(ConnectionMatrix { coord, at: *point, matrix })
}

/// `Σ_c A_c δ_c` over the coordinates with nonzero `δ`, analytic source.
pub fn analytic_one_form(point: &ControlPoint, delta: &[f64; 4]) -> Result<CMatrix> {
    let k = if point.qubits() == 1 { 2 } else { 4 };
    let mut out = CMatrix::zeros(k, k);
    for (coord, d) in point.coords().iter().zip(delta) {
        if *d != 0.0 {
            out += connection_analytic(point, *coord)?.matrix * c(*d, 0.0);
        }
    }
    Ok(out)
}

fn angle_is(theta: f64, target: f64) -> bool {
    let two_pi = 2.0 * core::f64::consts::PI;
    let d = num_traits::Euclid::rem_euclid(&(theta - target), &two_pi);
    d < 1e-12 || two_pi - d < 1e-12
}

/// Orders a pair as listed in the closed forms, reporting whether it was swapped.
fn canonical_pair(a: Coord, b: Coord) -> Option<((Coord, Coord), bool)> {
    const KNOWN: [(Coord, Coord); 3] =
        [(Coord::R1, Coord::X), (Coord::R1, Coord::Y), (Coord::R2, Coord::R3)];
    for k in KNOWN {
        if (a, b) == k {
            return Some((k, false));
        }
        if (b, a) == k {
            return Some((k, true));
        }
    }
    None
}

fn curvature_closed_form(point: &ControlPoint, a: Coord, b: Coord, printed: bool) -> Result<CurvatureMatrix> {
    let ((p, q), swapped) = canonical_pair(a, b).ok_or_else(|| {
        Error::OffPlane(format!("no closed form for F_{a}{b}"))
    })?;
    let matrix = match (point, p, q) {
        (ControlPoint::One(pt), Coord::R1, Coord::X) => {
            if !angle_is(pt.theta1, 0.0) {
                return Err(Error::OffPlane(format!("F_r1x needs theta1 = 0, got {}", pt.theta1)));
            }
            let m = 2f64.sqrt() * (-2.0 * pt.r1).exp();
            let sign = if printed { -1.0 } else { 1.0 };
            mat2(ZERO, c(sign * m, 0.0), c(-sign * m, 0.0), ZERO)
        }
        (ControlPoint::One(pt), Coord::R1, Coord::Y) => {
            if !angle_is(pt.theta1, core::f64::consts::PI) {
                return Err(Error::OffPlane(format!("F_r1y needs theta1 = pi, got {}", pt.theta1)));
            }
            let m = 2f64.sqrt() * (-2.0 * pt.r1).exp();
            let z = if printed { c(0.0, m) } else { c(0.0, -m) };
            mat2(ZERO, z, z, ZERO)
        }
        (ControlPoint::Two(pt), Coord::R2, Coord::R3) => {
            let scale = if printed { 2f64.sqrt() } else { 1.0 };
            let e = cis(pt.theta3) * (scale * (2.0 * pt.r2).sinh());
            pair4(1, 2, -e.conj(), e)
        }
        _ => return Err(Error::OffPlane(format!("F_{a}{b} does not live on this manifold"))),
    };
    let matrix = if swapped { -matrix } else { matrix };
    Ok(CurvatureMatrix { coords: (a, b), at: *point, matrix })
}

/// Closed-form field strength where one is known: `F_r1x` at `θ1 = 0`,
/// `F_r1y` at `θ1 = π`, `F_r2r3` anywhere on the two-qubit manifold.
///
/// ```text
/// F_r1x  =  √2 e^{−2r1} [[0, 1], [−1, 0]]
/// F_r1y  = −i√2 e^{−2r1} σ_x
/// F_r2r3 =  sinh 2r2 [[0, −e^{−iθ3}], [e^{iθ3}, 0]]   on |01⟩, |10⟩
/// ```
pub fn curvature_analytic(point: &ControlPoint, a: Coord, b: Coord) -> Result<CurvatureMatrix> {
    curvature_closed_form(point, a, b, false)
}

/// The published field strengths as written.
pub fn curvature_printed(point: &ControlPoint, a: Coord, b: Coord) -> Result<CurvatureMatrix> {
    curvature_closed_form(point, a, b, true)
}

/// `F_ab` from central differences of the analytic connection (step `h`).
pub fn curvature_from_analytic(point: &ControlPoint, a: Coord, b: Coord, h: f64) -> Result<CurvatureMatrix> {
    let conn = |p: &ControlPoint, k: Coord| connection_analytic(p, k).map(|m| m.matrix);
    let d = |along: Coord, comp: Coord| -> Result<CMatrix> {
        let plus = conn(&point.shifted(along, h)?, comp)?;
        let minus = conn(&point.shifted(along, -h)?, comp)?;
        Ok((plus - minus) * c(0.5 / h, 0.0))
    };
    let (aa, ab) = (conn(point, a)?, conn(point, b)?);
    let matrix = d(a, b)? - d(b, a)? + linalg::commutator(&aa, &ab);
    Ok(CurvatureMatrix { coords: (a, b), at: *point, matrix })
}

/// Admissible finite-difference steps.
pub const STEP_RANGE: (f64, f64) = (1e-6, 1e-3);

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Truncation keeping the oracle's error well below `1e-5` for one-qubit
/// points with `r1 ≤ r_cap` and `|α| ≤ 1`.
pub fn one_qubit_truncation(r_cap: f64) -> usize {
    let n = 12.0 * (4.0 * r_cap.max(0.0)).exp() + 40.0;
    (n.ceil() as usize).max(80)
}

/// Truncation per mode for two-qubit points with `r2 ≤ r_cap`: the two-mode
/// squeezed vacuum amplitude `tanh^k r2` is below `1e-4` at half the edge.
pub fn two_qubit_truncation(r_cap: f64) -> usize {
    let t = r_cap.max(1e-3).tanh();
    let k = (1e-4f64).ln() / t.ln();
    ((2.0 * k).ceil() as usize).max(12)
}

/// Numeric connection and curvature from the definition.
#[derive(Debug, Clone)]
pub struct ConnectionOracle {
    frame: ControlFrame,
    basis: LogicalBasis,
    h: f64,
    richardson: bool,
}

impl ConnectionOracle {
    /// Oracle on a one- or two-qubit space with `n_max` Fock levels per mode.
    pub fn new(qubits: usize, n_max: usize, h: f64) -> Result<Self> {
        if !(STEP_RANGE.0..=STEP_RANGE.1).contains(&h) {
            return Err(Error::StepOutOfRange { h });
        }
        let model = match qubits {
            1 => TrapModel::Single(JcParams::resonant(1.0)),
            2 => TrapModel::Pair(PairParams::resonant(1.0)),
            _ => return Err(Error::InvalidArgument(format!("{qubits} qubits are not supported"))),
        };
        let space = model.space(n_max)?;
        Ok(ConnectionOracle {
            frame: ControlFrame::for_space(&space)?,
            basis: logical_basis(&model, &space)?,
            h,
            richardson: true,
        })
    }

    /// Plain central differences instead of Richardson extrapolation.
    pub fn without_richardson(mut self) -> Self {
        self.richardson = false;
        self
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn space(&self) -> &FockSpace {
        self.basis.space()
    }

    pub fn qubits(&self) -> usize {
        self.frame.qubits()
    }

    fn check(&self, point: &ControlPoint) -> Result<()> {
        if point.qubits() != self.qubits() {
            return Err(Error::SpaceMismatch("point does not match the oracle".into()));
        }
        if !point.is_finite() {
            return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// Columns `U(σ)|i⟩`.
    pub fn frame_vectors(&self, point: &ControlPoint) -> Result<CMatrix> {
        let cols: Result<Vec<CVector>> =
            self.basis.kets().iter().map(|k| self.frame.transformed(point, k)).collect();
        Ok(CMatrix::from_columns(&cols?))
    }

    fn central(&self, point: &ControlPoint, coord: Coord, h: f64) -> Result<CMatrix> {
        let plus = self.frame_vectors(&point.shifted(coord, h)?)?;
        let minus = self.frame_vectors(&point.shifted(coord, -h)?)?;
        Ok((plus - minus) * c(0.5 / h, 0.0))
    }

    /// `⟨i|U†∂_coord U|j⟩` by central differences.
    pub fn connection(&self, point: &ControlPoint, coord: Coord) -> Result<ConnectionMatrix> {
        self.check(point)?;
        point.get(coord)?;
        let here = self.frame_vectors(point)?;
        let d = if self.richardson {
            let fine = self.central(point, coord, self.h)?;
            let coarse = self.central(point, coord, 2.0 * self.h)?;
            (fine * c(4.0, 0.0) - coarse) * c(1.0 / 3.0, 0.0)
        } else {
            self.central(point, coord, self.h)?
        };
        Ok(ConnectionMatrix { coord, at: *point, matrix: here.adjoint() * d })
    }

    /// `F_ab` from differences of [`ConnectionOracle::connection`] with step `dh`.
    pub fn curvature(&self, point: &ControlPoint, a: Coord, b: Coord, dh: f64) -> Result<CurvatureMatrix> {
        let d = |along: Coord, comp: Coord| -> Result<CMatrix> {
            let plus = self.connection(&point.shifted(along, dh)?, comp)?.matrix;
            let minus = self.connection(&point.shifted(along, -dh)?, comp)?.matrix;
            Ok((plus - minus) * c(0.5 / dh, 0.0))
        };
        let aa = self.connection(point, a)?.matrix;
        let ab = self.connection(point, b)?.matrix;
        let matrix = d(a, b)? - d(b, a)? + linalg::commutator(&aa, &ab);
        Ok(CurvatureMatrix { coords: (a, b), at: *point, matrix })
    }

    /// Product of overlaps `⟨U(σ_{k+1})i|U(σ_k)j⟩` along a closed polyline,
    /// later steps on the left.
    pub fn wilson_loop(&self, vertices: &[ControlPoint], substeps: usize) -> Result<CMatrix> {
        if vertices.len() < 2 {
            return Err(Error::OpenPath);
        }
        let k = self.basis.dim();
        let mut w = CMatrix::identity(k, k);
        let mut prev = self.frame_vectors(&vertices[0])?;
        for pair in vertices.windows(2) {
            for s in 1..=substeps.max(1) {
                let p = pair[0].lerp(&pair[1], s as f64 / substeps.max(1) as f64)?;
                let next = self.frame_vectors(&p)?;
                w = next.adjoint() * &prev * w;
                prev = next;
            }
        }
        Ok(w)
    }

    /// `F_ab ≈ −log(W)/side²` for the counter-clockwise square of the given
    /// side in the `(a, b)` plane with its lower-left corner at `point`.
    pub fn plaquette(&self, point: &ControlPoint, a: Coord, b: Coord, side: f64, substeps: usize) -> Result<CurvatureMatrix> {
        self.check(point)?;
        let p1 = point.shifted(a, side)?;
        let p2 = p1.shifted(b, side)?;
        let p3 = point.shifted(b, side)?;
        let w = self.wilson_loop(&[*point, p1, p2, p3, *point], substeps)?;
        let log = linalg::log_near_identity(&w)?;
        let anti = (&log - log.adjoint()) * c(0.5, 0.0);
        Ok(CurvatureMatrix { coords: (a, b), at: *point, matrix: anti * c(-1.0 / (side * side), 0.0) })
    }
}

/// One-shot numeric connection with a truncation sized for the point.
pub fn connection_numeric(point: &ControlPoint, coord: Coord, h: f64) -> Result<ConnectionMatrix> {
    let n = match point {
        ControlPoint::One(p) => one_qubit_truncation(p.r1.abs()),
        ControlPoint::Two(p) => two_qubit_truncation(p.r2.abs()),
    };
    ConnectionOracle::new(point.qubits(), n, h)?.connection(point, coord)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{OneQubitPoint, TwoQubitPoint};

    fn one(x: f64, y: f64, r1: f64, t: f64) -> ControlPoint {
        OneQubitPoint::new(x, y, r1, t).into()
    }

    #[test]
    fn analytic_components_are_anti_hermitian() {
        let pts = [one(0.3, -0.2, 0.7, 1.1), one(0.0, 0.0, 2.5, 4.0)];
        for p in pts {
            for k in Coord::ONE_QUBIT {
                let a = connection_analytic(&p, k).unwrap();
                assert!(linalg::anti_hermiticity_defect(&a.matrix) < 1e-14);
            }
        }
        let q: ControlPoint = TwoQubitPoint::new(0.4, 0.7, 0.2, 1.9).into();
        for k in [Coord::R2, Coord::R3] {
            assert!(linalg::anti_hermiticity_defect(&connection_analytic(&q, k).unwrap().matrix) < 1e-14);
        }
        assert!(connection_analytic(&q, Coord::X).is_err());
    }

    #[test]
    fn printed_theta_component() {
        let a = connection_printed(&one(0.0, 0.0, 0.5, 0.0), Coord::Theta1).unwrap();
        let k = (2f64.cosh() - 1.0) / 4.0;
        assert!((a.matrix[(0, 0)].im - k).abs() < 1e-15);
        assert!((a.matrix[(1, 1)].im - 1.5 * k).abs() < 1e-15);
        let b = connection_printed(&TwoQubitPoint::new(0.4, 0.0, 0.0, 0.0).into(), Coord::R3).unwrap();
        assert!((b.matrix[(2, 1)].re - 0.8f64.cosh() * SQRT_HALF).abs() < 1e-15);
    }

    #[test]
    fn printed_and_engine_agree_on_real_axis() {
        for t in [0.0, core::f64::consts::PI] {
            let p = one(0.2, 0.1, 0.6, t);
            for k in Coord::ONE_QUBIT.iter().take(3) {
                let d = connection_printed(&p, *k).unwrap().matrix - connection_analytic(&p, *k).unwrap().matrix;
                assert!(linalg::max_abs(&d) < 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_curvatures() {
        let f = curvature_analytic(&one(0.0, 0.0, 1.0, 0.0), Coord::R1, Coord::X).unwrap();
        assert!((f.off_diagonal_magnitude() - 0.191_392_993_020_821_9).abs() < 1e-12);
        let g = curvature_analytic(&one(0.0, 0.0, 1.0, 0.0), Coord::X, Coord::R1).unwrap();
        assert!(linalg::max_abs(&(f.matrix + g.matrix)) < 1e-15);
        assert!(curvature_analytic(&one(0.0, 0.0, 1.0, 0.3), Coord::R1, Coord::X).is_err());
        let z = curvature_analytic(&TwoQubitPoint::default().into(), Coord::R2, Coord::R3).unwrap();
        assert!(linalg::max_abs(&z.matrix) == 0.0);
        let q = curvature_printed(&TwoQubitPoint::new(0.5, 0.0, 0.0, 0.0).into(), Coord::R2, Coord::R3).unwrap();
        assert!((q.off_diagonal_magnitude() - 2f64.sqrt() * 1f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_curvature_matches_differences_of_connection() {
        for (p, a, b) in [
            (one(0.3, 0.2, 0.4, 0.0), Coord::R1, Coord::X),
            (one(0.0, -0.5, 0.9, core::f64::consts::PI), Coord::R1, Coord::Y),
            (TwoQubitPoint::new(0.6, 0.0, 0.3, 1.2).into(), Coord::R2, Coord::R3),
        ] {
            let exact = curvature_analytic(&p, a, b).unwrap().matrix;
            let fd = curvature_from_analytic(&p, a, b, 1e-5).unwrap().matrix;
            assert!(linalg::max_abs(&(exact - fd)) < 1e-8);
        }
    }

    #[test]
    fn oracle_rejects_bad_steps() {
        assert!(matches!(ConnectionOracle::new(1, 20, 1e-8), Err(Error::StepOutOfRange { .. })));
        assert!(matches!(ConnectionOracle::new(1, 20, 1e-2), Err(Error::StepOutOfRange { .. })));
    }

    #[test]
    fn oracle_at_origin() {
        let o = ConnectionOracle::new(1, 40, 1e-4).unwrap();
        let a = o.connection(&ControlPoint::origin(1), Coord::X).unwrap();
        let want = mat2(ZERO, c(-SQRT_HALF, 0.0), c(SQRT_HALF, 0.0), ZERO);
        assert!(linalg::max_abs(&(a.matrix - want)) < 1e-9);
        let t = o.connection(&ControlPoint::origin(1), Coord::Theta1).unwrap();
        assert!(linalg::max_abs(&t.matrix) < 1e-9);
    }

    #[test]
    fn oracle_matches_analytic_at_moderate_squeeze() {
        let p = one(0.3, 0.2, 0.4, 1.1);
        let o = ConnectionOracle::new(1, one_qubit_truncation(0.4), 1e-4).unwrap();
        for k in Coord::ONE_QUBIT {
            let d = o.connection(&p, k).unwrap().matrix - connection_analytic(&p, k).unwrap().matrix;
            assert!(linalg::max_abs(&d) < 1e-6, "{k}: {}", linalg::max_abs(&d));
        }
        let q: ControlPoint = TwoQubitPoint::new(0.4, 0.7, 0.5, 2.0).into();
        let o = ConnectionOracle::new(2, two_qubit_truncation(0.4), 1e-4).unwrap();
        for k in [Coord::R2, Coord::R3] {
            let d = o.connection(&q, k).unwrap().matrix - connection_analytic(&q, k).unwrap().matrix;
            assert!(linalg::max_abs(&d) < 1e-6, "{k}: {}", linalg::max_abs(&d));
        }
    }
}
