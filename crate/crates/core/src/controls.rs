//! The control manifold and its iso-spectral unitaries.
//!
//! One qubit is steered by `U(σ) = D(α) S(ε)` with `α = x + iy`,
//! `ε = r1 e^{iθ1}`; two qubits by `U(σ) = N(ξ) M(ζ)` with
//! `ζ = r2 e^{iθ2}`, `ξ = r3 e^{iθ3}`.
//!
//! Generator conventions:
//!
//! ```text
//! D(α) = exp(α a† − ᾱ a)
//! S(ε) = exp(ε a†² − ε̄ a²)            (no factor 1/2)
//! M(ζ) = exp(ζ a₁†a₂† − ζ̄ a₁a₂)
//! N(ξ) = exp(ξ a₁†a₂ − ξ̄ a₁a₂†)
//! ```
//!
//! The squeeze carries no ½, so `S(r1)` squeezes the `P` quadrature variance
//! by `e^{-4 r1}`. This is the convention in which `S†∂_{r1}S = e^{iθ1}a†² − e^{−iθ1}a²`
//! and the `cosh 2r1`, `sinh 2r1` entries of the connection come out right.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{expm_antihermitian, ladder_product_entries, FockOperator, FockSpace};
use crate::linalg::{cis, BlockEigen, CVector, C64, I};

/// Coordinates on the one-qubit manifold `(x, y, r1, θ1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OneQubitPoint {
    pub x: f64,
    pub y: f64,
    pub r1: f64,
    pub theta1: f64,
}

impl OneQubitPoint {
    pub fn new(x: f64, y: f64, r1: f64, theta1: f64) -> Self {
        OneQubitPoint { x, y, r1, theta1 }
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.x, self.y)
    }

    pub fn epsilon(&self) -> C64 {
        cis(self.theta1) * self.r1
    }
}

/// Coordinates on the two-qubit manifold `(r2, θ2, r3, θ3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoQubitPoint {
    pub r2: f64,
    pub theta2: f64,
    pub r3: f64,
    pub theta3: f64,
}

impl TwoQubitPoint {
    pub fn new(r2: f64, theta2: f64, r3: f64, theta3: f64) -> Self {
        TwoQubitPoint { r2, theta2, r3, theta3 }
    }

    pub fn zeta(&self) -> C64 {
        cis(self.theta2) * self.r2
    }

    pub fn xi(&self) -> C64 {
        cis(self.theta3) * self.r3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coord {
    X,
    Y,
    R1,
    Theta1,
    R2,
    Theta2,
    R3,
    Theta3,
}

impl Coord {
    pub const ONE_QUBIT: [Coord; 4] = [Coord::X, Coord::Y, Coord::R1, Coord::Theta1];
    pub const TWO_QUBIT: [Coord; 4] = [Coord::R2, Coord::Theta2, Coord::R3, Coord::Theta3];

    pub fn name(self) -> &'static str {
        match self {
            Coord::X => "x",
            Coord::Y => "y",
            Coord::R1 => "r1",
            Coord::Theta1 => "theta1",
            Coord::R2 => "r2",
            Coord::Theta2 => "theta2",
            Coord::R3 => "r3",
            Coord::Theta3 => "theta3",
        }
    }

    pub fn qubits(self) -> usize {
        if Self::ONE_QUBIT.contains(&self) {
            1
        } else {
            2
        }
    }
}

impl core::fmt::Display for Coord {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// A point on either control manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "manifold", rename_all = "snake_case")]
pub enum ControlPoint {
    One(OneQubitPoint),
    Two(TwoQubitPoint),
}

impl From<OneQubitPoint> for ControlPoint {
    fn from(p: OneQubitPoint) -> Self {
        ControlPoint::One(p)
    }
}

impl From<TwoQubitPoint> for ControlPoint {
    fn from(p: TwoQubitPoint) -> Self {
        ControlPoint::Two(p)
    }
}

impl ControlPoint {
    pub fn origin(qubits: usize) -> Self {
        if qubits == 2 {
            ControlPoint::Two(TwoQubitPoint::default())
        } else {
            ControlPoint::One(OneQubitPoint::default())
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            ControlPoint::One(_) => 1,
            ControlPoint::Two(_) => 2,
        }
    }

    pub fn coords(&self) -> [Coord; 4] {
        match self {
            ControlPoint::One(_) => Coord::ONE_QUBIT,
            ControlPoint::Two(_) => Coord::TWO_QUBIT,
        }
    }

    /// Coordinates in [`ControlPoint::coords`] order.
    pub fn values(&self) -> [f64; 4] {
        match *self {
            ControlPoint::One(p) => [p.x, p.y, p.r1, p.theta1],
            ControlPoint::Two(p) => [p.r2, p.theta2, p.r3, p.theta3],
        }
    }

    fn from_values(qubits: usize, v: [f64; 4]) -> Self {
        if qubits == 2 {
            ControlPoint::Two(TwoQubitPoint::new(v[0], v[1], v[2], v[3]))
        } else {
            ControlPoint::One(OneQubitPoint::new(v[0], v[1], v[2], v[3]))
        }
    }

    fn slot(&self, coord: Coord) -> Result<usize> {
        self.coords()
            .iter()
            .position(|&c| c == coord)
            .ok_or(Error::UnknownCoordinate(coord.name()))
    }

    pub fn get(&self, coord: Coord) -> Result<f64> {
        Ok(self.values()[self.slot(coord)?])
    }

    pub fn with(&self, coord: Coord, value: f64) -> Result<Self> {
        let mut v = self.values();
        v[self.slot(coord)?] = value;
        Ok(Self::from_values(self.qubits(), v))
    }

    pub fn shifted(&self, coord: Coord, delta: f64) -> Result<Self> {
        self.with(coord, self.get(coord)? + delta)
    }

    /// `self + s (other - self)`, coordinate-wise.
    pub fn lerp(&self, other: &Self, s: f64) -> Result<Self> {
        let d = self.delta(other)?;
        let mut v = self.values();
        for k in 0..4 {
            v[k] += s * d[k];
        }
        Ok(Self::from_values(self.qubits(), v))
    }

    /// `other - self`, coordinate-wise.
    pub fn delta(&self, other: &Self) -> Result<[f64; 4]> {
        if self.qubits() != other.qubits() {
            return Err(Error::SpaceMismatch("points live on different manifolds".into()));
        }
        let (a, b) = (self.values(), other.values());
        Ok([b[0] - a[0], b[1] - a[1], b[2] - a[2], b[3] - a[3]])
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

fn require_modes(space: &FockSpace, modes: usize, what: &str) -> Result<()> {
    if space.modes() != modes {
        return Err(Error::SpaceMismatch(format!(
            "{what} needs a {modes}-mode space, got {} mode(s)",
            space.modes()
        )));
    }
    Ok(())
}

/// `z · A − z̄ · A†` with `A` a ladder product (first factor leftmost).
fn two_term_generator(space: &FockSpace, z: C64, raise: &[(usize, bool)]) -> Result<FockOperator> {
    let lower: Vec<(usize, bool)> = raise.iter().rev().map(|&(m, r)| (m, !r)).collect();
    let mut entries = ladder_product_entries(space, raise, z)?;
    entries.extend(ladder_product_entries(space, &lower, -z.conj())?);
    Ok(FockOperator::from_entries(*space, &entries))
}

/// `D(α) = exp(α a† − ᾱ a)` on a one-mode space (identity on the atom).
pub fn displacement(alpha: C64, space: &FockSpace) -> Result<FockOperator> {
    require_modes(space, 1, "displacement")?;
    expm_antihermitian(&two_term_generator(space, alpha, &[(0, true)])?)
}

/// `S(ε) = exp(ε a†² − ε̄ a²)`.
pub fn squeeze(epsilon: C64, space: &FockSpace) -> Result<FockOperator> {
    require_modes(space, 1, "squeeze")?;
    expm_antihermitian(&two_term_generator(space, epsilon, &[(0, true), (0, true)])?)
}

/// `M(ζ) = exp(ζ a₁†a₂† − ζ̄ a₁a₂)`.
pub fn two_mode_squeeze(zeta: C64, space: &FockSpace) -> Result<FockOperator> {
    require_modes(space, 2, "two-mode squeeze")?;
    expm_antihermitian(&two_term_generator(space, zeta, &[(0, true), (1, true)])?)
}

/// `N(ξ) = exp(ξ a₁†a₂ − ξ̄ a₁a₂†)`.
pub fn two_mode_displace(xi: C64, space: &FockSpace) -> Result<FockOperator> {
    require_modes(space, 2, "two-mode displacement")?;
    expm_antihermitian(&two_term_generator(space, xi, &[(0, true), (1, false)])?)
}

/// `U(σ) = D(α)S(ε)` or `U(σ) = N(ξ)M(ζ)` as a dense operator.
pub fn control_unitary(point: &ControlPoint, space: &FockSpace) -> Result<FockOperator> {
    match point {
        ControlPoint::One(p) => {
            require_modes(space, 1, "one-qubit control")?;
            Ok(&displacement(p.alpha(), space)? * &squeeze(p.epsilon(), space)?)
        }
        ControlPoint::Two(p) => {
            require_modes(space, 2, "two-qubit control")?;
            Ok(&two_mode_displace(p.xi(), space)? * &two_mode_squeeze(p.zeta(), space)?)
        }
    }
}

/// Spectral data of the two real-amplitude generators of one mode.
/// `U(σ)` is applied to states as phase rotations sandwiching fixed
/// one-parameter groups:
///
/// ```text
/// D(ρ e^{iφ}) = R(φ) exp(ρ (a† − a)) R(−φ),       R(φ) = e^{iφ a†a}
/// S(r e^{iθ}) = R(θ/2) exp(r (a†² − a²)) R(−θ/2)
/// ```
#[derive(Debug, Clone)]
pub struct SingleModeFrame {
    n_max: usize,
    displace: BlockEigen,
    squeeze: BlockEigen,
    r1_cap: f64,
}

/// Same idea for two modes, with `R₁(φ) = e^{iφ a₁†a₁}`.
#[derive(Debug, Clone)]
pub struct TwoModeFrame {
    n_max: usize,
    squeeze: BlockEigen,
    mix: BlockEigen,
}

/// Hermitian `i K` for a real-amplitude generator `K = A − A†`.
fn hermitian_of(space: &FockSpace, raise: &[(usize, bool)]) -> Result<BlockEigen> {
    let k = two_term_generator(space, C64::new(1.0, 0.0), raise)?;
    let mut entries = Vec::new();
    let m = k.matrix();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.norm() != 0.0 {
                entries.push((i, j, v * I));
            }
        }
    }
    Ok(BlockEigen::from_entries(space.dim(), &entries))
}

fn rotate_mode(v: &mut [C64], n_max: usize, stride: usize, phi: f64) {
    if phi == 0.0 {
        return;
    }
    let phases: Vec<C64> = (0..n_max).map(|n| cis(phi * n as f64)).collect();
    for (i, z) in v.iter_mut().enumerate() {
        *z *= phases[(i / stride) % n_max];
    }
}

impl SingleModeFrame {
    pub fn new(n_max: usize) -> Result<Self> {
        let space = FockSpace::oscillator(n_max)?;
        Ok(SingleModeFrame {
            n_max,
            displace: hermitian_of(&space, &[(0, true)])?,
            squeeze: hermitian_of(&space, &[(0, true), (0, true)])?,
            r1_cap: f64::INFINITY,
        })
    }

    /// Refuse to squeeze states beyond `|r1| > cap`.
    pub fn with_r1_cap(mut self, cap: f64) -> Self {
        self.r1_cap = cap;
        self
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn check(&self, p: &OneQubitPoint) -> Result<()> {
        if p.r1.abs() > self.r1_cap {
            return Err(Error::CapExceeded { r: p.r1, cap: self.r1_cap });
        }
        Ok(())
    }

    fn displace(&self, v: &mut [C64], alpha: C64) {
        let (rho, phi) = (alpha.norm(), alpha.arg());
        if rho == 0.0 {
            return;
        }
        rotate_mode(v, self.n_max, 1, -phi);
        self.displace.apply_exp_minus_i(rho, v);
        rotate_mode(v, self.n_max, 1, phi);
    }

    fn squeeze(&self, v: &mut [C64], r: f64, theta: f64) {
        if r == 0.0 {
            return;
        }
        rotate_mode(v, self.n_max, 1, -theta / 2.0);
        self.squeeze.apply_exp_minus_i(r, v);
        rotate_mode(v, self.n_max, 1, theta / 2.0);
    }

    /// `v <- D(α) S(ε) v` on a mode-space vector.
    pub fn apply(&self, p: &OneQubitPoint, v: &mut [C64]) -> Result<()> {
        self.check(p)?;
        self.squeeze(v, p.r1, p.theta1);
        self.displace(v, p.alpha());
        Ok(())
    }

    /// `v <- S(ε)† D(α)† v`.
    pub fn apply_adjoint(&self, p: &OneQubitPoint, v: &mut [C64]) -> Result<()> {
        self.check(p)?;
        self.displace(v, -p.alpha());
        self.squeeze(v, -p.r1, p.theta1);
        Ok(())
    }
}

impl TwoModeFrame {
    pub fn new(n_max: usize) -> Result<Self> {
        let space = FockSpace::new(n_max, 2, 0)?;
        Ok(TwoModeFrame {
            n_max,
            squeeze: hermitian_of(&space, &[(0, true), (1, true)])?,
            mix: hermitian_of(&space, &[(0, true), (1, false)])?,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn group(&self, which: &BlockEigen, v: &mut [C64], r: f64, theta: f64) {
        if r == 0.0 {
            return;
        }
        // mode 1 is the slow index, stride n_max
        rotate_mode(v, self.n_max, self.n_max, -theta);
        which.apply_exp_minus_i(r, v);
        rotate_mode(v, self.n_max, self.n_max, theta);
    }

    /// `v <- N(ξ) M(ζ) v`.
    pub fn apply(&self, p: &TwoQubitPoint, v: &mut [C64]) {
        self.group(&self.squeeze, v, p.r2, p.theta2);
        self.group(&self.mix, v, p.r3, p.theta3);
    }

    /// `v <- M(ζ)† N(ξ)† v`.
    pub fn apply_adjoint(&self, p: &TwoQubitPoint, v: &mut [C64]) {
        self.group(&self.mix, v, -p.r3, p.theta3);
        self.group(&self.squeeze, v, -p.r2, p.theta2);
    }
}

/// Applies `I_internal ⊗ U(σ)` to full-space states.
#[derive(Debug, Clone)]
pub enum ControlFrame {
    One(SingleModeFrame),
    Two(TwoModeFrame),
}

impl ControlFrame {
    /// Frame matching the modes of `space`.
    pub fn for_space(space: &FockSpace) -> Result<Self> {
        match space.modes() {
            1 => Ok(ControlFrame::One(SingleModeFrame::new(space.n_max())?)),
            _ => Ok(ControlFrame::Two(TwoModeFrame::new(space.n_max())?)),
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            ControlFrame::One(_) => 1,
            ControlFrame::Two(_) => 2,
        }
    }

    pub fn mode_dim(&self) -> usize {
        match self {
            ControlFrame::One(f) => f.n_max,
            ControlFrame::Two(f) => f.n_max * f.n_max,
        }
    }

    fn each_chunk(&self, state: &mut [C64], mut f: impl FnMut(&mut [C64]) -> Result<()>) -> Result<()> {
        let md = self.mode_dim();
        if !state.len().is_multiple_of(md) {
            return Err(Error::DimensionMismatch { expected: md, found: state.len() });
        }
        for chunk in state.chunks_mut(md) {
            if chunk.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                f(chunk)?;
            }
        }
        Ok(())
    }

    /// `state <- (I ⊗ U(σ)) state`.
    pub fn apply(&self, point: &ControlPoint, state: &mut [C64]) -> Result<()> {
        match (self, point) {
            (ControlFrame::One(f), ControlPoint::One(p)) => self.each_chunk(state, |c| f.apply(p, c)),
            (ControlFrame::Two(f), ControlPoint::Two(p)) => self.each_chunk(state, |c| {
                f.apply(p, c);
                Ok(())
            }),
            _ => Err(Error::SpaceMismatch("point does not match the frame".into())),
        }
    }

    /// `state <- (I ⊗ U(σ)†) state`.
    pub fn apply_adjoint(&self, point: &ControlPoint, state: &mut [C64]) -> Result<()> {
        match (self, point) {
            (ControlFrame::One(f), ControlPoint::One(p)) => {
                self.each_chunk(state, |c| f.apply_adjoint(p, c))
            }
            (ControlFrame::Two(f), ControlPoint::Two(p)) => self.each_chunk(state, |c| {
                f.apply_adjoint(p, c);
                Ok(())
            }),
            _ => Err(Error::SpaceMismatch("point does not match the frame".into())),
        }
    }

    /// `U(σ)|v⟩` as a new vector.
    pub fn transformed(&self, point: &ControlPoint, v: &CVector) -> Result<CVector> {
        let mut out = v.clone();
        self.apply(point, out.as_mut_slice())?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, creation, number, BasisLabel, Level};
    use crate::linalg::{c, max_abs, CMatrix, ONE};

    fn vac(n: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[0] = ONE;
        v
    }

    #[test]
    fn identities_at_zero() {
        let s = FockSpace::single_ion(6).unwrap();
        let id = CMatrix::identity(12, 12);
        assert!(max_abs(&(displacement(C64::new(0.0, 0.0), &s).unwrap().into_matrix() - &id)) < 1e-15);
        assert!(max_abs(&(squeeze(C64::new(0.0, 0.0), &s).unwrap().into_matrix() - &id)) < 1e-15);
        let t = FockSpace::new(5, 2, 0).unwrap();
        let id2 = CMatrix::identity(25, 25);
        assert!(max_abs(&(two_mode_squeeze(C64::new(0.0, 0.0), &t).unwrap().into_matrix() - &id2)) < 1e-15);
        assert!(max_abs(&(two_mode_displace(C64::new(0.0, 0.0), &t).unwrap().into_matrix() - &id2)) < 1e-15);
        let u = control_unitary(&ControlPoint::origin(1), &s).unwrap();
        assert!(max_abs(&(u.into_matrix() - id)) < 1e-15);
    }

    #[test]
    fn coherent_state_overlap() {
        // <0|D(1)|0> = e^{-1/2}, frozen from the series sum_n e^{-1/2}/n! ...
        // only the n=0 term contributes to the vacuum overlap
        let s = FockSpace::oscillator(40).unwrap();
        let d = displacement(C64::new(1.0, 0.0), &s).unwrap();
        assert!((d.matrix()[(0, 0)].re - 0.606_530_659_712_633_4).abs() < 1e-12);
        // coefficients of D(α)|0> against the Poisson amplitudes e^{-|α|²/2} α^n / sqrt(n!)
        let alpha = C64::new(0.7, -0.4);
        let d = displacement(alpha, &s).unwrap();
        let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..15 {
            assert!((d.matrix()[(n, 0)] - amp).norm() < 1e-12, "n = {n}");
            amp = amp * alpha / ((n + 1) as f64).sqrt();
        }
    }

    #[test]
    fn displacement_group_inverse() {
        let s = FockSpace::oscillator(60).unwrap();
        for alpha in [C64::new(2.0, 0.0), C64::new(-1.0, 1.5), C64::new(0.3, -1.9)] {
            let p = &displacement(alpha, &s).unwrap() * &displacement(-alpha, &s).unwrap();
            assert!(p.unitarity_defect() < 1e-10);
            assert!(max_abs(&(p.into_matrix() - CMatrix::identity(60, 60))) < 1e-10);
        }
    }

    #[test]
    fn squeeze_generator_by_finite_difference() {
        let n = 60;
        let s = FockSpace::oscillator(n).unwrap();
        let h = 1e-5;
        let at = |r: f64| squeeze(C64::new(r, 0.0), &s).unwrap().into_matrix();
        let fd = at(0.3).adjoint() * (at(0.3 + h) - at(0.3 - h)) * c(0.5 / h, 0.0);
        let a = annihilation(&s, 0).unwrap();
        let ad = creation(&s, 0).unwrap();
        let gen = (&ad * &ad).checked_sub(&(&a * &a)).unwrap().into_matrix();
        let low = n / 2;
        let diff = (fd - gen).view((0, 0), (low, low)).into_owned();
        assert!(max_abs(&diff) < 1e-5, "{}", max_abs(&diff));
    }

    #[test]
    fn squeezed_quadrature_variance() {
        // X = (a + a†)/sqrt2 has vacuum variance 1/2; S(r) stretches it by e^{4r}
        let n = 80;
        let s = FockSpace::oscillator(n).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let x = (&a + &a.adjoint()).scale(c(0.5f64.sqrt(), 0.0));
        let psi = squeeze(C64::new(0.25, 0.0), &s).unwrap().apply(&vac(n));
        let mean = psi.dotc(&x.apply(&psi)).re;
        let second = psi.dotc(&x.apply(&x.apply(&psi))).re;
        let ratio = (second - mean * mean) / 0.5;
        assert!((ratio - 1.0f64.exp()).abs() < 1e-10, "{ratio}");
    }

    #[test]
    fn two_mode_squeezed_vacuum_overlap() {
        let n = 40;
        let s = FockSpace::new(n, 2, 0).unwrap();
        let m = two_mode_squeeze(C64::new(1.0, 0.0), &s).unwrap();
        // <00|M|00> = 1/cosh 1
        assert!((m.matrix()[(0, 0)].re - 0.648_054_273_663_885_4).abs() < 1e-10);
    }

    #[test]
    fn two_mode_displace_conserves_number_and_swaps() {
        let n = 6;
        let s = FockSpace::new(n, 2, 0).unwrap();
        let total = (&number(&s, 0).unwrap() + &number(&s, 1).unwrap()).into_matrix();
        let nx = two_mode_displace(cis(0.4) * 0.9, &s).unwrap().into_matrix();
        assert!(max_abs(&(&nx * &total - &total * &nx)) < 1e-10);
        let swap = two_mode_displace(C64::new(core::f64::consts::FRAC_PI_2, 0.0), &s).unwrap();
        let one_zero = s.index(&BasisLabel::new([Level::Ground; 2], [1, 0])).unwrap();
        let zero_one = s.index(&BasisLabel::new([Level::Ground; 2], [0, 1])).unwrap();
        assert!((swap.matrix()[(zero_one, one_zero)].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn control_unitary_reduces_to_single_factor() {
        let s = FockSpace::single_ion(20).unwrap();
        let u = control_unitary(&OneQubitPoint::new(0.5, 0.0, 0.0, 0.0).into(), &s).unwrap();
        let d = displacement(C64::new(0.5, 0.0), &s).unwrap();
        assert!(max_abs(&(u.into_matrix() - d.into_matrix())) < 1e-13);
        let t = FockSpace::new(8, 2, 0).unwrap();
        let u = control_unitary(&TwoQubitPoint::new(0.3, 0.0, 0.0, 0.0).into(), &t).unwrap();
        let m = two_mode_squeeze(C64::new(0.3, 0.0), &t).unwrap();
        assert!(max_abs(&(u.into_matrix() - m.into_matrix())) < 1e-13);
        assert!(control_unitary(&ControlPoint::origin(2), &s).is_err());
    }

    #[test]
    fn frame_matches_dense_operators() {
        let s = FockSpace::single_ion(30).unwrap();
        let frame = ControlFrame::for_space(&s).unwrap();
        let p: ControlPoint = OneQubitPoint::new(0.3, -0.4, 0.2, 1.3).into();
        let u = control_unitary(&p, &s).unwrap();
        for col in [0usize, 1, 31, 45] {
            let mut v = CVector::zeros(60);
            v[col] = ONE;
            let dense = u.apply(&v);
            frame.apply(&p, v.as_mut_slice()).unwrap();
            assert!((&v - &dense).camax() < 1e-12);
            frame.apply_adjoint(&p, v.as_mut_slice()).unwrap();
            assert!((v[col] - ONE).norm() < 1e-12);
        }
        let t = FockSpace::ion_pair(7).unwrap();
        let frame = ControlFrame::for_space(&t).unwrap();
        let q: ControlPoint = TwoQubitPoint::new(0.4, 0.7, 0.9, 2.1).into();
        let u = control_unitary(&q, &FockSpace::new(7, 2, 0).unwrap()).unwrap();
        let mut v = CVector::zeros(t.dim());
        v[49 * 2 + 8] = ONE;
        let mut w = CVector::zeros(49);
        w[8] = ONE;
        frame.apply(&q, v.as_mut_slice()).unwrap();
        let dense = u.apply(&w);
        assert!((v.rows(98, 49) - dense).camax() < 1e-12);
    }

    #[test]
    fn cap_is_enforced_for_states() {
        let f = SingleModeFrame::new(10).unwrap().with_r1_cap(0.5);
        let mut v = vec_zero(10);
        assert!(matches!(
            f.apply(&OneQubitPoint::new(0.0, 0.0, 0.7, 0.0), &mut v),
            Err(Error::CapExceeded { .. })
        ));
    }

    fn vec_zero(n: usize) -> Vec<C64> {
        alloc::vec![C64::new(0.0, 0.0); n]
    }

    #[test]
    fn coordinates_access() {
        let p = ControlPoint::from(OneQubitPoint::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(p.get(Coord::R1).unwrap(), 3.0);
        assert!(p.get(Coord::R2).is_err());
        let q = p.shifted(Coord::Theta1, 0.5).unwrap();
        assert_eq!(q.get(Coord::Theta1).unwrap(), 4.5);
        assert_eq!(p.lerp(&q, 0.5).unwrap().get(Coord::Theta1).unwrap(), 4.25);
    }
}
