//! Resonant Jaynes-Cummings model, its degenerate qubit and the readout pulse.
//!
//! `H = ν a†a + (g/2) σ_z + g (σ₊a + a†σ₋) + (ω₁ + g/2)`, so that `|g,0⟩` sits
//! at energy `ω₁`. At `g = ν` the dressed doublets are
//! `|n,±⟩ = (|g,n+1⟩ ± |e,n⟩)/√2` with `E_{n±} = ω₁ + ν(n+1) ± ν√(n+1)`, and
//! `|g,0⟩`, `|0,−⟩` share the energy `ω₁`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::controls::{control_unitary, ControlFrame, ControlPoint};
use crate::error::{Error, Result};
use crate::fock::{
    expm_antihermitian, top_level_population, BasisLabel, FockOperator, FockSpace, Level,
};
use crate::linalg::{self, c, cis, BlockEigen, CMatrix, CVector, C64, ZERO};

/// Eigenvalues closer than this count as one degenerate level.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub nu: f64,
    pub g: f64,
    pub omega1: f64,
}

impl JcParams {
    /// `g = ν`, `ω₁ = −ν/2`.
    pub fn resonant(nu: f64) -> Self {
        JcParams { nu, g: nu, omega1: -nu / 2.0 }
    }

    pub fn new(nu: f64, g: f64, omega1: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParams(format!("trap frequency must be positive, got {nu}")));
        }
        if !g.is_finite() || !omega1.is_finite() {
            return Err(Error::InvalidParams("coupling and ground energy must be finite".into()));
        }
        Ok(JcParams { nu, g, omega1 })
    }

    pub fn is_resonant(&self) -> bool {
        self.g == self.nu
    }

    pub fn require_resonance(&self) -> Result<()> {
        if self.is_resonant() {
            Ok(())
        } else {
            Err(Error::NotResonant { g: self.g, nu: self.nu })
        }
    }

    /// Energy of the degenerate doublet.
    pub fn degenerate_energy(&self) -> f64 {
        self.omega1
    }

    /// `E_{1−} − E_deg = (2 − √2) ν` at resonance.
    pub fn gap(&self) -> f64 {
        self.dressed_energy(1, Branch::Minus) - self.omega1
    }

    /// Closed-form `E_{n±}` (general detuning; reduces to the resonant
    /// formula at `g = ν`).
    pub fn dressed_energy(&self, n: usize, branch: Branch) -> f64 {
        let m = (n + 1) as f64;
        let upper = self.nu * m - self.g / 2.0;
        let lower = self.nu * n as f64 + self.g / 2.0;
        let half = (upper - lower) / 2.0;
        let root = (half * half + self.g * self.g * m).sqrt();
        let mean = (upper + lower) / 2.0 + self.omega1 + self.g / 2.0;
        match branch {
            Branch::Plus => mean + root,
            Branch::Minus => mean - root,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Two ions, ion `k` coupled to mode `k`. Both ground levels share `ω₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub ion1: JcParams,
    pub ion2: JcParams,
}

impl PairParams {
    /// `ν₂ = √3 ν₁`, both resonant, common `ω₁ = −ν₁/2`.
    pub fn resonant(nu1: f64) -> Self {
        let omega1 = -nu1 / 2.0;
        let nu2 = 3f64.sqrt() * nu1;
        PairParams {
            ion1: JcParams { nu: nu1, g: nu1, omega1 },
            ion2: JcParams { nu: nu2, g: nu2, omega1 },
        }
    }

    pub fn degenerate_energy(&self) -> f64 {
        self.ion1.omega1 + self.ion2.omega1
    }

    pub fn require_degeneracy(&self) -> Result<()> {
        self.ion1.require_resonance()?;
        self.ion2.require_resonance()?;
        if self.ion1.omega1 != self.ion2.omega1 {
            return Err(Error::InvalidParams(format!(
                "ground levels differ ({} vs {}); the two doublets are not degenerate",
                self.ion1.omega1, self.ion2.omega1
            )));
        }
        Ok(())
    }
}

/// One ion or a pair, matching the one- and two-qubit manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrapModel {
    Single(JcParams),
    Pair(PairParams),
}

impl TrapModel {
    pub fn qubits(&self) -> usize {
        match self {
            TrapModel::Single(_) => 1,
            TrapModel::Pair(_) => 2,
        }
    }

    pub fn degenerate_energy(&self) -> f64 {
        match self {
            TrapModel::Single(p) => p.degenerate_energy(),
            TrapModel::Pair(p) => p.degenerate_energy(),
        }
    }

    /// Smallest gap above the degenerate level.
    pub fn gap(&self) -> f64 {
        match self {
            TrapModel::Single(p) => p.gap(),
            TrapModel::Pair(p) => p.ion1.gap().min(p.ion2.gap()),
        }
    }

    pub fn require_degeneracy(&self) -> Result<()> {
        match self {
            TrapModel::Single(p) => p.require_resonance(),
            TrapModel::Pair(p) => p.require_degeneracy(),
        }
    }

    /// The space this model lives on, at truncation `n_max`.
    pub fn space(&self, n_max: usize) -> Result<FockSpace> {
        match self {
            TrapModel::Single(_) => FockSpace::single_ion(n_max),
            TrapModel::Pair(_) => FockSpace::ion_pair(n_max),
        }
    }

    fn check_space(&self, space: &FockSpace) -> Result<()> {
        let want = self.qubits();
        if space.atoms() != want || space.modes() != want {
            return Err(Error::SpaceMismatch(format!(
                "model needs {want} atom(s) and {want} mode(s), space has {} and {}",
                space.atoms(),
                space.modes()
            )));
        }
        Ok(())
    }

    /// Nonzero entries of the Hamiltonian (both triangles).
    pub fn entries(&self, space: &FockSpace) -> Result<Vec<(usize, usize, C64)>> {
        self.check_space(space)?;
        let mut out = Vec::new();
        match self {
            TrapModel::Single(p) => push_ion(space, p, 0, &mut out)?,
            TrapModel::Pair(p) => {
                push_ion(space, &p.ion1, 0, &mut out)?;
                push_ion(space, &p.ion2, 1, &mut out)?;
            }
        }
        Ok(out)
    }

    pub fn hamiltonian(&self, space: &FockSpace) -> Result<FockOperator> {
        Ok(FockOperator::from_entries(*space, &self.entries(space)?))
    }

    /// Sector-wise eigendecomposition of `H − shift`, for propagation.
    pub fn spectrum(&self, space: &FockSpace, shift: f64) -> Result<BlockEigen> {
        let mut e = self.entries(space)?;
        for k in 0..space.dim() {
            e.push((k, k, c(-shift, 0.0)));
        }
        Ok(BlockEigen::from_entries(space.dim(), &e))
    }
}

/// JC terms of atom `k` with mode `k`.
fn push_ion(space: &FockSpace, p: &JcParams, k: usize, out: &mut Vec<(usize, usize, C64)>) -> Result<()> {
    let offset = p.omega1 + p.g / 2.0;
    for j in 0..space.dim() {
        let label = space.label(j);
        let n = label.photons[k];
        let z = match label.levels[k] {
            Level::Excited => 0.5,
            Level::Ground => -0.5,
        };
        out.push((j, j, c(p.nu * n as f64 + p.g * z + offset, 0.0)));
        if label.levels[k] == Level::Ground && n > 0 {
            let mut up = label;
            up.levels[k] = Level::Excited;
            up.photons[k] = n - 1;
            let i = space.index(&up)?;
            let amp = c(p.g * (n as f64).sqrt(), 0.0);
            out.push((i, j, amp));
            out.push((j, i, amp));
        }
    }
    Ok(())
}

/// `H_JC` on a single-ion space.
pub fn jc_hamiltonian(p: &JcParams, space: &FockSpace) -> Result<FockOperator> {
    TrapModel::Single(*p).hamiltonian(space)
}

/// `H_Tot = H₁ + H₂` on an ion-pair space.
pub fn total_hamiltonian(p: &PairParams, space: &FockSpace) -> Result<FockOperator> {
    TrapModel::Pair(*p).hamiltonian(space)
}

/// Sorted eigenvalues of the dense Hamiltonian.
pub fn spectrum(model: &TrapModel, space: &FockSpace) -> Result<Vec<f64>> {
    let h = model.hamiltonian(space)?;
    Ok(linalg::hermitian_eigen(h.matrix()).0)
}

/// Number of eigenvalues within [`CLUSTER_TOL`] of `energy`.
pub fn multiplicity(eigenvalues: &[f64], energy: f64) -> usize {
    eigenvalues.iter().filter(|e| (*e - energy).abs() <= CLUSTER_TOL).count()
}

/// Distance from `energy` to the next eigenvalue above its cluster.
pub fn gap_above(eigenvalues: &[f64], energy: f64) -> Option<f64> {
    eigenvalues
        .iter()
        .filter(|e| **e > energy + CLUSTER_TOL)
        .map(|e| e - energy)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
}

/// `|n,±⟩ = (|g,n+1⟩ ± |e,n⟩)/√2` on a single-ion space.
pub fn dressed_state(n: usize, branch: Branch, space: &FockSpace) -> Result<CVector> {
    if space.atoms() != 1 || space.modes() != 1 {
        return Err(Error::SpaceMismatch("dressed states need a single-ion space".into()));
    }
    if n + 1 >= space.n_max() {
        return Err(Error::Truncation(format!(
            "|{n},±⟩ needs {} photons, n_max is {}",
            n + 1,
            space.n_max()
        )));
    }
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(space.dim());
    v[space.index(&BasisLabel::single(Level::Ground, n + 1))?] = c(h, 0.0);
    v[space.index(&BasisLabel::single(Level::Excited, n))?] = c(branch.sign() * h, 0.0);
    Ok(v)
}

/// Orthonormal kets of the degenerate level, in logical order.
#[derive(Debug, Clone)]
pub struct LogicalBasis {
    space: FockSpace,
    kets: Vec<CVector>,
    energy: f64,
}

impl LogicalBasis {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn kets(&self) -> &[CVector] {
        &self.kets
    }

    pub fn dim(&self) -> usize {
        self.kets.len()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Kets as the columns of a `space.dim() × k` matrix.
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_columns(&self.kets)
    }

    /// `⟨i|v⟩` for every logical ket.
    pub fn project(&self, v: &CVector) -> CVector {
        CVector::from_iterator(self.kets.len(), self.kets.iter().map(|k| k.dotc(v)))
    }
}

/// Per-ion logical kets `|g,0⟩` (qubit 0) and `|0,−⟩` (qubit 1) as labelled
/// amplitudes.
fn ion_ket(bit: usize) -> Vec<(Level, usize, f64)> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    if bit == 0 {
        alloc::vec![(Level::Ground, 0, 1.0)]
    } else {
        alloc::vec![(Level::Ground, 1, h), (Level::Excited, 0, -h)]
    }
}

/// `{|g,0⟩, |0,−⟩}` for one ion, or `{|00⟩, |01⟩, |10⟩, |11⟩}` for a pair
/// (qubit 1 = ion 1 with mode 1 is the leading digit). Each ket is checked to
/// be an eigenvector at the degenerate energy.
pub fn logical_basis(model: &TrapModel, space: &FockSpace) -> Result<LogicalBasis> {
    model.require_degeneracy()?;
    model.check_space(space)?;
    if space.n_max() < 3 {
        return Err(Error::Truncation("logical kets need at least 3 Fock levels".into()));
    }
    let mut kets = Vec::new();
    match model {
        TrapModel::Single(_) => {
            for bit in 0..2 {
                let mut v = CVector::zeros(space.dim());
                for (level, n, amp) in ion_ket(bit) {
                    v[space.index(&BasisLabel::single(level, n))?] = c(amp, 0.0);
                }
                kets.push(v);
            }
        }
        TrapModel::Pair(_) => {
            for bits in 0..4 {
                let mut v = CVector::zeros(space.dim());
                for (l1, n1, a1) in ion_ket(bits >> 1) {
                    for (l2, n2, a2) in ion_ket(bits & 1) {
                        let label = BasisLabel::new([l1, l2], [n1, n2]);
                        v[space.index(&label)?] = c(a1 * a2, 0.0);
                    }
                }
                kets.push(v);
            }
        }
    }
    let energy = model.degenerate_energy();
    let entries = model.entries(space)?;
    for (k, ket) in kets.iter().enumerate() {
        let mut hv = CVector::zeros(space.dim());
        for &(i, j, z) in &entries {
            hv[i] += z * ket[j];
        }
        let residual = (hv - ket * c(energy, 0.0)).norm();
        if residual > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "logical ket {k} is not an eigenvector (residual {residual:.2e})"
            )));
        }
    }
    Ok(LogicalBasis { space: *space, kets, energy })
}

/// `H(σ) = U(σ) H U(σ)†` together with a truncation estimate.
#[derive(Debug, Clone)]
pub struct IsoSpectral {
    pub hamiltonian: FockOperator,
    /// Largest population of the top two Fock levels among `U(σ)|i⟩`.
    pub leakage: f64,
}

/// Rotated Hamiltonian at `point`. Fails when `U(σ)` pushes the logical kets
/// against the truncation edge beyond `budget`.
pub fn iso_spectral_hamiltonian(
    point: &ControlPoint,
    model: &TrapModel,
    space: &FockSpace,
    budget: f64,
) -> Result<IsoSpectral> {
    let h = model.hamiltonian(space)?;
    let mode_space = space.mode_space();
    let u_mode = control_unitary(point, &mode_space)?;
    let k = space.internal_dim();
    let u = FockOperator::new(*space, CMatrix::identity(k, k).kronecker(u_mode.matrix()))?;
    let rotated = &(&u * &h) * &u.adjoint();
    let frame = ControlFrame::for_space(space)?;
    let basis = logical_basis(model, space)?;
    let mut leakage: f64 = 0.0;
    for ket in basis.kets() {
        let moved = frame.transformed(point, ket)?;
        leakage = leakage.max(top_level_population(space, &moved));
    }
    if leakage > budget {
        return Err(Error::LeakageExceeded { leakage, budget });
    }
    Ok(IsoSpectral { hamiltonian: rotated, leakage })
}

/// `U(φ) = exp[−i(π/4)(σ₊ a e^{−iφ} + σ₋ a† e^{iφ})]` on a single-ion space.
pub fn measurement_pulse(phi: f64, space: &FockSpace) -> Result<FockOperator> {
    if space.atoms() != 1 || space.modes() != 1 {
        return Err(Error::SpaceMismatch("the readout pulse acts on one ion and one mode".into()));
    }
    let mut entries = Vec::new();
    let k = c(0.0, -core::f64::consts::FRAC_PI_4);
    for j in 0..space.dim() {
        let label = space.label(j);
        if label.levels[0] == Level::Ground && label.photons[0] > 0 {
            let n = label.photons[0];
            let up = BasisLabel::single(Level::Excited, n - 1);
            let i = space.index(&up)?;
            let amp = (n as f64).sqrt();
            entries.push((i, j, k * cis(-phi) * amp));
            entries.push((j, i, k * cis(phi) * amp));
        }
    }
    expm_antihermitian(&FockOperator::from_entries(*space, &entries))
}

/// The pulse restricted to `span{|g,1⟩, |e,0⟩}`, in that order.
pub fn pulse_block(phi: f64) -> CMatrix {
    let k = c(0.0, -core::f64::consts::FRAC_PI_4);
    let g = CMatrix::from_row_slice(2, 2, &[ZERO, k * cis(phi), k * cis(-phi), ZERO]);
    linalg::expm_antihermitian_dense(&g)
}

/// Excited population after the pulse acting on `|0,−⟩`, from the 2×2 block.
pub fn excited_after_pulse(phi: f64) -> f64 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let u = pulse_block(phi);
    (u[(1, 0)] * h - u[(1, 1)] * h).norm_sqr()
}

/// Phase `φ*` at which the pulse sends `|0,−⟩` fully to `|e,0⟩`.
///
/// `p_e(φ)` is a first harmonic `A + B cos φ + C sin φ`; three samples fix
/// it and the maximum sits at `atan2(C, B)`.
pub fn readout_phase() -> f64 {
    let (p0, p1, p2) = (
        excited_after_pulse(0.0),
        excited_after_pulse(core::f64::consts::FRAC_PI_2),
        excited_after_pulse(core::f64::consts::PI),
    );
    let a = (p0 + p2) / 2.0;
    let b = (p0 - p2) / 2.0;
    let cc = p1 - a;
    cc.atan2(b)
}

/// Internal populations `(p_g, p_e)` of atom `atom`, tracing out everything else.
pub fn atom_populations(space: &FockSpace, state: &CVector, atom: usize) -> Result<(f64, f64)> {
    if atom >= space.atoms() {
        return Err(Error::NoInternalLevel { atom, atoms: space.atoms() });
    }
    if state.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: state.len() });
    }
    let norm = state.norm_squared();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm: norm.sqrt() });
    }
    let mut pe = 0.0;
    let mut pg = 0.0;
    for (j, z) in state.iter().enumerate() {
        match space.label(j).levels[atom] {
            Level::Ground => pg += z.norm_sqr(),
            Level::Excited => pe += z.norm_sqr(),
        }
    }
    Ok((pg, pe))
}

/// `(p_g, p_e)` of the first atom.
pub fn readout_probabilities(space: &FockSpace, state: &CVector) -> Result<(f64, f64)> {
    atom_populations(space, state, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::OneQubitPoint;

    fn one() -> (TrapModel, FockSpace) {
        (TrapModel::Single(JcParams::resonant(1.0)), FockSpace::single_ion(12).unwrap())
    }

    #[test]
    fn ground_diagonal_element() {
        let (m, s) = one();
        let h = m.hamiltonian(&s).unwrap();
        let g0 = BasisLabel::single(Level::Ground, 0);
        assert!((h.element(&g0, &g0).unwrap().re + 0.5).abs() < 1e-15);
        assert!(h.is_hermitian(1e-15));
    }

    #[test]
    fn closed_form_levels() {
        let p = JcParams::resonant(1.0);
        assert!((p.dressed_energy(1, Branch::Minus) - 0.085_786_437_626_904_9).abs() < 1e-12);
        assert!((p.gap() - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let (m, s) = one();
        let e = spectrum(&m, &s).unwrap();
        assert_eq!(multiplicity(&e, -0.5), 2);
        for n in 0..8 {
            for b in [Branch::Plus, Branch::Minus] {
                let target = p.dressed_energy(n, b);
                assert!(e.iter().any(|x| (x - target).abs() < 1e-10), "n = {n}");
            }
        }
    }

    #[test]
    fn detuning_lifts_degeneracy() {
        let p = JcParams::new(1.0, 0.9, -0.45).unwrap();
        let s = FockSpace::single_ion(20).unwrap();
        let e = spectrum(&TrapModel::Single(p), &s).unwrap();
        assert_eq!(multiplicity(&e, -0.45), 1);
        assert!(logical_basis(&TrapModel::Single(p), &s).is_err());
    }

    #[test]
    fn dressed_states() {
        let (m, s) = one();
        let minus = dressed_state(0, Branch::Minus, &s).unwrap();
        let plus = dressed_state(0, Branch::Plus, &s).unwrap();
        assert!(plus.dotc(&minus).norm() < 1e-15);
        let hv = m.hamiltonian(&s).unwrap().apply(&minus);
        assert!((hv - &minus * c(-0.5, 0.0)).norm() < 1e-12);
        assert!(dressed_state(11, Branch::Plus, &s).is_err());
        let g1 = s.index(&BasisLabel::single(Level::Ground, 1)).unwrap();
        assert!((minus[g1].re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn pair_basis_is_degenerate() {
        let m = TrapModel::Pair(PairParams::resonant(1.0));
        let s = FockSpace::ion_pair(5).unwrap();
        let b = logical_basis(&m, &s).unwrap();
        assert_eq!(b.dim(), 4);
        let g = b.as_matrix();
        assert!(linalg::max_abs(&(g.adjoint() * &g - CMatrix::identity(4, 4))) < 1e-12);
        let mut bad = PairParams::resonant(1.0);
        bad.ion2.omega1 = -0.8;
        assert!(logical_basis(&TrapModel::Pair(bad), &s).is_err());
    }

    #[test]
    fn pair_spectrum_is_minkowski_sum() {
        let pair = PairParams::resonant(1.0);
        let n = 5;
        let e1 = spectrum(&TrapModel::Single(pair.ion1), &FockSpace::single_ion(n).unwrap()).unwrap();
        let e2 = spectrum(&TrapModel::Single(pair.ion2), &FockSpace::single_ion(n).unwrap()).unwrap();
        let mut sums: Vec<f64> = e1.iter().flat_map(|a| e2.iter().map(move |b| a + b)).collect();
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tot = spectrum(&TrapModel::Pair(pair), &FockSpace::ion_pair(n).unwrap()).unwrap();
        for (a, b) in sums.iter().zip(&tot) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn iso_spectral_family() {
        let m = TrapModel::Single(JcParams::resonant(1.0));
        let s = FockSpace::single_ion(100).unwrap();
        let origin = iso_spectral_hamiltonian(&ControlPoint::origin(1), &m, &s, 1e-6).unwrap();
        assert!(linalg::max_abs(&(origin.hamiltonian.matrix() - m.hamiltonian(&s).unwrap().matrix())) < 1e-12);
        let p = OneQubitPoint::new(0.4, 0.0, 0.5, 0.0).into();
        let moved = iso_spectral_hamiltonian(&p, &m, &s, 1e-6).unwrap();
        let e0 = linalg::hermitian_eigen(origin.hamiltonian.matrix()).0;
        let e1 = linalg::hermitian_eigen(moved.hamiltonian.matrix()).0;
        for k in 0..3 {
            assert!((e0[k] - e1[k]).abs() < 1e-6);
        }
        let far = OneQubitPoint::new(0.0, 0.0, 1.5, 0.0).into();
        assert!(matches!(
            iso_spectral_hamiltonian(&far, &m, &FockSpace::single_ion(30).unwrap(), 1e-6),
            Err(Error::LeakageExceeded { .. })
        ));
    }

    #[test]
    fn pulse_and_readout() {
        let s = FockSpace::single_ion(6).unwrap();
        let phi = readout_phase();
        let u = measurement_pulse(phi, &s).unwrap();
        let g0 = s.ket(&BasisLabel::single(Level::Ground, 0)).unwrap();
        assert!((u.apply(&g0) - &g0).norm() < 1e-14);
        let minus = dressed_state(0, Branch::Minus, &s).unwrap();
        let out = u.apply(&minus);
        let e0 = s.index(&BasisLabel::single(Level::Excited, 0)).unwrap();
        assert!((out[e0] + c(1.0, 0.0)).norm() < 1e-12);
        let (pg, pe) = readout_probabilities(&s, &out).unwrap();
        assert!(pg.abs() < 1e-12 && (pe - 1.0).abs() < 1e-12);
        let (pg, pe) = readout_probabilities(&s, &minus).unwrap();
        assert!((pg - 0.5).abs() < 1e-15 && (pe - 0.5).abs() < 1e-15);
        assert!(readout_probabilities(&s, &(minus * c(2.0, 0.0))).is_err());
    }
}
