//! Truncated bosonic Fock spaces with optional two-level atoms attached.
//!
//! Basis ordering is fixed for the whole crate: atom 1, atom 2, mode 1,
//! mode 2, slowest to fastest. Within an atom the ground level `g` has
//! index 0 and the excited level `e` index 1. A basis index is therefore
//!
//! ```text
//! ((l1 * 2 + l2) * n_max + n1) * n_max + n2
//! ```
//!
//! with absent factors dropped. Because the modes are the fastest indices,
//! a full-space vector is a run of contiguous mode-space chunks, one per
//! internal configuration.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, BlockEigen, CMatrix, CVector, C64, I, ONE, ZERO};

/// Internal level of one two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    fn digit(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_max: usize,
    modes: usize,
    atoms: usize,
}

/// Quantum numbers of one basis state. Unused slots are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisLabel {
    pub levels: [Level; 2],
    pub photons: [usize; 2],
}

impl BasisLabel {
    pub fn new(levels: [Level; 2], photons: [usize; 2]) -> Self {
        BasisLabel { levels, photons }
    }

    /// One atom, one mode.
    pub fn single(level: Level, n: usize) -> Self {
        BasisLabel { levels: [level, Level::Ground], photons: [n, 0] }
    }
}

impl FockSpace {
    /// `n_max` levels per mode (|0>..|n_max-1>), 1 or 2 modes, 0..=2 atoms.
    pub fn new(n_max: usize, modes: usize, atoms: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidSpace(format!("n_max must be >= 2, got {n_max}")));
        }
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidSpace(format!("modes must be 1 or 2, got {modes}")));
        }
        if atoms > 2 {
            return Err(Error::InvalidSpace(format!("at most two atoms, got {atoms}")));
        }
        Ok(FockSpace { n_max, modes, atoms })
    }

    /// A bare oscillator.
    pub fn oscillator(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1, 0)
    }

    /// One ion: a two-level atom and its vibrational mode.
    pub fn single_ion(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1, 1)
    }

    /// Two ions and two collective modes.
    pub fn ion_pair(n_max: usize) -> Result<Self> {
        Self::new(n_max, 2, 2)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn internal_dim(&self) -> usize {
        1 << self.atoms
    }

    pub fn mode_dim(&self) -> usize {
        self.n_max.pow(self.modes as u32)
    }

    pub fn dim(&self) -> usize {
        self.internal_dim() * self.mode_dim()
    }

    /// The same modes without any atoms.
    pub fn mode_space(&self) -> FockSpace {
        FockSpace { atoms: 0, ..*self }
    }

    pub fn index(&self, label: &BasisLabel) -> Result<usize> {
        let mut idx = 0usize;
        for a in 0..self.atoms {
            idx = idx * 2 + label.levels[a].digit();
        }
        for m in 0..self.modes {
            let n = label.photons[m];
            if n >= self.n_max {
                return Err(Error::Truncation(format!(
                    "photon number {n} not representable with n_max = {}",
                    self.n_max
                )));
            }
            idx = idx * self.n_max + n;
        }
        Ok(idx)
    }

    pub fn label(&self, mut index: usize) -> BasisLabel {
        let mut photons = [0usize; 2];
        for m in (0..self.modes).rev() {
            photons[m] = index % self.n_max;
            index /= self.n_max;
        }
        let mut levels = [Level::Ground; 2];
        for a in (0..self.atoms).rev() {
            levels[a] = if index % 2 == 1 { Level::Excited } else { Level::Ground };
            index /= 2;
        }
        BasisLabel { levels, photons }
    }

    /// Unit vector of a basis state.
    pub fn ket(&self, label: &BasisLabel) -> Result<CVector> {
        let mut v = CVector::zeros(self.dim());
        v[self.index(label)?] = ONE;
        Ok(v)
    }
}

/// Dense operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: CMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: matrix.nrows() });
        }
        Ok(FockOperator { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        let d = space.dim();
        FockOperator { space, matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(space: FockSpace) -> Self {
        let d = space.dim();
        FockOperator { space, matrix: CMatrix::zeros(d, d) }
    }

    pub(crate) fn from_entries(space: FockSpace, entries: &[(usize, usize, C64)]) -> Self {
        let mut op = Self::zeros(space);
        for &(i, j, v) in entries {
            op.matrix[(i, j)] += v;
        }
        op
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, z: C64) -> Self {
        FockOperator { space: self.space, matrix: &self.matrix * z }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> Result<C64> {
        Ok(self.matrix[(self.space.index(row)?, self.space.index(col)?)])
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.checked_mul(other)?.checked_sub(&other.checked_mul(self)?)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(FockOperator { space: self.space, matrix: &self.matrix * &other.matrix })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(FockOperator { space: self.space, matrix: &self.matrix + &other.matrix })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(FockOperator { space: self.space, matrix: &self.matrix - &other.matrix })
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space, other.space)));
        }
        Ok(())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn anti_hermiticity_defect(&self) -> f64 {
        linalg::anti_hermiticity_defect(&self.matrix)
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    /// Panics on mismatched spaces; use [`FockOperator::checked_mul`] otherwise.
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.checked_mul(rhs).expect("operator spaces differ")
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.checked_add(rhs).expect("operator spaces differ")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.checked_sub(rhs).expect("operator spaces differ")
    }
}

fn check_mode(space: &FockSpace, mode: usize) -> Result<()> {
    if mode >= space.modes {
        return Err(Error::InvalidMode { mode, modes: space.modes });
    }
    Ok(())
}

/// Sparse entries of `a_mode`, embedded by the identity on every other factor.
pub(crate) fn annihilation_entries(space: &FockSpace, mode: usize) -> Result<Vec<(usize, usize, C64)>> {
    check_mode(space, mode)?;
    let mut out = Vec::new();
    for j in 0..space.dim() {
        let mut label = space.label(j);
        let n = label.photons[mode];
        if n == 0 {
            continue;
        }
        label.photons[mode] = n - 1;
        out.push((space.index(&label)?, j, c((n as f64).sqrt(), 0.0)));
    }
    Ok(out)
}

/// Sparse entries of a product of ladder operators, `ops` applied right to left
/// (`ops[last]` acts first). Each entry is `(mode, raise)`.
pub(crate) fn ladder_product_entries(
    space: &FockSpace,
    ops: &[(usize, bool)],
    coefficient: C64,
) -> Result<Vec<(usize, usize, C64)>> {
    for &(m, _) in ops {
        check_mode(space, m)?;
    }
    let mut out = Vec::new();
    'cols: for j in 0..space.dim() {
        let mut label = space.label(j);
        let mut amp = coefficient;
        for &(m, raise) in ops.iter().rev() {
            let n = label.photons[m];
            if raise {
                if n + 1 >= space.n_max {
                    continue 'cols;
                }
                amp *= ((n + 1) as f64).sqrt();
                label.photons[m] = n + 1;
            } else {
                if n == 0 {
                    continue 'cols;
                }
                amp *= (n as f64).sqrt();
                label.photons[m] = n - 1;
            }
        }
        out.push((space.index(&label)?, j, amp));
    }
    Ok(out)
}

/// Annihilation operator `a` of one mode: `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    Ok(FockOperator::from_entries(*space, &annihilation_entries(space, mode)?))
}

/// Creation operator `a†` of one mode (truncated: `a†|n_max-1> = 0`).
pub fn creation(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    Ok(annihilation(space, mode)?.adjoint())
}

/// Number operator `a†a` of one mode, exact on the truncated space.
pub fn number(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    check_mode(space, mode)?;
    let entries: Vec<_> = (0..space.dim())
        .map(|j| (j, j, c(space.label(j).photons[mode] as f64, 0.0)))
        .collect();
    Ok(FockOperator::from_entries(*space, &entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    /// `|e><g|`
    Plus,
    /// `|g><e|`
    Minus,
    /// `|e><e| - |g><g|`
    Z,
}

pub(crate) fn pauli_entries(space: &FockSpace, which: Pauli, atom: usize) -> Result<Vec<(usize, usize, C64)>> {
    if atom >= space.atoms {
        return Err(Error::NoInternalLevel { atom, atoms: space.atoms });
    }
    let mut out = Vec::new();
    for j in 0..space.dim() {
        let mut label = space.label(j);
        let level = label.levels[atom];
        match (which, level) {
            (Pauli::Z, Level::Excited) => out.push((j, j, ONE)),
            (Pauli::Z, Level::Ground) => out.push((j, j, -ONE)),
            (Pauli::Plus, Level::Ground) => {
                label.levels[atom] = Level::Excited;
                out.push((space.index(&label)?, j, ONE));
            }
            (Pauli::Minus, Level::Excited) => {
                label.levels[atom] = Level::Ground;
                out.push((space.index(&label)?, j, ONE));
            }
            _ => {}
        }
    }
    Ok(out)
}

/// `σ₊`, `σ₋` or `σ_z` of one atom, identity elsewhere.
pub fn pauli(space: &FockSpace, which: Pauli, atom: usize) -> Result<FockOperator> {
    Ok(FockOperator::from_entries(*space, &pauli_entries(space, which, atom)?))
}

/// Tolerance for accepting a generator as anti-Hermitian.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-10;

/// `exp(G)` for anti-Hermitian `G`, through the spectrum of the Hermitian `iG`.
/// The result is unitary to round-off whatever the norm of `G`.
pub fn expm_antihermitian(g: &FockOperator) -> Result<FockOperator> {
    let defect = g.anti_hermiticity_defect();
    if defect > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian { defect });
    }
    let h = g.matrix() * I;
    let spectrum = BlockEigen::from_dense(&h);
    Ok(FockOperator { space: g.space, matrix: spectrum.exp_minus_i_dense(1.0) })
}

/// Kronecker product, reordered into the crate's basis convention: the atoms
/// of `a` come before those of `b`, likewise the modes.
pub fn tensor(a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
    let (sa, sb) = (a.space, b.space);
    if sa.n_max != sb.n_max {
        return Err(Error::SpaceMismatch(format!(
            "truncations differ ({} vs {})",
            sa.n_max, sb.n_max
        )));
    }
    let space = FockSpace::new(sa.n_max, sa.modes + sb.modes, sa.atoms + sb.atoms)
        .map_err(|e| Error::SpaceMismatch(format!("{e}")))?;
    let combine = |la: &BasisLabel, lb: &BasisLabel| -> BasisLabel {
        let mut levels = [Level::Ground; 2];
        let mut photons = [0usize; 2];
        levels[..sa.atoms].copy_from_slice(&la.levels[..sa.atoms]);
        levels[sa.atoms..sa.atoms + sb.atoms].copy_from_slice(&lb.levels[..sb.atoms]);
        photons[..sa.modes].copy_from_slice(&la.photons[..sa.modes]);
        photons[sa.modes..sa.modes + sb.modes].copy_from_slice(&lb.photons[..sb.modes]);
        BasisLabel { levels, photons }
    };
    let index_map: Vec<Vec<usize>> = (0..sa.dim())
        .map(|ia| {
            let la = sa.label(ia);
            (0..sb.dim())
                .map(|ib| space.index(&combine(&la, &sb.label(ib))).expect("labels are in range"))
                .collect()
        })
        .collect();
    let mut out = CMatrix::zeros(space.dim(), space.dim());
    for ia in 0..sa.dim() {
        for ja in 0..sa.dim() {
            let x = a.matrix[(ia, ja)];
            if x == ZERO {
                continue;
            }
            for ib in 0..sb.dim() {
                for jb in 0..sb.dim() {
                    let y = b.matrix[(ib, jb)];
                    if y != ZERO {
                        out[(index_map[ia][ib], index_map[ja][jb])] = x * y;
                    }
                }
            }
        }
    }
    FockOperator::new(space, out)
}

/// Population in the top two Fock levels of any mode. A state that is well
/// represented by the truncation keeps this near zero.
pub fn top_level_population(space: &FockSpace, state: &CVector) -> f64 {
    let cutoff = space.n_max.saturating_sub(2);
    state
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let l = space.label(*i);
            (0..space.modes).any(|m| l.photons[m] >= cutoff)
        })
        .map(|(_, z)| z.norm_sqr())
        .sum()
}
