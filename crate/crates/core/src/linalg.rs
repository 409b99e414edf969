//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra` dense matrices of `Complex<f64>`. Hermitian
//! eigenproblems go through [`BlockEigen`], which first splits the matrix
//! into its connected blocks (ladder-operator generators conserve some photon
//! number combination, so the blocks are small) and then diagonalizes each
//! block on its own.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i phi}`
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn anti_hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m + m.adjoint()))
}

/// `max |U U† - I|`
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m * m.adjoint() - CMatrix::identity(n, n)))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Operator 2-norm.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v)).max(0.0).sqrt()
}

/// Distance between two gates in the operator 2-norm.
pub fn gate_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    spectral_norm(&(a - b))
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `exp(G)` for a small anti-Hermitian `G` through the spectrum of `iG`.
pub fn expm_antihermitian_dense(g: &CMatrix) -> CMatrix {
    BlockEigen::from_dense(&(g * I)).exp_minus_i_dense(1.0)
}

/// Principal logarithm of a unitary matrix.
///
/// A normal matrix has a diagonal Schur form, so the logarithm is read off
/// the Schur factors.
pub fn log_unitary(u: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: u.ncols() });
    }
    let schur = nalgebra::linalg::Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            off = off.max(t[(i, j)].norm());
        }
    }
    if off > 1e-8 {
        return Err(Error::Numerical(alloc::format!(
            "matrix is not normal (Schur off-diagonal {off:.3e})"
        )));
    }
    let logd = CMatrix::from_fn(n, n, |i, j| if i == j { I * t[(i, i)].arg() } else { ZERO });
    Ok(&q * logd * q.adjoint())
}

/// Logarithm of a unitary close to the identity by its power series.
/// Used for small-loop holonomies where the branch question never arises.
pub fn log_near_identity(u: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    let x = u - CMatrix::identity(n, n);
    let norm = spectral_norm(&x);
    if norm >= 0.5 {
        return Err(Error::Numerical(alloc::format!(
            "series logarithm needs |U - I| < 0.5, got {norm:.3}"
        )));
    }
    let mut term = x.clone();
    let mut acc = x.clone();
    for k in 2..200 {
        term = &term * &x;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let contrib = &term * c(sign / k as f64, 0.0);
        acc += &contrib;
        if max_abs(&contrib) < 1e-18 {
            break;
        }
    }
    Ok(acc)
}

/// Hermitian matrix split into independent blocks, each diagonalized.
///
/// Blocks are the connected components of the nonzero pattern, so a
/// generator that conserves some quantum number is diagonalized one
/// sector at a time.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    dim: usize,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl BlockEigen {
    /// Build from the nonzero entries of a Hermitian matrix. Entries may be
    /// listed once or twice (both triangles); duplicates are summed.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, C64)]) -> Self {
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(i, j, v) in entries {
            if v.norm() == 0.0 {
                continue;
            }
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
        let mut root_block = vec![usize::MAX; dim];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..dim {
            let r = find(&mut parent, i);
            if root_block[r] == usize::MAX {
                root_block[r] = members.len();
                members.push(Vec::new());
            }
            members[root_block[r]].push(i);
        }
        let mut local = vec![0usize; dim];
        for m in &members {
            for (k, &i) in m.iter().enumerate() {
                local[i] = k;
            }
        }
        let mut mats: Vec<CMatrix> = members
            .iter()
            .map(|m| CMatrix::zeros(m.len(), m.len()))
            .collect();
        for &(i, j, v) in entries {
            if v.norm() == 0.0 {
                continue;
            }
            let b = root_block[find(&mut parent, i)];
            mats[b][(local[i], local[j])] += v;
        }
        let blocks = members
            .into_iter()
            .zip(mats)
            .map(|(indices, m)| {
                if indices.len() == 1 {
                    Block { indices, values: vec![m[(0, 0)].re], vectors: CMatrix::identity(1, 1) }
                } else {
                    // symmetrize against round-off in the inputs
                    let m = (&m + m.adjoint()) * c(0.5, 0.0);
                    let (values, vectors) = hermitian_eigen(&m);
                    Block { indices, values, vectors }
                }
            })
            .collect();
        BlockEigen { dim, blocks }
    }

    pub fn from_dense(h: &CMatrix) -> Self {
        let n = h.nrows();
        let mut entries = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = h[(i, j)];
                if v.norm() != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_entries(n, &entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `v <- exp(-i t H) v` in place.
    pub fn apply_exp_minus_i(&self, t: f64, v: &mut [C64]) {
        self.apply_spectral(v, |lambda| cis(-lambda * t));
    }

    /// `v <- f(H) v` for a scalar function of the eigenvalues.
    pub fn apply_spectral(&self, v: &mut [C64], f: impl Fn(f64) -> C64) {
        debug_assert_eq!(v.len(), self.dim);
        let mut sub = Vec::new();
        let mut coef = Vec::new();
        for b in &self.blocks {
            let n = b.indices.len();
            if n == 1 {
                let i = b.indices[0];
                v[i] *= f(b.values[0]);
                continue;
            }
            sub.clear();
            sub.extend(b.indices.iter().map(|&i| v[i]));
            if sub.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            coef.clear();
            for k in 0..n {
                let mut acc = ZERO;
                for (row, s) in sub.iter().enumerate() {
                    acc += b.vectors[(row, k)].conj() * s;
                }
                coef.push(acc * f(b.values[k]));
            }
            for (row, &i) in b.indices.iter().enumerate() {
                let mut acc = ZERO;
                for (k, cf) in coef.iter().enumerate() {
                    acc += b.vectors[(row, k)] * cf;
                }
                v[i] = acc;
            }
        }
    }

    /// Expectation value `<v|H|v>`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mut total = 0.0;
        for b in &self.blocks {
            for k in 0..b.indices.len() {
                let mut acc = ZERO;
                for (row, &i) in b.indices.iter().enumerate() {
                    acc += b.vectors[(row, k)].conj() * v[i];
                }
                total += b.values[k] * acc.norm_sqr();
            }
        }
        total
    }

    /// Dense `exp(-i t H)`.
    pub fn exp_minus_i_dense(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let n = b.indices.len();
            for (ri, &i) in b.indices.iter().enumerate() {
                for (rj, &j) in b.indices.iter().enumerate() {
                    let mut acc = ZERO;
                    for k in 0..n {
                        acc += b.vectors[(ri, k)] * cis(-b.values[k] * t) * b.vectors[(rj, k)].conj();
                    }
                    out[(i, j)] = acc;
                }
            }
        }
        out
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_antihermitian(n: usize, seed: u64) -> CMatrix {
        // small LCG keeps this module free of extra dev-deps
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        (&m - m.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn block_split_finds_sectors() {
        // two disjoint 2x2 blocks
        let entries = [(0, 2, ONE), (2, 0, ONE), (1, 3, I), (3, 1, -I)];
        let be = BlockEigen::from_entries(4, &entries);
        assert_eq!(be.block_count(), 2);
        let ev = be.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_of_antihermitian_is_unitary() {
        for n in [2usize, 5, 17] {
            let g = random_antihermitian(n, n as u64) * c(30.0, 0.0);
            let u = expm_antihermitian_dense(&g);
            assert!(unitarity_defect(&u) < 1e-12);
        }
    }

    #[test]
    fn logarithm_inverts_exponential() {
        let g = random_antihermitian(4, 9) * c(0.4, 0.0);
        let u = expm_antihermitian_dense(&g);
        let l = log_unitary(&u).unwrap();
        assert!(max_abs(&(l - &g)) < 1e-12);
        let small = random_antihermitian(3, 2) * c(1e-3, 0.0);
        let l = log_near_identity(&expm_antihermitian_dense(&small)).unwrap();
        assert!(max_abs(&(l - small)) < 1e-15);
    }

    #[test]
    fn spectral_norm_of_rotation_difference() {
        let g = CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]);
        let u = expm_antihermitian_dense(&(g * c(0.3, 0.0)));
        let d = gate_distance(&u, &CMatrix::identity(2, 2));
        assert!((d - 2.0 * (0.15f64).sin()).abs() < 1e-14);
    }
}
