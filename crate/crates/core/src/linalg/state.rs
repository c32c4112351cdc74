//! Density matrices, column-stacking vectorization and partial traces.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64, ZERO};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

/// A Hermitian, unit-trace, positive semidefinite matrix.
///
/// Constructors that take an arbitrary matrix either validate it
/// ([`DensityMatrix::new`]) or say so in their name. The stepping code keeps
/// states in this type and re-Hermitizes and renormalizes after each step.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        rho.check(HERMITICITY_TOL, TRACE_TOL, PSD_TOL)?;
        Ok(rho)
    }

    /// Wraps a square matrix without checking Hermiticity, trace or positivity.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::InvalidArgument("pure state from a zero vector".into()));
        }
        let d = psi.len();
        let m = ComplexMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() / norm);
        Ok(Self { matrix: m })
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= dim {dim}")));
        }
        let mut psi = vec![ZERO; dim];
        psi[index] = C64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Random full-rank state `G G^dagger / tr(G G^dagger)` with `G` complex Gaussian.
    pub fn random_full_rank<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
        let mut m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        m = m.scale_real(1.0 / tr);
        Self { matrix: m.hermitian_part() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of qubits, when the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Re-Hermitizes and rescales to unit trace. No eigenvalue clipping.
    pub fn renormalize(&mut self) {
        let herm = self.matrix.hermitian_part();
        let tr = herm.trace().re;
        self.matrix = herm.scale_real(1.0 / tr);
    }

    pub fn check(&self, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> Result<()> {
        if !self.matrix.is_finite() {
            return Err(Error::Numerical("density matrix has non-finite entries".into()));
        }
        let herm = self.matrix.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::InvalidState(format!("hermiticity error {herm:e} > {herm_tol:e}")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -psd_tol {
            return Err(Error::InvalidState(format!("eigenvalue {min_ev:e} below -{psd_tol:e}")));
        }
        Ok(())
    }

    /// `a * self + (1 - a) * other`.
    pub fn mix(&self, a: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("mixing dims {} and {}", self.dim(), other.dim())));
        }
        let mut m = self.matrix.scale_real(a);
        m.axpy(C64::new(1.0 - a, 0.0), &other.matrix);
        Ok(Self { matrix: m })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self { matrix: super::matrix::kron(&self.matrix, &other.matrix) }
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unit vector of length `dim`.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// A Haar-random unit vector and a random unit vector orthogonal to it.
pub fn random_orthogonal_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (Vec<C64>, Vec<C64>) {
    assert!(dim >= 2, "orthogonal pair needs dim >= 2");
    let first = random_pure_vector(dim, rng);
    let mut second: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let overlap: C64 = first.iter().zip(&second).map(|(a, b)| a.conj() * b).sum();
    for (s, f) in second.iter_mut().zip(&first) {
        *s -= overlap * f;
    }
    let norm = second.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (first, second.into_iter().map(|z| z / norm).collect())
}

/// Column-stacked vector `|rho>>`, index `col * dim + row`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedState {
    entries: Vec<C64>,
}

impl VectorizedState {
    pub fn from_entries(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn dim2(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }
}

pub fn vectorize_matrix(m: &ComplexMatrix) -> VectorizedState {
    let (rows, cols) = (m.rows(), m.cols());
    let mut entries = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            entries.push(m[(r, c)]);
        }
    }
    VectorizedState { entries }
}

pub fn vectorize(rho: &DensityMatrix) -> VectorizedState {
    vectorize_matrix(rho.matrix())
}

pub fn devectorize_matrix(v: &VectorizedState) -> Result<ComplexMatrix> {
    let n = v.entries.len();
    let d = (n as f64).sqrt().round() as usize;
    if d == 0 || d * d != n {
        return Err(Error::Dimension(format!("vector length {n} is not a perfect square")));
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| v.entries[c * d + r]))
}

/// Inverse of [`vectorize`]. Only the shape is checked.
pub fn devectorize(v: &VectorizedState) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix_unchecked(devectorize_matrix(v)?)
}

/// Reduced state on the subsystems listed in `keep` (ascending order of
/// the kept factors is preserved).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix { matrix: partial_trace_matrix(rho.matrix(), dims, keep)? })
}

pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != m.rows() || !m.is_square() {
        return Err(Error::Dimension(format!(
            "subsystem dims {dims:?} do not match a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one subsystem".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!("invalid keep set {keep:?} for {} subsystems", dims.len())));
    }
    let keep_mask: Vec<bool> = (0..dims.len()).map(|i| kept.contains(&i)).collect();
    let kept_dim: usize = kept.iter().map(|&i| dims[i]).product();

    // Split every full index into (kept index, traced index).
    let split: Vec<(usize, usize)> = (0..total)
        .map(|mut idx| {
            let (mut k, mut t, mut kmul, mut tmul) = (0, 0, 1, 1);
            for s in (0..dims.len()).rev() {
                let digit = idx % dims[s];
                idx /= dims[s];
                if keep_mask[s] {
                    k += digit * kmul;
                    kmul *= dims[s];
                } else {
                    t += digit * tmul;
                    tmul *= dims[s];
                }
            }
            (k, t)
        })
        .collect();

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (i, &(ki, ti)) in split.iter().enumerate() {
        for (j, &(kj, tj)) in split.iter().enumerate() {
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}
