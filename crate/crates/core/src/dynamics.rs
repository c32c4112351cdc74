//! Input-driven transverse-field Ising Liouvillian with local amplitude
//! damping, its propagators, and the steady-state/contraction split.
//!
//! Superoperators act on column-stacked density matrices, so a sandwich
//! `A rho B` becomes `(B^T ⊗ A) |rho>>`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::matrix::{kron, ComplexMatrix, C64, I, ONE};
use crate::linalg::pauli::{pauli_site, Axis};
use crate::linalg::state::{devectorize_matrix, vectorize, vectorize_matrix, DensityMatrix, VectorizedState};
use crate::linalg::{matrix_exp, partial_trace};

/// Tolerance handed to [`matrix_exp`] for every propagator.
pub const EXP_TOL: f64 = 1e-12;
/// Second-smallest singular value of `L` must exceed this for a unique steady state.
pub const UNIQUENESS_TOL: f64 = 1e-8;

/// Couplings and field of the driven Ising Hamiltonian
/// `H(s) = sum_{i<j} J_ij X_i X_j + h sum_i Z_i + h (s + 1) sum_i X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingParams {
    n_qubits: usize,
    /// Row-major `n x n`, symmetric with zero diagonal.
    couplings: Vec<f64>,
    field: f64,
    seed: Option<u64>,
}

impl IsingParams {
    pub fn new(n_qubits: usize, couplings: Vec<f64>, field: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("Ising model needs at least one qubit".into()));
        }
        if couplings.len() != n_qubits * n_qubits {
            return Err(Error::Dimension(format!(
                "{} couplings for {n_qubits} qubits",
                couplings.len()
            )));
        }
        if !(field > 0.0) || !field.is_finite() {
            return Err(Error::InvalidArgument(format!("field h = {field} must be positive")));
        }
        for i in 0..n_qubits {
            if couplings[i * n_qubits + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("J[{i}][{i}] must be zero")));
            }
            for j in (i + 1)..n_qubits {
                let (a, b) = (couplings[i * n_qubits + j], couplings[j * n_qubits + i]);
                if a != b {
                    return Err(Error::InvalidArgument(format!("J not symmetric at ({i},{j})")));
                }
                if !(-1.0..=1.0).contains(&a) {
                    return Err(Error::InvalidArgument(format!("J[{i}][{j}] = {a} outside [-1, 1]")));
                }
            }
        }
        Ok(Self { n_qubits, couplings, field, seed: None })
    }

    /// Couplings drawn i.i.d. uniform on `[-1, 1]` from `seed`.
    pub fn sample(n_qubits: usize, field: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut couplings = vec![0.0; n_qubits * n_qubits];
        for i in 0..n_qubits {
            for j in (i + 1)..n_qubits {
                let v = rng.gen_range(-1.0..=1.0);
                couplings[i * n_qubits + j] = v;
                couplings[j * n_qubits + i] = v;
            }
        }
        let mut params = Self::new(n_qubits, couplings, field)?;
        params.seed = Some(seed);
        Ok(params)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n_qubits + j]
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `(H(0), dH/ds)`.
    fn hamiltonian_parts(&self) -> (ComplexMatrix, ComplexMatrix) {
        let n = self.n_qubits;
        let xs: Vec<ComplexMatrix> = (0..n).map(|i| pauli_site(Axis::X, i, n).expect("site < n")).collect();
        let mut x_sum = ComplexMatrix::zeros(self.dim(), self.dim());
        for x in &xs {
            x_sum += x;
        }
        let mut base = x_sum.scale_real(self.field);
        for i in 0..n {
            base.axpy(C64::new(self.field, 0.0), &pauli_site(Axis::Z, i, n).expect("site < n"));
            for j in (i + 1)..n {
                let jij = self.coupling(i, j);
                if jij != 0.0 {
                    base.axpy(C64::new(jij, 0.0), &xs[i].matmul(&xs[j]));
                }
            }
        }
        (base, x_sum.scale_real(self.field))
    }
}

fn check_input(input: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&input) {
        return Err(Error::InputOutOfRange(input));
    }
    Ok(())
}

pub fn build_hamiltonian(params: &IsingParams, input: f64) -> Result<ComplexMatrix> {
    check_input(input)?;
    let (mut h, drive) = params.hamiltonian_parts();
    h.axpy(C64::new(input, 0.0), &drive);
    Ok(h)
}

/// Driven Ising Hamiltonian plus amplitude damping (`sigma-` on every site).
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladSpec {
    pub hamiltonian: IsingParams,
    pub gamma: f64,
}

impl LindbladSpec {
    pub fn new(hamiltonian: IsingParams, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("decay rate gamma = {gamma} must be >= 0")));
        }
        Ok(Self { hamiltonian, gamma })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// A linear map on column-stacked `dim x dim` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator on dim {dim} needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    /// Hilbert-space dimension `d` of the matrices it acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim2(&self) -> usize {
        self.dim * self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = self.matrix.matvec(vectorize_matrix(m).entries());
        devectorize_matrix(&VectorizedState::from_entries(v)).expect("square by construction")
    }

    /// Applies the map; no renormalization.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        assert_eq!(rho.dim(), self.dim, "superoperator/state dimension mismatch");
        let v = self.matrix.matvec(vectorize(rho).entries());
        let m = devectorize_matrix(&VectorizedState::from_entries(v)).expect("square by construction");
        DensityMatrix::from_matrix_unchecked(m).expect("square by construction")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: self.matrix.matmul(&other.matrix) }
    }

    /// Largest entry of `<<I| M`; zero for trace-preserving generators, and
    /// of `<<I| M - <<I|` for trace-preserving maps when `as_map` is set.
    pub fn trace_preservation_error(&self, as_map: bool) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..self.dim2() {
            let mut s: C64 = (0..d).map(|i| self.matrix[(i * d + i, col)]).sum();
            if as_map && col % (d + 1) == 0 {
                s -= ONE;
            }
            worst = worst.max(s.norm());
        }
        worst
    }

    /// Choi matrix `sum_ij |i><j| ⊗ E(|i><j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = j * d + i;
                for k in 0..d {
                    for l in 0..d {
                        c[(i * d + k, j * d + l)] = self.matrix[(l * d + k, col)];
                    }
                }
            }
        }
        c
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.matrix.eigenvalues()
    }
}

/// Sandwich `rho -> a rho b` as a superoperator matrix.
fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), a)
}

/// `-i[H, .]` as a superoperator matrix.
fn commutator_generator(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    let mut m = sandwich(h, &id);
    m.axpy(-ONE, &sandwich(&id, h));
    m.scale(-I)
}

fn dissipator(n_qubits: usize, gamma: f64) -> ComplexMatrix {
    let d = 1 << n_qubits;
    let id = ComplexMatrix::identity(d);
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    if gamma == 0.0 {
        return m;
    }
    for i in 0..n_qubits {
        let lower = pauli_site(Axis::Minus, i, n_qubits).expect("site < n");
        let raise = pauli_site(Axis::Plus, i, n_qubits).expect("site < n");
        let number = raise.matmul(&lower);
        m += &sandwich(&lower, &raise);
        m.axpy(C64::new(-0.5, 0.0), &sandwich(&number, &id));
        m.axpy(C64::new(-0.5, 0.0), &sandwich(&id, &number));
    }
    m.scale_real(gamma)
}

pub fn build_liouvillian(spec: &LindbladSpec, input: f64) -> Result<Superoperator> {
    let h = build_hamiltonian(&spec.hamiltonian, input)?;
    let mut l = commutator_generator(&h);
    l += &dissipator(spec.n_qubits(), spec.gamma);
    Superoperator::from_matrix(spec.dim(), l)
}

/// `L(s) = L(0) + s dL/ds`, precomputed so each step costs one axpy.
#[derive(Clone, Debug)]
pub struct LiouvillianFamily {
    spec: LindbladSpec,
    base: ComplexMatrix,
    drive: ComplexMatrix,
}

impl LiouvillianFamily {
    pub fn new(spec: LindbladSpec) -> Self {
        let (h0, dh) = spec.hamiltonian.hamiltonian_parts();
        let mut base = commutator_generator(&h0);
        base += &dissipator(spec.n_qubits(), spec.gamma);
        let drive = commutator_generator(&dh);
        Self { spec, base, drive }
    }

    pub fn spec(&self) -> &LindbladSpec {
        &self.spec
    }

    pub fn at(&self, input: f64) -> Result<Superoperator> {
        check_input(input)?;
        let mut l = self.base.clone();
        l.axpy(C64::new(input, 0.0), &self.drive);
        Superoperator::from_matrix(self.spec.dim(), l)
    }
}

/// One reservoir time step: `s -> exp(L(s) dt)`.
#[derive(Clone, Debug)]
pub struct StepKernel {
    family: LiouvillianFamily,
    dt: f64,
}

impl StepKernel {
    pub fn new(spec: LindbladSpec, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step dt = {dt} must be positive")));
        }
        Ok(Self { family: LiouvillianFamily::new(spec), dt })
    }

    pub fn spec(&self) -> &LindbladSpec {
        self.family.spec()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn liouvillian(&self, input: f64) -> Result<Superoperator> {
        self.family.at(input)
    }

    pub fn propagator(&self, input: f64) -> Result<Superoperator> {
        propagator(&self.family.at(input)?, self.dt)
    }
}

pub fn propagator(liouvillian: &Superoperator, dt: f64) -> Result<Superoperator> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step dt = {dt} must be positive")));
    }
    let m = matrix_exp(&liouvillian.matrix.scale_real(dt), EXP_TOL)?;
    Superoperator::from_matrix(liouvillian.dim, m)
}

/// Unique stationary state of a Liouvillian, from its null space.
pub fn steady_state(liouvillian: &Superoperator) -> Result<DensityMatrix> {
    let svd = liouvillian.matrix.to_nalgebra().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Numerical("SVD returned no right vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let second = svd.singular_values[order[1]];
    if second <= UNIQUENESS_TOL {
        return Err(Error::EspViolation(format!(
            "stationary subspace is degenerate (second-smallest singular value {second:e})"
        )));
    }
    let null_row = order[0];
    let v: Vec<C64> = (0..v_t.ncols()).map(|c| v_t[(null_row, c)].conj()).collect();
    let m = devectorize_matrix(&VectorizedState::from_entries(v))?;
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Numerical("stationary vector is traceless".into()));
    }
    let mut rho = DensityMatrix::from_matrix_unchecked(m.scale(ONE / tr))?;
    rho.renormalize();
    Ok(rho)
}

/// Which quantity backs [`SpectralSplit::decay_rate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateSource {
    SpectralNorm,
    SpectralRadius,
}

/// `P = S + T` with `S = |rho_ss>><<I| / <<I|rho_ss>>` the projector on the
/// steady state and `T` the contracting remainder.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub steady_state: DensityMatrix,
    pub s_part: Superoperator,
    pub t_part: Superoperator,
    /// Largest singular value of `T`.
    pub t_norm: f64,
    /// Largest eigenvalue modulus of `T`.
    pub spectral_radius: f64,
    /// `-ln(t_norm)` when `t_norm < 1`, otherwise `-ln(spectral_radius)`.
    pub decay_rate: f64,
    pub rate_source: RateSource,
}

pub fn spectral_split(propagator: &Superoperator, steady: &DensityMatrix) -> Result<SpectralSplit> {
    let d = propagator.dim();
    if steady.dim() != d {
        return Err(Error::Dimension(format!("steady state dim {} vs propagator dim {d}", steady.dim())));
    }
    let rho = vectorize(steady);
    let norm = steady.trace();
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for (r, &rv) in rho.entries().iter().enumerate() {
        for i in 0..d {
            // <<I| has ones at the diagonal positions i*d + i.
            s[(r, i * d + i)] = rv / norm;
        }
    }
    let t = propagator.matrix() - &s;
    let t_norm = t.spectral_norm();
    let spectral_radius = t.eigenvalues()?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if spectral_radius >= 1.0 {
        return Err(Error::EspViolation(format!("spectral radius of T is {spectral_radius}")));
    }
    let (decay_rate, rate_source) = if t_norm < 1.0 {
        (-t_norm.ln(), RateSource::SpectralNorm)
    } else {
        (-spectral_radius.ln(), RateSource::SpectralRadius)
    };
    Ok(SpectralSplit {
        steady_state: steady.clone(),
        s_part: Superoperator::from_matrix(d, s)?,
        t_part: Superoperator::from_matrix(d, t)?,
        t_norm,
        spectral_radius,
        decay_rate,
        rate_source,
    })
}

/// Split of the propagator at a single input.
pub fn split_at(spec: &LindbladSpec, dt: f64, input: f64) -> Result<SpectralSplit> {
    let l = build_liouvillian(spec, input)?;
    let p = propagator(&l, dt)?;
    let ss = steady_state(&l)?;
    spectral_split(&p, &ss)
}

/// Worst-case (smallest) decay rate `a` over the input grid.
pub fn decay_rate_bound(spec: &LindbladSpec, dt: f64, input_grid: &[f64]) -> Result<f64> {
    if input_grid.is_empty() {
        return Err(Error::InvalidArgument("decay-rate grid is empty".into()));
    }
    input_grid
        .iter()
        .map(|&s| split_at(spec, dt, s).map(|split| split.decay_rate))
        .try_fold(f64::INFINITY, |acc, r| r.map(|a| acc.min(a)))
}

/// Marginal of a register state on its first `keep` qubits.
pub(crate) fn leading_marginal(rho: &DensityMatrix, keep: usize, total: usize) -> Result<DensityMatrix> {
    partial_trace(rho, &[1 << keep, 1 << (total - keep)], &[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_site_hamiltonian() {
        let h = build_hamiltonian(&IsingParams::new(1, vec![0.0], 1.0).unwrap(), 0.0).unwrap();
        let expected = &Axis::Z.matrix() + &Axis::X.matrix();
        assert_eq!(h, expected);
    }

    #[test]
    fn hamiltonian_rejects_out_of_range_input() {
        let p = IsingParams::sample(2, 1.0, 3).unwrap();
        assert!(matches!(build_hamiltonian(&p, 1.5), Err(Error::InputOutOfRange(_))));
        assert!(matches!(build_hamiltonian(&p, -0.1), Err(Error::InputOutOfRange(_))));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for k in 0..50 {
            let p = IsingParams::sample(3, 1.0, k).unwrap();
            let h = build_hamiltonian(&p, rng.gen_range(0.0..=1.0)).unwrap();
            assert_eq!(h.hermiticity_error(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_derivative_by_finite_difference() {
        let p = IsingParams::sample(3, 0.7, 11).unwrap();
        let eps = 1e-6;
        let h0 = build_hamiltonian(&p, 0.4).unwrap();
        let h1 = build_hamiltonian(&p, 0.4 + eps).unwrap();
        let fd = (&h1 - &h0).scale_real(1.0 / eps);
        let mut expected = ComplexMatrix::zeros(8, 8);
        for i in 0..3 {
            expected.axpy(C64::new(0.7, 0.0), &pauli_site(Axis::X, i, 3).unwrap());
        }
        assert!(fd.max_abs_diff(&expected) < 1e-8);
    }

    #[test]
    fn sampled_couplings_in_range() {
        let p = IsingParams::sample(4, 1.0, 99).unwrap();
        for i in 0..4 {
            assert_eq!(p.coupling(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(p.coupling(i, j), p.coupling(j, i));
                assert!(p.coupling(i, j).abs() <= 1.0);
            }
        }
        assert_eq!(p, IsingParams::sample(4, 1.0, 99).unwrap().clone());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(IsingParams::new(2, vec![0.0, 0.5, 0.4, 0.0], 1.0).is_err());
        assert!(IsingParams::new(2, vec![0.0, 1.5, 1.5, 0.0], 1.0).is_err());
        assert!(IsingParams::new(2, vec![0.0; 4], 0.0).is_err());
        assert!(LindbladSpec::new(IsingParams::sample(2, 1.0, 0).unwrap(), -0.1).is_err());
    }

    #[test]
    fn liouvillian_is_trace_preserving() {
        let spec = LindbladSpec::new(IsingParams::sample(3, 1.0, 4).unwrap(), 0.1).unwrap();
        let l = build_liouvillian(&spec, 0.3).unwrap();
        assert!(l.trace_preservation_error(false) <= 1e-12);
    }

    #[test]
    fn unitary_generator_has_imaginary_spectrum() {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, 5).unwrap(), 0.0).unwrap();
        let l = build_liouvillian(&spec, 0.6).unwrap();
        for ev in l.eigenvalues().unwrap() {
            assert!(ev.re.abs() < 1e-10, "{ev}");
        }
    }

    #[test]
    fn family_matches_direct_build() {
        let spec = LindbladSpec::new(IsingParams::sample(3, 1.0, 6).unwrap(), 0.1).unwrap();
        let fam = LiouvillianFamily::new(spec.clone());
        for s in [0.0, 0.37, 1.0] {
            let direct = build_liouvillian(&spec, s).unwrap();
            assert!(fam.at(s).unwrap().matrix().max_abs_diff(direct.matrix()) < 1e-14);
        }
    }

    #[test]
    fn damping_steady_state_is_lower_z_eigenstate() {
        // H = 0 is not representable (h > 0), so build the pure dissipator directly.
        let l = Superoperator::from_matrix(2, dissipator(1, 0.1)).unwrap();
        let ss = steady_state(&l).unwrap();
        let expected = DensityMatrix::basis(2, 1).unwrap();
        assert!(ss.matrix().max_abs_diff(expected.matrix()) < 1e-12);
    }

    #[test]
    fn unitary_generator_violates_uniqueness() {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, 7).unwrap(), 0.0).unwrap();
        let l = build_liouvillian(&spec, 0.2).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::EspViolation(_))));
    }

    #[test]
    fn steady_state_residual_and_positivity() {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, 8).unwrap(), 0.1).unwrap();
        let l = build_liouvillian(&spec, 0.5).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(l.apply(&ss).matrix().max_abs() <= 1e-9);
        ss.check(1e-12, 1e-12, 1e-10).unwrap();
    }

    #[test]
    fn propagator_small_dt_is_identity() {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, 9).unwrap(), 0.1).unwrap();
        let p = propagator(&build_liouvillian(&spec, 0.5).unwrap(), 1e-12).unwrap();
        assert!(p.matrix().max_abs_diff(&ComplexMatrix::identity(16)) <= 1e-9);
        assert!(propagator(&build_liouvillian(&spec, 0.5).unwrap(), 0.0).is_err());
    }

    #[test]
    fn single_qubit_split_spectrum() {
        // H = 0: the coherences decay as exp(-gamma dt / 2), the population
        // mode as exp(-gamma dt).
        let l = Superoperator::from_matrix(2, dissipator(1, 0.1)).unwrap();
        let p = propagator(&l, 10.0).unwrap();
        let split = spectral_split(&p, &steady_state(&l).unwrap()).unwrap();
        assert!((split.spectral_radius - (-0.5f64).exp()).abs() < 1e-10);
        assert!(split.t_norm < 1.0);
    }

    #[test]
    fn decay_bound_singleton_grid() {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, 12).unwrap(), 0.1).unwrap();
        let single = split_at(&spec, 10.0, 0.3).unwrap().decay_rate;
        assert_eq!(decay_rate_bound(&spec, 10.0, &[0.3]).unwrap(), single);
        assert!(decay_rate_bound(&spec, 10.0, &[]).is_err());
    }
}
