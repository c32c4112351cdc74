use std::borrow::Cow;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::dynamics::{leading_marginal, StepKernel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::local::apply_local_kraus;
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};
use crate::linalg::{swap_gate, Axis, DensityMatrix, LocalSupport};

use super::Reservoir;

/// `N` reservoir qubits (register sites `0..N`), each coupled to an auxiliary
/// qubit (site `N + i`). One step applies the reservoir propagator, the
/// partial swaps `cos(eta) I + i sin(eta) SWAP_i`, then a depolarizing
/// channel of strength `omega` on every auxiliary qubit.
#[derive(Clone, Debug)]
pub struct EmbeddedReservoir {
    kernel: Arc<StepKernel>,
    eta: f64,
    omega: f64,
    joint: DensityMatrix,
    swap_op: ComplexMatrix,
    swap_supports: Vec<LocalSupport>,
    kraus: Vec<ComplexMatrix>,
    aux_supports: Vec<LocalSupport>,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta {eta} outside [0, pi/2)")));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidArgument(format!("omega {omega} outside [0, 1]")));
    }
    Ok(())
}

fn local_partial_swap(eta: f64) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(4).scale_real(eta.cos());
    u.axpy(C64::new(0.0, eta.sin()), &swap_gate());
    u
}

/// Kraus operators `sqrt(1 - 3 omega / 4) I, sqrt(omega / 4) sigma_{x,y,z}`.
pub fn depolarizing_kraus(omega: f64) -> Result<Vec<ComplexMatrix>> {
    check_omega(omega)?;
    let k0 = ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * omega).sqrt());
    let s = (omega / 4.0).sqrt();
    let mut out = vec![k0];
    out.extend([Axis::X, Axis::Y, Axis::Z].map(|a| a.matrix().scale_real(s)));
    Ok(out)
}

/// Dense partial swap between reservoir qubit `site` and its auxiliary in a
/// `2n`-qubit register.
pub fn partial_swap_unitary(eta: f64, site: usize, n: usize) -> Result<ComplexMatrix> {
    check_eta(eta)?;
    if site >= n {
        return Err(Error::InvalidArgument(format!("site {site} out of range for {n} reservoir qubits")));
    }
    let total = 2 * n;
    let dim = 1usize << total;
    let a = 1usize << (total - 1 - site);
    let b = 1usize << (n - 1 - site);
    let swapped = |x: usize| {
        let (ba, bb) = (x & a != 0, x & b != 0);
        if ba == bb {
            x
        } else {
            x ^ a ^ b
        }
    };
    let (c, s) = (eta.cos(), eta.sin());
    Ok(ComplexMatrix::from_fn(dim, dim, |r, col| {
        let mut z = ZERO;
        if r == col {
            z += C64::new(c, 0.0);
        }
        if r == swapped(col) {
            z += C64::new(0.0, s);
        }
        z
    }))
}

/// Depolarizes every auxiliary qubit of a `2n`-qubit joint state.
pub fn depolarize_aux(rho: &DensityMatrix, omega: f64) -> Result<DensityMatrix> {
    let kraus = depolarizing_kraus(omega)?;
    let total = rho
        .n_qubits()
        .filter(|q| q % 2 == 0 && *q > 0)
        .ok_or_else(|| Error::Dimension(format!("dim {} is not an even qubit register", rho.dim())))?;
    let n = total / 2;
    let mut m = rho.matrix().clone();
    for i in 0..n {
        let support = LocalSupport::new(&[n + i], total)?;
        m = apply_local_kraus(&m, &kraus, &support);
    }
    DensityMatrix::from_matrix_unchecked(m)
}

impl EmbeddedReservoir {
    /// Starts from `reservoir_initial ⊗ (I/2)^{⊗N}`.
    pub fn new(kernel: Arc<StepKernel>, eta: f64, omega: f64, reservoir_initial: DensityMatrix) -> Result<Self> {
        check_eta(eta)?;
        check_omega(omega)?;
        let n = kernel.spec().n_qubits();
        if reservoir_initial.dim() != kernel.spec().dim() {
            return Err(Error::Dimension(format!(
                "initial state dim {} for a {n}-qubit reservoir",
                reservoir_initial.dim()
            )));
        }
        let joint = reservoir_initial.tensor(&DensityMatrix::maximally_mixed(1 << n));
        Self::from_joint(kernel, eta, omega, joint)
    }

    /// Starts from an arbitrary joint state on `2N` qubits.
    pub fn from_joint(kernel: Arc<StepKernel>, eta: f64, omega: f64, joint: DensityMatrix) -> Result<Self> {
        check_eta(eta)?;
        let kraus = depolarizing_kraus(omega)?;
        let n = kernel.spec().n_qubits();
        if joint.dim() != 1 << (2 * n) {
            return Err(Error::Dimension(format!("joint state dim {} for {n} reservoir qubits", joint.dim())));
        }
        let swap_supports = (0..n).map(|i| LocalSupport::new(&[i, n + i], 2 * n)).collect::<Result<_>>()?;
        let aux_supports = (0..n).map(|i| LocalSupport::new(&[n + i], 2 * n)).collect::<Result<_>>()?;
        Ok(Self {
            kernel,
            eta,
            omega,
            joint,
            swap_op: local_partial_swap(eta),
            swap_supports,
            kraus,
            aux_supports,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn joint_state(&self) -> &DensityMatrix {
        &self.joint
    }

    pub fn marginal(&self) -> DensityMatrix {
        let n = self.kernel.spec().n_qubits();
        leading_marginal(&self.joint, n, 2 * n).expect("joint register has 2N qubits")
    }

    /// Applies `E ⊗ id_aux` for a reservoir superoperator `E` without forming
    /// the joint superoperator: every auxiliary block of the joint state is
    /// column-stacked into one column of a matrix that `E` multiplies at once.
    fn apply_reservoir_map(&self, e: &Superoperator) -> ComplexMatrix {
        let d = e.dim();
        let src = self.joint.matrix();
        let mut blocks = ComplexMatrix::zeros(d * d, d * d);
        for r in 0..d {
            for a in 0..d {
                for rp in 0..d {
                    for ap in 0..d {
                        blocks[(rp * d + r, a * d + ap)] = src[(r * d + a, rp * d + ap)];
                    }
                }
            }
        }
        let mapped = e.matrix().matmul(&blocks);
        let mut out = ComplexMatrix::zeros(d * d, d * d);
        for r in 0..d {
            for a in 0..d {
                for rp in 0..d {
                    for ap in 0..d {
                        out[(r * d + a, rp * d + ap)] = mapped[(rp * d + r, a * d + ap)];
                    }
                }
            }
        }
        out
    }
}

impl Reservoir for EmbeddedReservoir {
    fn kernel(&self) -> &Arc<StepKernel> {
        &self.kernel
    }

    fn advance(&mut self, propagator: &Superoperator) -> Result<()> {
        let mut m = self.apply_reservoir_map(propagator);
        for support in &self.swap_supports {
            m = support.conjugate(&m, &self.swap_op);
        }
        for support in &self.aux_supports {
            m = apply_local_kraus(&m, &self.kraus, support);
        }
        self.joint = DensityMatrix::from_matrix_unchecked(m)?;
        self.joint.renormalize();
        Ok(())
    }

    fn reservoir_state(&self) -> Cow<'_, DensityMatrix> {
        Cow::Owned(self.marginal())
    }

    fn full_state(&self) -> &DensityMatrix {
        &self.joint
    }
}
