use std::borrow::Cow;
use std::collections::VecDeque;
use std::sync::Arc;

use crate::dynamics::{StepKernel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;

use super::Reservoir;

/// `rho_{k+1} = exp(L(s_{k+1}) dt) [lambda rho_k + (1 - lambda) rho_{k+1-tau_e}]`.
///
/// The delayed state is the one `tau_e` steps before the state being
/// produced, so an input returns to the readout `tau_e` steps after it was
/// injected and `tau_e = 1` is the Markovian update. The history buffer holds
/// `rho_k, rho_{k-1}, …, rho_{k+1-tau_e}` and starts as `tau_e` copies of the
/// initial state.
#[derive(Clone, Debug)]
pub struct ResidualReservoir {
    kernel: Arc<StepKernel>,
    lambda: f64,
    tau_e: usize,
    buffer: VecDeque<DensityMatrix>,
}

impl ResidualReservoir {
    pub fn new(kernel: Arc<StepKernel>, lambda: f64, tau_e: usize, initial: DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")));
        }
        if tau_e == 0 {
            return Err(Error::InvalidArgument("tau_e must be positive".into()));
        }
        if initial.dim() != kernel.spec().dim() {
            return Err(Error::Dimension(format!(
                "initial state dim {} for a {}-qubit reservoir",
                initial.dim(),
                kernel.spec().n_qubits()
            )));
        }
        let buffer = std::iter::repeat_n(initial, tau_e).collect();
        Ok(Self { kernel, lambda, tau_e, buffer })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau_e(&self) -> usize {
        self.tau_e
    }

    /// Current state `rho_k`.
    pub fn state(&self) -> &DensityMatrix {
        &self.buffer[0]
    }

    /// Buffered states, newest first.
    pub fn history(&self) -> impl ExactSizeIterator<Item = &DensityMatrix> {
        self.buffer.iter()
    }

    /// The convex mix that the next propagator acts on.
    pub fn mixed_state(&self) -> Result<DensityMatrix> {
        let newest = &self.buffer[0];
        let delayed = &self.buffer[self.tau_e - 1];
        newest.mix(self.lambda, delayed)
    }
}

impl Reservoir for ResidualReservoir {
    fn kernel(&self) -> &Arc<StepKernel> {
        &self.kernel
    }

    fn advance(&mut self, propagator: &Superoperator) -> Result<()> {
        let mut next = propagator.apply(&self.mixed_state()?);
        next.renormalize();
        self.buffer.pop_back();
        self.buffer.push_front(next);
        Ok(())
    }

    fn reservoir_state(&self) -> Cow<'_, DensityMatrix> {
        Cow::Borrowed(self.state())
    }

    fn full_state(&self) -> &DensityMatrix {
        self.state()
    }
}
